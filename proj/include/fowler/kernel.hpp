#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fowler/fem_space.hpp"
#include "fowler/mesh.hpp"
#include "fowler/quadrature.hpp"

namespace fowler {

using complexd = std::complex<double>;

// Configuration of the singular kernel psi(xi) = xi^{-alpha} on (0, truncation].
struct KernelConfig {
  double exponent = 1.0 / 3.0;  // alpha in (0,1)
  double truncation = 1.0;      // upper limit of the kernel integral
  double split_r = 0.25;        // splitting radius for the I1/I2 decomposition
  bool enabled = true;          // disabled => the nonlocal operator is zero

  void validate() const {
    if (!(exponent > 0.0 && exponent < 1.0)) throw std::invalid_argument("kernel: exponent must be in (0,1)");
    if (!(truncation > 0.0)) throw std::invalid_argument("kernel: truncation must be positive");
    if (!(split_r > 0.0)) throw std::invalid_argument("kernel: split_r must be positive");
  }
};

inline KernelConfig default_kernel(double L) {
  KernelConfig cfg;
  cfg.truncation = L;
  cfg.split_r = 0.25 * L;
  return cfg;
}

// Closed-form moment: integral of xi^{p-alpha} over [a, b].
inline double kernel_moment(double a, double b, int p, double alpha) {
  if (a < 0.0) throw std::invalid_argument("kernel_moment: lower limit must be >= 0");
  if (!(b > a)) throw std::invalid_argument("kernel_moment: need b > a");
  if (p < 0) throw std::invalid_argument("kernel_moment: power must be >= 0");
  const double q = p - alpha + 1.0;
  return (std::pow(b, q) - (a == 0.0 ? 0.0 : std::pow(a, q))) / q;
}

// integral_0^b e^{-iu} u^{-alpha} du.
// [0, min(b,1)]: singularity-subtracted, geometric panels for the regular part.
// [1, b]: panel-wise Gauss-Legendre.
inline complexd incomplete_oscillatory(double b, double alpha) {
  if (b < 0.0) throw std::invalid_argument("incomplete_oscillatory: b must be >= 0");
  if (b == 0.0) return {0.0, 0.0};
  const double c = std::min(b, 1.0);
  // closed-form moment of the subtracted constant e^{-i*0} = 1
  complexd result(std::pow(c, 1.0 - alpha) / (1.0 - alpha), 0.0);
  // regular remainder u^{-alpha} (e^{-iu} - 1), geometric panels toward 0
  double hi = c;
  for (int k = 0; k < 60 && hi > 1e-300; ++k) {
    const double lo = (k == 59) ? 0.0 : hi * 0.5;
    const GaussRule& rule = gauss_rule(12);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    complexd sum(0.0, 0.0);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double u = mid + half * rule.points[q];
      if (u <= 0.0) continue;
      const complexd osc(std::cos(u) - 1.0, -std::sin(u));
      sum += rule.weights[q] * std::pow(u, -alpha) * osc;
    }
    result += half * sum;
    hi = lo;
    if (hi < c * 1e-18) break;
  }
  if (b > 1.0) {
    const int panels = static_cast<int>(std::ceil((b - 1.0) / 2.0));
    for (int p = 0; p < panels; ++p) {
      const double lo = 1.0 + (b - 1.0) * p / panels;
      const double up = 1.0 + (b - 1.0) * (p + 1) / panels;
      const GaussRule& rule = gauss_rule(16);
      const double mid = 0.5 * (lo + up), half = 0.5 * (up - lo);
      complexd sum(0.0, 0.0);
      for (size_t q = 0; q < rule.points.size(); ++q) {
        const double u = mid + half * rule.points[q];
        sum += rule.weights[q] * std::pow(u, -alpha) * complexd(std::cos(u), -std::sin(u));
      }
      result += half * sum;
    }
  }
  return result;
}

// Asymptotic tail integral_b^infty e^{-iu} u^{-alpha} du by repeated
// integration by parts; accurate for large b.
inline complexd oscillatory_tail(double b, double alpha, int terms = 4) {
  const complexd i(0.0, 1.0);
  const complexd phase(std::cos(b), -std::sin(b));
  complexd sum(0.0, 0.0);
  complexd coeff(1.0, 0.0);
  double power = alpha;
  for (int k = 0; k < terms; ++k) {
    // T(a) = -i e^{-ib} b^{-a} + i a T(a+1)
    sum += coeff * (-i) * phase * std::pow(b, -power);
    coeff *= i * power;
    power += 1.0;
  }
  return sum;
}

// Limit of incomplete_oscillatory as b -> infinity: Gamma(1-alpha) e^{-i pi (1-alpha)/2}.
inline complexd oscillatory_limit(double alpha) {
  const double g = std::tgamma(1.0 - alpha);
  const double ph = 0.5 * M_PI * (1.0 - alpha);
  return {g * std::cos(ph), -g * std::sin(ph)};
}

// Symbol s_J(n) with J[e^{i pi n x / L}] = s_J(n) e^{i pi n x / L}:
//   s_J(n) = (i pi n / L) * integral_0^T xi^{-alpha} e^{-i pi n xi / L} dxi.
inline complexd fourier_symbol(int n, double L, const KernelConfig& cfg) {
  if (!cfg.enabled || n == 0) return {0.0, 0.0};
  const double k = M_PI * std::abs(n) / L;
  complexd integral = std::pow(k, cfg.exponent - 1.0) * incomplete_oscillatory(k * cfg.truncation, cfg.exponent);
  if (n < 0) integral = std::conj(integral);
  return complexd(0.0, M_PI * n / L) * integral;
}

// Per-mode dissipation rate of the linearized evolution
//   d/dt c_n = [-eps (pi n/L)^2 - (i pi n/L) s_J(n)] c_n.
inline double mode_dissipation(int n, double L, const KernelConfig& cfg, double eps) {
  const double k = M_PI * n / L;
  const complexd drift = complexd(0.0, k) * fourier_symbol(n, L, cfg);
  return eps * k * k + drift.real();
}

// w0 = max(0, -min_n dissipation(n)); 0 when every mode is dissipative.
inline double growth_constant_w0(double L, int n_max, const KernelConfig& cfg, double eps = 1.0) {
  if (n_max < 1) throw std::invalid_argument("growth_constant_w0: n_max must be >= 1");
  double mn = 0.0;  // n = 0 contributes zero
  for (int n = 1; n <= n_max; ++n) {
    mn = std::min(mn, mode_dissipation(n, L, cfg, eps));
    mn = std::min(mn, mode_dissipation(-n, L, cfg, eps));
  }
  return std::max(0.0, -mn);
}

// Mode with the most negative dissipation (0 if all are dissipative).
inline int most_unstable_mode(double L, int n_max, const KernelConfig& cfg, double eps = 1.0) {
  double mn = 0.0;
  int arg = 0;
  for (int n = 1; n <= n_max; ++n) {
    const double d = mode_dissipation(n, L, cfg, eps);
    if (d < mn) { mn = d; arg = n; }
  }
  return arg;
}

struct SymbolTable {
  double L = 1.0;
  int n_max = 0;
  std::vector<complexd> s_J;  // index n = 0..n_max; s_J(-n) = conj(s_J(n))
  std::vector<complexd> s_I;  // symbol of I = J o d/dx
  double w0 = 0.0;

  complexd symbol_J(int n) const {
    const int a = std::abs(n);
    if (a > n_max) throw std::out_of_range("SymbolTable: mode beyond n_max");
    return n >= 0 ? s_J[a] : std::conj(s_J[a]);
  }
  complexd symbol_I(int n) const {
    const int a = std::abs(n);
    if (a > n_max) throw std::out_of_range("SymbolTable: mode beyond n_max");
    return n >= 0 ? s_I[a] : std::conj(s_I[a]);
  }
};

inline SymbolTable build_symbol_table(double L, int n_max, const KernelConfig& cfg, double eps = 1.0) {
  cfg.validate();
  SymbolTable tab;
  tab.L = L;
  tab.n_max = n_max;
  tab.s_J.resize(n_max + 1);
  tab.s_I.resize(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    tab.s_J[n] = fourier_symbol(n, L, cfg);
    tab.s_I[n] = complexd(0.0, M_PI * n / L) * tab.s_J[n];
  }
  tab.w0 = growth_constant_w0(L, n_max, cfg, eps);
  return tab;
}

namespace detail {

// Sweep from xi = 0 to xi = truncation, y = x - xi moving leftwards through
// the mesh, calling visit(element, xi_a, xi_b, t_at_xi_a) on each segment on
// which y stays inside one element. t is the local coordinate of y.
template <typename Visit>
void sweep_kernel_segments(const Mesh& mesh, double x, double truncation, Visit&& visit) {
  double xi = 0.0;
  int e = element_left_of(mesh, x);
  // distance from y down to the bottom node of element e
  double yw = wrap_coordinate(mesh, x);
  if (yw <= mesh.nodes.front()) yw += 2.0 * mesh.L;  // treat -L as +L for a leftward sweep
  double depth = yw - mesh.nodes[e];
  while (xi < truncation) {
    const double he = mesh.width(e);
    const double seg = std::min(depth, truncation - xi);
    if (seg > 0.0) visit(e, xi, xi + seg, depth / he);
    xi += seg;
    depth = 0.0;
    e = (e + mesh.num_elements() - 1) % mesh.num_elements();
    depth = mesh.width(e);
  }
}

}  // namespace detail

// J[u_h](x) = integral_0^T xi^{-alpha} u_h'(x - xi) dxi, evaluated exactly
// per mesh segment via closed-form kernel moments.
inline double apply_J_pointwise(const StateVector& u, double x, const KernelConfig& cfg) {
  if (!cfg.enabled) return 0.0;
  cfg.validate();
  const FemSpace& sp = *u.space;
  const double alpha = cfg.exponent;
  double result = 0.0;
  detail::sweep_kernel_segments(sp.mesh, x, cfg.truncation, [&](int e, double xa, double xb, double t_top) {
    const double he = sp.mesh.width(e);
    // u'(x - xi) on this segment as a polynomial in t, t = q - xi/he
    const double q = t_top + xa / he;
    // derivative coefficients in t (degree <= r-2)
    const int deg = sp.r - 2;
    double ct[8] = {0.0};
    for (int k = 0; k < sp.local_nodes(); ++k) {
      const double c = u.coefficients[sp.global_dof(e, k)] / he;
      const auto& dc = sp.shape_deriv_coeffs[k];
      for (size_t p = 0; p < dc.size(); ++p) ct[p] += c * dc[p];
    }
    // expand sum_p ct[p] (q - xi/he)^p into moments of xi
    for (int p = 0; p <= deg; ++p) {
      if (ct[p] == 0.0) continue;
      double binom = 1.0;
      for (int m = 0; m <= p; ++m) {
        // term: C(p,m) q^{p-m} (-1/he)^m xi^m
        const double coef = ct[p] * binom * std::pow(q, p - m) * std::pow(-1.0 / he, m);
        result += coef * kernel_moment(xa, xb, m, alpha);
        binom = binom * (p - m) / (m + 1.0);
      }
    }
  });
  return result;
}

// Row of basis images: out[j] += J[phi_j](x) for every global dof j.
inline void apply_J_basis_row(const FemSpace& sp, double x, const KernelConfig& cfg, Eigen::VectorXd& out) {
  out.setZero(sp.dof_count);
  if (!cfg.enabled) return;
  const double alpha = cfg.exponent;
  detail::sweep_kernel_segments(sp.mesh, x, cfg.truncation, [&](int e, double xa, double xb, double t_top) {
    const double he = sp.mesh.width(e);
    const double q = t_top + xa / he;
    for (int k = 0; k < sp.local_nodes(); ++k) {
      const int j = sp.global_dof(e, k);
      const auto& dc = sp.shape_deriv_coeffs[k];
      double val = 0.0;
      for (size_t p = 0; p < dc.size(); ++p) {
        if (dc[p] == 0.0) continue;
        double binom = 1.0;
        for (size_t m = 0; m <= p; ++m) {
          const double coef = (dc[p] / he) * binom * std::pow(q, static_cast<double>(p - m)) * std::pow(-1.0 / he, static_cast<double>(m));
          val += coef * kernel_moment(xa, xb, static_cast<int>(m), alpha);
          binom = binom * static_cast<double>(p - m) / (m + 1.0);
        }
      }
      out[j] += val;
    }
  });
}

// J applied to a smooth 2L-periodic target via singularity subtraction:
//   integral_0^T xi^{-a}(f'(x-xi) - f'(x)) dxi + f'(x) T^{1-a}/(1-a),
// with geometric panels toward the singular end.
inline double apply_J_continuous(const std::function<double(double)>& fprime, double x, const KernelConfig& cfg) {
  if (!cfg.enabled) return 0.0;
  cfg.validate();
  const double alpha = cfg.exponent;
  const double T = cfg.truncation;
  const double fpx = fprime(x);
  double result = fpx * std::pow(T, 1.0 - alpha) / (1.0 - alpha);
  double hi = T;
  for (int k = 0; k < 48; ++k) {
    const double lo = hi * 0.5;
    result += gauss_integrate(lo, hi, [&](double xi) {
      return std::pow(xi, -alpha) * (fprime(x - xi) - fpx);
    }, 12);
    hi = lo;
    if (hi < T * 1e-14) break;
  }
  return result;
}

struct SplitResult {
  double I1 = 0.0;
  double I2 = 0.0;
  double sum() const { return I1 + I2; }
};

// Kernel decomposition I = I1 + I2 with
//   I1 = integral_0^r xi^{-a} phi''(x-xi) dxi
//   I2 = -a integral_r^T xi^{-a-1} phi'(x-xi) dxi + phi'(x-r) r^{-a}.
inline SplitResult apply_I_split(const std::function<double(double)>& dphi,
                                 const std::function<double(double)>& d2phi,
                                 double x, const KernelConfig& cfg) {
  cfg.validate();
  if (cfg.split_r >= cfg.truncation) throw std::invalid_argument("apply_I_split: split_r must be < truncation");
  const double alpha = cfg.exponent;
  const double r = cfg.split_r;
  const double T = cfg.truncation;
  SplitResult out;
  // I1 with singularity subtraction at xi = 0
  const double d2x = d2phi(x);
  out.I1 = d2x * std::pow(r, 1.0 - alpha) / (1.0 - alpha);
  double hi = r;
  for (int k = 0; k < 48; ++k) {
    const double lo = hi * 0.5;
    out.I1 += gauss_integrate(lo, hi, [&](double xi) {
      return std::pow(xi, -alpha) * (d2phi(x - xi) - d2x);
    }, 12);
    hi = lo;
    if (hi < r * 1e-14) break;
  }
  // On the truncated kernel the integration by parts picks up a boundary
  // term at xi = T (absent in the infinite-line decomposition).
  out.I2 = -alpha * panel_integrate(r, T, [&](double xi) {
    return std::pow(xi, -alpha - 1.0) * dphi(x - xi);
  }, 12, 0.25 * (T - r) + 1e-30) + dphi(x - r) * std::pow(r, -alpha) - dphi(x - T) * std::pow(T, -alpha);
  return out;
}

}  // namespace fowler
