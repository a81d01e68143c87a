#include <catch2/catch_amalgamated.hpp>

#include "fowler/kernel.hpp"

using namespace fowler;
using Catch::Approx;

namespace {

// adaptive-ish oracle: graded panels with singularity subtraction done by
// substitution xi = s^3 (removes the xi^{-1/3} singularity analytically)
double oracle_J(const std::function<double(double)>& fprime, double x, double T) {
  // integral_0^T xi^{-1/3} f'(x-xi) dxi  with xi = s^3, dxi = 3 s^2 ds
  return panel_integrate(0.0, std::cbrt(T), [&](double s) {
    return 3.0 * s * fprime(x - s * s * s);
  }, 14, 0.01 * std::cbrt(T));
}

}  // namespace

TEST_CASE("kernel moments") {
  const double a13 = 1.0 / 3.0;
  REQUIRE(kernel_moment(0, 1, 0, a13) == Approx(1.5).epsilon(1e-14));
  REQUIRE(kernel_moment(0, 8, 0, a13) == Approx(6.0).epsilon(1e-14));
  REQUIRE(kernel_moment(0.5, 1, 1, a13) == Approx(0.6 * (1.0 - std::pow(0.5, 5.0 / 3.0))).epsilon(1e-14));
  REQUIRE_THROWS_AS(kernel_moment(-0.1, 1, 0, a13), std::invalid_argument);
  REQUIRE_THROWS_AS(kernel_moment(1, 1, 0, a13), std::invalid_argument);
}

TEST_CASE("incomplete oscillatory integral") {
  const double a13 = 1.0 / 3.0;
  REQUIRE(incomplete_oscillatory(0.0, a13) == complexd(0.0, 0.0));

  // cross-check against plain panel quadrature with substitution u = s^{3/2}
  for (double b : {0.7, 3.0, 12.5}) {
    complexd ref(
        panel_integrate(0.0, std::pow(b, 2.0 / 3.0), [](double s) { return 1.5 * std::cos(std::pow(s, 1.5)); }, 14, 0.05),
        panel_integrate(0.0, std::pow(b, 2.0 / 3.0), [](double s) { return -1.5 * std::sin(std::pow(s, 1.5)); }, 14, 0.05));
    complexd got = incomplete_oscillatory(b, a13);
    REQUIRE(std::abs(got - ref) < 1e-9);
  }

  // limits: b -> infinity with tail correction
  const double g23 = std::tgamma(2.0 / 3.0);
  complexd lim = incomplete_oscillatory(1e4, a13) + oscillatory_tail(1e4, a13);
  REQUIRE(lim.real() == Approx(0.5 * g23).margin(1e-8));
  REQUIRE(-lim.imag() == Approx(0.5 * std::sqrt(3.0) * g23).margin(1e-8));
  REQUIRE(std::abs(lim - oscillatory_limit(a13)) < 1e-8);
}

TEST_CASE("fourier symbol") {
  KernelConfig cfg = default_kernel(1.0);
  REQUIRE(fourier_symbol(0, 1.0, cfg) == complexd(0.0, 0.0));
  REQUIRE(std::abs(fourier_symbol(-5, 1.0, cfg) - std::conj(fourier_symbol(5, 1.0, cfg))) < 1e-14);

  // n = 1, L = 1: s = (i pi) integral_0^1 xi^{-1/3} e^{-i pi xi} dxi
  complexd integral(
      panel_integrate(0.0, 1.0, [](double s) { return 3.0 * s * std::cos(M_PI * s * s * s); }, 14, 0.01),
      panel_integrate(0.0, 1.0, [](double s) { return -3.0 * s * std::sin(M_PI * s * s * s); }, 14, 0.01));
  complexd expect = complexd(0.0, M_PI) * integral;
  REQUIRE(std::abs(fourier_symbol(1, 1.0, cfg) - expect) < 1e-10);

  // eigenfunction property: J[e^{i pi n x/L}] = s_J(n) e^{i pi n x/L}, checked
  // through the continuous-target quadrature path at a few points
  const int n = 3;
  const double L = 1.0;
  for (double x : {-0.7, 0.0, 0.31}) {
    double re = apply_J_continuous([&](double y) { return -M_PI * n / L * std::sin(M_PI * n * y / L); }, x, cfg);
    double im = apply_J_continuous([&](double y) { return M_PI * n / L * std::cos(M_PI * n * y / L); }, x, cfg);
    complexd got(re, im);
    complexd expect2 = fourier_symbol(n, L, cfg) * std::exp(complexd(0.0, M_PI * n * x / L));
    REQUIRE(std::abs(got - expect2) < 1e-9);
  }
}

TEST_CASE("growth constant") {
  KernelConfig cfg = default_kernel(1.0);

  KernelConfig off = cfg;
  off.enabled = false;
  REQUIRE(growth_constant_w0(1.0, 128, off) == 0.0);

  // with unit diffusion on L=1 every nonzero mode is dissipative
  REQUIRE(growth_constant_w0(1.0, 512, cfg, 1.0) == 0.0);

  // small viscosity: anti-diffusion wins at intermediate modes
  const double w0 = growth_constant_w0(1.0, 512, cfg, 0.01);
  REQUIRE(w0 > 0.0);
  REQUIRE(growth_constant_w0(1.0, 1024, cfg, 0.01) == Approx(w0).margin(1e-12));
  const int arg = most_unstable_mode(1.0, 512, cfg, 0.01);
  REQUIRE(arg > 0);
  REQUIRE(arg == most_unstable_mode(1.0, 1024, cfg, 0.01));
}

TEST_CASE("symbol table") {
  KernelConfig cfg = default_kernel(1.0);
  SymbolTable tab = build_symbol_table(1.0, 64, cfg);
  REQUIRE(tab.symbol_J(0) == complexd(0.0, 0.0));
  REQUIRE(tab.symbol_I(0) == complexd(0.0, 0.0));
  REQUIRE(std::abs(tab.symbol_J(-7) - std::conj(tab.symbol_J(7))) == 0.0);
  // s_I(n) = (i pi n / L) s_J(n)
  REQUIRE(std::abs(tab.symbol_I(5) - complexd(0.0, 5.0 * M_PI) * tab.symbol_J(5)) < 1e-14);

  // symbol boundedness |s_J(n)| <= C (1+n^2)^{1/6} (order-1/3 operator)
  double cmax = 0.0;
  for (int n = 1; n <= 64; ++n) cmax = std::max(cmax, std::abs(tab.symbol_J(n)) / std::pow(1.0 + n * n, 1.0 / 6.0));
  for (int n = 1; n <= 64; ++n)
    REQUIRE(std::abs(tab.symbol_J(n)) <= cmax * std::pow(1.0 + n * n, 1.0 / 6.0) + 1e-12);
  REQUIRE(cmax < 10.0);
}

TEST_CASE("pointwise J on FEM states") {
  KernelConfig cfg = default_kernel(1.0);
  Mesh m = build_uniform_mesh(1.0, 64);

  for (int r : {2, 3}) {
    auto sp = make_space(m, r);
    StateVector c = interpolate(sp, [](double) { return 3.7; });
    for (double x : {-1.0, -0.33, 0.0, 0.5, 0.99}) REQUIRE(std::abs(apply_J_pointwise(c, x, cfg)) < 1e-13);
  }

  // matches adaptive quadrature of the analytic integrand on a fine mesh
  auto sp = make_space(build_uniform_mesh(1.0, 256), 2);
  StateVector s = interpolate(sp, [](double x) { return std::sin(M_PI * x); });
  const double got = apply_J_pointwise(s, 0.0, cfg);
  const double ref = oracle_J([](double y) { return M_PI * std::cos(M_PI * y); }, 0.0, 1.0);
  REQUIRE(got == Approx(ref).margin(1e-3));

  // disabled kernel
  KernelConfig off = cfg;
  off.enabled = false;
  REQUIRE(apply_J_pointwise(s, 0.3, off) == 0.0);
}

TEST_CASE("pointwise J against continuous-target quadrature") {
  // exact moment path on the interpolant vs singularity-subtracted quadrature
  // on the smooth target; they differ by the interpolation error O(h^2)
  KernelConfig cfg = default_kernel(1.0);
  auto sp = make_space(build_uniform_mesh(1.0, 128), 3);
  auto f = [](double x) { return std::exp(std::sin(M_PI * x)); };
  auto df = [&](double x) { return M_PI * std::cos(M_PI * x) * f(x); };
  StateVector u = interpolate(sp, f);
  for (double x : {-0.9, -0.25, 0.4}) {
    const double moments = apply_J_pointwise(u, x, cfg);
    const double quad = apply_J_continuous(df, x, cfg);
    REQUIRE(moments == Approx(quad).margin(2e-4));
  }
}

TEST_CASE("kernel split I = I1 + I2") {
  KernelConfig cfg = default_kernel(1.0);
  auto phi = [](double x) { return std::sin(M_PI * x); };
  auto dphi = [](double x) { return M_PI * std::cos(M_PI * x); };
  auto d2phi = [](double x) { return -M_PI * M_PI * std::sin(M_PI * x); };

  // constants annihilate
  auto zero = [](double) { return 0.0; };
  SplitResult c = apply_I_split(zero, zero, 0.3, cfg);
  REQUIRE(c.I1 == 0.0);
  REQUIRE(c.I2 == 0.0);

  // sum independent of the splitting radius
  KernelConfig c1 = cfg, c2 = cfg;
  c1.split_r = 0.1;
  c2.split_r = 0.3;
  for (double x : {-0.5, 0.0, 0.7}) {
    SplitResult a = apply_I_split(dphi, d2phi, x, c1);
    SplitResult b = apply_I_split(dphi, d2phi, x, c2);
    REQUIRE(a.sum() == Approx(b.sum()).margin(1e-8));
  }

  // matches direct adaptive quadrature of integral_0^T xi^{-1/3} phi''(x-xi) dxi
  KernelConfig c3 = cfg;
  c3.split_r = 0.25;
  SplitResult s = apply_I_split(dphi, d2phi, 0.0, c3);
  const double direct = oracle_J(d2phi, 0.0, cfg.truncation);
  REQUIRE(s.sum() == Approx(direct).margin(1e-8));
  (void)phi;

  KernelConfig bad = cfg;
  bad.split_r = 2.0;
  REQUIRE_THROWS_AS(apply_I_split(dphi, d2phi, 0.0, bad), std::invalid_argument);
}

TEST_CASE("pointwise/spectral agreement") {
  KernelConfig cfg = default_kernel(1.0);
  const int n = 4;
  auto sp = make_space(build_uniform_mesh(1.0, 256), 2);
  StateVector u = interpolate(sp, [&](double x) { return std::cos(M_PI * n * x); });
  const complexd s = fourier_symbol(n, 1.0, cfg);
  for (double x : {-0.6, 0.1, 0.52}) {
    // J[cos(k x)] = Re[s e^{i k x}]
    const double expect = (s * std::exp(complexd(0.0, M_PI * n * x))).real();
    REQUIRE(apply_J_pointwise(u, x, cfg) == Approx(expect).margin(5e-2 * std::abs(s)));
  }
}
