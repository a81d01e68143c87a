#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "fowler/fem_space.hpp"
#include "fowler/kernel.hpp"

namespace fowler {

namespace detail {

// In-place radix-2 decimation-in-time FFT. sign = -1 forward, +1 inverse
// (inverse leaves the 1/n normalization to the caller).
inline void fft_radix2(std::vector<complexd>& a, int sign) {
  const size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: length must be a power of two");
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
    const complexd wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      complexd w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const complexd u = a[i + k];
        const complexd v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

inline void ifft_normalized(std::vector<complexd>& a) {
  fft_radix2(a, +1);
  const double inv = 1.0 / static_cast<double>(a.size());
  for (complexd& z : a) z *= inv;
}

}  // namespace detail

// Fourier-collocation state on a 2L-periodic grid of size n (power of two).
// modes[k] stores the coefficient of e^{i pi m x / L} with m = k for
// k < n/2 and m = k - n for k >= n/2 (standard FFT layout).
struct SpectralState {
  std::vector<complexd> modes;
  double L = 1.0;
  double time = 0.0;

  int grid_size() const { return static_cast<int>(modes.size()); }
  int mode_of(int k) const {
    const int n = grid_size();
    return k < n / 2 ? k : k - n;
  }
};

struct SpectralConfig {
  int grid_size = 512;
  double dt = 1e-4;
  double t_end = 0.1;
  double eps = 1.0;
  double aliasing_guard = 1e-6;  // max top-third energy fraction tolerated
};

inline SpectralState spectral_initialize(const std::function<double(double)>& u0, double L, int n) {
  if (n < 4 || (n & (n - 1)) != 0) throw std::invalid_argument("spectral: grid size must be a power of two >= 4");
  SpectralState st;
  st.L = L;
  st.modes.resize(n);
  for (int j = 0; j < n; ++j) st.modes[j] = u0(-L + 2.0 * L * j / n);
  detail::fft_radix2(st.modes, -1);
  const double inv = 1.0 / n;
  // sampling starts at x = -L, so the raw DFT carries a (-1)^m phase
  for (int k = 0; k < n; ++k) st.modes[k] *= (st.mode_of(k) % 2 == 0) ? inv : -inv;
  return st;
}

inline double spectral_evaluate(const SpectralState& st, double x) {
  complexd s(0.0, 0.0);
  const int n = st.grid_size();
  for (int k = 0; k < n; ++k) {
    const int m = st.mode_of(k);
    s += st.modes[k] * std::exp(complexd(0.0, M_PI * m * x / st.L));
  }
  return s.real();
}

namespace detail {

// Pseudo-spectral evaluation of -(u^2/2)_x with zero padding to twice the
// grid, which removes quadratic aliasing completely.
inline std::vector<complexd> nonlinear_rhs(const std::vector<complexd>& modes, double L) {
  const int n = static_cast<int>(modes.size());
  const int np = 2 * n;
  std::vector<complexd> pad(np, complexd(0.0, 0.0));
  for (int k = 0; k < n / 2; ++k) pad[k] = modes[k];
  for (int k = n / 2; k < n; ++k) pad[np - n + k] = modes[k];
  fft_radix2(pad, +1);  // unnormalized: coefficients to samples
  for (complexd& z : pad) z = 0.5 * z * z;
  fft_radix2(pad, -1);
  const double inv = 1.0 / np;
  std::vector<complexd> out(n);
  for (int k = 0; k < n / 2; ++k) {
    const double wave = M_PI * k / L;
    out[k] = complexd(0.0, -wave) * pad[k] * inv;
  }
  for (int k = n / 2; k < n; ++k) {
    const double wave = M_PI * (k - n) / L;
    out[k] = complexd(0.0, -wave) * pad[np - n + k] * inv;
  }
  out[n / 2] = complexd(0.0, 0.0);  // unmatched Nyquist mode
  return out;
}

}  // namespace detail

// Fraction of spectral energy carried by the top third of the modes; large
// values mean the grid no longer resolves the solution.
inline double spectral_tail_fraction(const SpectralState& st) {
  double total = 0.0, tail = 0.0;
  const int n = st.grid_size();
  for (int k = 0; k < n; ++k) {
    const double e = std::norm(st.modes[k]);
    total += e;
    if (std::abs(st.mode_of(k)) >= n / 3) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

// Strang splitting: exact linear half step, RK2 (Heun) for the nonlinear
// transport, exact linear half step. The linear factor applies
//   exp(-(eps k^2 + i k s_J(m)) dt/2)  per mode, with k = pi m / L.
inline SpectralState spectral_run(const std::function<double(double)>& u0, const KernelConfig& kernel,
                                  const SpectralConfig& cfg, double L) {
  SpectralState st = spectral_initialize(u0, L, cfg.grid_size);
  const int n = st.grid_size();

  std::vector<complexd> half(n);
  for (int k = 0; k < n; ++k) {
    const int m = st.mode_of(k);
    const double wave = M_PI * m / L;
    const complexd z = complexd(cfg.eps * wave * wave, 0.0) +
                       complexd(0.0, wave) * (kernel.enabled ? fourier_symbol(m, L, kernel) : complexd(0.0, 0.0));
    half[k] = std::exp(-z * (0.5 * cfg.dt));
  }

  const double tiny = 1e-12 * cfg.t_end;
  double full_dt = cfg.dt;
  while (st.time < cfg.t_end - tiny) {
    double dt = std::min(cfg.dt, cfg.t_end - st.time);
    std::vector<complexd>* lin = &half;
    std::vector<complexd> short_half;
    if (dt != full_dt) {
      short_half.resize(n);
      for (int k = 0; k < n; ++k) {
        const int m = st.mode_of(k);
        const double wave = M_PI * m / L;
        const complexd z = complexd(cfg.eps * wave * wave, 0.0) +
                           complexd(0.0, wave) * (kernel.enabled ? fourier_symbol(m, L, kernel) : complexd(0.0, 0.0));
        short_half[k] = std::exp(-z * (0.5 * dt));
      }
      lin = &short_half;
    }

    for (int k = 0; k < n; ++k) st.modes[k] *= (*lin)[k];

    std::vector<complexd> f1 = detail::nonlinear_rhs(st.modes, L);
    std::vector<complexd> mid(n);
    for (int k = 0; k < n; ++k) mid[k] = st.modes[k] + dt * f1[k];
    std::vector<complexd> f2 = detail::nonlinear_rhs(mid, L);
    for (int k = 0; k < n; ++k) st.modes[k] += 0.5 * dt * (f1[k] + f2[k]);

    for (int k = 0; k < n; ++k) st.modes[k] *= (*lin)[k];
    st.time += dt;
  }

  // NaN fails the comparison too, catching integrator breakdown
  if (!(spectral_tail_fraction(st) <= cfg.aliasing_guard))
    throw std::runtime_error("spectral_run: unresolved spectrum, refine the grid");
  return st;
}

inline std::function<double(double)> spectral_as_function(const SpectralState& st) {
  return [st](double x) { return spectral_evaluate(st, x); };
}

}  // namespace fowler
