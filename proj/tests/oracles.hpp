#pragma once

// Closed-form references used by the tests. Nothing here calls into the
// library, so a bug in the solver cannot leak into its own oracle.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

// Free Gaussian packet for H = -d^2/dx^2 (hbar = 1, m = 1/2). The initial
// state is (2 pi s^2)^(-1/4) exp(-(x - x0)^2 / (4 s^2) + i k x), so that
// |psi|^2 has standard deviation s.
struct FreeGaussian {
  double x0;
  double sigma;
  double k0;

  double center(double t) const { return x0 + 2.0 * k0 * t; }

  double variance(double t) const { return sigma * sigma + t * t / (sigma * sigma); }

  double density(double x, double t) const {
    const double var = variance(t);
    const double d = x - center(t);
    return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
  }

  double peak_density(double t) const { return density(center(t), t); }

  cplx amplitude(double x, double t) const {
    const cplx alpha(sigma * sigma, t);  // complex width sigma^2 + i t
    const double d = x - center(t);
    const cplx pref = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25) * sigma / std::sqrt(alpha);
    return pref * std::exp(-d * d / (4.0 * alpha) + cplx(0.0, k0 * (x - k0 * t)));
  }

  // Bohmian velocity 2 dS/dx: group velocity plus the spreading term.
  double velocity(double x, double t) const {
    const double s4 = sigma * sigma * sigma * sigma;
    return 2.0 * k0 + (x - center(t)) * t / (s4 + t * t);
  }

  // Bohmian path from x_init: the spreading map of the density.
  double trajectory(double x_init, double t) const {
    return center(t) + (x_init - x0) * std::sqrt(variance(t)) / sigma;
  }

  // Q = -R''/R; at the initial centre it is 1/(2 sigma^2).
  double q_at_center_initial() const { return 1.0 / (2.0 * sigma * sigma); }

  // Probability of the density lying left of a.
  double mass_left_of(double a, double t) const {
    return 0.5 * std::erfc((center(t) - a) / std::sqrt(2.0 * variance(t)));
  }
};

// Dense complex Gaussian elimination with partial pivoting.
inline std::vector<cplx> dense_solve(std::vector<std::vector<cplx>> a, std::vector<cplx> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) == 0.0) throw std::runtime_error("singular");
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const cplx f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<cplx> x(n);
  for (std::size_t i = n; i-- > 0;) {
    cplx s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Observed order from errors on three successively halved resolutions.
inline double order(double e_coarse, double e_mid) { return std::log2(e_coarse / e_mid); }

// Least-squares slope of log2(err) against log2(h).
inline double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log2(h[i]);
    const double y = std::log2(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
