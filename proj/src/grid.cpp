#include "superarrival/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "superarrival/errors.hpp"

namespace superarrival {

Grid::Grid(double x_min, double x_max, std::size_t n_points, double dt)
    : x_min_(x_min), x_max_(x_max), n_points_(n_points), dt_(dt), dx_(0.0) {
  if (!std::isfinite(x_min)) throw ConfigError("x_min", "must be finite");
  if (!std::isfinite(x_max)) throw ConfigError("x_max", "must be finite");
  if (!std::isfinite(dt)) throw ConfigError("dt", "must be finite");
  if (x_min >= x_max) throw ConfigError("x_min", "x_min >= x_max");
  if (n_points < 3) throw ConfigError("n_points", "need at least 3 lattice sites");
  if (dt <= 0.0) throw ConfigError("dt", "time step must be positive");
  dx_ = (x_max - x_min) / static_cast<double>(n_points - 1);
  if (!(dx_ > 0.0)) throw ConfigError("n_points", "lattice spacing underflows");
}

Grid build_grid(double x_min, double x_max, std::size_t n_points, double dt) {
  return Grid(x_min, x_max, n_points, dt);
}

double WaveFunction::norm() const { return trapezoid_norm(grid, amplitudes); }

void validate(const GaussianPacketSpec& spec, const Grid& grid) {
  if (!std::isfinite(spec.x0)) throw ConfigError("x0", "must be finite");
  if (!std::isfinite(spec.k0)) throw ConfigError("k0", "must be finite");
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma))
    throw ConfigError("sigma", "must be positive and finite");
  if (std::abs(spec.x0 - grid.x_min()) <= 5.0 * spec.sigma ||
      std::abs(spec.x0 - grid.x_max()) <= 5.0 * spec.sigma)
    throw ConfigError("x0", "packet centre must lie more than 5 sigma inside the box");
}

WaveFunction init_gaussian(const Grid& grid, const GaussianPacketSpec& spec) {
  validate(spec, grid);
  const std::size_t n = grid.n_points();
  WaveFunction psi{grid, std::vector<Complex>(n), 0.0};
  const double inv_four_var = 1.0 / (4.0 * spec.sigma * spec.sigma);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double x = grid.x(i);
    const double u = x - spec.x0;
    psi.amplitudes[i] = std::exp(-u * u * inv_four_var) * std::polar(1.0, spec.k0 * x);
  }
  const double scale = 1.0 / std::sqrt(trapezoid_norm(grid, psi.amplitudes));
  for (auto& a : psi.amplitudes) a *= scale;
  return psi;
}

double gaussian_boundary_tail(const Grid& grid, const GaussianPacketSpec& spec) {
  const double s = std::sqrt(2.0) * spec.sigma;
  return 0.5 * std::erfc((spec.x0 - grid.x_min()) / s) +
         0.5 * std::erfc((grid.x_max() - spec.x0) / s);
}

std::vector<double> density(std::span<const Complex> amplitudes) {
  std::vector<double> rho(amplitudes.size());
  std::transform(amplitudes.begin(), amplitudes.end(), rho.begin(),
                 [](const Complex& a) { return std::norm(a); });
  return rho;
}

double trapezoid_norm(const Grid& grid, std::span<const Complex> amplitudes) {
  const std::size_t n = amplitudes.size();
  double sum = 0.5 * (std::norm(amplitudes.front()) + std::norm(amplitudes.back()));
  for (std::size_t i = 1; i + 1 < n; ++i) sum += std::norm(amplitudes[i]);
  return sum * grid.dx();
}

double integrate_density(const Grid& grid, std::span<const double> rho, double a, double b) {
  if (!(a < b)) throw ArgumentError("probability_in_region: require a < b");
  if (rho.size() != grid.n_points())
    throw ArgumentError("probability_in_region: density length does not match grid");
  const double lo = std::max(a, grid.x_min());
  const double hi = std::min(b, grid.x_max());
  if (!(lo < hi)) return 0.0;

  const double dx = grid.dx();
  const auto last_cell = static_cast<std::ptrdiff_t>(grid.n_points()) - 2;
  auto cell_of = [&](double x) {
    auto c = static_cast<std::ptrdiff_t>(std::floor((x - grid.x_min()) / dx));
    return std::clamp<std::ptrdiff_t>(c, 0, last_cell);
  };
  const std::ptrdiff_t first = cell_of(lo);
  const std::ptrdiff_t last = cell_of(hi);

  double sum = 0.0;
  for (std::ptrdiff_t c = first; c <= last; ++c) {
    const auto i = static_cast<std::size_t>(c);
    const double xl = grid.x(i);
    const double xr = grid.x(i + 1);
    const double s0 = std::max(lo, xl);
    const double s1 = std::min(hi, xr);
    if (!(s1 > s0)) continue;
    if (s0 == xl && s1 == xr) {
      sum += 0.5 * (rho[i] + rho[i + 1]) * (xr - xl);
      continue;
    }
    const double slope = (rho[i + 1] - rho[i]) / (xr - xl);
    const double f0 = rho[i] + slope * (s0 - xl);
    const double f1 = rho[i] + slope * (s1 - xl);
    sum += 0.5 * (f0 + f1) * (s1 - s0);
  }
  return sum;
}

double probability_in_region(const Grid& grid, std::span<const Complex> amplitudes, double a,
                             double b) {
  const auto rho = density(amplitudes);
  return integrate_density(grid, rho, a, b);
}

double probability_in_region(const WaveFunction& psi, double a, double b) {
  return probability_in_region(psi.grid, psi.amplitudes, a, b);
}

}  // namespace superarrival
