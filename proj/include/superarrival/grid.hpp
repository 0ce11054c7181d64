#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace superarrival {

using Complex = std::complex<double>;

/// Unit system used throughout: hbar = 1 and m = 1/2, so that the kinetic
/// operator -hbar^2/(2m) d^2/dx^2 is exactly -d^2/dx^2.
struct Units {
  static constexpr double hbar = 1.0;
  static constexpr double mass = 0.5;
  static constexpr double kinetic_prefactor = hbar * hbar / (2.0 * mass);
};

/// Uniform 1D lattice on [x_min, x_max] with a fixed time step.
class Grid {
 public:
  /// Throws ConfigError naming the offending field.
  Grid(double x_min, double x_max, std::size_t n_points, double dt);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t n_points() const noexcept { return n_points_; }
  double dt() const noexcept { return dt_; }
  double dx() const noexcept { return dx_; }

  /// Site coordinate, computed from the index (no accumulated rounding).
  double x(std::size_t i) const noexcept {
    return i + 1 == n_points_ ? x_max_ : x_min_ + static_cast<double>(i) * dx_;
  }

  bool contains(double x) const noexcept { return x >= x_min_ && x <= x_max_; }
  bool strictly_inside(double x) const noexcept { return x > x_min_ && x < x_max_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_points_;
  double dt_;
  double dx_;
};

Grid build_grid(double x_min, double x_max, std::size_t n_points, double dt);

/// Complex amplitudes on a grid at time t. Boundary sites are hard walls.
struct WaveFunction {
  Grid grid;
  std::vector<Complex> amplitudes;
  double t = 0.0;

  double norm() const;
};

/// Gaussian packet exp(-(x-x0)^2/(4 sigma^2)) exp(i k0 x); |psi|^2 has
/// standard deviation sigma.
struct GaussianPacketSpec {
  double x0 = -0.3;
  double sigma = 0.05 / 1.4142135623730951;
  double k0 = 150.0;
};

/// Throws ConfigError unless sigma > 0 and the packet centre sits more than
/// 5 sigma from both walls.
void validate(const GaussianPacketSpec& spec, const Grid& grid);

WaveFunction init_gaussian(const Grid& grid, const GaussianPacketSpec& spec);

/// Probability of the continuum Gaussian density lying outside the box.
double gaussian_boundary_tail(const Grid& grid, const GaussianPacketSpec& spec);

/// Trapezoid integral of a nodal density over [a, b] clipped to the grid;
/// non-lattice endpoints use the linear interpolant. Throws ArgumentError if
/// a >= b.
double integrate_density(const Grid& grid, std::span<const double> density, double a, double b);

double probability_in_region(const Grid& grid, std::span<const Complex> amplitudes, double a,
                             double b);
double probability_in_region(const WaveFunction& psi, double a, double b);

std::vector<double> density(std::span<const Complex> amplitudes);

/// Trapezoid norm of nodal amplitudes.
double trapezoid_norm(const Grid& grid, std::span<const Complex> amplitudes);

}  // namespace superarrival
