#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "superarrival/grid.hpp"
#include "superarrival/observables.hpp"
#include "superarrival/potentials.hpp"
#include "superarrival/tdse_solver.hpp"

namespace superarrival {

inline constexpr double kDefaultNodeFloor = 1e-14;

/// Bohmian velocity v = (hbar/m) Im(psi* psi') / |psi|^2 per site per
/// recorded frame. Sites with |psi|^2 below the node floor are masked
/// (mask = 1) and carry v = 0.
struct VelocityField {
  Grid grid;
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::vector<std::vector<double>> v_frames;
  std::vector<std::vector<std::uint8_t>> node_mask;
};

/// Q = -(hbar^2/2m) R''/R with R = |psi|, masked like VelocityField.
struct QuantumPotentialField {
  Grid grid;
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::vector<std::vector<double>> q_frames;
  std::vector<std::vector<std::uint8_t>> node_mask;
};

/// psi' by fourth-order central differences in the interior, second-order
/// central next to the walls and second-order one-sided on the walls.
void velocity_row(const Grid& grid, std::span<const Complex> psi, double node_floor,
                  std::span<double> v, std::span<std::uint8_t> mask);

void quantum_potential_row(const Grid& grid, std::span<const Complex> psi, double node_floor,
                           std::span<double> q, std::span<std::uint8_t> mask);

/// Cross-check form: (hbar/m) dS/dx from locally unwrapped phase differences
/// (fourth-order stencil). NaN where any stencil site is below the floor or
/// within two sites of a wall.
std::vector<double> phase_gradient_velocity(const Grid& grid, std::span<const Complex> psi,
                                            double node_floor);

/// Sub-cell positions (parabolic refinement) of the local minima of a Q row,
/// restricted to unmasked sites with x < x_upper and |psi|^2 at least
/// `relative_density_floor` times the row's peak density.
std::vector<double> quantum_potential_wells(const Grid& grid, std::span<const Complex> psi,
                                            std::span<const double> q,
                                            std::span<const std::uint8_t> mask, double x_upper,
                                            double relative_density_floor = 1e-3);

/// Picks the leftmost well of the first snapshot and follows it to the
/// nearest well in each later snapshot. Empty if a snapshot has no wells.
std::vector<double> track_leftmost_well(const std::vector<std::vector<double>>& wells);

VelocityField velocity_field(const PropagationRecord& record,
                             double node_floor = kDefaultNodeFloor);
QuantumPotentialField quantum_potential(const PropagationRecord& record,
                                        double node_floor = kDefaultNodeFloor);

struct Trajectory {
  double x_init = 0.0;
  /// Position at each field frame, until the particle halts.
  std::vector<double> x;
  bool node_degenerate = false;
  bool hit_wall = false;

  bool flagged() const noexcept { return node_degenerate || hit_wall; }
};

struct TrajectoryOptions {
  /// Upper bound on RK4 substeps per frame interval.
  std::size_t max_substeps = 256;
  /// Smallest retry step near a node, as a fraction of the frame interval.
  std::size_t min_step_fraction = 16;
};

/// dx/dt = v(x, t) by classical RK4 with bilinear (x, t) interpolation of the
/// field. Throws ArgumentError if x_init is outside the grid.
Trajectory integrate_trajectory(const VelocityField& field, double x_init,
                                const TrajectoryOptions& options = {});

std::vector<Trajectory> integrate_ensemble(const VelocityField& field,
                                           std::span<const double> initial_positions,
                                           const TrajectoryOptions& options = {});

enum class ArrivalSide {
  left,   // first time with x(t) <= detector
  right,  // first time with x(t) >= detector
};

std::optional<double> arrival_time(std::span<const double> times, std::span<const double> path,
                                   double detector, ArrivalSide side = ArrivalSide::left);

enum class SamplingScheme { quantile, random };

std::string_view to_string(SamplingScheme scheme);
SamplingScheme sampling_scheme_from_string(std::string_view name);

struct InitialPositions {
  std::vector<double> positions;
  std::size_t rejected = 0;  // samples outside the grid (trimmed or redrawn)
};

/// Quantile scheme: x_i = x0 + sigma Phi^{-1}((i - 1/2)/N). Random scheme:
/// i.i.d. normal draws from a seeded mt19937_64. Samples outside `grid` are
/// trimmed (quantile) or redrawn (random). Throws ArgumentError if N == 0.
InitialPositions sample_initial_positions(const GaussianPacketSpec& spec, std::size_t n,
                                          SamplingScheme scheme, std::uint64_t seed,
                                          const Grid* grid = nullptr);

struct ParticleBeta {
  std::size_t particle = 0;
  double x_init = 0.0;
  double t_ip = 0.0;
  double t_i = 0.0;
  double beta = 0.0;
};

struct TrajectoryEnsemble {
  std::vector<double> initial_positions;
  std::vector<double> times;
  std::vector<Trajectory> perturbed;
  std::vector<Trajectory> reference;
  std::vector<std::optional<double>> arrival_perturbed;
  std::vector<std::optional<double>> arrival_reference;
  /// Particles whose perturbed arrival lies in [t_d, t_c].
  std::vector<ParticleBeta> betas;
  /// Selected particles without a reference arrival inside the record.
  std::vector<std::size_t> excluded;
  std::size_t flagged = 0;
  /// Unselected particles with both arrivals and beta < 0.
  std::size_t negative_outside_window = 0;
  double beta_mean = std::numeric_limits<double>::quiet_NaN();
  bool all_kept_positive = false;

  std::size_t size() const noexcept { return initial_positions.size(); }
  bool empty() const noexcept { return betas.empty(); }
};

/**
 * Integrates every initial position under both fields and records arrival
 * times at the detector. With a window, keeps exactly the particles whose
 * perturbed arrival t_ip lies in [t_d, t_c]; without one, keeps every particle
 * that arrives in both runs. beta_i = (t_i - t_ip)/t_i, beta_mean is their
 * mean in particle order. Throws ArgumentError if the fields differ in grid
 * or cadence.
 */
TrajectoryEnsemble superarrival_betas(const VelocityField& static_field,
                                      const VelocityField& perturbed_field,
                                      const std::optional<SuperarrivalWindow>& window,
                                      std::span<const double> initial_positions,
                                      double detector_position,
                                      ArrivalSide side = ArrivalSide::left,
                                      const TrajectoryOptions& options = {});

TrajectoryEnsemble superarrival_betas(const VelocityField& static_field,
                                      const VelocityField& perturbed_field,
                                      const SuperarrivalWindow& window,
                                      const GaussianPacketSpec& spec, std::size_t n,
                                      double detector_position);

struct NewtonSample {
  std::size_t frame = 0;
  double t = 0.0;
  double x = 0.0;
  double lhs = 0.0;  // m dv/dt along the path
  double rhs = 0.0;  // -d(V + Q)/dx at the particle
  double residual = 0.0;
  bool skipped = false;
};

/// Newton-form check m dv/dt = -d(V + Q)/dx along a trajectory, normalised by
/// |force| + 1. Samples next to nodes, walls or barrier edges are skipped.
std::vector<NewtonSample> newton_residual(const VelocityField& field,
                                          const QuantumPotentialField& qfield,
                                          const Trajectory& trajectory,
                                          const BarrierSchedule& schedule);

/// True if the initial ordering of positions is preserved at every frame,
/// with neighbours separated by more than 1e-12.
bool ordering_preserved(std::span<const Trajectory> trajectories);

/// Kolmogorov-Smirnov distance between particle positions and the |psi|^2
/// distribution of a frame.
double ks_distance(std::span<const double> positions, const Grid& grid,
                   std::span<const Complex> amplitudes);

struct ContinuityResidual {
  double drho_dt_l2 = 0.0;
  double flux_divergence_l2 = 0.0;
  double residual_l2 = 0.0;
};

/// d(rho)/dt + d(rho v)/dx at an interior frame, time derivative by central
/// frame differences. Throws ArgumentError at the first or last frame.
ContinuityResidual continuity_residual(const PropagationRecord& record, std::size_t frame);

}  // namespace superarrival
