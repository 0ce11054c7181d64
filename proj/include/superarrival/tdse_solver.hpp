#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "superarrival/grid.hpp"
#include "superarrival/potentials.hpp"
#include "superarrival/tridiagonal.hpp"

namespace superarrival {

/// Recorded history of a propagation. Frame 0 is the initial state.
struct PropagationRecord {
  Grid grid;
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::vector<std::vector<Complex>> frames;
  std::vector<double> potential_heights;
  double norm_drift = 0.0;

  std::size_t size() const noexcept { return frames.size(); }
  /// Index of the frame recorded at `step`, or size() if absent.
  std::size_t frame_of_step(std::size_t step) const;
};

/// Which steps get a frame: every step inside [dense_begin, dense_end),
/// every `record_every`-th step elsewhere, plus step 0 and the final step.
struct RecordPlan {
  std::size_t record_every = 1;
  std::size_t dense_begin = 0;
  std::size_t dense_end = 0;

  bool records(std::size_t step, std::size_t n_steps) const noexcept;
};

/**
 * Cayley-form Crank-Nicolson stepper for H = -d^2/dx^2 + V(x, t) with
 * Dirichlet walls:
 *
 *   (1 + i dt H/2) psi_{n+1} = (1 - i dt H/2) psi_n,
 *
 * V evaluated at the step midpoint. The factorised left-hand side is cached
 * and rebuilt only when the barrier height changes.
 */
class CayleyStepper {
 public:
  CayleyStepper(const Grid& grid, const BarrierSchedule& schedule);

  /// Advances interior amplitudes from t to t + dt in place.
  void advance(std::span<Complex> amplitudes, double t);

 private:
  void refactor(double height);

  Grid grid_;
  BarrierSchedule schedule_;
  std::size_t barrier_first_ = 0;
  std::size_t barrier_last_ = 0;
  double factored_height_ = -1.0;
  ConstantBandFactor factor_;
  std::vector<Complex> work_;
};

WaveFunction step(const WaveFunction& psi, const BarrierSchedule& schedule);

PropagationRecord propagate(const WaveFunction& psi0, const BarrierSchedule& schedule,
                            std::size_t n_steps, std::size_t record_every);
PropagationRecord propagate(const WaveFunction& psi0, const BarrierSchedule& schedule,
                            std::size_t n_steps, const RecordPlan& plan);

}  // namespace superarrival
