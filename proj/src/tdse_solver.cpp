#include "superarrival/tdse_solver.hpp"

#include <algorithm>
#include <cmath>

#include "superarrival/errors.hpp"

namespace superarrival {

std::size_t PropagationRecord::frame_of_step(std::size_t step) const {
  const auto it = std::lower_bound(steps.begin(), steps.end(), step);
  if (it == steps.end() || *it != step) return frames.size();
  return static_cast<std::size_t>(it - steps.begin());
}

bool RecordPlan::records(std::size_t step, std::size_t n_steps) const noexcept {
  if (step == 0 || step == n_steps) return true;
  if (step >= dense_begin && step < dense_end) return true;
  return record_every > 0 && step % record_every == 0;
}

CayleyStepper::CayleyStepper(const Grid& grid, const BarrierSchedule& schedule)
    : grid_(grid), schedule_(schedule), work_(grid.n_points() - 2) {
  validate(schedule_, grid_);
  std::tie(barrier_first_, barrier_last_) = barrier_sites(schedule_, grid_);
}

void CayleyStepper::refactor(double height) {
  const std::size_t interior = grid_.n_points() - 2;
  const double dt = grid_.dt();
  const double inv_dx2 = Units::kinetic_prefactor / (grid_.dx() * grid_.dx());
  const Complex half_i_dt(0.0, 0.5 * dt);
  std::vector<Complex> diag(interior);
  for (std::size_t k = 0; k < interior; ++k) {
    const std::size_t i = k + 1;
    const double v = (i >= barrier_first_ && i < barrier_last_) ? height : 0.0;
    diag[k] = 1.0 + half_i_dt * (2.0 * inv_dx2 + v);
  }
  factor_ = ConstantBandFactor(-half_i_dt * inv_dx2, diag);
  factored_height_ = height;
}

void CayleyStepper::advance(std::span<Complex> psi, double t) {
  const std::size_t n = grid_.n_points();
  if (psi.size() != n) throw ArgumentError("CayleyStepper: amplitude length mismatch");
  const double height = height_at(schedule_, t + 0.5 * grid_.dt());
  if (height != factored_height_) refactor(height);

  const double inv_dx2 = Units::kinetic_prefactor / (grid_.dx() * grid_.dx());
  const Complex half_i_dt(0.0, 0.5 * grid_.dt());
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double v = (i >= barrier_first_ && i < barrier_last_) ? height : 0.0;
    const Complex h_psi = (2.0 * psi[i] - psi[i + 1] - psi[i - 1]) * inv_dx2 + v * psi[i];
    work_[i - 1] = psi[i] - half_i_dt * h_psi;
  }
  factor_.solve_in_place(work_);
  std::copy(work_.begin(), work_.end(), psi.begin() + 1);
  psi.front() = 0.0;
  psi.back() = 0.0;
}

WaveFunction step(const WaveFunction& psi, const BarrierSchedule& schedule) {
  WaveFunction next = psi;
  CayleyStepper stepper(psi.grid, schedule);
  stepper.advance(next.amplitudes, psi.t);
  next.t = psi.t + psi.grid.dt();
  return next;
}

PropagationRecord propagate(const WaveFunction& psi0, const BarrierSchedule& schedule,
                            std::size_t n_steps, std::size_t record_every) {
  if (record_every < 1) throw ArgumentError("propagate: record_every must be >= 1");
  return propagate(psi0, schedule, n_steps, RecordPlan{record_every, 0, 0});
}

PropagationRecord propagate(const WaveFunction& psi0, const BarrierSchedule& schedule,
                            std::size_t n_steps, const RecordPlan& plan) {
  if (n_steps < 1) throw ArgumentError("propagate: n_steps must be >= 1");
  if (plan.record_every < 1) throw ArgumentError("propagate: record_every must be >= 1");
  if (psi0.amplitudes.size() != psi0.grid.n_points())
    throw ArgumentError("propagate: amplitude length mismatch");

  const Grid& grid = psi0.grid;
  PropagationRecord rec{grid, {}, {}, {}, {}, 0.0};
  auto record = [&](std::size_t k, double t, const std::vector<Complex>& amps) {
    rec.steps.push_back(k);
    rec.times.push_back(t);
    rec.frames.push_back(amps);
    rec.potential_heights.push_back(height_at(schedule, t));
  };

  CayleyStepper stepper(grid, schedule);
  std::vector<Complex> amps = psi0.amplitudes;
  record(0, psi0.t, amps);
  double drift = std::abs(trapezoid_norm(grid, amps) - 1.0);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double t_start = psi0.t + static_cast<double>(k - 1) * grid.dt();
    stepper.advance(amps, t_start);
    drift = std::max(drift, std::abs(trapezoid_norm(grid, amps) - 1.0));
    if (plan.records(k, n_steps))
      record(k, psi0.t + static_cast<double>(k) * grid.dt(), amps);
  }
  rec.norm_drift = drift;
  return rec;
}

}  // namespace superarrival
