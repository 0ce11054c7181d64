#include "superarrival/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "superarrival/errors.hpp"

namespace superarrival::kernels {

namespace {

struct FieldSample {
  double v = 0.0;
  double slope = 0.0;
  bool masked = false;
};

// Bilinear interpolation of the field at frame k + tau (tau in [0, 1]).
FieldSample sample(const VelocityField& f, std::size_t k, double tau, double x) {
  const Grid& g = f.grid;
  if (!(x >= g.x_min() && x <= g.x_max())) return {0.0, 0.0, true};
  const auto last_cell = static_cast<std::ptrdiff_t>(g.n_points()) - 2;
  const auto cell = std::clamp<std::ptrdiff_t>(
      static_cast<std::ptrdiff_t>(std::floor((x - g.x_min()) / g.dx())), 0, last_cell);
  const auto j = static_cast<std::size_t>(cell);
  const double w = (x - g.x(j)) / g.dx();

  FieldSample out;
  auto blend = [&](std::size_t frame, double weight) {
    const auto& v = f.v_frames[frame];
    const auto& m = f.node_mask[frame];
    out.masked = out.masked || m[j] != 0 || m[j + 1] != 0;
    out.v += weight * ((1.0 - w) * v[j] + w * v[j + 1]);
    out.slope += weight * (v[j + 1] - v[j]) / g.dx();
  };
  if (tau <= 0.0 || k + 1 >= f.v_frames.size()) {
    blend(k, 1.0);
  } else if (tau >= 1.0) {
    blend(k + 1, 1.0);
  } else {
    blend(k, 1.0 - tau);
    blend(k + 1, tau);
  }
  return out;
}

// One classical RK4 step over [tau, tau + h] of the frame interval k; the
// interval length converts dx/dt to dx/dtau.
bool rk4(const VelocityField& f, std::size_t k, double span, double tau, double h, double& x) {
  const FieldSample k1 = sample(f, k, tau, x);
  if (k1.masked) return false;
  const FieldSample k2 = sample(f, k, tau + 0.5 * h, x + 0.5 * h * span * k1.v);
  if (k2.masked) return false;
  const FieldSample k3 = sample(f, k, tau + 0.5 * h, x + 0.5 * h * span * k2.v);
  if (k3.masked) return false;
  const FieldSample k4 = sample(f, k, tau + h, x + h * span * k3.v);
  if (k4.masked) return false;
  x += h * span * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v) / 6.0;
  return true;
}

bool advance(const VelocityField& f, std::size_t k, double span, double tau, double h,
             double min_h, double& x) {
  double trial = x;
  if (rk4(f, k, span, tau, h, trial)) {
    x = trial;
    return true;
  }
  const double half = 0.5 * h;
  if (half < min_h) return false;
  return advance(f, k, span, tau, half, min_h, x) &&
         advance(f, k, span, tau + half, half, min_h, x);
}

void check_record(const PropagationRecord& record) {
  if (record.frames.empty()) throw ArgumentError("record has no frames");
  for (const auto& frame : record.frames)
    if (frame.size() != record.grid.n_points())
      throw ArgumentError("record frame length does not match grid");
}

template <typename Field>
Field empty_field(const PropagationRecord& record) {
  const std::size_t n = record.grid.n_points();
  const std::size_t frames = record.frames.size();
  return Field{record.grid,
               record.steps,
               record.times,
               std::vector<std::vector<double>>(frames, std::vector<double>(n)),
               std::vector<std::vector<std::uint8_t>>(frames, std::vector<std::uint8_t>(n))};
}

}  // namespace

Trajectory integrate_one(const VelocityField& field, double x_init,
                         const TrajectoryOptions& options) {
  const Grid& g = field.grid;
  if (!std::isfinite(x_init) || !g.contains(x_init))
    throw ArgumentError("integrate_trajectory: initial position outside the grid");
  if (field.v_frames.empty()) throw ArgumentError("integrate_trajectory: empty field");

  Trajectory tr;
  tr.x_init = x_init;
  tr.x.reserve(field.times.size());
  tr.x.push_back(x_init);

  const std::size_t max_sub = std::max<std::size_t>(1, options.max_substeps);
  const double min_fraction = 1.0 / static_cast<double>(std::max<std::size_t>(1, options.min_step_fraction));
  for (std::size_t k = 0; k + 1 < field.times.size(); ++k) {
    const double span = field.times[k + 1] - field.times[k];
    double x = tr.x.back();
    const FieldSample start = sample(field, k, 0.0, x);
    std::size_t n_sub = 1;
    while (n_sub < max_sub && (std::abs(start.v) * span / static_cast<double>(n_sub) > g.dx() ||
                               std::abs(start.slope) * span / static_cast<double>(n_sub) > 0.25))
      n_sub *= 2;
    const double h = 1.0 / static_cast<double>(n_sub);

    bool ok = true;
    for (std::size_t s = 0; s < n_sub && ok; ++s)
      ok = advance(field, k, span, static_cast<double>(s) * h, h, h * min_fraction, x);
    if (!ok) {
      tr.node_degenerate = true;
      break;
    }
    if (x <= g.x_min() || x >= g.x_max()) {
      tr.x.push_back(std::clamp(x, g.x_min(), g.x_max()));
      tr.hit_wall = true;
      break;
    }
    tr.x.push_back(x);
  }
  return tr;
}

int max_threads() { return omp_get_max_threads(); }

namespace serial {

std::vector<double> region_probabilities(const PropagationRecord& record, double a, double b) {
  check_record(record);
  std::vector<double> out(record.frames.size());
  for (std::size_t k = 0; k < record.frames.size(); ++k)
    out[k] = probability_in_region(record.grid, record.frames[k], a, b);
  return out;
}

VelocityField velocity_field(const PropagationRecord& record, double node_floor) {
  check_record(record);
  auto field = empty_field<VelocityField>(record);
  for (std::size_t k = 0; k < record.frames.size(); ++k)
    velocity_row(record.grid, record.frames[k], node_floor, field.v_frames[k], field.node_mask[k]);
  return field;
}

QuantumPotentialField quantum_potential(const PropagationRecord& record, double node_floor) {
  check_record(record);
  auto field = empty_field<QuantumPotentialField>(record);
  for (std::size_t k = 0; k < record.frames.size(); ++k)
    quantum_potential_row(record.grid, record.frames[k], node_floor, field.q_frames[k],
                          field.node_mask[k]);
  return field;
}

std::vector<Trajectory> integrate_ensemble(const VelocityField& field,
                                           std::span<const double> initial_positions,
                                           const TrajectoryOptions& options) {
  std::vector<Trajectory> out(initial_positions.size());
  for (std::size_t p = 0; p < initial_positions.size(); ++p)
    out[p] = integrate_one(field, initial_positions[p], options);
  return out;
}

}  // namespace serial

namespace omp {

std::vector<double> region_probabilities(const PropagationRecord& record, double a, double b) {
  check_record(record);
  if (!(a < b)) throw ArgumentError("probability_in_region: require a < b");
  const auto frames = static_cast<std::ptrdiff_t>(record.frames.size());
  std::vector<double> out(record.frames.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < frames; ++k)
    out[k] = probability_in_region(record.grid, record.frames[k], a, b);
  return out;
}

VelocityField velocity_field(const PropagationRecord& record, double node_floor) {
  check_record(record);
  auto field = empty_field<VelocityField>(record);
  const auto frames = static_cast<std::ptrdiff_t>(record.frames.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < frames; ++k)
    velocity_row(record.grid, record.frames[k], node_floor, field.v_frames[k], field.node_mask[k]);
  return field;
}

QuantumPotentialField quantum_potential(const PropagationRecord& record, double node_floor) {
  check_record(record);
  auto field = empty_field<QuantumPotentialField>(record);
  const auto frames = static_cast<std::ptrdiff_t>(record.frames.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < frames; ++k)
    quantum_potential_row(record.grid, record.frames[k], node_floor, field.q_frames[k],
                          field.node_mask[k]);
  return field;
}

std::vector<Trajectory> integrate_ensemble(const VelocityField& field,
                                           std::span<const double> initial_positions,
                                           const TrajectoryOptions& options) {
  for (double x : initial_positions)
    if (!std::isfinite(x) || !field.grid.contains(x))
      throw ArgumentError("integrate_trajectory: initial position outside the grid");
  std::vector<Trajectory> out(initial_positions.size());
  const auto n = static_cast<std::ptrdiff_t>(initial_positions.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t p = 0; p < n; ++p) out[p] = integrate_one(field, initial_positions[p], options);
  return out;
}

}  // namespace omp

}  // namespace superarrival::kernels
