#include "superarrival/observables.hpp"

#include <cmath>

#include "superarrival/errors.hpp"
#include "superarrival/kernels.hpp"

namespace superarrival {

std::string_view to_string(DetectorKind kind) {
  return kind == DetectorKind::reflection ? "reflection" : "transmission";
}

ProbabilitySeries detector_series(const PropagationRecord& record, DetectorKind kind,
                                  double detector_position) {
  const Grid& grid = record.grid;
  if (!grid.strictly_inside(detector_position))
    throw ConfigError(kind == DetectorKind::reflection ? "x_prime" : "x_double_prime",
                      "detector must lie strictly inside the grid");
  const double a = kind == DetectorKind::reflection ? grid.x_min() : detector_position;
  const double b = kind == DetectorKind::reflection ? detector_position : grid.x_max();
  ProbabilitySeries series;
  series.steps = record.steps;
  series.times = record.times;
  series.values = kernels::omp::region_probabilities(record, a, b);
  series.kind = kind;
  series.detector_position = detector_position;
  return series;
}

namespace {

// Trapezoid integral of samples (t_k, y_k) for k in [first, last].
double trapezoid(const std::vector<double>& t, const std::vector<double>& y, std::size_t first,
                 std::size_t last) {
  double sum = 0.0;
  for (std::size_t k = first; k < last; ++k) sum += 0.5 * (y[k] + y[k + 1]) * (t[k + 1] - t[k]);
  return sum;
}

}  // namespace

std::optional<SuperarrivalWindow> detect_window(const ProbabilitySeries& perturbed,
                                                const ProbabilitySeries& unperturbed,
                                                const WindowCriteria& criteria) {
  if (perturbed.times != unperturbed.times || perturbed.values.size() != perturbed.times.size() ||
      unperturbed.values.size() != unperturbed.times.size())
    throw ArgumentError("detect_window: series time grids differ");
  if (!(criteria.threshold > 0.0)) throw ArgumentError("detect_window: threshold must be > 0");
  if (criteria.persistence < 1) throw ArgumentError("detect_window: persistence must be >= 1");

  const auto& t = perturbed.times;
  const std::size_t n = t.size();
  std::vector<double> diff(n);
  for (std::size_t k = 0; k < n; ++k) diff[k] = perturbed.values[k] - unperturbed.values[k];

  std::optional<std::size_t> onset;
  for (std::size_t k = 0; k + criteria.persistence <= n; ++k) {
    if (!(diff[k] > criteria.threshold)) continue;
    bool persistent = true;
    for (std::size_t j = k + 1; j < k + criteria.persistence; ++j) persistent &= diff[j] > 0.0;
    if (persistent) {
      onset = k;
      break;
    }
  }
  if (!onset) return std::nullopt;

  std::optional<std::size_t> crossing;
  for (std::size_t k = *onset + 1; k < n; ++k) {
    if (diff[k] <= 0.0) {
      crossing = k;
      break;
    }
  }
  if (!crossing) return std::nullopt;

  const std::size_t d = *onset;
  const std::size_t c = *crossing;
  const double frac = diff[c - 1] / (diff[c - 1] - diff[c]);
  const double t_c = t[c - 1] + frac * (t[c] - t[c - 1]);
  const double p_c = perturbed.values[c - 1] + frac * (perturbed.values[c] - perturbed.values[c - 1]);
  const double s_c =
      unperturbed.values[c - 1] + frac * (unperturbed.values[c] - unperturbed.values[c - 1]);

  SuperarrivalWindow w;
  w.t_d = t[d];
  w.t_c = t_c;
  w.delta_t = t_c - t[d];
  w.I_p = trapezoid(t, perturbed.values, d, c - 1) +
          0.5 * (perturbed.values[c - 1] + p_c) * (t_c - t[c - 1]);
  w.I_s = trapezoid(t, unperturbed.values, d, c - 1) +
          0.5 * (unperturbed.values[c - 1] + s_c) * (t_c - t[c - 1]);
  w.eta = (w.I_p - w.I_s) / w.I_s;
  w.onset_index = d;
  w.crossing_index = c;
  return w;
}

bool ordering_holds(const SuperarrivalWindow& window, double t_p) {
  return window.t_c > window.t_d && window.t_d > t_p;
}

SignalVelocity signal_velocity(const SuperarrivalWindow& window, const BarrierSchedule& schedule,
                               double distance) {
  if (!(distance > 0.0)) throw ArgumentError("signal_velocity: D must be positive");
  const double reference = schedule.onset - 0.5 * schedule.duration;
  const double delay = window.t_d - reference;
  if (!(delay > 0.0))
    throw DegenerateTiming("signal_velocity: t_d does not follow the perturbation midpoint");
  return SignalVelocity{distance / delay, distance, window.t_d, schedule.onset,
                        schedule.duration};
}

}  // namespace superarrival
