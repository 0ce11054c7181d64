#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "superarrival/potentials.hpp"
#include "superarrival/tdse_solver.hpp"

namespace superarrival {

enum class DetectorKind {
  reflection,    // integrates |psi|^2 over [x_min, x']
  transmission,  // integrates |psi|^2 over [x'', x_max]
};

std::string_view to_string(DetectorKind kind);

struct ProbabilitySeries {
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::vector<double> values;
  DetectorKind kind = DetectorKind::reflection;
  double detector_position = 0.0;
};

ProbabilitySeries detector_series(const PropagationRecord& record, DetectorKind kind,
                                  double detector_position);

struct WindowCriteria {
  double threshold = 1e-4;
  std::size_t persistence = 3;
};

/// Interval (t_d, t_c) during which the perturbed probability exceeds the
/// unperturbed one, with the windowed integrals and eta = (I_p - I_s)/I_s.
struct SuperarrivalWindow {
  double t_d = 0.0;
  double t_c = 0.0;
  double delta_t = 0.0;
  double eta = 0.0;
  double I_p = 0.0;
  double I_s = 0.0;
  std::size_t onset_index = 0;     // sample index of t_d
  std::size_t crossing_index = 0;  // first sample with difference <= 0
};

/**
 * t_d is the first sample where perturbed - unperturbed exceeds the
 * threshold and the difference stays positive for `persistence` samples; t_c
 * is the next zero of the difference, linearly interpolated between the
 * bracketing samples. Returns nullopt when no window opens and closes inside
 * the series. Throws ArgumentError if the time grids differ.
 */
std::optional<SuperarrivalWindow> detect_window(const ProbabilitySeries& perturbed,
                                                const ProbabilitySeries& unperturbed,
                                                const WindowCriteria& criteria = {});

/// t_c > t_d > t_p.
bool ordering_holds(const SuperarrivalWindow& window, double t_p);

struct SignalVelocity {
  double v_e = 0.0;
  double distance = 0.0;
  double t_d = 0.0;
  double t_p = 0.0;
  double epsilon = 0.0;
};

/// v_e = D / (t_d - (t_p - eps/2)). Throws DegenerateTiming if the
/// denominator is not positive and ArgumentError if D <= 0.
SignalVelocity signal_velocity(const SuperarrivalWindow& window, const BarrierSchedule& schedule,
                               double distance);

}  // namespace superarrival
