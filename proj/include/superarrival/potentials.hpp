#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "superarrival/grid.hpp"

namespace superarrival {

enum class RampMode { static_barrier, lowering, raising };

std::string_view to_string(RampMode mode);
RampMode ramp_mode_from_string(std::string_view name);

/// Rectangular barrier on [center - width/2, center + width/2] whose height
/// follows a linear ramp of length `duration` starting at `onset`.
struct BarrierSchedule {
  double center = 0.0;
  double width = 0.016;
  double height = 0.0;  // V0
  RampMode mode = RampMode::static_barrier;
  double onset = 8e-4;     // t_p
  double duration = 2e-5;  // epsilon
};

void validate(const BarrierSchedule& schedule, const Grid& grid);

/// Barrier height at time t; always within [0, V0].
double height_at(const BarrierSchedule& schedule, double t);

/// Half-open index range [first, last) of lattice sites under the barrier
/// (closed interval membership on exact site coordinates).
std::pair<std::size_t, std::size_t> barrier_sites(const BarrierSchedule& schedule,
                                                  const Grid& grid);

std::vector<double> potential_row(const BarrierSchedule& schedule, const Grid& grid, double t);

}  // namespace superarrival
