#include "superarrival/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "superarrival/errors.hpp"

namespace superarrival {

std::string_view to_string(RampMode mode) {
  switch (mode) {
    case RampMode::static_barrier: return "static";
    case RampMode::lowering: return "lowering";
    case RampMode::raising: return "raising";
  }
  return "static";
}

RampMode ramp_mode_from_string(std::string_view name) {
  if (name == "static") return RampMode::static_barrier;
  if (name == "lowering") return RampMode::lowering;
  if (name == "raising") return RampMode::raising;
  throw ConfigError("mode", "unknown ramp mode '" + std::string(name) + "'");
}

void validate(const BarrierSchedule& s, const Grid& grid) {
  if (!std::isfinite(s.center)) throw ConfigError("x_c", "must be finite");
  if (!(s.width > 0.0) || !std::isfinite(s.width)) throw ConfigError("w", "must be positive");
  if (!std::isfinite(s.height) || s.height < 0.0) throw ConfigError("V0", "must be >= 0");
  if (!grid.strictly_inside(s.center - 0.5 * s.width) ||
      !grid.strictly_inside(s.center + 0.5 * s.width))
    throw ConfigError("x_c", "barrier support must lie strictly inside the grid");
  if (s.mode == RampMode::static_barrier) return;
  if (!(s.onset >= 0.0) || !std::isfinite(s.onset)) throw ConfigError("t_p", "must be >= 0");
  if (!(s.duration > 0.0) || !std::isfinite(s.duration))
    throw ConfigError("epsilon", "ramp duration must be positive");
}

double height_at(const BarrierSchedule& s, double t) {
  const double v0 = s.height;
  if (s.mode == RampMode::static_barrier) return v0;
  const double end = s.onset + s.duration;
  // fraction of the ramp completed
  double f = 0.0;
  if (t <= s.onset) {
    f = 0.0;
  } else if (t >= end) {
    f = 1.0;
  } else {
    f = std::clamp((t - s.onset) / s.duration, 0.0, 1.0);
  }
  return s.mode == RampMode::lowering ? v0 * (1.0 - f) : v0 * f;
}

std::pair<std::size_t, std::size_t> barrier_sites(const BarrierSchedule& s, const Grid& grid) {
  const double left = s.center - 0.5 * s.width;
  const double right = s.center + 0.5 * s.width;
  std::size_t first = grid.n_points();
  std::size_t last = 0;
  for (std::size_t i = 0; i < grid.n_points(); ++i) {
    const double x = grid.x(i);
    if (x >= left && x <= right) {
      first = std::min(first, i);
      last = i + 1;
    }
  }
  if (last == 0) return {0, 0};
  return {first, last};
}

std::vector<double> potential_row(const BarrierSchedule& s, const Grid& grid, double t) {
  validate(s, grid);
  std::vector<double> row(grid.n_points(), 0.0);
  const double h = height_at(s, t);
  const auto [first, last] = barrier_sites(s, grid);
  std::fill(row.begin() + static_cast<std::ptrdiff_t>(first),
            row.begin() + static_cast<std::ptrdiff_t>(last), h);
  return row;
}

}  // namespace superarrival
