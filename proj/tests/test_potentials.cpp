#include <doctest.h>

#include <cmath>
#include <limits>

#include "superarrival/errors.hpp"
#include "superarrival/potentials.hpp"

using namespace superarrival;

namespace {

const Grid kGrid(-1.0, 1.0, 8193, 2e-6);
constexpr double kV0 = 45400.0;
constexpr double kTp = 8e-4;
constexpr double kEps = 2e-5;

BarrierSchedule schedule(RampMode mode, double v0 = kV0) {
  return BarrierSchedule{0.0, 0.016, v0, mode, kTp, kEps};
}

}  // namespace

TEST_CASE("height_at follows the linear ramps") {
  const auto low = schedule(RampMode::lowering);
  CHECK(height_at(low, 0.0) == kV0);
  CHECK(height_at(low, kTp) == kV0);
  CHECK(height_at(low, kTp + kEps / 2) == doctest::Approx(kV0 / 2).epsilon(1e-12));
  CHECK(height_at(low, kTp + kEps) == 0.0);
  CHECK(height_at(low, 1.0) == 0.0);

  const auto high = schedule(RampMode::raising);
  CHECK(height_at(high, 0.0) == 0.0);
  CHECK(height_at(high, kTp) == 0.0);
  CHECK(height_at(high, kTp + 0.25 * kEps) == doctest::Approx(kV0 / 4).epsilon(1e-12));
  CHECK(height_at(high, kTp + kEps) == kV0);
  CHECK(height_at(high, 3e-3) == kV0);

  const auto flat = schedule(RampMode::static_barrier);
  for (double t : {0.0, kTp, kTp + kEps / 2, 1.0}) CHECK(height_at(flat, t) == kV0);
}

TEST_CASE("ramps are continuous at their joints and stay within [0, V0]") {
  const double delta = 1e-15;
  const double slope = kV0 / kEps;
  for (auto mode : {RampMode::lowering, RampMode::raising}) {
    const auto s = schedule(mode);
    for (double joint : {kTp, kTp + kEps}) {
      // the ramp itself moves by slope * 2 delta; anything beyond is a jump
      const double change = std::abs(height_at(s, joint + delta) - height_at(s, joint - delta));
      CHECK(change <= slope * 2.0 * delta + std::numeric_limits<double>::epsilon() * kV0);
    }
    for (int k = 0; k <= 1000; ++k) {
      const double h = height_at(s, 1e-6 * k);
      CHECK(h >= 0.0);
      CHECK(h <= kV0);
    }
  }
}

TEST_CASE("potential_row examples") {
  const auto zero = potential_row(schedule(RampMode::static_barrier, 0.0), kGrid, 0.0);
  for (double v : zero) CHECK(v == 0.0);

  const auto unit = potential_row(schedule(RampMode::lowering, 1.0), kGrid, 0.0);
  for (std::size_t i = 0; i < kGrid.n_points(); ++i) {
    const bool inside = std::abs(kGrid.x(i)) <= 0.008;
    CHECK(unit[i] == (inside ? 1.0 : 0.0));
  }

  const auto done = potential_row(schedule(RampMode::lowering), kGrid, kTp + kEps);
  for (double v : done) CHECK(v == 0.0);
}

TEST_CASE("barrier support does not depend on time") {
  const auto s = schedule(RampMode::raising);
  const auto [first, last] = barrier_sites(s, kGrid);
  CHECK(last - first == 65);  // 0.016 / dx = 65.5, edges fall between sites
  for (double t : {kTp + 1e-6, kTp + 1e-5, 1.0}) {
    const auto row = potential_row(s, kGrid, t);
    for (std::size_t i = 0; i < row.size(); ++i) CHECK((row[i] != 0.0) == (i >= first && i < last));
  }
}

TEST_CASE("closed-interval membership on a lattice that hits the edges") {
  const Grid g(-1.0, 1.0, 257, 2e-6);  // dx = 2^-7, exactly representable
  const BarrierSchedule s{0.0, 2.0 / 128, 1.0, RampMode::static_barrier, kTp, kEps};
  const auto [first, last] = barrier_sites(s, g);
  CHECK(g.x(first) == -1.0 / 128);
  CHECK(g.x(last - 1) == 1.0 / 128);
  CHECK(last - first == 3);
}

TEST_CASE("schedule validation names the field") {
  auto field_of = [](BarrierSchedule s) {
    try {
      validate(s, kGrid);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string();
  };
  CHECK(field_of(schedule(RampMode::lowering)).empty());
  auto s = schedule(RampMode::lowering);
  s.width = 0.0;
  CHECK(field_of(s) == "w");
  s = schedule(RampMode::lowering);
  s.center = 0.995;
  CHECK(field_of(s) == "x_c");
  s = schedule(RampMode::lowering, -1.0);
  CHECK(field_of(s) == "V0");
  s = schedule(RampMode::raising);
  s.duration = 0.0;
  CHECK(field_of(s) == "epsilon");
  s = schedule(RampMode::raising);
  s.onset = -1e-6;
  CHECK(field_of(s) == "t_p");
  s = schedule(RampMode::static_barrier);
  s.duration = 0.0;
  s.onset = -1.0;
  CHECK(field_of(s).empty());  // static mode ignores t_p and epsilon
}

TEST_CASE("ramp mode names round-trip") {
  for (auto m : {RampMode::static_barrier, RampMode::lowering, RampMode::raising})
    CHECK(ramp_mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(ramp_mode_from_string("sideways"), ConfigError);
}
