#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "superarrival/errors.hpp"
#include "superarrival/grid.hpp"

using namespace superarrival;

namespace {

const GaussianPacketSpec kPacket{};
const Grid kGrid(-1.0, 1.0, 8193, 2e-6);

template <typename F>
std::string config_field_of(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("build_grid computes the spacing of the default lattice") {
  const auto g = build_grid(-1.0, 1.0, 8193, 2e-6);
  CHECK(g.dx() == doctest::Approx(2.0 / 8192).epsilon(1e-15));
  CHECK(g.n_points() == 8193);
  CHECK(g.x(0) == -1.0);
  CHECK(g.x(8192) == 1.0);
  CHECK(g.x(4096) == 0.0);
}

TEST_CASE("three-point grid has sites -1, 0, 1") {
  const auto g = build_grid(-1.0, 1.0, 3, 2e-6);
  CHECK(g.x(0) == -1.0);
  CHECK(g.x(1) == 0.0);
  CHECK(g.x(2) == 1.0);
}

TEST_CASE("invalid grids are rejected with the offending field") {
  try {
    build_grid(0.0, 0.0, 100, 2e-6);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "x_min");
    CHECK(std::string(e.what()).find("x_min >= x_max") != std::string::npos);
  }
  CHECK(config_field_of([] { build_grid(-1, 1, 2, 2e-6); }) == "n_points");
  CHECK(config_field_of([] { build_grid(-1, 1, 100, 0.0); }) == "dt");
  CHECK(config_field_of([] { build_grid(-1, 1, 100, -1e-6); }) == "dt");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK(config_field_of([&] { build_grid(nan, 1, 100, 2e-6); }) == "x_min");
  CHECK(config_field_of([&] { build_grid(-1, std::numeric_limits<double>::infinity(), 100, 2e-6); }) ==
        "x_max");
}

TEST_CASE("packet validation") {
  CHECK_NOTHROW(validate(kPacket, kGrid));
  CHECK(config_field_of([] { validate(GaussianPacketSpec{-0.3, 0.0, 150}, kGrid); }) == "sigma");
  CHECK(config_field_of([] { validate(GaussianPacketSpec{-0.9, 0.05, 150}, kGrid); }) == "x0");
}

TEST_CASE("default packet is normalised, peaked at x0 and has zero walls") {
  const auto psi = init_gaussian(kGrid, kPacket);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(psi.amplitudes.front() == Complex(0.0));
  CHECK(psi.amplitudes.back() == Complex(0.0));
  const auto rho = density(psi.amplitudes);
  const auto peak = static_cast<std::size_t>(std::max_element(rho.begin(), rho.end()) - rho.begin());
  const auto nearest = static_cast<std::size_t>(std::lround((-0.3 + 1.0) / kGrid.dx()));
  CHECK(peak == nearest);
}

TEST_CASE("zero-momentum packet is real up to a global phase") {
  const auto psi = init_gaussian(kGrid, GaussianPacketSpec{-0.3, kPacket.sigma, 0.0});
  const auto centre = static_cast<std::size_t>(std::lround((-0.3 + 1.0) / kGrid.dx()));
  const Complex phase = std::conj(psi.amplitudes[centre]) / std::abs(psi.amplitudes[centre]);
  double worst = 0.0;
  for (auto a : psi.amplitudes) worst = std::max(worst, std::abs(std::imag(a * phase)));
  CHECK(worst <= 1e-15);
}

TEST_CASE("density variance equals sigma^2 within 1%") {
  const auto psi = init_gaussian(kGrid, kPacket);
  const auto rho = density(psi.amplitudes);
  std::vector<double> m1(rho.size()), m2(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) m1[i] = kGrid.x(i) * rho[i];
  const double mean = integrate_density(kGrid, m1, -1, 1);
  for (std::size_t i = 0; i < rho.size(); ++i) m2[i] = (kGrid.x(i) - mean) * (kGrid.x(i) - mean) * rho[i];
  const double var = integrate_density(kGrid, m2, -1, 1);
  CHECK(var == doctest::Approx(kPacket.sigma * kPacket.sigma).epsilon(0.01));
}

TEST_CASE("init_gaussian is deterministic") {
  const auto a = init_gaussian(kGrid, kPacket);
  const auto b = init_gaussian(kGrid, kPacket);
  CHECK(a.amplitudes == b.amplitudes);
}

TEST_CASE("init_gaussian matches the closed-form amplitude") {
  const oracle::FreeGaussian free{kPacket.x0, kPacket.sigma, kPacket.k0};
  const auto psi = init_gaussian(kGrid, kPacket);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < kGrid.n_points(); ++i)
    worst = std::max(worst, std::abs(psi.amplitudes[i] - free.amplitude(kGrid.x(i), 0.0)));
  CHECK(worst <= 1e-12);
}

TEST_CASE("boundary tail of the default packet is negligible") {
  const oracle::FreeGaussian free{kPacket.x0, kPacket.sigma, kPacket.k0};
  const double expected = free.mass_left_of(-1.0, 0.0) + (1.0 - free.mass_left_of(1.0, 0.0));
  CHECK(gaussian_boundary_tail(kGrid, kPacket) == doctest::Approx(expected).epsilon(1e-6));
  CHECK(gaussian_boundary_tail(kGrid, kPacket) < 1e-12);
}

TEST_CASE("probability_in_region examples") {
  const auto psi = init_gaussian(kGrid, kPacket);
  CHECK(probability_in_region(psi, -1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
  const oracle::FreeGaussian free{kPacket.x0, kPacket.sigma, kPacket.k0};
  const double left = probability_in_region(psi, -1.0, -0.5);
  CHECK(left <= 1e-6);
  CHECK(left == doctest::Approx(free.mass_left_of(-0.5, 0.0)).epsilon(1e-3));
  CHECK_THROWS_AS(probability_in_region(psi, 0.3, 0.1), ArgumentError);
  CHECK_THROWS_AS(probability_in_region(psi, 0.2, 0.2), ArgumentError);
}

TEST_CASE("regions outside the box are clipped") {
  const auto psi = init_gaussian(kGrid, kPacket);
  CHECK(probability_in_region(psi, -5.0, 5.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(probability_in_region(psi, 2.0, 3.0) == 0.0);
}

TEST_CASE("partition additivity at lattice and off-lattice cuts") {
  const auto psi = init_gaussian(kGrid, kPacket);
  const double norm = psi.norm();
  for (double c : {-0.31, -0.3, -0.2999, -0.28765, 0.0, 0.123456}) {
    CAPTURE(c);
    CHECK(probability_in_region(psi, -1.0, c) + probability_in_region(psi, c, 1.0) ==
          doctest::Approx(norm).epsilon(1e-9));
  }
}

TEST_CASE("region probability converges at second order in dx") {
  const GaussianPacketSpec spec{-0.3, kPacket.sigma, 0.0};
  const oracle::FreeGaussian free{spec.x0, spec.sigma, 0.0};
  const double exact = free.mass_left_of(-0.25, 0.0);
  std::vector<double> h, err;
  for (std::size_t n : {257u, 513u, 1025u, 2049u}) {
    const Grid g(-1.0, 1.0, n, 2e-6);
    const auto psi = init_gaussian(g, spec);
    h.push_back(g.dx());
    err.push_back(std::abs(probability_in_region(psi, -1.0, -0.25) - exact));
  }
  CHECK(oracle::fitted_order(h, err) >= 1.8);
}
