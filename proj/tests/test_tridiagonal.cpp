#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "superarrival/errors.hpp"
#include "superarrival/tridiagonal.hpp"

using namespace superarrival;

namespace {

struct Bands {
  std::vector<Complex> lower, diag, upper, rhs;
};

Bands random_bands(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Bands b;
  for (std::size_t i = 0; i < n; ++i) {
    b.lower.emplace_back(u(rng), u(rng));
    b.upper.emplace_back(u(rng), u(rng));
    b.diag.emplace_back(3.0 + u(rng), u(rng));
    b.rhs.emplace_back(u(rng), u(rng));
  }
  return b;
}

std::vector<std::vector<Complex>> dense(const std::vector<Complex>& lower,
                                        const std::vector<Complex>& diag,
                                        const std::vector<Complex>& upper) {
  const std::size_t n = diag.size();
  std::vector<std::vector<Complex>> a(n, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = diag[i];
    if (i > 0) a[i][i - 1] = lower[i];
    if (i + 1 < n) a[i][i + 1] = upper[i];
  }
  return a;
}

double max_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("general tridiagonal solve matches dense elimination") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto b = random_bands(40, seed);
    std::vector<Complex> x(40);
    solve_tridiagonal(b.lower, b.diag, b.upper, b.rhs, x);
    const auto ref = oracle::dense_solve(dense(b.lower, b.diag, b.upper), b.rhs);
    CHECK(max_diff(x, ref) <= 1e-12);
  }
}

TEST_CASE("constant-band factorisation matches dense elimination and is reusable") {
  const std::size_t n = 50;
  const Complex off(-0.5, 0.25);
  const auto b = random_bands(n, 7);
  const ConstantBandFactor factor(off, b.diag);
  CHECK(factor.size() == n);
  const std::vector<Complex> offs(n, off);
  const auto a = dense(offs, b.diag, offs);
  for (std::uint64_t seed : {11u, 12u}) {
    auto rhs = random_bands(n, seed).rhs;
    const auto ref = oracle::dense_solve(a, rhs);
    factor.solve_in_place(rhs);
    CHECK(max_diff(rhs, ref) <= 1e-12);
  }
}

TEST_CASE("a vanishing pivot is a numerical breakdown") {
  std::vector<Complex> lower{0.0, 1.0, 1.0}, diag{0.0, 2.0, 2.0}, upper{1.0, 1.0, 0.0}, rhs{1.0, 1.0, 1.0};
  std::vector<Complex> x(3);
  CHECK_THROWS_AS(solve_tridiagonal(lower, diag, upper, rhs, x), NumericalBreakdown);
  // Second pivot is 1 - 1*1/1 = 0.
  std::vector<Complex> diag2{1.0, 1.0, 1.0};
  CHECK_THROWS_AS(ConstantBandFactor(Complex(1.0), diag2), NumericalBreakdown);
}

TEST_CASE("mismatched band lengths are rejected") {
  std::vector<Complex> a(3, 1.0), b(4, 3.0), x(3);
  CHECK_THROWS(solve_tridiagonal(a, b, a, a, x));
}
