#include "superarrival/tridiagonal.hpp"

#include <cmath>
#include <string>

#include "superarrival/errors.hpp"

namespace superarrival {

namespace {

void check_pivot(const Complex& m, std::size_t row) {
  if (!(std::abs(m) >= kPivotFloor))
    throw NumericalBreakdown("tridiagonal pivot vanished at row " + std::to_string(row));
}

}  // namespace

void solve_tridiagonal(std::span<const Complex> lower, std::span<const Complex> diag,
                       std::span<const Complex> upper, std::span<const Complex> rhs,
                       std::span<Complex> x) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n || x.size() != n)
    throw ArgumentError("solve_tridiagonal: band lengths differ");
  if (n == 0) return;

  std::vector<Complex> c_star(n);
  std::vector<Complex> d_star(n);
  check_pivot(diag[0], 0);
  c_star[0] = upper[0] / diag[0];
  d_star[0] = rhs[0] / diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const Complex m = diag[i] - lower[i] * c_star[i - 1];
    check_pivot(m, i);
    c_star[i] = i + 1 < n ? upper[i] / m : Complex(0.0);
    d_star[i] = (rhs[i] - lower[i] * d_star[i - 1]) / m;
  }
  x[n - 1] = d_star[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d_star[i] - c_star[i] * x[i + 1];
}

ConstantBandFactor::ConstantBandFactor(Complex off_diagonal, std::span<const Complex> diag)
    : off_(off_diagonal), inv_pivot_(diag.size()), upper_star_(diag.size()) {
  const std::size_t n = diag.size();
  Complex prev_upper = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex m = i == 0 ? diag[0] : diag[i] - off_ * prev_upper;
    check_pivot(m, i);
    inv_pivot_[i] = 1.0 / m;
    upper_star_[i] = off_ * inv_pivot_[i];
    prev_upper = upper_star_[i];
  }
}

void ConstantBandFactor::solve_in_place(std::span<Complex> rhs) const {
  const std::size_t n = inv_pivot_.size();
  if (rhs.size() != n) throw ArgumentError("ConstantBandFactor: size mismatch");
  if (n == 0) return;
  rhs[0] *= inv_pivot_[0];
  for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - off_ * rhs[i - 1]) * inv_pivot_[i];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= upper_star_[i] * rhs[i + 1];
}

}  // namespace superarrival
