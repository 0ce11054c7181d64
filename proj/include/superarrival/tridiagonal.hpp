#pragma once

#include <span>
#include <vector>

#include "superarrival/grid.hpp"

namespace superarrival {

/// Pivots smaller than this in magnitude are treated as a breakdown.
inline constexpr double kPivotFloor = 1e-300;

/**
 * Solves the tridiagonal system
 *
 *   lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]
 *
 * by forward elimination and back substitution (no pivoting). lower[0] and
 * upper[n-1] are ignored. Throws NumericalBreakdown when a pivot vanishes.
 */
void solve_tridiagonal(std::span<const Complex> lower, std::span<const Complex> diag,
                       std::span<const Complex> upper, std::span<const Complex> rhs,
                       std::span<Complex> x);

/// Thomas factorisation of a matrix with constant off-diagonals, reused across
/// right-hand sides.
class ConstantBandFactor {
 public:
  ConstantBandFactor() = default;
  ConstantBandFactor(Complex off_diagonal, std::span<const Complex> diag);

  std::size_t size() const noexcept { return inv_pivot_.size(); }

  /// Overwrites `rhs` with the solution.
  void solve_in_place(std::span<Complex> rhs) const;

 private:
  Complex off_ = 0.0;
  std::vector<Complex> inv_pivot_;
  std::vector<Complex> upper_star_;
};

}  // namespace superarrival
