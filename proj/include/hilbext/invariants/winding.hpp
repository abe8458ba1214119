#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "../linalg.hpp"
#include "../tolerances.hpp"

namespace hilbext {

/// Increments this close to pi are treated as ambiguous.
inline constexpr double kLiftMargin = 1e-9;

/// Degree of a closed circle-valued loop given by its samples (the closing step from the last
/// sample back to the first is included).
///
/// Sums principal argument increments; an increment of magnitude pi or more cannot be lifted
/// unambiguously and raises LiftFailure instead of guessing.
inline int winding_number(std::span<const cplx> loop, double tol = tol::algebraic) {
  if (loop.empty()) throw InvalidArgument("winding_number: empty loop");
  for (std::size_t i = 0; i < loop.size(); ++i)
    if (std::abs(std::abs(loop[i]) - 1.0) > tol)
      throw InvalidArgument("winding_number: sample " + std::to_string(i) + " is not on the unit circle");
  double total = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const double inc = linalg::arg_increment(loop[i], loop[(i + 1) % loop.size()]);
    if (std::abs(inc) >= std::numbers::pi - kLiftMargin)
      throw LiftFailure("argument increment " + std::to_string(inc) + " after sample " + std::to_string(i) +
                        " is not below pi; refine the sampling");
    total += inc;
  }
  const double turns = total / (2.0 * std::numbers::pi);
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) >= tol::winding_residue)
    throw LiftFailure("winding sum " + std::to_string(turns) + " is not close to an integer");
  return static_cast<int>(rounded);
}

/// Samples of theta |-> e^{i k theta} at theta_j = 2 pi j / n.
///
/// Throws LiftFailure when consecutive samples are pi or more apart along the continuous map,
/// since the samples would then alias a different degree.
inline std::vector<cplx> sample_circle_power(int k, std::size_t n) {
  if (n == 0) throw InvalidArgument("sample_circle_power: no samples");
  const double step = 2.0 * std::numbers::pi * std::abs(k) / static_cast<double>(n);
  if (step >= std::numbers::pi - kLiftMargin)
    throw LiftFailure("degree " + std::to_string(k) + " on " + std::to_string(n) +
                      " samples has argument increment >= pi; refine the sampling");
  std::vector<cplx> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j)
    out.push_back(std::polar(1.0, k * 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n)));
  return out;
}

}  // namespace hilbext
