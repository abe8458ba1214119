#pragma once

namespace hilbext::tol {

/// Algebraic identities (idempotence, isometry, inner-product preservation).
inline constexpr double algebraic = 1e-9;
/// Brute-force optimisation oracles.
inline constexpr double search = 1e-3;
/// Pullback agreement at the corona for extensions rebuilt from a Busby field.
inline constexpr double corona_agreement = 1e-6;
/// Default stabilisation tolerance for corona limits.
inline constexpr double corona_stabilization = 1e-6;
/// Eigenvalue separator for ranks of numerical projections.
inline constexpr double rank_threshold = 0.5;
/// Singular values below this count towards a truncated kernel.
inline constexpr double kernel_singular_value = 1e-7;
/// Largest admissible distance from an integer of a winding sum divided by 2 pi.
inline constexpr double winding_residue = 0.01;

}  // namespace hilbext::tol
