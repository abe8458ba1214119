#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "../errors.hpp"
#include "../linalg.hpp"
#include "../tolerances.hpp"
#include "winding.hpp"

namespace hilbext {

/// Essential isometry on l^2(N) modelled as T_phi + K: a Toeplitz operator with unimodular
/// symbol phi (sampled at theta_j = 2 pi j / n) plus a finite-rank block K acting on the first
/// d basis vectors. `infinite_defect` marks the class where 1 - FF* has infinite rank.
struct StructuredOperator {
  std::vector<cplx> symbol;
  Matrix perturbation = Matrix(0, 0);
  bool infinite_defect = false;

  void validate(double tol = tol::algebraic) const {
    if (symbol.empty()) throw InvalidArgument("structured operator without symbol samples");
    if (perturbation.rows() != perturbation.cols()) throw InvalidArgument("perturbation block must be square");
    (void)winding_number(symbol, tol);
  }
};

/// Homotopy class of an extension of the Calkin algebra by the compacts: an index or infinity.
struct ExtensionClass {
  enum class Kind { FiniteIndex, InfiniteDefect };
  Kind kind = Kind::FiniteIndex;
  int index = 0;

  static ExtensionClass finite(int i) { return {Kind::FiniteIndex, i}; }
  static ExtensionClass infinite() { return {Kind::InfiniteDefect, 0}; }
  [[nodiscard]] bool is_finite() const noexcept { return kind == Kind::FiniteIndex; }

  friend bool operator==(const ExtensionClass& a, const ExtensionClass& b) {
    return a.kind == b.kind && (a.kind == Kind::InfiniteDefect || a.index == b.index);
  }
};

/// Kernel dimensions of truncations P_L F P_N and P_L F* P_N at one size N.
struct TruncationKernels {
  std::size_t n = 0;
  int ker = 0;
  int ker_adjoint = 0;
  friend bool operator==(const TruncationKernels&, const TruncationKernels&) = default;
};

struct IndexComputation {
  ExtensionClass result;
  int symbol_winding = 0;
  /// Change of truncated (dim ker - dim ker*) caused by the perturbation.
  int correction = 0;
  /// Truncation size at which the kernel dimensions settled (0 for the infinite class).
  std::size_t truncation = 0;
  TruncationKernels perturbed;
  TruncationKernels unperturbed;
};

namespace detail {

/// Fourier coefficients c_n, n in (-S/2, S/2], of the sampled symbol with |c_n| above a floor.
struct SymbolCoefficients {
  std::vector<cplx> coeff;  // index n + offset
  int offset = 0;
  int band_below = 0;  // largest n > 0 with c_n != 0: T e_j reaches e_{j+n}
  int band_above = 0;  // largest |n|, n < 0, with c_n != 0

  [[nodiscard]] cplx at(int n) const {
    const int i = n + offset;
    if (i < 0 || i >= static_cast<int>(coeff.size())) return 0.0;
    return coeff[static_cast<std::size_t>(i)];
  }
};

inline SymbolCoefficients symbol_coefficients(const std::vector<cplx>& samples, double floor = 1e-13) {
  const int s = static_cast<int>(samples.size());
  const int lo = -((s - 1) / 2);
  const int hi = s / 2;
  SymbolCoefficients out;
  out.offset = -lo;
  for (int n = lo; n <= hi; ++n) {
    cplx acc = 0.0;
    for (int j = 0; j < s; ++j)
      acc += samples[static_cast<std::size_t>(j)] * std::polar(1.0, -2.0 * std::numbers::pi * n * j / s);
    acc /= static_cast<double>(s);
    if (std::abs(acc) < floor) acc = 0.0;
    out.coeff.push_back(acc);
    if (acc != 0.0) {
      if (n > 0) out.band_below = std::max(out.band_below, n);
      if (n < 0) out.band_above = std::max(out.band_above, -n);
    }
  }
  return out;
}

/// Top-left L x L block of T_phi (+ K when `with_perturbation`).
inline Matrix dense_block(const SymbolCoefficients& c, const Matrix& k, std::size_t l, bool with_perturbation) {
  const auto n = static_cast<Eigen::Index>(l);
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = std::max<Eigen::Index>(0, i - c.band_below);
         j < std::min<Eigen::Index>(n, i + c.band_above + 1); ++j)
      out(i, j) = c.at(static_cast<int>(i - j));
  if (with_perturbation && k.size() > 0) out.topLeftCorner(k.rows(), k.cols()) += k;
  return out;
}

inline int kernel_dimension(const Matrix& a, double threshold) {
  Eigen::BDCSVD<Matrix> svd(a);
  const auto& sv = svd.singularValues();
  return static_cast<int>(std::count_if(sv.begin(), sv.end(), [&](double x) { return x <= threshold; }));
}

inline TruncationKernels truncation_kernels(const SymbolCoefficients& c, const Matrix& k, std::size_t n,
                                            bool with_perturbation, double threshold) {
  const std::size_t band = static_cast<std::size_t>(std::max(c.band_below, c.band_above));
  const std::size_t l = std::max<std::size_t>(n + band, static_cast<std::size_t>(k.rows()));
  const Matrix f = dense_block(c, k, l, with_perturbation);
  const auto cols = static_cast<Eigen::Index>(n);
  return {n, kernel_dimension(f.leftCols(cols), threshold),
          kernel_dimension(f.adjoint().leftCols(cols), threshold)};
}

}  // namespace detail

/// Index of the essential isometry, or the infinite class.
///
/// The finite index is -winding(symbol) plus the change in truncated kernel dimensions caused
/// by the finite-rank block, read once two consecutive truncation sizes agree.
inline IndexComputation fredholm_index_details(const StructuredOperator& op, std::size_t cap = 512,
                                               double threshold = tol::kernel_singular_value) {
  op.validate();
  IndexComputation out;
  out.symbol_winding = winding_number(op.symbol);
  if (op.infinite_defect) {
    out.result = ExtensionClass::infinite();
    return out;
  }
  const auto coeffs = detail::symbol_coefficients(op.symbol);
  std::size_t n = std::max<std::size_t>(
      16, static_cast<std::size_t>(op.perturbation.rows() + coeffs.band_below + coeffs.band_above + 1));
  std::optional<std::pair<TruncationKernels, TruncationKernels>> prev;
  for (; n <= cap; n *= 2) {
    auto pert = detail::truncation_kernels(coeffs, op.perturbation, n, true, threshold);
    auto base = detail::truncation_kernels(coeffs, op.perturbation, n, false, threshold);
    if (prev && prev->first.ker == pert.ker && prev->first.ker_adjoint == pert.ker_adjoint &&
        prev->second.ker == base.ker && prev->second.ker_adjoint == base.ker_adjoint) {
      out.truncation = n;
      out.perturbed = pert;
      out.unperturbed = base;
      out.correction = (pert.ker - pert.ker_adjoint) - (base.ker - base.ker_adjoint);
      out.result = ExtensionClass::finite(-out.symbol_winding + out.correction);
      return out;
    }
    prev.emplace(pert, base);
  }
  throw NonStabilizing("truncated kernel dimensions did not settle up to N = " + std::to_string(cap));
}

inline ExtensionClass fredholm_index(const StructuredOperator& op, std::size_t cap = 512) {
  return fredholm_index_details(op, cap).result;
}

inline bool homotopy_equivalent(const StructuredOperator& a, const StructuredOperator& b) {
  return fredholm_index(a) == fredholm_index(b);
}

/// Random d x d block of the given rank, scaled to operator norm about one.
inline Matrix random_perturbation(Eigen::Index d, Eigen::Index rank, std::mt19937_64& rng) {
  if (rank > d) throw InvalidArgument("perturbation rank exceeds its block size");
  Matrix k = linalg::random_gaussian(d, rank, rng) * linalg::random_gaussian(rank, d, rng).eval();
  const double nrm = linalg::op_norm(k);
  return nrm > 0 ? Matrix(k / nrm) : k;
}

inline StructuredOperator power_symbol_operator(int k, std::size_t samples = 64) {
  return StructuredOperator{sample_circle_power(k, samples), Matrix(0, 0), false};
}

/// Product F_a F_b as a structured operator. The symbol is the pointwise product; the block is
/// F_a F_b - T_{phi_a phi_b}, which must have finite support (true e.g. for analytic symbols).
inline StructuredOperator compose(const StructuredOperator& a, const StructuredOperator& b) {
  a.validate();
  b.validate();
  if (a.symbol.size() != b.symbol.size()) throw IncompatibleData("compose: symbols use different sample grids");
  StructuredOperator out;
  for (std::size_t j = 0; j < a.symbol.size(); ++j) out.symbol.push_back(a.symbol[j] * b.symbol[j]);
  if (a.infinite_defect || b.infinite_defect) {
    out.infinite_defect = true;
    return out;
  }
  const auto ca = detail::symbol_coefficients(a.symbol);
  const auto cb = detail::symbol_coefficients(b.symbol);
  const auto cp = detail::symbol_coefficients(out.symbol);
  const std::size_t bands = static_cast<std::size_t>(ca.band_below + ca.band_above + cb.band_below + cb.band_above);
  const std::size_t l =
      static_cast<std::size_t>(std::max(a.perturbation.rows(), b.perturbation.rows())) + 2 * bands + 16;
  const std::size_t inner = l + bands;
  const Matrix fa = detail::dense_block(ca, a.perturbation, inner, true);
  const Matrix fb = detail::dense_block(cb, b.perturbation, inner, true);
  const auto ll = static_cast<Eigen::Index>(l);
  const Matrix prod = fa.topRows(ll) * fb.leftCols(ll);
  const Matrix diff = prod - detail::dense_block(cp, Matrix(0, 0), l, false);
  Eigen::Index support = 0;
  for (Eigen::Index i = 0; i < ll; ++i)
    for (Eigen::Index j = 0; j < ll; ++j)
      if (std::abs(diff(i, j)) > 1e-10) support = std::max(support, std::max(i, j) + 1);
  if (support + static_cast<Eigen::Index>(bands) >= ll)
    throw IncompatibleData("compose: product leaves the finite-rank structured model");
  out.perturbation = diff.topLeftCorner(support, support);
  return out;
}

}  // namespace hilbext
