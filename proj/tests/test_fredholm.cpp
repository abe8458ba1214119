#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace hilbext;

namespace {

/// Index of S^k + K (S the unilateral shift, K supported on the first d coordinates) from
/// rank-revealing LU of the rectangular sections [F]_{L x N} and [F*]_{L x N}, L = N + k.
int lu_index(int k, const Matrix& pert, Eigen::Index n) {
  const Eigen::Index l = n + k;
  Matrix f = Matrix::Zero(l, l);
  for (Eigen::Index j = 0; j + k < l; ++j) f(j + k, j) = 1.0;
  if (pert.size() > 0) f.topLeftCorner(pert.rows(), pert.cols()) += pert;
  Eigen::FullPivLU<Matrix> lu_f(f.leftCols(n));
  lu_f.setThreshold(1e-8);
  const Matrix fa = f.adjoint();
  Eigen::FullPivLU<Matrix> lu_a(fa.leftCols(n));
  lu_a.setThreshold(1e-8);
  return static_cast<int>(lu_f.dimensionOfKernel()) - static_cast<int>(lu_a.dimensionOfKernel());
}

StructuredOperator infinite_operator(int k) {
  auto op = power_symbol_operator(k);
  op.infinite_defect = true;
  return op;
}

}  // namespace

TEST(FredholmIndex, ConstantSymbolIsUnitaryClass) {
  const StructuredOperator op{std::vector<cplx>(32, 1.0), Matrix(0, 0), false};
  EXPECT_EQ(fredholm_index(op), ExtensionClass::finite(0));
}

TEST(FredholmIndex, UnilateralShift) {
  const auto details = fredholm_index_details(power_symbol_operator(1));
  EXPECT_EQ(details.result, ExtensionClass::finite(-1));
  EXPECT_EQ(details.unperturbed.ker, 0);
  EXPECT_EQ(details.unperturbed.ker_adjoint, 1);
}

TEST(FredholmIndex, CubedShiftWithRankTwoPerturbationMatchesLuOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    auto op = power_symbol_operator(3);
    op.perturbation = random_perturbation(5, 2, rng);
    const auto details = fredholm_index_details(op);
    EXPECT_EQ(details.result, ExtensionClass::finite(-3));
    EXPECT_LE(details.truncation, 512u);
    for (Eigen::Index n : {32, 64, 128}) EXPECT_EQ(lu_index(3, op.perturbation, n), -3);
  }
}

TEST(FredholmIndex, PowersAndPerturbationInvariance) {
  std::mt19937_64 rng(18);
  for (int k = 0; k <= 5; ++k) {
    const auto base = fredholm_index(power_symbol_operator(k));
    EXPECT_EQ(base, ExtensionClass::finite(-k));
    for (int trial = 0; trial < 50; ++trial) {
      auto op = power_symbol_operator(k);
      const Eigen::Index d = 1 + trial % 8;
      op.perturbation = random_perturbation(d, 1 + trial % d, rng);
      EXPECT_EQ(fredholm_index(op), base) << "k = " << k << ", trial " << trial;
    }
  }
}

TEST(FredholmIndex, DeliberateKernelIsCompensated) {
  // K = -e_0 e_0^* kills the first basis vector of the identity: still index 0
  StructuredOperator op{std::vector<cplx>(16, 1.0), Matrix::Constant(1, 1, -1.0), false};
  const auto details = fredholm_index_details(op);
  EXPECT_EQ(details.perturbed.ker, 1);
  EXPECT_EQ(details.perturbed.ker_adjoint, 1);
  EXPECT_EQ(details.result, ExtensionClass::finite(0));
}

TEST(FredholmIndex, InfiniteDefectClass) {
  EXPECT_EQ(fredholm_index(infinite_operator(0)), ExtensionClass::infinite());
  EXPECT_TRUE(homotopy_equivalent(infinite_operator(0), infinite_operator(3)));
  EXPECT_TRUE(homotopy_equivalent(infinite_operator(-2), infinite_operator(5)));
  EXPECT_FALSE(homotopy_equivalent(infinite_operator(1), power_symbol_operator(1)));
}

TEST(FredholmIndex, FiniteClassesEquivalentIffIndicesAgree) {
  for (int j = 0; j <= 4; ++j)
    for (int k = 0; k <= 4; ++k)
      EXPECT_EQ(homotopy_equivalent(power_symbol_operator(j), power_symbol_operator(k)), j == k);
}

TEST(FredholmIndex, CompositionAddsIndices) {
  std::mt19937_64 rng(19);
  for (int j = 0; j <= 3; ++j)
    for (int k = 0; k <= 3; ++k) {
      auto a = power_symbol_operator(j);
      auto b = power_symbol_operator(k);
      a.perturbation = random_perturbation(3, 1, rng);
      b.perturbation = random_perturbation(4, 2, rng);
      EXPECT_EQ(fredholm_index(compose(a, b)), ExtensionClass::finite(-j - k));
    }
}

TEST(FredholmIndex, CapTooSmallDoesNotStabilise) {
  EXPECT_THROW((void)fredholm_index(power_symbol_operator(2), 16), NonStabilizing);
}

TEST(FredholmIndex, RejectsInvalidSymbols) {
  StructuredOperator bad{std::vector<cplx>(8, 0.5), Matrix(0, 0), false};
  EXPECT_THROW((void)fredholm_index(bad), InvalidArgument);
  StructuredOperator coarse{fixture::circle_power(1, 2), Matrix(0, 0), false};
  EXPECT_THROW((void)fredholm_index(coarse), LiftFailure);
  StructuredOperator rect{fixture::circle_power(1, 8), Matrix::Zero(2, 3), false};
  EXPECT_THROW((void)fredholm_index(rect), InvalidArgument);
}
