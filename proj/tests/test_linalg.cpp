#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qtikhonov/linalg.hpp"
#include "support.hpp"

using namespace qtik;
using qtik::fixtures::max_abs;

namespace {

CMatrix diag(std::initializer_list<double> d) {
  CMatrix A = CMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double v : d) A(i, i) = v, ++i;
  return A;
}

CVector vec(std::initializer_list<double> d) {
  CVector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v;
}

}  // namespace

TEST(Svd, IdentityAndDiagonal) {
  const SvdFactorization I = compute_svd(CMatrix::Identity(2, 2));
  EXPECT_NEAR(I.sigma(0), 1.0, 1e-15);
  EXPECT_NEAR(I.sigma(1), 1.0, 1e-15);

  const SvdFactorization D = compute_svd(diag({3.0, 0.0}));
  EXPECT_NEAR(D.sigma(0), 3.0, 1e-15);
  EXPECT_EQ(D.sigma(1), 0.0);
  EXPECT_EQ(D.numerical_rank(), 1);
}

TEST(Svd, RandomFactorsAreUnitaryAndReconstruct) {
  std::mt19937_64 rng(7);
  for (auto [m, n] : {std::pair{4, 3}, std::pair{3, 5}, std::pair{6, 6}}) {
    const CMatrix A = fixtures::random_complex(m, n, rng);
    const SvdFactorization s = compute_svd(A);
    EXPECT_LE((A - s.reconstruct()).norm(), 1e-10 * A.norm());
    EXPECT_LE(max_abs(s.U.adjoint() * s.U - CMatrix::Identity(m, m)), 1e-10);
    EXPECT_LE(max_abs(s.V.adjoint() * s.V - CMatrix::Identity(n, n)), 1e-10);
    for (Eigen::Index i = 1; i < s.sigma.size(); ++i) EXPECT_GE(s.sigma(i - 1), s.sigma(i));
  }
}

TEST(Svd, RejectsEmpty) { EXPECT_THROW(compute_svd(CMatrix(0, 0)), std::invalid_argument); }

TEST(Tikhonov, HalfFilterWhenSigmaEqualsMu) {
  const TikhonovSolution s = tikhonov_solve(compute_svd(CMatrix::Identity(2, 2)), vec({1, 0}), 1.0);
  EXPECT_NEAR(std::abs(s.x(0) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.x(1)), 0.0, 1e-15);
}

TEST(Tikhonov, PlainInverseAtZero) {
  const TikhonovSolution s = tikhonov_solve(compute_svd(diag({1.0, 0.5})), vec({1, 1}), 0.0);
  EXPECT_NEAR(std::abs(s.x(0) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(s.x(1) - 2.0), 0.0, 1e-14);
  EXPECT_FALSE(s.rank_deficient);
}

TEST(Tikhonov, DiagonalAgainstTermwiseSum) {
  const double sig[] = {1.0, 0.5, 0.1, 0.01};
  const double mu = 0.1;
  const TikhonovSolution s =
      tikhonov_solve(compute_svd(diag({1.0, 0.5, 0.1, 0.01})), CVector::Ones(4), mu);
  double norm2 = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double xi = sig[i] / (sig[i] * sig[i] + mu * mu);
    norm2 += xi * xi;
    EXPECT_NEAR(std::abs(s.x(i) - xi), 0.0, 1e-12);
  }
  EXPECT_NEAR(s.solution_norm, std::sqrt(norm2), 1e-12);
}

TEST(Tikhonov, NormsMatchTheVector) {
  std::mt19937_64 rng(3);
  const CMatrix A = fixtures::random_complex(5, 3, rng);
  const CVector b = fixtures::random_vector(5, rng);
  const TikhonovSolution s = tikhonov_solve(compute_svd(A), b, 0.3);
  EXPECT_NEAR(s.solution_norm, s.x.norm(), 1e-10 * s.x.norm());
  const double r = (A * s.x - b).norm();
  EXPECT_NEAR(s.residual_norm, r, 1e-10 * r);
}

TEST(Tikhonov, RankDeficientZeroMuIsPseudoinverse) {
  const TikhonovSolution s = tikhonov_solve(compute_svd(diag({2.0, 0.0})), vec({2, 1}), 0.0);
  EXPECT_TRUE(s.rank_deficient);
  EXPECT_NEAR(std::abs(s.x(0) - 1.0), 0.0, 1e-14);
  EXPECT_EQ(std::abs(s.x(1)), 0.0);
}

TEST(Tikhonov, RejectsNegativeMu) {
  EXPECT_THROW(tikhonov_solve(compute_svd(diag({1.0})), vec({1}), -1.0), std::invalid_argument);
}

TEST(Tsvd, Examples) {
  const SvdFactorization s = compute_svd(diag({2.0, 1.0}));
  const TikhonovSolution k1 = tsvd_solve(s, vec({2, 1}), 1);
  EXPECT_NEAR(std::abs(k1.x(0) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(k1.x(1)), 0.0, 1e-14);
  const TikhonovSolution k2 = tsvd_solve(s, vec({2, 1}), 2);
  EXPECT_NEAR(std::abs(k2.x(0) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(k2.x(1) - 1.0), 0.0, 1e-14);
}

TEST(Tsvd, DiagonalAgainstTermwiseSum) {
  const TikhonovSolution s =
      tsvd_solve(compute_svd(diag({1.0, 0.5, 0.1, 0.01})), CVector::Ones(4), 2);
  const double expect[] = {1.0, 2.0, 0.0, 0.0};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(s.x(i) - expect[i]), 0.0, 1e-13);
}

TEST(Tsvd, RankErrorNamesTheRank) {
  const SvdFactorization s = compute_svd(diag({1.0, 0.0, 0.0}));
  try {
    tsvd_solve(s, vec({1, 1, 1}), 2);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("rank 1"), std::string::npos) << e.what();
  }
}

TEST(Tsvd, EqualsFilterOverriddenTikhonovBitwise) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix A = fixtures::random_complex(5, 4, rng);
    const CVector b = fixtures::random_vector(5, rng);
    const SvdFactorization s = compute_svd(A);
    for (Eigen::Index k = 1; k <= 4; ++k) {
      RVector f = RVector::Zero(4);
      f.head(k).setOnes();
      const TikhonovSolution t = tsvd_solve(s, b, k);
      const TikhonovSolution o = filtered_solve(s, b, f, 0.0);
      for (Eigen::Index i = 0; i < 4; ++i) {
        EXPECT_EQ(t.x(i).real(), o.x(i).real());
        EXPECT_EQ(t.x(i).imag(), o.x(i).imag());
      }
    }
  }
}

TEST(Extended, OneByOneAtZero) {
  const ExtendedMatrix e = build_extended(diag({1.0}), 0.0);
  ASSERT_EQ(e.A_mu.rows(), 2);
  EXPECT_EQ(e.A_mu(0, 0), Complex(1.0));
  EXPECT_EQ(e.A_mu(1, 0), Complex(0.0));
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(e.dilation);
  const RVector ev = eig.eigenvalues();
  EXPECT_NEAR(ev(0), -1.0, 1e-14);
  EXPECT_NEAR(ev(1), 0.0, 1e-14);
  EXPECT_NEAR(ev(2), 1.0, 1e-14);
}

TEST(Extended, DilationSpectrum) {
  const ExtendedMatrix e = build_extended(diag({1.0, 0.5}), 0.5);
  EXPECT_LE(max_abs(e.dilation - e.dilation.adjoint()), 1e-12);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(e.dilation);
  RVector ev = eig.eigenvalues();
  const double expect[] = {-std::sqrt(1.25), -std::sqrt(0.5), 0.0, 0.0, std::sqrt(0.5), std::sqrt(1.25)};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(ev(i), expect[i], 1e-12);
}

TEST(Extended, StructureAndZeroMiddleBlock) {
  std::mt19937_64 rng(5);
  const CMatrix A = fixtures::random_complex(3, 2, rng);
  const ExtendedMatrix e = build_extended(A, 0.7);
  EXPECT_EQ(e.A_mu.topRows(3), A);
  EXPECT_LE(max_abs(e.A_mu.bottomRows(2) - 0.7 * CMatrix::Identity(2, 2)), 0.0);
  const ExtendedMatrix z = build_extended(A, 0.0);
  EXPECT_EQ(max_abs(z.dilation.block(3, 5, 2, 2)), 0.0);
  EXPECT_EQ(max_abs(z.dilation.block(5, 3, 2, 2)), 0.0);
  EXPECT_EQ(z.dilation.block(0, 5, 3, 2), A);
  EXPECT_EQ(z.dilation.block(5, 0, 2, 3), A.adjoint());
}

TEST(ConditionNumber, ClosedForms) {
  EXPECT_NEAR(condition_number_mu(compute_svd(diag({1.0, 0.5, 0.1, 0.01})), 0.1), 10.0, 1e-12);
  EXPECT_NEAR(condition_number_mu(compute_svd(diag({1.0, 0.0})), 0.5), std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(condition_number_mu(compute_svd(CMatrix::Identity(2, 2)), 0.3), 1.0, 1e-14);
  EXPECT_THROW(condition_number_mu(compute_svd(diag({1.0, 0.0})), 0.0), NumericalError);
}

TEST(ConditionNumber, MatchesStackedSvdAndNeverExceedsKappa) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const CMatrix A = fixtures::random_complex(5, 3, rng);
    const double mu = u(rng);
    const SvdFactorization s = compute_svd(A);
    const SvdFactorization st = compute_svd(stack_extended(A, mu));
    const double direct = st.sigma(0) / st.sigma(st.sigma.size() - 1);
    EXPECT_NEAR(condition_number_mu(s, mu), direct, 1e-8 * direct);
    EXPECT_LE(condition_number_mu(s, mu), s.sigma(0) / s.sigma(2) * (1 + 1e-12));
  }
}

TEST(Filters, Bounds) {
  std::mt19937_64 rng(2);
  const SvdFactorization s = compute_svd(fixtures::random_complex(4, 4, rng));
  for (double mu : {0.0, 1e-6, 0.1, 1.0, 1e6}) {
    const RVector f = tikhonov_filters(s, mu);
    EXPECT_GE(f.minCoeff(), 0.0);
    EXPECT_LE(f.maxCoeff(), 1.0);
  }
  EXPECT_NEAR(tikhonov_filters(s, 1e-9).minCoeff(), 1.0, 1e-6);
  EXPECT_NEAR(tikhonov_filters(s, 1e9).maxCoeff(), 0.0, 1e-6);
}

TEST(Filters, NormsAreMonotoneInMu) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> dim(2, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = dim(rng);
    const int m = n + dim(rng) - 2;
    const CMatrix A = fixtures::random_complex(m, n, rng);
    const CVector b = fixtures::random_vector(m, rng);
    const SvdFactorization s = compute_svd(A);
    double prev_x = INFINITY, prev_r = -INFINITY;
    for (int j = 0; j < 20; ++j) {
      const TikhonovSolution t = tikhonov_solve(s, b, 0.01 * std::pow(1.4, j));
      EXPECT_LE(t.solution_norm, prev_x * (1 + 1e-12));
      EXPECT_GE(t.residual_norm, prev_r * (1 - 1e-12));
      prev_x = t.solution_norm;
      prev_r = t.residual_norm;
    }
  }
}

TEST(Gcv, DiagonalExample) {
  EXPECT_NEAR(gcv_value(compute_svd(diag({1.0, 0.5})), vec({1, 1}), 0.5), 0.29 / 0.49, 1e-12);
}

TEST(Gcv, IdentityCollapsesToNormOverNSquared) {
  std::mt19937_64 rng(4);
  const CVector b = fixtures::random_vector(3, rng);
  for (double mu : {0.2, 1.0, 3.0}) {
    EXPECT_NEAR(gcv_value(compute_svd(CMatrix::Identity(3, 3)), b, mu), b.squaredNorm() / 9.0, 1e-12);
  }
}

TEST(Gcv, LargeMuLimit) {
  std::mt19937_64 rng(8);
  const CMatrix A = fixtures::random_complex(5, 3, rng);
  const CVector b = fixtures::random_vector(5, rng);
  EXPECT_NEAR(gcv_value(compute_svd(A), b, 1e6), b.squaredNorm() / 25.0, 1e-6);
}

TEST(Gcv, LowRankExamples) {
  const double one[] = {1.0};
  EXPECT_NEAR(gcv_lowrank(one, 0.29, 2, 2, 0.5), 7.25, 1e-12);

  const double both[] = {1.0, 0.5};
  EXPECT_NEAR(gcv_lowrank(both, 0.29, 2, 2, 0.5), gcv_value(compute_svd(diag({1.0, 0.5})), vec({1, 1}), 0.5), 1e-12);
  // mu -> 0: g -> 0.
  EXPECT_NEAR(gcv_lowrank(both, 0.4, 4, 2, 1e-9), 0.4 / 4.0, 1e-12);
}

TEST(Gcv, LowRankAtFullRankReproducesGcv) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const CMatrix A = fixtures::random_complex(6, 3, rng);
    const CVector b = fixtures::random_vector(6, rng);
    const SvdFactorization s = compute_svd(A);
    const double mu = 0.3 + 0.1 * trial;
    const TikhonovSolution t = tikhonov_solve(s, b, mu);
    const std::vector<double> sr(s.sigma.data(), s.sigma.data() + 3);
    const double g = gcv_value(s, b, mu);
    EXPECT_NEAR(gcv_lowrank(sr, t.residual_norm * t.residual_norm, 6, 3, mu), g, 1e-12 * g);
  }
}

TEST(Gcv, DenominatorEqualsExplicitTrace) {
  std::mt19937_64 rng(13);
  for (auto [m, n] : {std::pair{5, 3}, std::pair{2, 4}, std::pair{3, 3}}) {
    const CMatrix A = fixtures::random_complex(m, n, rng);
    const double mu = 0.4;
    const CMatrix H = A * (A.adjoint() * A + mu * mu * CMatrix::Identity(n, n)).inverse() * A.adjoint();
    const double trace = (CMatrix::Identity(m, m) - H).trace().real();
    EXPECT_NEAR(gcv_denominator(compute_svd(A), mu), trace, 1e-10);
  }
}

TEST(Gcv, LowRankDenominatorGoesNegativeWhenUnderdetermined) {
  const double sr[] = {1.0, 0.5};
  EXPECT_LT(gcv_lowrank_denominator(sr, 2, 4, 0.01), 0.0);
}

TEST(Problem, ValidateRejectsShapeMismatch) {
  RegularizedProblem p;
  p.A = CMatrix::Identity(2, 2);
  p.b = CVector::Ones(3);
  EXPECT_THROW(p.validate(), InputError);
  p.b = CVector::Ones(2);
  p.x_true = CVector::Ones(3);
  EXPECT_THROW(p.validate(), InputError);
}
