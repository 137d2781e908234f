#pragma once

// Classical Tikhonov/TSVD mathematics on dense complex matrices. Everything in
// this header is exact up to floating point and serves as the oracle for the
// simulated quantum procedures.

#include <optional>
#include <span>

#include "qtikhonov/types.hpp"

namespace qtik {

/// Singular values at or below this fraction of sigma_max count as zero.
inline constexpr double kRankTolerance = 1e-12;

struct RegularizedProblem {
  CMatrix A;
  CVector b;
  std::optional<double> noise_level;
  std::optional<CVector> x_true;

  Eigen::Index rows() const { return A.rows(); }
  Eigen::Index cols() const { return A.cols(); }

  /// Throws InputError when the shapes disagree.
  void validate() const;
};

struct SvdFactorization {
  CMatrix U;      // m x m
  RVector sigma;  // min(m, n), descending
  CMatrix V;      // n x n

  Eigen::Index rows() const { return U.rows(); }
  Eigen::Index cols() const { return V.rows(); }
  double sigma_max() const { return sigma.size() ? sigma(0) : 0.0; }

  /// Number of singular values above kRankTolerance * sigma_max.
  Eigen::Index numerical_rank() const;
  bool full_column_rank() const { return rows() >= cols() && numerical_rank() == cols(); }

  /// U * diag(sigma) * V^H.
  CMatrix reconstruct() const;
};

struct TikhonovSolution {
  double mu = 0.0;
  CVector x;
  double solution_norm = 0.0;
  double residual_norm = 0.0;
  // Set when mu = 0 and A has zero singular values; x is then the
  // pseudoinverse solution.
  bool rank_deficient = false;
};

struct ExtendedMatrix {
  double mu = 0.0;
  CMatrix A_mu;      // (m + n) x n, A stacked over mu * I
  CMatrix dilation;  // (m + 2n) x (m + 2n), ((0,0,A),(0,0,muI),(A^H,muI,0))
  double kappa_mu = 0.0;  // +inf when mu = 0 and A is rank deficient

  Eigen::Index rows() const { return A_mu.rows() - A_mu.cols(); }
  Eigen::Index cols() const { return A_mu.cols(); }
};

SvdFactorization compute_svd(const CMatrix& A);

/// Tikhonov filter factors sigma_i^2 / (sigma_i^2 + mu^2), one per column of A.
/// Columns beyond min(m, n) and numerically-zero sigma_i get 0.
RVector tikhonov_filters(const SvdFactorization& svd, double mu);

/// x = sum_i filters_i * (u_i^H b / sigma_i) v_i over the numerically nonzero
/// modes. Tikhonov and TSVD both route through here so that they share the
/// exact same summation terms.
TikhonovSolution filtered_solve(const SvdFactorization& svd, const CVector& b,
                                const RVector& filters, double mu);

TikhonovSolution tikhonov_solve(const SvdFactorization& svd, const CVector& b, double mu);

/// Keeps the k largest singular triplets. Throws NumericalError when k
/// exceeds the numerical rank.
TikhonovSolution tsvd_solve(const SvdFactorization& svd, const CVector& b, Eigen::Index k);

/// ||A x - b|| evaluated through the factorization.
double residual_norm(const SvdFactorization& svd, const CVector& b, const CVector& x);

/// Stacked (A; mu I).
CMatrix stack_extended(const CMatrix& A, double mu);

/// Hermitian dilation of (A; mu I) in the three-block layout.
CMatrix hermitian_dilation(const CMatrix& A, double mu);

ExtendedMatrix build_extended(const CMatrix& A, double mu);
ExtendedMatrix build_extended(const CMatrix& A, const SvdFactorization& svd, double mu);

/// kappa(A_mu). Full column rank: sqrt((smax^2 + mu^2) / (s_n^2 + mu^2));
/// otherwise sqrt((smax^2 + mu^2) / mu^2). Throws NumericalError when mu = 0
/// and A is rank deficient.
double condition_number_mu(const SvdFactorization& svd, double mu);

/// Singular values of A_mu: sqrt(sigma_i^2 + mu^2) for i = 1..n, with
/// sigma_i = 0 beyond min(m, n). Descending.
RVector extended_singular_values(const SvdFactorization& svd, double mu);

/// m - n + sum_{i=1}^{n} mu^2 / (sigma_i^2 + mu^2). Missing sigma_i (m < n) are 0.
double gcv_denominator(const SvdFactorization& svd, double mu);

/// ||A x_mu - b||^2 / denominator^2. Throws NumericalError when the
/// denominator vanishes. A nonpositive denominator is still evaluated;
/// callers that care check gcv_denominator.
double gcv_value(const SvdFactorization& svd, const CVector& b, double mu);

/// m - n + sum over the supplied singular values only.
double gcv_lowrank_denominator(std::span<const double> sigma_r, Eigen::Index m, Eigen::Index n,
                               double mu);

double gcv_lowrank(std::span<const double> sigma_r, double residual_sq, Eigen::Index m,
                   Eigen::Index n, double mu);

}  // namespace qtik
