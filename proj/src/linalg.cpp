#include "qtikhonov/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace qtik {

namespace {

void require_nonnegative_mu(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw std::invalid_argument("regularization parameter must be finite and >= 0, got " +
                                std::to_string(mu));
  }
}

void require_rhs(const SvdFactorization& svd, const CVector& b) {
  if (b.size() != svd.rows()) {
    std::ostringstream os;
    os << "right-hand side has " << b.size() << " entries, expected " << svd.rows();
    throw InputError(os.str());
  }
}

}  // namespace

void RegularizedProblem::validate() const {
  if (A.rows() < 1 || A.cols() < 1) {
    throw InputError("matrix A must be nonempty");
  }
  if (b.size() != A.rows()) {
    std::ostringstream os;
    os << "b has " << b.size() << " entries but A has " << A.rows() << " rows";
    throw InputError(os.str());
  }
  if (x_true && x_true->size() != A.cols()) {
    std::ostringstream os;
    os << "x_true has " << x_true->size() << " entries but A has " << A.cols() << " columns";
    throw InputError(os.str());
  }
  if (noise_level && !(*noise_level >= 0.0)) {
    throw InputError("noise level must be nonnegative");
  }
}

Eigen::Index SvdFactorization::numerical_rank() const {
  if (sigma.size() == 0) return 0;
  const double cutoff = kRankTolerance * sigma(0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) ++r;
  }
  return r;
}

CMatrix SvdFactorization::reconstruct() const {
  const Eigen::Index k = sigma.size();
  return U.leftCols(k) * sigma.cast<Complex>().asDiagonal() * V.leftCols(k).adjoint();
}

SvdFactorization compute_svd(const CMatrix& A) {
  if (A.rows() == 0 || A.cols() == 0) {
    throw std::invalid_argument("compute_svd: matrix must be nonempty");
  }
  Eigen::JacobiSVD<CMatrix> solver(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  auto fail = [&](const char* what) {
    std::ostringstream os;
    os << "SVD of " << A.rows() << "x" << A.cols() << " matrix failed: " << what;
    return NumericalError(os.str());
  };
  if (solver.info() != Eigen::Success) throw fail("no convergence");

  SvdFactorization svd{solver.matrixU(), solver.singularValues(), solver.matrixV()};

  const double scale = A.norm();
  if (!svd.sigma.allFinite() || (svd.reconstruct() - A).norm() > 1e-10 * std::max(scale, 1e-300)) {
    throw fail("reconstruction check");
  }
  return svd;
}

RVector tikhonov_filters(const SvdFactorization& svd, double mu) {
  require_nonnegative_mu(mu);
  const Eigen::Index n = svd.cols();
  const Eigen::Index rank = svd.numerical_rank();
  RVector f = RVector::Zero(n);
  const double mu2 = mu * mu;
  for (Eigen::Index i = 0; i < rank; ++i) {
    const double s2 = svd.sigma(i) * svd.sigma(i);
    f(i) = s2 / (s2 + mu2);
  }
  return f;
}

double residual_norm(const SvdFactorization& svd, const CVector& b, const CVector& x) {
  const Eigen::Index k = svd.sigma.size();
  CVector coeff = CVector::Zero(svd.rows());
  coeff.head(k) = svd.sigma.cast<Complex>().cwiseProduct(svd.V.leftCols(k).adjoint() * x);
  return (svd.U * coeff - b).norm();
}

TikhonovSolution filtered_solve(const SvdFactorization& svd, const CVector& b,
                                const RVector& filters, double mu) {
  require_rhs(svd, b);
  if (filters.size() != svd.cols()) {
    throw std::invalid_argument("filtered_solve: one filter factor per column required");
  }
  const Eigen::Index rank = svd.numerical_rank();
  CVector x = CVector::Zero(svd.cols());
  for (Eigen::Index i = 0; i < rank; ++i) {
    const Complex beta = svd.U.col(i).dot(b);  // u_i^H b
    const Complex coeff = filters(i) * (beta / svd.sigma(i));
    x += coeff * svd.V.col(i);
  }
  TikhonovSolution sol;
  sol.mu = mu;
  sol.solution_norm = x.norm();
  sol.residual_norm = residual_norm(svd, b, x);
  sol.rank_deficient = mu == 0.0 && rank < svd.cols();
  sol.x = std::move(x);
  return sol;
}

TikhonovSolution tikhonov_solve(const SvdFactorization& svd, const CVector& b, double mu) {
  return filtered_solve(svd, b, tikhonov_filters(svd, mu), mu);
}

TikhonovSolution tsvd_solve(const SvdFactorization& svd, const CVector& b, Eigen::Index k) {
  const Eigen::Index rank = svd.numerical_rank();
  if (k < 1 || k > rank) {
    std::ostringstream os;
    os << "TSVD truncation k = " << k << " outside [1, " << rank << "] (numerical rank " << rank
       << ")";
    throw NumericalError(os.str());
  }
  RVector f = RVector::Zero(svd.cols());
  f.head(k).setOnes();
  auto sol = filtered_solve(svd, b, f, 0.0);
  sol.rank_deficient = false;
  return sol;
}

CMatrix stack_extended(const CMatrix& A, double mu) {
  require_nonnegative_mu(mu);
  const Eigen::Index m = A.rows(), n = A.cols();
  CMatrix A_mu = CMatrix::Zero(m + n, n);
  A_mu.topRows(m) = A;
  A_mu.bottomRows(n).diagonal().setConstant(Complex(mu, 0.0));
  return A_mu;
}

CMatrix hermitian_dilation(const CMatrix& A, double mu) {
  require_nonnegative_mu(mu);
  const Eigen::Index m = A.rows(), n = A.cols();
  const Eigen::Index dim = m + 2 * n;
  CMatrix D = CMatrix::Zero(dim, dim);
  D.block(0, m + n, m, n) = A;
  D.block(m + n, 0, n, m) = A.adjoint();
  for (Eigen::Index i = 0; i < n; ++i) {
    D(m + i, m + n + i) = mu;
    D(m + n + i, m + i) = mu;
  }
  return D;
}

ExtendedMatrix build_extended(const CMatrix& A, const SvdFactorization& svd, double mu) {
  if (svd.rows() != A.rows() || svd.cols() != A.cols()) {
    throw std::invalid_argument("build_extended: factorization does not match A");
  }
  ExtendedMatrix ext;
  ext.mu = mu;
  ext.A_mu = stack_extended(A, mu);
  ext.dilation = hermitian_dilation(A, mu);
  if (mu == 0.0 && !svd.full_column_rank()) {
    ext.kappa_mu = std::numeric_limits<double>::infinity();
  } else {
    ext.kappa_mu = condition_number_mu(svd, mu);
  }
  return ext;
}

ExtendedMatrix build_extended(const CMatrix& A, double mu) {
  return build_extended(A, compute_svd(A), mu);
}

double condition_number_mu(const SvdFactorization& svd, double mu) {
  require_nonnegative_mu(mu);
  const double smax2 = svd.sigma_max() * svd.sigma_max();
  const double mu2 = mu * mu;
  if (svd.full_column_rank()) {
    const double sn = svd.sigma(svd.cols() - 1);
    return std::sqrt((smax2 + mu2) / (sn * sn + mu2));
  }
  if (mu == 0.0) {
    std::ostringstream os;
    os << "condition number of A_mu is infinite: mu = 0 and A (" << svd.rows() << "x"
       << svd.cols() << ") has numerical rank " << svd.numerical_rank();
    throw NumericalError(os.str());
  }
  return std::sqrt((smax2 + mu2) / mu2);
}

RVector extended_singular_values(const SvdFactorization& svd, double mu) {
  require_nonnegative_mu(mu);
  const Eigen::Index n = svd.cols();
  RVector s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double si = i < svd.sigma.size() ? svd.sigma(i) : 0.0;
    s(i) = std::sqrt(si * si + mu * mu);
  }
  return s;
}

double gcv_denominator(const SvdFactorization& svd, double mu) {
  const Eigen::Index n = svd.cols();
  std::vector<double> sig(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < svd.sigma.size(); ++i) sig[static_cast<std::size_t>(i)] = svd.sigma(i);
  return gcv_lowrank_denominator(sig, svd.rows(), n, mu);
}

double gcv_value(const SvdFactorization& svd, const CVector& b, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("gcv_value requires mu > 0");
  const double res = tikhonov_solve(svd, b, mu).residual_norm;
  const double den = gcv_denominator(svd, mu);
  if (den == 0.0) {
    throw NumericalError("GCV denominator vanishes at mu = " + std::to_string(mu));
  }
  return res * res / (den * den);
}

double gcv_lowrank_denominator(std::span<const double> sigma_r, Eigen::Index m, Eigen::Index n,
                               double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("GCV requires mu > 0");
  const double mu2 = mu * mu;
  double g = 0.0;
  for (double s : sigma_r) g += mu2 / (s * s + mu2);
  return static_cast<double>(m - n) + g;
}

double gcv_lowrank(std::span<const double> sigma_r, double residual_sq, Eigen::Index m,
                   Eigen::Index n, double mu) {
  const double den = gcv_lowrank_denominator(sigma_r, m, n, mu);
  if (den == 0.0) {
    throw NumericalError("GCV denominator vanishes at mu = " + std::to_string(mu));
  }
  return residual_sq / (den * den);
}

}  // namespace qtik
