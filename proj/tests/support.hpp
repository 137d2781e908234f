#pragma once

// Shared problem builders for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "qtikhonov/linalg.hpp"
#include "qtikhonov/param_search.hpp"

namespace qtik::fixtures {

inline Eigen::MatrixXd random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = g(rng);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  return qr.householderQ();
}

inline CMatrix random_complex(Eigen::Index m, Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix A(m, n);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = {g(rng), g(rng)};
  return A;
}

inline CVector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  return random_complex(n, 1, rng).col(0);
}

/// U diag(sigma) V^T with random orthogonal U (m x m) and V (n x n).
inline CMatrix with_spectrum(Eigen::Index m, const std::vector<double>& sigma, std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(sigma.size());
  const Eigen::MatrixXd U = random_orthogonal(m, rng);
  const Eigen::MatrixXd V = random_orthogonal(n, rng);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, n);
  for (Eigen::Index i = 0; i < n; ++i) S(i, i) = sigma[static_cast<std::size_t>(i)];
  return (U * S * V.transpose()).cast<Complex>();
}

/// Problems whose HHL spectra are exact at mu = 12 delta: singular values
/// drawn from {5, 9, 16, 35} delta, so sqrt(sigma^2 + mu^2) is one of
/// {13, 15, 20, 37} delta. delta = 1/37 keeps sigma_max below 1.
struct DyadicProblem {
  CMatrix A;
  CVector b;
  double mu = 0.0;
  double delta = 0.0;
  int phase_bits = 7;
};

inline DyadicProblem dyadic_problem(Eigen::Index m, Eigen::Index n, std::mt19937_64& rng) {
  static const double legs[] = {35.0, 16.0, 9.0, 5.0};
  DyadicProblem p;
  p.delta = 1.0 / 37.0;
  p.mu = 12.0 * p.delta;
  std::vector<double> sigma;
  for (Eigen::Index i = 0; i < n; ++i) sigma.push_back(legs[i] * p.delta);
  p.A = with_spectrum(m, sigma, rng);
  p.b = random_vector(m, rng);
  return p;
}

/// Right-hand side on the top left singular vector plus a component outside
/// range(A) (m > n). The HHL readout is then exact at every mu with the
/// default configuration, since only the largest extended singular value and
/// zero are excited.
struct TopModeProblem {
  CMatrix A;
  CVector b;
};

inline TopModeProblem top_mode_problem(Eigen::Index m, Eigen::Index n, std::mt19937_64& rng) {
  static const double pool[] = {0.75, 0.5, 0.25};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::MatrixXd U = random_orthogonal(m, rng);
  const Eigen::MatrixXd V = random_orthogonal(n, rng);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, n);
  S(0, 0) = 1.0;
  for (Eigen::Index i = 1; i < n; ++i) S(i, i) = pool[i - 1];
  const double beta = 0.5 + 0.5 * u(rng);
  const double gamma = 0.1 + 0.6 * u(rng);
  TopModeProblem p;
  p.A = (U * S * V.transpose()).cast<Complex>();
  p.b = (beta * U.col(0) + gamma * U.col(n)).cast<Complex>();
  return p;
}

inline double max_abs(const CMatrix& M) { return M.cwiseAbs().maxCoeff(); }

inline double second_smallest_gap(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.size() > 1 ? v[1] - v[0] : std::numeric_limits<double>::infinity();
}

/// A top-mode problem with a grid and estimator accuracies small enough that
/// the estimated criteria cannot reorder the classical minimum.
///
/// L-curve: each norm is off by at most e = epsilon ||b||, so the criterion
/// moves by at most 2 e max(||x|| + ||r||) + 2 e^2; keep that under half the
/// gap between the two smallest values.
/// GCV: with residual error e the value moves by (2 r e + e^2) / den^2; same
/// bound with the smallest denominator.
struct SeparationCase {
  RegularizedProblem problem;
  ParameterGrid grid;
  Eigen::Index rank = 0;
  SelectionResult lcurve_oracle;
  SelectionResult gcv_oracle;
  PipelineOptions lcurve_options;
  PipelineOptions gcv_options;
};

inline SeparationCase separation_case(int seed) {
  std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(seed));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::Index m = 4 + seed % 2, n = 2 + (seed / 2) % 2;
  TopModeProblem tp = top_mode_problem(m, n, rng);
  SeparationCase c;
  c.problem.A = tp.A;
  c.problem.b = tp.b;
  c.rank = n;
  c.grid = make_grid(0.25 + 1.75 * u(rng), 0.8, 8);
  const double nb = tp.b.norm();

  c.lcurve_oracle = classical_select(c.problem, c.grid, Criterion::LCurveSum);
  double reach = 0.0;
  for (const auto& pt : c.lcurve_oracle.points) {
    reach = std::max(reach, pt.residual_norm + pt.solution_norm);
  }
  const double gap_l = second_smallest_gap(c.lcurve_oracle.criterion_values);
  c.lcurve_options.epsilon = 0.9 * (gap_l / 2) / (2 * nb * reach + 2 * nb * nb) / nb;

  CriterionOptions co;
  co.rank = n;
  c.gcv_oracle = classical_select(c.problem, c.grid, Criterion::GcvLowRank, co);
  double dmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (double d : c.gcv_oracle.gcv_denominators) dmin = std::min(dmin, d);
  for (const auto& pt : c.gcv_oracle.points) rmax = std::max(rmax, pt.residual_norm);
  const double gap_g = second_smallest_gap(c.gcv_oracle.criterion_values);
  c.gcv_options.epsilon = 0.9 * (gap_g / 2) * dmin * dmin / (2 * rmax + nb) / nb;
  c.gcv_options.extraction_mu = 0.0;
  c.gcv_options.shots = 200;
  return c;
}

/// diag(1, 0.5, 0.05) with a unit solution and 1e-2 noise on b.
inline RegularizedProblem noisy_diagonal_problem(std::mt19937_64& rng) {
  RegularizedProblem p;
  p.A = CMatrix::Zero(3, 3);
  p.A(0, 0) = 1.0;
  p.A(1, 1) = 0.5;
  p.A(2, 2) = 0.05;
  const CVector x = random_vector(3, rng).normalized();
  const CVector g = random_vector(3, rng).normalized();
  p.b = p.A * x + 1e-2 * g;
  p.noise_level = 1e-2;
  p.x_true = x;
  return p;
}

/// Rank-2 6 x 6 matrix (sigma = 1, 0.5) and a consistent b with 1% noise.
inline RegularizedProblem noisy_low_rank_problem(std::mt19937_64& rng) {
  RegularizedProblem p;
  p.A = with_spectrum(6, {1.0, 0.5, 0.0, 0.0, 0.0, 0.0}, rng);
  const CVector x = random_vector(6, rng);
  const CVector g = random_vector(6, rng);
  p.b = p.A * x;
  p.b += 0.01 * p.b.norm() * g / g.norm();
  return p;
}

}  // namespace qtik::fixtures
