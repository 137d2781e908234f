#include "qtikhonov/problem.hpp"

#include <algorithm>
#include <random>

namespace qtik {

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = g(rng);
  }
  return M;
}

Eigen::VectorXd unit_gaussian(Eigen::Index size, std::mt19937_64& rng) {
  Eigen::VectorXd v = gaussian(size, 1, rng);
  return v / v.norm();
}

// Haar-style orthogonal matrix: QR of a Gaussian matrix with the signs of
// R's diagonal folded into Q.
Eigen::MatrixXd random_orthogonal(Eigen::Index size, std::mt19937_64& rng) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(size, size, rng));
  Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < size; ++i) {
    if (R(i, i) < 0.0) Q.col(i) *= -1.0;
  }
  return Q;
}

Eigen::MatrixXd spectral(Eigen::Index m, Eigen::Index n, Eigen::Index kept, double gamma,
                         std::mt19937_64& rng) {
  const Eigen::MatrixXd U = random_orthogonal(m, rng);
  const Eigen::MatrixXd V = random_orthogonal(n, rng);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, n);
  for (Eigen::Index i = 0; i < kept; ++i) S(i, i) = std::pow(gamma, static_cast<double>(i));
  return U * S * V.transpose();
}

}  // namespace

ProblemKind parse_problem_kind(const std::string& name) {
  if (name == "geometric-spectrum") return ProblemKind::GeometricSpectrum;
  if (name == "low-rank") return ProblemKind::LowRank;
  if (name == "hilbert-like") return ProblemKind::HilbertLike;
  throw InputError("unknown problem kind '" + name + "'");
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::GeometricSpectrum:
      return "geometric-spectrum";
    case ProblemKind::LowRank:
      return "low-rank";
    case ProblemKind::HilbertLike:
      return "hilbert-like";
  }
  return "?";
}

RegularizedProblem generate_problem(const ProblemSpec& spec) {
  if (spec.m < 1 || spec.n < 1) throw InputError("problem dimensions must be positive");
  if (!(spec.noise >= 0.0)) throw InputError("noise must be nonnegative");
  const Eigen::Index k = std::min(spec.m, spec.n);
  std::mt19937_64 rng(spec.seed);

  Eigen::MatrixXd A;
  switch (spec.kind) {
    case ProblemKind::GeometricSpectrum:
      if (!(spec.gamma > 0.0 && spec.gamma <= 1.0)) throw InputError("gamma must lie in (0, 1]");
      A = spectral(spec.m, spec.n, k, spec.gamma, rng);
      break;
    case ProblemKind::LowRank:
      if (spec.rank < 1 || spec.rank > k) throw InputError("rank must lie in [1, min(m, n)]");
      if (!(spec.gamma > 0.0 && spec.gamma <= 1.0)) throw InputError("gamma must lie in (0, 1]");
      A = spectral(spec.m, spec.n, spec.rank, spec.gamma, rng);
      break;
    case ProblemKind::HilbertLike:
      A.resize(spec.m, spec.n);
      for (Eigen::Index i = 0; i < spec.m; ++i) {
        for (Eigen::Index j = 0; j < spec.n; ++j) A(i, j) = 1.0 / static_cast<double>(i + j + 1);
      }
      break;
  }

  const Eigen::VectorXd x = unit_gaussian(spec.n, rng);
  const Eigen::VectorXd g = unit_gaussian(spec.m, rng);
  RegularizedProblem p;
  p.A = A.cast<Complex>();
  p.x_true = x.cast<Complex>();
  p.b = (A * x + spec.noise * g).cast<Complex>();
  p.noise_level = spec.noise;
  return p;
}

}  // namespace qtik
