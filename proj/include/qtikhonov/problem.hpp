#pragma once

// Seeded test-problem generators.

#include <cstdint>
#include <string>

#include "qtikhonov/linalg.hpp"

namespace qtik {

enum class ProblemKind { GeometricSpectrum, LowRank, HilbertLike };

/// "geometric-spectrum", "low-rank", "hilbert-like". Throws InputError otherwise.
ProblemKind parse_problem_kind(const std::string& name);
std::string to_string(ProblemKind kind);

struct ProblemSpec {
  ProblemKind kind = ProblemKind::GeometricSpectrum;
  Eigen::Index m = 6;
  Eigen::Index n = 4;
  double noise = 0.0;  // ||b - A x_true||
  std::uint64_t seed = 0;
  double gamma = 0.5;     // sigma_i = gamma^(i-1) for the spectral kinds
  Eigen::Index rank = 2;  // low-rank only
};

/// Geometric spectrum: random orthogonal U, V with sigma_i = gamma^(i-1).
/// Low rank: the same with only the first `rank` singular values kept.
/// Hilbert-like: a_ij = 1 / (i + j - 1). x_true is a unit Gaussian vector and
/// b = A x_true + noise g, g a unit Gaussian direction. All real.
RegularizedProblem generate_problem(const ProblemSpec& spec);

}  // namespace qtik
