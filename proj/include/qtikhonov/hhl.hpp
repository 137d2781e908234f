#pragma once

// HHL-style states for the Tikhonov problem on the dilation of (A; mu I) and
// the amplitude-estimation wrappers that read off ||x_mu|| and
// ||A x_mu - b||.
//
// Register layout, most significant first, each stage appending to the last:
//
//   [phase: n_phase_bits][system: w][flag][flag_a][selector][balance]
//
// w = ceil(log2(m + 2n)); the dilation is zero-padded to 2^w. The solution
// state uses [phase][system][flag], the A-multiplied state adds flag_a and
// the residual state adds selector and balance. The "good" branch of every
// stage is the one with all of its ancillas (phase register included) at 0.

#include <optional>
#include <random>
#include <vector>

#include "qtikhonov/amplitude_estimation.hpp"
#include "qtikhonov/linalg.hpp"
#include "qtikhonov/statevector.hpp"

namespace qtik {

struct HhlConfig {
  int n_phase_bits = 8;
  double c_tilde = 0.0;        // inversion constant, <= smallest nonzero |eigenvalue| of the dilation
  double sigma_max = 0.0;      // largest singular value of A
  double t_evolution = 0.0;    // time for exp(-i t dilation_mu)
  double t_evolution_a = 0.0;  // time for exp(-i t dilation_0), used to multiply by A

  /// Eigenvalue spacing resolved by the phase register: 2 pi / (2^n t).
  double eigen_cell() const;
  double eigen_cell_a() const;
};

/// Derives a configuration from the classical spectrum. Without `eigen_unit`
/// the largest singular value of A_mu lands on phase 2^{n-2}/2^n (and sigma_max
/// of A likewise for the multiplication pass). With `eigen_unit` = delta both
/// evolutions use t = 2 pi / (2^n delta), so spectra made of integer multiples
/// of delta are read exactly.
HhlConfig make_hhl_config(const ExtendedMatrix& ext, int n_phase_bits,
                          std::optional<double> eigen_unit = std::nullopt);

/// Throws SpectralError if the phase register cannot hold the spectrum or
/// would read the smallest nonzero eigenvalue as zero, and
/// std::invalid_argument for an inconsistent config.
void validate_config(const ExtendedMatrix& ext, const HhlConfig& cfg);

struct HhlLayout {
  int phase_bits = 0;
  int system_qubits = 0;
  Eigen::Index m = 0;
  Eigen::Index n = 0;

  int flag() const { return phase_bits + system_qubits; }
  int flag_a() const { return flag() + 1; }
  int selector() const { return flag() + 2; }
  int balance() const { return flag() + 3; }

  int solution_width() const { return flag() + 1; }
  int multiplied_width() const { return flag() + 2; }
  int residual_width() const { return flag() + 4; }

  std::vector<int> phase() const { return qubit_range(0, phase_bits); }
  std::vector<int> system() const { return qubit_range(phase_bits, system_qubits); }
  /// Every qubit except the system register, for a state of `width` qubits.
  std::vector<int> ancillas(int width) const;
};

HhlLayout hhl_layout(const ExtendedMatrix& ext, const HhlConfig& cfg);

/// b / ||b|| on the first m basis states of a `width`-qubit register.
StateVector prepare_b_state(const CVector& b, int width);

/// Phase estimation of exp(-i t dilation_mu) on |b~>, ancilla rotation by
/// C~ / lambda (lambda signed, read in two's complement), phase estimation
/// undone. Flag |0> carries C~ x_mu / ||b|| in the x-block of the system.
StateVector hhl_solution_state(const ExtendedMatrix& ext, const CVector& b, const HhlConfig& cfg);

/// Solution state followed by a second pass with exp(-i t_a dilation_0) and a
/// rotation by lambda / sigma_max on flag_a. The good branch holds
/// (C~ / sigma_max) A x_mu / ||b|| in the first m system coordinates.
StateVector apply_A_state(const ExtendedMatrix& ext, const CVector& b, const HhlConfig& cfg);

/// Three-step residual construction on top of apply_A_state. The all-ancillas
/// -zero component equals (t/2)(A x_mu - b) / ||b|| with t = min(1, C),
/// C = C~ / sigma_max.
StateVector residual_state(const ExtendedMatrix& ext, const CVector& b, const HhlConfig& cfg);

/// t = min(1, C~ / sigma_max).
double residual_scale(const HhlConfig& cfg);

/// System-register amplitudes of `state` with every ancilla at 0.
CVector good_system_vector(const StateVector& state, const HhlLayout& layout);

/// Squared norm of the flag = 0 branch of a solution state.
double flag_zero_mass(const StateVector& state, const HhlLayout& layout);

/// Amplitude estimation of one norm. value = scale * cos(theta~).
class NormEstimator {
 public:
  NormEstimator(StatePrep prep, int n_bits, double scale);

  const StatePrep& prep() const { return prep_; }
  int n_bits() const { return n_bits_; }
  double scale() const { return scale_; }

  /// scale * good amplitude: the quantity being estimated.
  double exact_value() const { return scale_ * prep_.good_amplitude(); }
  /// Value reported for folded register value v.
  double value_at(std::uint64_t folded) const;

  /// Distribution over folded outcomes 0..2^{n-1}, after median-of-K.
  RVector distribution(int repetitions = 1) const;

  double sample(std::mt19937_64& rng, int repetitions = 1) const;
  std::uint64_t queries(int repetitions = 1) const;

 private:
  StatePrep prep_;
  int n_bits_ = 0;
  double scale_ = 1.0;
};

/// Flag qubit of hhl_solution_state as the good branch, internal accuracy
/// C~ epsilon, result (alpha / C~) ||b||.
NormEstimator solution_norm_estimator(const ExtendedMatrix& ext, const CVector& b,
                                      const HhlConfig& cfg, double epsilon);

/// All ancillas of residual_state as the good branch, internal accuracy
/// epsilon t / 2, result (2 beta / t) ||b||.
NormEstimator residual_norm_estimator(const ExtendedMatrix& ext, const CVector& b,
                                      const HhlConfig& cfg, double epsilon);

double estimate_solution_norm(const ExtendedMatrix& ext, const CVector& b, const HhlConfig& cfg,
                              double epsilon, std::mt19937_64& rng);

double estimate_residual_norm(const ExtendedMatrix& ext, const CVector& b, const HhlConfig& cfg,
                              double epsilon, std::mt19937_64& rng);

struct NormEstimates {
  double solution_norm = 0.0;
  double residual_norm = 0.0;
  double epsilon = 0.0;
  std::uint64_t queries_used = 0;
};

NormEstimates estimate_norms(const ExtendedMatrix& ext, const CVector& b, const HhlConfig& cfg,
                             double epsilon, std::mt19937_64& rng, int repetitions = 1);

}  // namespace qtik
