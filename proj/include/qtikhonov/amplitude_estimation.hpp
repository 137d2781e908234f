#pragma once

// Amplitude estimation by phase estimation on the Grover rotation
// G = (2|phi><phi| - I)(Z (x) I), plus the coherent "estimate into a register"
// variants used by the parameter search.
//
// A StatePrep splits |phi> = cos(theta)|good> + sin(theta)|bad>, where the
// good branch is the subspace with every flag qubit at |0>. G preserves the
// plane spanned by |good> and |bad> and acts there as a rotation by 2 theta,
// so phase estimation started from |0...0>|phi> never leaves
// (phase register) (x) span{|good>, |bad>}. The routines below simulate in
// that 2^n x 2 coordinate system and lift to the full register on demand;
// the lift agrees with the gate-level circuit on the dense G (see tests).

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "qtikhonov/statevector.hpp"

namespace qtik {

/// Signed two's-complement fixed point. The default, 2 integer bits (sign
/// included) and 16 fraction bits, covers [-2, 2).
struct FixedPointFormat {
  int integer_bits = 2;
  int fraction_bits = 16;

  int width() const { return integer_bits + fraction_bits; }
  double resolution() const;
  double min_value() const;
  double max_value() const;  // largest representable value
};

struct EncodedValue {
  std::uint64_t code = 0;
  bool saturated = false;
};

EncodedValue encode_fixed(double value, const FixedPointFormat& fmt);
double decode_fixed(std::uint64_t code, const FixedPointFormat& fmt);

class StatePrep {
 public:
  /// |phi> = U|0...0>. Rejects non-unitary U.
  static StatePrep from_unitary(UnitaryOp unitary, std::vector<int> flag_qubits);
  static StatePrep from_unitary(UnitaryOp unitary, int flag_qubit);
  /// For preparations given as a circuit that was simulated to produce |phi>.
  static StatePrep from_state(StateVector phi, std::vector<int> flag_qubits);
  static StatePrep from_state(StateVector phi, int flag_qubit);

  int num_qubits() const { return phi_.num_qubits(); }
  const StateVector& state() const { return phi_; }
  const std::optional<UnitaryOp>& unitary() const { return unitary_; }
  std::span<const int> flag_qubits() const { return flags_; }

  /// True when every flag qubit of basis state `index` is 0.
  bool is_good(std::uint64_t index) const { return (index & flag_mask_) == 0; }

  /// cos(theta) = || good component ||.
  double good_amplitude() const { return good_amplitude_; }
  double theta() const;

  CVector good_component() const;
  CVector bad_component() const;

 private:
  StatePrep(StateVector phi, std::optional<UnitaryOp> unitary, std::vector<int> flags);

  StateVector phi_;
  std::optional<UnitaryOp> unitary_;
  std::vector<int> flags_;
  std::uint64_t flag_mask_ = 0;
  double good_amplitude_ = 0.0;
};

struct AmplitudeEstimate {
  double theta_tilde = 0.0;        // in [0, pi/2]
  int n_bits = 0;
  std::uint64_t raw_register = 0;  // phase-register outcome behind theta_tilde
  double probability_estimate = 0.0;  // sin^2(theta_tilde)
  int repetitions = 1;
  std::uint64_t queries = 0;       // controlled-G applications
};

/// Dense G for preparations of up to 8 qubits.
UnitaryOp grover_operator(const StatePrep& prep);

/// ceil(log2(pi / epsilon)) + 2 phase bits for additive angle accuracy epsilon.
int bits_for_accuracy(double epsilon);

/// min(y, 2^n - y) * pi / 2^n.
double fold_theta(std::uint64_t y, int n_bits);
std::uint64_t fold_register(std::uint64_t y, int n_bits);

/// Exact phase-register distribution of QPE on G from |0>|phi>, indexed by
/// the raw register value y.
RVector qpe_register_distribution(double theta, int n_bits);
RVector qpe_register_distribution(const StatePrep& prep, int n_bits);

/// Distribution over folded values v = 0..2^{n-1} (theta_tilde = v pi / 2^n).
RVector folded_distribution(double theta, int n_bits);

/// Distribution of the median of `repetitions` independent folded outcomes.
RVector median_distribution(const RVector& folded, int repetitions);

/// Full phase (x) prep state after QPE on G, built through the invariant plane.
StateVector grover_qpe_state(const StatePrep& prep, int n_bits);

/// Same state through the gate-level ladder on the dense G.
StateVector grover_qpe_state_gate_level(const StatePrep& prep, int n_bits);

/// QPE on G, measurement of the phase register, branch folding. With
/// repetitions > 1 (odd) the median folded outcome is reported.
AmplitudeEstimate estimate_theta(const StatePrep& prep, int n_bits, std::mt19937_64& rng,
                                 int repetitions = 1);

using RealFunction = std::function<double(double)>;

/// Output of |phi>|0> -> |phi>|f(cos theta_tilde)>: QPE on G, f evaluated
/// into a fixed-point register, QPE undone. Register layout for
/// to_statevector(): [phase n_bits][prep qubits][function register].
class CoherentEstimate {
 public:
  using PlaneCoefficients = Eigen::Matrix<Complex, Eigen::Dynamic, 2>;

  int n_bits() const { return n_bits_; }
  const FixedPointFormat& format() const { return format_; }
  int prep_qubits() const { return prep_qubits_; }
  bool saturated() const { return saturated_; }

  /// Function-register code -> its coefficients on (phase) (x) {good, bad}.
  const std::map<std::uint64_t, PlaneCoefficients>& branches() const { return branches_; }

  /// Probability of each function-register code.
  std::map<std::uint64_t, double> code_probabilities() const;

  /// <0...0, phi, code | state>.
  Complex input_overlap(std::uint64_t code) const;

  /// Amplitude vector restricted to function-register value `code`, over
  /// [phase][prep].
  CVector branch_vector(std::uint64_t code) const;

  double norm() const;

  /// Dense form. Throws CapacityError above the simulator width.
  StateVector to_statevector() const;

 private:
  friend CoherentEstimate coherent_estimate(const StatePrep&, const RealFunction&, int,
                                            const FixedPointFormat&);
  int n_bits_ = 0;
  int prep_qubits_ = 0;
  double theta_ = 0.0;
  FixedPointFormat format_;
  CVector good_basis_;
  CVector bad_basis_;
  std::map<std::uint64_t, PlaneCoefficients> branches_;
  bool saturated_ = false;
};

CoherentEstimate coherent_estimate(const StatePrep& prep, const RealFunction& f, int n_bits,
                                   const FixedPointFormat& format = {});

struct JointOutcome {
  std::size_t index = 0;
  std::uint64_t code = 0;
  double probability = 0.0;
};

/// sum_j w_j |j>|phi_j>|f_j(cos theta_j)>. Layout for to_statevector():
/// [index][phase][prep][function register].
class ParallelEstimate {
 public:
  int index_bits() const { return index_bits_; }
  const CVector& weights() const { return weights_; }
  const std::vector<CoherentEstimate>& branches() const { return branches_; }

  /// Born distribution over (index register, function register).
  std::vector<JointOutcome> joint_distribution() const;

  StateVector to_statevector() const;

 private:
  friend ParallelEstimate parallel_estimate(std::span<const StatePrep>,
                                            std::span<const RealFunction>, const CVector&, int,
                                            const FixedPointFormat&);
  int index_bits_ = 0;
  CVector weights_;
  std::vector<CoherentEstimate> branches_;
};

ParallelEstimate parallel_estimate(std::span<const StatePrep> preps,
                                   std::span<const RealFunction> fs, const CVector& weights,
                                   int n_bits, const FixedPointFormat& format = {});

}  // namespace qtik
