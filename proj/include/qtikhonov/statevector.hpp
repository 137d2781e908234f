#pragma once

// Dense state-vector simulator.
//
// Qubit ordering: qubit 0 is the most significant bit of a basis index. A
// register made of qubits (q_0, ..., q_{k-1}) reads q_0 as its most
// significant bit as well, and registers concatenated left to right keep that
// convention. Every multi-register layout in this library is described in
// terms of this rule.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "qtikhonov/types.hpp"

namespace qtik {

inline constexpr int kMaxQubits = 24;

/// Throws CapacityError when num_qubits exceeds kMaxQubits.
void check_capacity(int num_qubits, const char* what);

/// Smallest w with 2^w >= dim (at least 1).
int qubits_for_dimension(Eigen::Index dim);

class UnitaryOp {
 public:
  /// Validates U^H U = I to `tolerance` elementwise and a power-of-two size.
  explicit UnitaryOp(CMatrix matrix, double tolerance = 1e-10);

  static UnitaryOp identity(int num_qubits);

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dimension() const { return matrix_.rows(); }
  const CMatrix& matrix() const { return matrix_; }

  UnitaryOp adjoint() const;
  /// op^power by repeated squaring; power 0 gives the identity.
  UnitaryOp power(std::uint64_t power) const;

 private:
  struct Trusted {};
  UnitaryOp(CMatrix matrix, int num_qubits, Trusted);

  CMatrix matrix_;
  int num_qubits_ = 0;
};

namespace gates {
UnitaryOp X();
UnitaryOp Y();
UnitaryOp Z();
UnitaryOp H();
/// Real rotation |0> -> cos(a)|0> + sin(a)|1>.
UnitaryOp Ry(double angle);
}  // namespace gates

class StateVector {
 public:
  /// |index> on num_qubits qubits.
  static StateVector basis(int num_qubits, std::uint64_t index = 0);
  /// Takes amplitudes as given; throws if the length is not a power of two
  /// or the norm differs from 1 by more than 1e-10.
  static StateVector from_amplitudes(CVector amplitudes);
  /// Normalizes first; throws on a zero vector.
  static StateVector normalized(CVector amplitudes);

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dimension() const { return amplitudes_.size(); }
  const CVector& amplitudes() const { return amplitudes_; }
  Complex amplitude(std::uint64_t index) const { return amplitudes_(static_cast<Eigen::Index>(index)); }
  double norm() const { return amplitudes_.norm(); }

  /// |this> (x) |other>, this register first.
  StateVector tensor(const StateVector& other) const;

 private:
  StateVector(CVector amplitudes, int num_qubits);
  CVector amplitudes_;
  int num_qubits_ = 0;

  friend StateVector unchecked_state(CVector amplitudes, int num_qubits);
};

/// Wraps amplitudes without the normalization check. For intermediate
/// results of unitary maps whose inputs were already validated.
StateVector unchecked_state(CVector amplitudes, int num_qubits);

/// Applies op to the listed qubits (targets[0] is the op's most significant
/// qubit). Throws std::invalid_argument on dimension mismatch, duplicates or
/// out-of-range targets.
StateVector apply(const StateVector& state, const UnitaryOp& op, std::span<const int> targets);

/// Applies op to `targets` on the subspace where every control qubit is 1.
StateVector apply_controlled(const StateVector& state, const UnitaryOp& op,
                             std::span<const int> controls, std::span<const int> targets);

/// Block-diagonal (I, op^power) with the control as the most significant qubit.
UnitaryOp controlled(const UnitaryOp& op, std::uint64_t power = 1);

/// DFT on n qubits: entries w^{jk} / sqrt(2^n), w = exp(2 pi i / 2^n). The
/// inverse is the conjugate transpose.
UnitaryOp qft(int n, bool inverse = false);

/// exp(-i H t) through an eigendecomposition. Throws std::invalid_argument
/// when H is not Hermitian to 1e-10.
UnitaryOp hamiltonian_evolution(const CMatrix& H, double t);

/// Supplies op^power for the controlled ladder of phase estimation. Lets
/// callers with a closed form (e.g. exp(-iHt 2^j)) avoid repeated squaring.
using PowerOracle = std::function<UnitaryOp(std::uint64_t power)>;

/// Forward phase estimation on sub-registers of a larger state: Hadamards on
/// `phase`, controlled-U^{2^(n-1-j)} from phase qubit j onto `system`,
/// inverse QFT on `phase`. With eigenvalue exp(2 pi i y / 2^n) the phase
/// register reads |y>.
StateVector phase_estimation_on(const StateVector& state, const PowerOracle& powers,
                                std::span<const int> phase, std::span<const int> system);

/// Exact inverse of phase_estimation_on.
StateVector inverse_phase_estimation_on(const StateVector& state, const PowerOracle& powers,
                                        std::span<const int> phase,
                                        std::span<const int> system);

/// |0>^{n_bits} (x) input followed by phase estimation of op. The phase
/// register comes first in the output.
StateVector phase_estimation(const UnitaryOp& op, const StateVector& input, int n_bits);

/// Controlled applications of the base operator in one phase-estimation pass.
std::uint64_t phase_estimation_queries(int n_bits);

/// Marginal Born distribution over the listed qubits, indexed by the
/// register value (qubits[0] most significant).
RVector marginal_probabilities(const StateVector& state, std::span<const int> qubits);

struct Measurement {
  std::uint64_t outcome = 0;  // qubits[0] most significant
  StateVector collapsed;
};

Measurement measure(const StateVector& state, std::span<const int> qubits, std::mt19937_64& rng);

/// Samples an index from a discrete distribution (weights need not sum to 1).
std::size_t sample_index(std::span<const double> weights, std::mt19937_64& rng);

/// 0, 1, ..., count-1 shifted by `first`.
std::vector<int> qubit_range(int first, int count);

}  // namespace qtik
