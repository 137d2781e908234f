#include "qtikhonov/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace qtik {

namespace {

bool is_power_of_two(Eigen::Index d) { return d > 0 && (d & (d - 1)) == 0; }

int log2_exact(Eigen::Index d) {
  int k = 0;
  while ((Eigen::Index{1} << k) < d) ++k;
  return k;
}

// Bit position of qubit q inside an n-qubit basis index.
inline std::uint64_t bit_of(int n, int q) { return std::uint64_t{1} << (n - 1 - q); }

void check_targets(int n, std::span<const int> qubits, const char* what) {
  std::vector<int> seen(qubits.begin(), qubits.end());
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
    throw std::invalid_argument(std::string(what) + ": duplicate qubit index");
  }
  for (int q : qubits) {
    if (q < 0 || q >= n) {
      std::ostringstream os;
      os << what << ": qubit " << q << " out of range for a " << n << "-qubit state";
      throw std::invalid_argument(os.str());
    }
  }
}

// Shared kernel for apply / apply_controlled.
CVector apply_kernel(const CVector& amps, int n, const CMatrix& m, std::span<const int> controls,
                     std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  const std::uint64_t local_dim = std::uint64_t{1} << k;
  std::vector<std::uint64_t> offset(local_dim, 0);
  std::uint64_t target_mask = 0;
  for (int i = 0; i < k; ++i) target_mask |= bit_of(n, targets[i]);
  for (std::uint64_t l = 0; l < local_dim; ++l) {
    std::uint64_t off = 0;
    for (int i = 0; i < k; ++i) {
      if ((l >> (k - 1 - i)) & 1U) off |= bit_of(n, targets[i]);
    }
    offset[l] = off;
  }
  std::uint64_t control_mask = 0;
  for (int c : controls) control_mask |= bit_of(n, c);

  CVector out = amps;
  CVector in(static_cast<Eigen::Index>(local_dim));
  CVector res(static_cast<Eigen::Index>(local_dim));
  const std::uint64_t total = static_cast<std::uint64_t>(amps.size());
  for (std::uint64_t base = 0; base < total; ++base) {
    if ((base & target_mask) != 0 || (base & control_mask) != control_mask) continue;
    for (std::uint64_t l = 0; l < local_dim; ++l) {
      in(static_cast<Eigen::Index>(l)) = amps(static_cast<Eigen::Index>(base | offset[l]));
    }
    res.noalias() = m * in;
    for (std::uint64_t l = 0; l < local_dim; ++l) {
      out(static_cast<Eigen::Index>(base | offset[l])) = res(static_cast<Eigen::Index>(l));
    }
  }
  return out;
}

}  // namespace

void check_capacity(int num_qubits, const char* what) {
  if (num_qubits > kMaxQubits) {
    std::ostringstream os;
    os << what << ": " << num_qubits << " qubits requested, simulator limit is " << kMaxQubits;
    throw CapacityError(os.str());
  }
}

int qubits_for_dimension(Eigen::Index dim) { return std::max(1, log2_exact(dim)); }

std::vector<int> qubit_range(int first, int count) {
  std::vector<int> q(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) q[static_cast<std::size_t>(i)] = first + i;
  return q;
}

// ---------------------------------------------------------------------------
// UnitaryOp

UnitaryOp::UnitaryOp(CMatrix matrix, double tolerance) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || !is_power_of_two(matrix_.rows()) || matrix_.rows() < 2) {
    std::ostringstream os;
    os << "unitary must be square with a power-of-two dimension >= 2, got " << matrix_.rows()
       << "x" << matrix_.cols();
    throw std::invalid_argument(os.str());
  }
  const Eigen::Index d = matrix_.rows();
  const double dev = (matrix_.adjoint() * matrix_ - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (!(dev <= tolerance)) {
    std::ostringstream os;
    os << "matrix is not unitary: max |U^H U - I| = " << dev;
    throw std::invalid_argument(os.str());
  }
  num_qubits_ = log2_exact(d);
}

UnitaryOp::UnitaryOp(CMatrix matrix, int num_qubits, Trusted)
    : matrix_(std::move(matrix)), num_qubits_(num_qubits) {}

UnitaryOp UnitaryOp::identity(int num_qubits) {
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  return UnitaryOp(CMatrix::Identity(d, d), num_qubits, Trusted{});
}

UnitaryOp UnitaryOp::adjoint() const { return UnitaryOp(matrix_.adjoint(), num_qubits_, Trusted{}); }

UnitaryOp UnitaryOp::power(std::uint64_t power) const {
  const Eigen::Index d = dimension();
  CMatrix result = CMatrix::Identity(d, d);
  CMatrix base = matrix_;
  while (power != 0) {
    if (power & 1U) result = result * base;
    power >>= 1U;
    if (power != 0) base = base * base;
  }
  return UnitaryOp(std::move(result), num_qubits_, Trusted{});
}

namespace gates {

UnitaryOp X() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return UnitaryOp(m);
}

UnitaryOp Y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return UnitaryOp(m);
}

UnitaryOp Z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return UnitaryOp(m);
}

UnitaryOp H() {
  const double s = 1.0 / std::numbers::sqrt2;
  CMatrix m(2, 2);
  m << s, s, s, -s;
  return UnitaryOp(m);
}

UnitaryOp Ry(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  CMatrix m(2, 2);
  m << c, -s, s, c;
  return UnitaryOp(m);
}

}  // namespace gates

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(CVector amplitudes, int num_qubits)
    : amplitudes_(std::move(amplitudes)), num_qubits_(num_qubits) {}

StateVector unchecked_state(CVector amplitudes, int num_qubits) {
  return StateVector(std::move(amplitudes), num_qubits);
}

StateVector StateVector::basis(int num_qubits, std::uint64_t index) {
  if (num_qubits < 1) throw std::invalid_argument("state needs at least one qubit");
  check_capacity(num_qubits, "StateVector::basis");
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  if (index >= static_cast<std::uint64_t>(d)) {
    throw std::invalid_argument("basis index out of range");
  }
  CVector a = CVector::Zero(d);
  a(static_cast<Eigen::Index>(index)) = 1.0;
  return StateVector(std::move(a), num_qubits);
}

StateVector StateVector::from_amplitudes(CVector amplitudes) {
  if (!is_power_of_two(amplitudes.size()) || amplitudes.size() < 2) {
    throw std::invalid_argument("amplitude count must be a power of two >= 2");
  }
  const int n = log2_exact(amplitudes.size());
  check_capacity(n, "StateVector::from_amplitudes");
  const double nrm = amplitudes.norm();
  if (std::abs(nrm - 1.0) > 1e-10) {
    throw std::invalid_argument("amplitudes are not normalized: norm = " + std::to_string(nrm));
  }
  return StateVector(std::move(amplitudes), n);
}

StateVector StateVector::normalized(CVector amplitudes) {
  const double nrm = amplitudes.norm();
  if (nrm == 0.0) throw std::invalid_argument("cannot normalize the zero vector");
  amplitudes /= nrm;
  return from_amplitudes(std::move(amplitudes));
}

StateVector StateVector::tensor(const StateVector& other) const {
  const int n = num_qubits_ + other.num_qubits_;
  check_capacity(n, "StateVector::tensor");
  CVector out(dimension() * other.dimension());
  for (Eigen::Index i = 0; i < dimension(); ++i) {
    out.segment(i * other.dimension(), other.dimension()) = amplitudes_(i) * other.amplitudes_;
  }
  return StateVector(std::move(out), n);
}

// ---------------------------------------------------------------------------
// Gate application

StateVector apply(const StateVector& state, const UnitaryOp& op, std::span<const int> targets) {
  return apply_controlled(state, op, {}, targets);
}

StateVector apply_controlled(const StateVector& state, const UnitaryOp& op,
                             std::span<const int> controls, std::span<const int> targets) {
  const int n = state.num_qubits();
  if (static_cast<int>(targets.size()) != op.num_qubits()) {
    std::ostringstream os;
    os << "apply: operator acts on " << op.num_qubits() << " qubits but " << targets.size()
       << " targets given";
    throw std::invalid_argument(os.str());
  }
  std::vector<int> all(targets.begin(), targets.end());
  all.insert(all.end(), controls.begin(), controls.end());
  check_targets(n, all, "apply");
  return unchecked_state(apply_kernel(state.amplitudes(), n, op.matrix(), controls, targets), n);
}

UnitaryOp controlled(const UnitaryOp& op, std::uint64_t power) {
  const Eigen::Index d = op.dimension();
  CMatrix m = CMatrix::Zero(2 * d, 2 * d);
  m.topLeftCorner(d, d).setIdentity();
  m.bottomRightCorner(d, d) = op.power(power).matrix();
  return UnitaryOp(std::move(m), 1e-8);
}

UnitaryOp qft(int n, bool inverse) {
  if (n < 1) throw std::invalid_argument("qft needs n >= 1");
  check_capacity(n, "qft");
  const Eigen::Index d = Eigen::Index{1} << n;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  const double sign = inverse ? -1.0 : 1.0;
  CMatrix m(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < d; ++k) {
      // Reduce jk mod d before scaling so large products stay exact.
      const auto jk = static_cast<double>((j * k) % d);
      const double angle = sign * 2.0 * std::numbers::pi * jk / static_cast<double>(d);
      m(j, k) = std::polar(scale, angle);
    }
  }
  return UnitaryOp(std::move(m));
}

UnitaryOp hamiltonian_evolution(const CMatrix& H, double t) {
  if (H.rows() != H.cols()) throw std::invalid_argument("Hamiltonian must be square");
  const double asym = (H - H.adjoint()).cwiseAbs().maxCoeff();
  if (!(asym <= 1e-10)) {
    throw std::invalid_argument("Hamiltonian is not Hermitian: max |H - H^H| = " +
                                std::to_string(asym));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(H);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the Hamiltonian failed");
  }
  CVector phases(H.rows());
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    phases(i) = std::polar(1.0, -eig.eigenvalues()(i) * t);
  }
  const CMatrix& V = eig.eigenvectors();
  return UnitaryOp(V * phases.asDiagonal() * V.adjoint());
}

// ---------------------------------------------------------------------------
// Phase estimation

StateVector phase_estimation_on(const StateVector& state, const PowerOracle& powers,
                                std::span<const int> phase, std::span<const int> system) {
  const int n = static_cast<int>(phase.size());
  if (n < 1) throw std::invalid_argument("phase estimation needs at least one phase bit");
  StateVector s = state;
  const UnitaryOp h = gates::H();
  for (int q : phase) s = apply(s, h, std::span<const int>(&q, 1));
  for (int j = 0; j < n; ++j) {
    const UnitaryOp u = powers(std::uint64_t{1} << (n - 1 - j));
    if (u.num_qubits() != static_cast<int>(system.size())) {
      throw std::invalid_argument("phase estimation: operator width does not match the system register");
    }
    const int c = phase[static_cast<std::size_t>(j)];
    s = apply_controlled(s, u, std::span<const int>(&c, 1), system);
  }
  return apply(s, qft(n, true), phase);
}

StateVector inverse_phase_estimation_on(const StateVector& state, const PowerOracle& powers,
                                        std::span<const int> phase,
                                        std::span<const int> system) {
  const int n = static_cast<int>(phase.size());
  if (n < 1) throw std::invalid_argument("phase estimation needs at least one phase bit");
  StateVector s = apply(state, qft(n, false), phase);
  for (int j = n - 1; j >= 0; --j) {
    const UnitaryOp u = powers(std::uint64_t{1} << (n - 1 - j)).adjoint();
    const int c = phase[static_cast<std::size_t>(j)];
    s = apply_controlled(s, u, std::span<const int>(&c, 1), system);
  }
  const UnitaryOp h = gates::H();
  for (int q : phase) s = apply(s, h, std::span<const int>(&q, 1));
  return s;
}

StateVector phase_estimation(const UnitaryOp& op, const StateVector& input, int n_bits) {
  if (n_bits < 1) throw std::invalid_argument("phase estimation needs n_bits >= 1");
  if (op.num_qubits() != input.num_qubits()) {
    std::ostringstream os;
    os << "phase estimation: operator acts on " << op.num_qubits() << " qubits, input has "
       << input.num_qubits();
    throw std::invalid_argument(os.str());
  }
  check_capacity(n_bits + input.num_qubits(), "phase_estimation");
  const StateVector start = StateVector::basis(n_bits, 0).tensor(input);
  const auto phase = qubit_range(0, n_bits);
  const auto system = qubit_range(n_bits, input.num_qubits());
  return phase_estimation_on(start, [&](std::uint64_t p) { return op.power(p); }, phase, system);
}

std::uint64_t phase_estimation_queries(int n_bits) { return (std::uint64_t{1} << n_bits) - 1; }

// ---------------------------------------------------------------------------
// Measurement

RVector marginal_probabilities(const StateVector& state, std::span<const int> qubits) {
  const int n = state.num_qubits();
  check_targets(n, qubits, "marginal_probabilities");
  const int k = static_cast<int>(qubits.size());
  RVector probs = RVector::Zero(Eigen::Index{1} << k);
  const auto& a = state.amplitudes();
  for (Eigen::Index idx = 0; idx < a.size(); ++idx) {
    std::uint64_t r = 0;
    for (int i = 0; i < k; ++i) {
      r = (r << 1U) | ((static_cast<std::uint64_t>(idx) & bit_of(n, qubits[i])) ? 1U : 0U);
    }
    probs(static_cast<Eigen::Index>(r)) += std::norm(a(idx));
  }
  return probs;
}

std::size_t sample_index(std::span<const double> weights, std::mt19937_64& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw std::invalid_argument("sample_index: weights sum to zero");
  std::uniform_real_distribution<double> uni(0.0, total);
  const double u = uni(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    acc += weights[i];
    if (u < acc) return i;
  }
  return last_positive;
}

Measurement measure(const StateVector& state, std::span<const int> qubits, std::mt19937_64& rng) {
  const RVector probs = marginal_probabilities(state, qubits);
  const auto outcome = static_cast<std::uint64_t>(
      sample_index(std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())), rng));

  const int n = state.num_qubits();
  const int k = static_cast<int>(qubits.size());
  CVector a = state.amplitudes();
  for (Eigen::Index idx = 0; idx < a.size(); ++idx) {
    std::uint64_t r = 0;
    for (int i = 0; i < k; ++i) {
      r = (r << 1U) | ((static_cast<std::uint64_t>(idx) & bit_of(n, qubits[i])) ? 1U : 0U);
    }
    if (r != outcome) a(idx) = 0.0;
  }
  a /= a.norm();
  return {outcome, unchecked_state(std::move(a), n)};
}

}  // namespace qtik
