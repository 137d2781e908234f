#include "qtikhonov/amplitude_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/FFT>

namespace qtik {

namespace {

using Plane = CoherentEstimate::PlaneCoefficients;

constexpr int kMaxDenseGroverQubits = 8;
constexpr int kMaxCoherentPhaseBits = 11;

void require_bits(int n_bits) {
  if (n_bits < 1) throw std::invalid_argument("amplitude estimation needs n_bits >= 1");
  if (n_bits > kMaxQubits) {
    throw CapacityError("phase register of " + std::to_string(n_bits) + " bits exceeds the simulator limit");
  }
}

// Column-wise DFT over the phase register. sign = -1 is the inverse QFT
// (entries w^{-yk}), sign = +1 the QFT; both unitary.
Plane register_dft(const Plane& in, int sign) {
  const Eigen::Index N = in.rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  Eigen::FFT<double> fft;
  Plane out(N, 2);
  std::vector<Complex> src(static_cast<std::size_t>(N)), dst;
  for (int c = 0; c < 2; ++c) {
    for (Eigen::Index k = 0; k < N; ++k) src[static_cast<std::size_t>(k)] = in(k, c);
    if (sign < 0) {
      fft.fwd(dst, src);
      for (Eigen::Index y = 0; y < N; ++y) out(y, c) = dst[static_cast<std::size_t>(y)] * scale;
    } else {
      fft.inv(dst, src);  // scaled by 1/N
      const double up = static_cast<double>(N) * scale;
      for (Eigen::Index y = 0; y < N; ++y) out(y, c) = dst[static_cast<std::size_t>(y)] * up;
    }
  }
  return out;
}

// Hadamard on every phase qubit.
void walsh_hadamard(Plane& m) {
  const Eigen::Index N = m.rows();
  for (Eigen::Index len = 1; len < N; len <<= 1) {
    for (Eigen::Index i = 0; i < N; i += 2 * len) {
      for (Eigen::Index j = i; j < i + len; ++j) {
        const Eigen::Matrix<Complex, 1, 2> a = m.row(j);
        const Eigen::Matrix<Complex, 1, 2> b = m.row(j + len);
        m.row(j) = a + b;
        m.row(j + len) = a - b;
      }
    }
  }
  m /= std::sqrt(static_cast<double>(N));
}

// Hadamards, controlled-G^k ladder and inverse QFT from |0>|phi>.
// Row k before the DFT is G^k (cos t, sin t) / sqrt(N) = (cos((2k+1)t), sin((2k+1)t)) / sqrt(N).
Plane qpe_forward(double theta, int n_bits) {
  const Eigen::Index N = Eigen::Index{1} << n_bits;
  const double s = 1.0 / std::sqrt(static_cast<double>(N));
  Plane ladder(N, 2);
  for (Eigen::Index k = 0; k < N; ++k) {
    const double a = static_cast<double>(2 * k + 1) * theta;
    ladder(k, 0) = s * std::cos(a);
    ladder(k, 1) = s * std::sin(a);
  }
  return register_dft(ladder, -1);
}

// Exact inverse of qpe_forward's circuit applied to an arbitrary plane state.
Plane qpe_inverse(const Plane& state, double theta) {
  Plane m = register_dft(state, +1);
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    const double a = -2.0 * static_cast<double>(k) * theta;
    const double c = std::cos(a), s = std::sin(a);
    const Complex x = m(k, 0), y = m(k, 1);
    m(k, 0) = c * x - s * y;
    m(k, 1) = s * x + c * y;
  }
  walsh_hadamard(m);
  return m;
}

CVector unit_or_zero(CVector v) {
  const double n = v.norm();
  if (n > 0.0) v /= n;
  return v;
}

// [phase][prep] amplitudes from plane coefficients.
CVector lift(const Plane& m, const CVector& good, const CVector& bad) {
  const Eigen::Index d = good.size();
  CVector out(m.rows() * d);
  for (Eigen::Index y = 0; y < m.rows(); ++y) {
    out.segment(y * d, d) = m(y, 0) * good + m(y, 1) * bad;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Fixed point

double FixedPointFormat::resolution() const { return std::ldexp(1.0, -fraction_bits); }
double FixedPointFormat::min_value() const { return -std::ldexp(1.0, integer_bits - 1); }
double FixedPointFormat::max_value() const {
  return std::ldexp(1.0, integer_bits - 1) - resolution();
}

EncodedValue encode_fixed(double value, const FixedPointFormat& fmt) {
  if (fmt.integer_bits < 1 || fmt.fraction_bits < 0 || fmt.width() > 62) {
    throw std::invalid_argument("unsupported fixed-point format");
  }
  const auto lo = -(std::int64_t{1} << (fmt.width() - 1));
  const auto hi = (std::int64_t{1} << (fmt.width() - 1)) - 1;
  EncodedValue enc;
  std::int64_t q = 0;
  if (std::isnan(value)) {
    enc.saturated = true;
  } else {
    const double scaled = std::nearbyint(std::ldexp(value, fmt.fraction_bits));
    if (scaled < static_cast<double>(lo)) {
      q = lo;
      enc.saturated = true;
    } else if (scaled > static_cast<double>(hi)) {
      q = hi;
      enc.saturated = true;
    } else {
      q = static_cast<std::int64_t>(scaled);
    }
  }
  const std::uint64_t mask = (std::uint64_t{1} << fmt.width()) - 1;
  enc.code = static_cast<std::uint64_t>(q) & mask;
  return enc;
}

double decode_fixed(std::uint64_t code, const FixedPointFormat& fmt) {
  const int w = fmt.width();
  auto q = static_cast<std::int64_t>(code & ((std::uint64_t{1} << w) - 1));
  if (q >= (std::int64_t{1} << (w - 1))) q -= (std::int64_t{1} << w);
  return std::ldexp(static_cast<double>(q), -fmt.fraction_bits);
}

// ---------------------------------------------------------------------------
// StatePrep

StatePrep::StatePrep(StateVector phi, std::optional<UnitaryOp> unitary, std::vector<int> flags)
    : phi_(std::move(phi)), unitary_(std::move(unitary)), flags_(std::move(flags)) {
  if (flags_.empty()) throw std::invalid_argument("state preparation needs a flag qubit");
  const int n = phi_.num_qubits();
  for (int q : flags_) {
    if (q < 0 || q >= n) throw std::invalid_argument("flag qubit out of range");
    const std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
    if (flag_mask_ & bit) throw std::invalid_argument("duplicate flag qubit");
    flag_mask_ |= bit;
  }
  if (std::abs(phi_.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("prepared state is not normalized");
  }
  good_amplitude_ = std::min(1.0, good_component().norm());
}

StatePrep StatePrep::from_unitary(UnitaryOp unitary, std::vector<int> flag_qubits) {
  StateVector phi = unchecked_state(unitary.matrix().col(0), unitary.num_qubits());
  return StatePrep(std::move(phi), std::move(unitary), std::move(flag_qubits));
}

StatePrep StatePrep::from_unitary(UnitaryOp unitary, int flag_qubit) {
  return from_unitary(std::move(unitary), std::vector<int>{flag_qubit});
}

StatePrep StatePrep::from_state(StateVector phi, std::vector<int> flag_qubits) {
  return StatePrep(std::move(phi), std::nullopt, std::move(flag_qubits));
}

StatePrep StatePrep::from_state(StateVector phi, int flag_qubit) {
  return from_state(std::move(phi), std::vector<int>{flag_qubit});
}

double StatePrep::theta() const { return std::acos(std::clamp(good_amplitude_, 0.0, 1.0)); }

CVector StatePrep::good_component() const {
  CVector g = phi_.amplitudes();
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (!is_good(static_cast<std::uint64_t>(i))) g(i) = 0.0;
  }
  return g;
}

CVector StatePrep::bad_component() const { return phi_.amplitudes() - good_component(); }

// ---------------------------------------------------------------------------
// Grover operator and phase estimation on it

UnitaryOp grover_operator(const StatePrep& prep) {
  if (prep.num_qubits() > kMaxDenseGroverQubits) {
    throw CapacityError("dense Grover operator limited to " +
                        std::to_string(kMaxDenseGroverQubits) + " qubits");
  }
  const CVector& phi = prep.state().amplitudes();
  const Eigen::Index d = phi.size();
  CMatrix reflect = 2.0 * phi * phi.adjoint() - CMatrix::Identity(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!prep.is_good(static_cast<std::uint64_t>(j))) reflect.col(j) *= -1.0;
  }
  return UnitaryOp(std::move(reflect), 1e-9);
}

int bits_for_accuracy(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("accuracy must be positive");
  return static_cast<int>(std::ceil(std::log2(std::numbers::pi / epsilon))) + 2;
}

std::uint64_t fold_register(std::uint64_t y, int n_bits) {
  const std::uint64_t N = std::uint64_t{1} << n_bits;
  y %= N;
  return std::min(y, N - y);
}

double fold_theta(std::uint64_t y, int n_bits) {
  return static_cast<double>(fold_register(y, n_bits)) * std::numbers::pi /
         std::ldexp(1.0, n_bits);
}

RVector qpe_register_distribution(double theta, int n_bits) {
  require_bits(n_bits);
  const Plane out = qpe_forward(theta, n_bits);
  return out.rowwise().squaredNorm();
}

RVector qpe_register_distribution(const StatePrep& prep, int n_bits) {
  return qpe_register_distribution(prep.theta(), n_bits);
}

RVector folded_distribution(double theta, int n_bits) {
  const RVector raw = qpe_register_distribution(theta, n_bits);
  const Eigen::Index half = Eigen::Index{1} << (n_bits - 1);
  RVector folded = RVector::Zero(half + 1);
  for (Eigen::Index y = 0; y < raw.size(); ++y) {
    folded(static_cast<Eigen::Index>(fold_register(static_cast<std::uint64_t>(y), n_bits))) += raw(y);
  }
  return folded;
}

RVector median_distribution(const RVector& folded, int repetitions) {
  if (repetitions < 1 || repetitions % 2 == 0) {
    throw std::invalid_argument("median repetitions must be a positive odd number");
  }
  if (repetitions == 1) return folded;
  const int need = (repetitions + 1) / 2;
  std::vector<double> binom(static_cast<std::size_t>(repetitions) + 1, 1.0);
  for (int i = 1; i <= repetitions; ++i) {
    binom[static_cast<std::size_t>(i)] = binom[static_cast<std::size_t>(i - 1)] * (repetitions - i + 1) / i;
  }
  // P(median <= v) = P(at least `need` of the draws are <= v).
  auto at_least = [&](double F) {
    double total = 0.0;
    for (int i = need; i <= repetitions; ++i) {
      total += binom[static_cast<std::size_t>(i)] * std::pow(F, i) * std::pow(1.0 - F, repetitions - i);
    }
    return total;
  };
  RVector out(folded.size());
  double cdf = 0.0, prev = 0.0;
  for (Eigen::Index v = 0; v < folded.size(); ++v) {
    cdf = std::min(1.0, cdf + folded(v));
    const double g = at_least(cdf);
    out(v) = std::max(0.0, g - prev);
    prev = g;
  }
  return out;
}

StateVector grover_qpe_state(const StatePrep& prep, int n_bits) {
  require_bits(n_bits);
  check_capacity(n_bits + prep.num_qubits(), "grover_qpe_state");
  const Plane out = qpe_forward(prep.theta(), n_bits);
  return unchecked_state(lift(out, unit_or_zero(prep.good_component()),
                              unit_or_zero(prep.bad_component())),
                         n_bits + prep.num_qubits());
}

StateVector grover_qpe_state_gate_level(const StatePrep& prep, int n_bits) {
  return phase_estimation(grover_operator(prep), prep.state(), n_bits);
}

AmplitudeEstimate estimate_theta(const StatePrep& prep, int n_bits, std::mt19937_64& rng,
                                 int repetitions) {
  require_bits(n_bits);
  if (repetitions < 1 || repetitions % 2 == 0) {
    throw std::invalid_argument("estimate_theta: repetitions must be a positive odd number");
  }
  const RVector raw = qpe_register_distribution(prep, n_bits);
  const std::span<const double> weights(raw.data(), static_cast<std::size_t>(raw.size()));

  std::vector<std::pair<std::uint64_t, std::uint64_t>> draws;  // (folded, raw)
  for (int r = 0; r < repetitions; ++r) {
    const auto y = static_cast<std::uint64_t>(sample_index(weights, rng));
    draws.emplace_back(fold_register(y, n_bits), y);
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> sorted = draws;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  const auto median = sorted[static_cast<std::size_t>(repetitions / 2)];

  AmplitudeEstimate est;
  est.n_bits = n_bits;
  est.raw_register = median.second;
  est.theta_tilde = fold_theta(median.second, n_bits);
  const double s = std::sin(est.theta_tilde);
  est.probability_estimate = std::clamp(s * s, 0.0, 1.0);
  est.repetitions = repetitions;
  est.queries = static_cast<std::uint64_t>(repetitions) * phase_estimation_queries(n_bits);
  return est;
}

// ---------------------------------------------------------------------------
// Coherent estimation

CoherentEstimate coherent_estimate(const StatePrep& prep, const RealFunction& f, int n_bits,
                                   const FixedPointFormat& format) {
  require_bits(n_bits);
  if (n_bits > kMaxCoherentPhaseBits) {
    throw CapacityError("coherent estimation limited to " +
                        std::to_string(kMaxCoherentPhaseBits) + " phase bits");
  }
  const double theta = prep.theta();
  const Plane out = qpe_forward(theta, n_bits);

  CoherentEstimate ce;
  ce.n_bits_ = n_bits;
  ce.prep_qubits_ = prep.num_qubits();
  ce.theta_ = theta;
  ce.format_ = format;
  ce.good_basis_ = unit_or_zero(prep.good_component());
  ce.bad_basis_ = unit_or_zero(prep.bad_component());

  // U_f: |y>|0> -> |y>|f(cos theta_y)>, grouped by register value.
  std::map<std::uint64_t, Plane> grouped;
  for (Eigen::Index y = 0; y < out.rows(); ++y) {
    const double x = std::cos(fold_theta(static_cast<std::uint64_t>(y), n_bits));
    const EncodedValue enc = encode_fixed(f(x), format);
    auto [it, inserted] = grouped.try_emplace(enc.code, Plane::Zero(out.rows(), 2));
    it->second.row(y) = out.row(y);
    if (enc.saturated && out.row(y).squaredNorm() > 0.0) ce.saturated_ = true;
  }
  for (auto& [code, m] : grouped) ce.branches_.emplace(code, qpe_inverse(m, theta));
  return ce;
}

std::map<std::uint64_t, double> CoherentEstimate::code_probabilities() const {
  std::map<std::uint64_t, double> p;
  for (const auto& [code, m] : branches_) p[code] = m.squaredNorm();
  return p;
}

double CoherentEstimate::norm() const {
  double s = 0.0;
  for (const auto& [code, m] : branches_) s += m.squaredNorm();
  return std::sqrt(s);
}

Complex CoherentEstimate::input_overlap(std::uint64_t code) const {
  const auto it = branches_.find(code);
  if (it == branches_.end()) return 0.0;
  // |phi> has plane coordinates (cos theta, sin theta); the phase register must read 0.
  return std::cos(theta_) * it->second(0, 0) + std::sin(theta_) * it->second(0, 1);
}

CVector CoherentEstimate::branch_vector(std::uint64_t code) const {
  const auto it = branches_.find(code);
  const Eigen::Index d = good_basis_.size();
  if (it == branches_.end()) return CVector::Zero((Eigen::Index{1} << n_bits_) * d);
  return lift(it->second, good_basis_, bad_basis_);
}

StateVector CoherentEstimate::to_statevector() const {
  const int fw = format_.width();
  const int total = n_bits_ + prep_qubits_ + fw;
  check_capacity(total, "CoherentEstimate::to_statevector");
  const Eigen::Index inner = (Eigen::Index{1} << n_bits_) * good_basis_.size();
  CVector amps = CVector::Zero(Eigen::Index{1} << total);
  for (const auto& [code, m] : branches_) {
    const CVector v = lift(m, good_basis_, bad_basis_);
    for (Eigen::Index i = 0; i < inner; ++i) {
      amps((i << fw) | static_cast<Eigen::Index>(code)) = v(i);
    }
  }
  return unchecked_state(std::move(amps), total);
}

// ---------------------------------------------------------------------------
// Parallel estimation

ParallelEstimate parallel_estimate(std::span<const StatePrep> preps,
                                   std::span<const RealFunction> fs, const CVector& weights,
                                   int n_bits, const FixedPointFormat& format) {
  const std::size_t p = preps.size();
  if (p == 0) throw std::invalid_argument("parallel_estimate needs at least one branch");
  if (fs.size() != p || static_cast<std::size_t>(weights.size()) != p) {
    throw std::invalid_argument("parallel_estimate: one function and one weight per branch");
  }
  if (std::abs(weights.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("parallel_estimate: weights must have unit norm");
  }
  for (const auto& prep : preps) {
    if (prep.num_qubits() != preps[0].num_qubits()) {
      std::ostringstream os;
      os << "parallel_estimate: branch widths differ (" << prep.num_qubits() << " vs "
         << preps[0].num_qubits() << " qubits)";
      throw std::invalid_argument(os.str());
    }
  }
  ParallelEstimate pe;
  pe.index_bits_ = qubits_for_dimension(static_cast<Eigen::Index>(p));
  pe.weights_ = weights;
  pe.branches_.reserve(p);
  for (std::size_t j = 0; j < p; ++j) {
    pe.branches_.push_back(coherent_estimate(preps[j], fs[j], n_bits, format));
  }
  return pe;
}

std::vector<JointOutcome> ParallelEstimate::joint_distribution() const {
  std::vector<JointOutcome> out;
  for (std::size_t j = 0; j < branches_.size(); ++j) {
    const double w = std::norm(weights_(static_cast<Eigen::Index>(j)));
    for (const auto& [code, prob] : branches_[j].code_probabilities()) {
      out.push_back({j, code, w * prob});
    }
  }
  return out;
}

StateVector ParallelEstimate::to_statevector() const {
  const auto& b0 = branches_.front();
  const int inner_bits = b0.n_bits() + b0.prep_qubits() + b0.format().width();
  const int total = index_bits_ + inner_bits;
  check_capacity(total, "ParallelEstimate::to_statevector");
  const Eigen::Index block = Eigen::Index{1} << inner_bits;
  CVector amps = CVector::Zero(Eigen::Index{1} << total);
  for (std::size_t j = 0; j < branches_.size(); ++j) {
    amps.segment(static_cast<Eigen::Index>(j) * block, block) =
        weights_(static_cast<Eigen::Index>(j)) * branches_[j].to_statevector().amplitudes();
  }
  return unchecked_state(std::move(amps), total);
}

}  // namespace qtik
