#include "qtikhonov/hhl.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>

namespace qtik {

namespace {

CMatrix top_block(const ExtendedMatrix& ext) { return ext.A_mu.topRows(ext.rows()); }

CMatrix padded(const CMatrix& D, int qubits) {
  const Eigen::Index dim = Eigen::Index{1} << qubits;
  CMatrix P = CMatrix::Zero(dim, dim);
  P.topLeftCorner(D.rows(), D.cols()) = D;
  return P;
}

// exp(-i H t p) from one eigendecomposition of H.
PowerOracle evolution_oracle(const CMatrix& H, double t) {
  auto eig = std::make_shared<Eigen::SelfAdjointEigenSolver<CMatrix>>(H);
  if (eig->info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the dilation failed");
  }
  return [eig, t](std::uint64_t power) {
    const auto& lam = eig->eigenvalues();
    CVector ph(lam.size());
    const double tp = t * static_cast<double>(power);
    for (Eigen::Index i = 0; i < lam.size(); ++i) ph(i) = std::polar(1.0, -lam(i) * tp);
    const CMatrix& V = eig->eigenvectors();
    return UnitaryOp(V * ph.asDiagonal() * V.adjoint(), 1e-9);
  };
}

std::int64_t signed_phase(std::uint64_t y, int n_bits) {
  const auto N = std::int64_t{1} << n_bits;
  auto v = static_cast<std::int64_t>(y);
  return v >= N / 2 ? v - N : v;
}

// Eigenvalue read from a phase-register value for exp(-i lambda t).
double phase_to_eigenvalue(std::int64_t y_signed, int n_bits, double t) {
  return -2.0 * std::numbers::pi * static_cast<double>(y_signed) / (std::ldexp(1.0, n_bits) * t);
}

// Multiplexed rotation of `target`: |0> -> a(y)|0> + sqrt(1 - a^2)|1>, where
// y is the phase register value.
StateVector rotate_on_phase(const StateVector& s, int phase_bits, int target,
                            const std::function<double(std::int64_t)>& amplitude) {
  const int n = s.num_qubits();
  const std::uint64_t tbit = std::uint64_t{1} << (n - 1 - target);
  const int shift = n - phase_bits;
  std::vector<double> a(std::size_t{1} << phase_bits), c(a.size());
  for (std::uint64_t y = 0; y < a.size(); ++y) {
    a[y] = std::clamp(amplitude(signed_phase(y, phase_bits)), -1.0, 1.0);
    c[y] = std::sqrt(std::max(0.0, 1.0 - a[y] * a[y]));
  }
  CVector out = s.amplitudes();
  for (std::uint64_t idx = 0; idx < static_cast<std::uint64_t>(out.size()); ++idx) {
    if (idx & tbit) continue;
    const std::uint64_t y = idx >> shift;
    const Complex x0 = out(static_cast<Eigen::Index>(idx));
    const Complex x1 = out(static_cast<Eigen::Index>(idx | tbit));
    out(static_cast<Eigen::Index>(idx)) = a[y] * x0 - c[y] * x1;
    out(static_cast<Eigen::Index>(idx | tbit)) = c[y] * x0 + a[y] * x1;
  }
  return unchecked_state(std::move(out), n);
}

void require_rhs(const ExtendedMatrix& ext, const CVector& b) {
  if (b.size() != ext.rows()) {
    std::ostringstream os;
    os << "b has " << b.size() << " entries, A has " << ext.rows() << " rows";
    throw InputError(os.str());
  }
}

}  // namespace

double HhlConfig::eigen_cell() const {
  return 2.0 * std::numbers::pi / (std::ldexp(1.0, n_phase_bits) * t_evolution);
}

double HhlConfig::eigen_cell_a() const {
  return 2.0 * std::numbers::pi / (std::ldexp(1.0, n_phase_bits) * t_evolution_a);
}

HhlConfig make_hhl_config(const ExtendedMatrix& ext, int n_phase_bits,
                          std::optional<double> eigen_unit) {
  const SvdFactorization svd = compute_svd(top_block(ext));
  const RVector ext_sigma = extended_singular_values(svd, ext.mu);
  const double ext_max = ext_sigma(0);
  if (!(ext_max > 0.0) || !(svd.sigma_max() > 0.0)) {
    throw SpectralError("HHL configuration needs a nonzero matrix");
  }
  double c_tilde = 0.0;
  for (Eigen::Index i = ext_sigma.size() - 1; i >= 0; --i) {
    if (ext_sigma(i) > kRankTolerance * ext_max) {
      c_tilde = ext_sigma(i);
      break;
    }
  }
  HhlConfig cfg;
  cfg.n_phase_bits = n_phase_bits;
  cfg.c_tilde = c_tilde;
  cfg.sigma_max = svd.sigma_max();
  if (eigen_unit) {
    if (!(*eigen_unit > 0.0)) throw std::invalid_argument("eigen_unit must be positive");
    cfg.t_evolution = 2.0 * std::numbers::pi / (std::ldexp(1.0, n_phase_bits) * *eigen_unit);
    cfg.t_evolution_a = cfg.t_evolution;
  } else {
    cfg.t_evolution = std::numbers::pi / (2.0 * ext_max);
    cfg.t_evolution_a = std::numbers::pi / (2.0 * cfg.sigma_max);
  }
  return cfg;
}

void validate_config(const ExtendedMatrix& ext, const HhlConfig& cfg) {
  if (cfg.n_phase_bits < 2) throw std::invalid_argument("HHL needs at least 2 phase bits");
  if (!(cfg.c_tilde > 0.0) || !(cfg.sigma_max > 0.0) || !(cfg.t_evolution > 0.0) ||
      !(cfg.t_evolution_a > 0.0)) {
    throw std::invalid_argument("HHL config entries must be positive");
  }
  const SvdFactorization svd = compute_svd(top_block(ext));
  const RVector ext_sigma = extended_singular_values(svd, ext.mu);
  const double ext_max = ext_sigma(0);
  std::vector<double> nonzero;
  for (Eigen::Index i = 0; i < ext_sigma.size(); ++i) {
    if (ext_sigma(i) > kRankTolerance * ext_max) nonzero.push_back(ext_sigma(i));
  }
  const double ext_min = nonzero.back();
  if (cfg.c_tilde > ext_min * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "c_tilde = " << cfg.c_tilde << " exceeds the smallest nonzero eigenvalue magnitude "
       << ext_min;
    throw std::invalid_argument(os.str());
  }
  if (ext_max * cfg.t_evolution >= std::numbers::pi ||
      svd.sigma_max() * cfg.t_evolution_a >= std::numbers::pi) {
    throw SpectralError("evolution time wraps the spectrum: need |lambda| t < pi");
  }
  const double cell = cfg.eigen_cell();
  if (ext_min < cell) {
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < nonzero.size(); ++i) {
      const double g = nonzero[i - 1] - nonzero[i];
      if (g > 1e-9 * ext_max) gap = std::min(gap, g);
    }
    std::ostringstream os;
    os << "phase register too narrow: smallest eigenvalue " << ext_min
       << " is below one phase cell " << cell << " (" << cfg.n_phase_bits
       << " bits); minimal eigenvalue gap " << gap;
    throw SpectralError(os.str());
  }
  const int w = qubits_for_dimension(ext.dilation.rows());
  check_capacity(cfg.n_phase_bits + w + 4, "HHL residual state");
}

std::vector<int> HhlLayout::ancillas(int width) const {
  std::vector<int> q = phase();
  for (int i = flag(); i < width; ++i) q.push_back(i);
  return q;
}

HhlLayout hhl_layout(const ExtendedMatrix& ext, const HhlConfig& cfg) {
  HhlLayout L;
  L.phase_bits = cfg.n_phase_bits;
  L.system_qubits = qubits_for_dimension(ext.dilation.rows());
  L.m = ext.rows();
  L.n = ext.cols();
  return L;
}

StateVector prepare_b_state(const CVector& b, int width) {
  const double nb = b.norm();
  if (!(nb > 0.0)) throw std::invalid_argument("cannot prepare |b> for b = 0");
  if (width < 1 || (Eigen::Index{1} << width) < b.size()) {
    throw std::invalid_argument("register too small for b");
  }
  check_capacity(width, "prepare_b_state");
  CVector a = CVector::Zero(Eigen::Index{1} << width);
  a.head(b.size()) = b / nb;
  return StateVector::from_amplitudes(std::move(a));
}

StateVector hhl_solution_state(const ExtendedMatrix& ext, const CVector& b, const HhlConfig& cfg) {
  require_rhs(ext, b);
  validate_config(ext, cfg);
  const HhlLayout L = hhl_layout(ext, cfg);
  const auto phase = L.phase();
  const auto system = L.system();

  StateVector s = StateVector::basis(L.phase_bits, 0)
                      .tensor(prepare_b_state(b, L.system_qubits))
                      .tensor(StateVector::basis(1, 0));
  const PowerOracle U = evolution_oracle(padded(ext.dilation, L.system_qubits), cfg.t_evolution);
  s = phase_estimation_on(s, U, phase, system);
  s = rotate_on_phase(s, L.phase_bits, L.flag(), [&](std::int64_t y) {
    if (y == 0) return 0.0;
    return cfg.c_tilde / phase_to_eigenvalue(y, L.phase_bits, cfg.t_evolution);
  });
  return inverse_phase_estimation_on(s, U, phase, system);
}

StateVector apply_A_state(const ExtendedMatrix& ext, const CVector& b, const HhlConfig& cfg) {
  const HhlLayout L = hhl_layout(ext, cfg);
  const auto phase = L.phase();
  const auto system = L.system();
  StateVector s = hhl_solution_state(ext, b, cfg).tensor(StateVector::basis(1, 0));

  const CMatrix D0 = hermitian_dilation(top_block(ext), 0.0);
  const PowerOracle U = evolution_oracle(padded(D0, L.system_qubits), cfg.t_evolution_a);
  s = phase_estimation_on(s, U, phase, system);
  s = rotate_on_phase(s, L.phase_bits, L.flag_a(), [&](std::int64_t y) {
    if (y == 0) return 0.0;
    return phase_to_eigenvalue(y, L.phase_bits, cfg.t_evolution_a) / cfg.sigma_max;
  });
  return inverse_phase_estimation_on(s, U, phase, system);
}

double residual_scale(const HhlConfig& cfg) {
  return std::min(1.0, cfg.c_tilde / cfg.sigma_max);
}

StateVector residual_state(const ExtendedMatrix& ext, const CVector& b, const HhlConfig& cfg) {
  const HhlLayout L = hhl_layout(ext, cfg);
  const StateVector psi = apply_A_state(ext, b, cfg);
  const int width = L.residual_width();
  check_capacity(width, "residual_state");

  // Step 1: (|psi>|0> - |b,0>|1>) / sqrt(2), balance qubit at |0>.
  const double r = 1.0 / std::numbers::sqrt2;
  CVector amps = CVector::Zero(Eigen::Index{1} << width);
  for (Eigen::Index i = 0; i < psi.dimension(); ++i) amps(i << 2) = r * psi.amplitude(static_cast<std::uint64_t>(i));
  const StateVector bstate = prepare_b_state(b, L.system_qubits);
  for (Eigen::Index j = 0; j < bstate.dimension(); ++j) {
    // phase = 0, flag = flag_a = 0 inside psi's layout.
    amps(((j << 2) << 2) | 2) -= r * bstate.amplitude(static_cast<std::uint64_t>(j));
  }
  StateVector s = unchecked_state(std::move(amps), width);

  // Step 2: selector-controlled balance rotation.
  const double C = cfg.c_tilde / cfg.sigma_max;
  const double t = residual_scale(cfg);
  const int sel = L.selector();
  const int bal = L.balance();
  const std::span<const int> sel_span(&sel, 1), bal_span(&bal, 1);
  const UnitaryOp X = gates::X();
  s = apply(s, X, sel_span);
  s = apply_controlled(s, gates::Ry(std::acos(std::clamp(t / C, -1.0, 1.0))), sel_span, bal_span);
  s = apply(s, X, sel_span);
  s = apply_controlled(s, gates::Ry(std::acos(std::clamp(t, -1.0, 1.0))), sel_span, bal_span);

  // Step 3: Hadamard on the selector.
  return apply(s, gates::H(), sel_span);
}

CVector good_system_vector(const StateVector& state, const HhlLayout& layout) {
  const int width = state.num_qubits();
  const int low = width - layout.phase_bits - layout.system_qubits;
  const Eigen::Index dim = Eigen::Index{1} << layout.system_qubits;
  CVector v(dim);
  for (Eigen::Index j = 0; j < dim; ++j) v(j) = state.amplitude(static_cast<std::uint64_t>(j) << low);
  return v;
}

double flag_zero_mass(const StateVector& state, const HhlLayout& layout) {
  const int width = state.num_qubits();
  const std::uint64_t bit = std::uint64_t{1} << (width - 1 - layout.flag());
  double mass = 0.0;
  for (Eigen::Index i = 0; i < state.dimension(); ++i) {
    if ((static_cast<std::uint64_t>(i) & bit) == 0) mass += std::norm(state.amplitudes()(i));
  }
  return mass;
}

// ---------------------------------------------------------------------------
// Norm estimation

NormEstimator::NormEstimator(StatePrep prep, int n_bits, double scale)
    : prep_(std::move(prep)), n_bits_(n_bits), scale_(scale) {}

double NormEstimator::value_at(std::uint64_t folded) const {
  return scale_ * std::cos(static_cast<double>(folded) * std::numbers::pi / std::ldexp(1.0, n_bits_));
}

RVector NormEstimator::distribution(int repetitions) const {
  return median_distribution(folded_distribution(prep_.theta(), n_bits_), repetitions);
}

double NormEstimator::sample(std::mt19937_64& rng, int repetitions) const {
  const AmplitudeEstimate est = estimate_theta(prep_, n_bits_, rng, repetitions);
  return scale_ * std::cos(est.theta_tilde);
}

std::uint64_t NormEstimator::queries(int repetitions) const {
  return static_cast<std::uint64_t>(repetitions) * phase_estimation_queries(n_bits_);
}

NormEstimator solution_norm_estimator(const ExtendedMatrix& ext, const CVector& b,
                                      const HhlConfig& cfg, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const HhlLayout L = hhl_layout(ext, cfg);
  StatePrep prep = StatePrep::from_state(hhl_solution_state(ext, b, cfg), L.flag());
  return NormEstimator(std::move(prep), bits_for_accuracy(cfg.c_tilde * epsilon),
                       b.norm() / cfg.c_tilde);
}

NormEstimator residual_norm_estimator(const ExtendedMatrix& ext, const CVector& b,
                                      const HhlConfig& cfg, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const HhlLayout L = hhl_layout(ext, cfg);
  const double t = residual_scale(cfg);
  StatePrep prep =
      StatePrep::from_state(residual_state(ext, b, cfg), L.ancillas(L.residual_width()));
  return NormEstimator(std::move(prep), bits_for_accuracy(epsilon * t / 2.0), 2.0 * b.norm() / t);
}

double estimate_solution_norm(const ExtendedMatrix& ext, const CVector& b, const HhlConfig& cfg,
                              double epsilon, std::mt19937_64& rng) {
  return solution_norm_estimator(ext, b, cfg, epsilon).sample(rng);
}

double estimate_residual_norm(const ExtendedMatrix& ext, const CVector& b, const HhlConfig& cfg,
                              double epsilon, std::mt19937_64& rng) {
  return residual_norm_estimator(ext, b, cfg, epsilon).sample(rng);
}

NormEstimates estimate_norms(const ExtendedMatrix& ext, const CVector& b, const HhlConfig& cfg,
                             double epsilon, std::mt19937_64& rng, int repetitions) {
  const NormEstimator xs = solution_norm_estimator(ext, b, cfg, epsilon);
  const NormEstimator rs = residual_norm_estimator(ext, b, cfg, epsilon);
  NormEstimates out;
  out.epsilon = epsilon;
  out.solution_norm = xs.sample(rng, repetitions);
  out.residual_norm = rs.sample(rng, repetitions);
  out.queries_used = xs.queries(repetitions) + rs.queries(repetitions);
  return out;
}

}  // namespace qtik
