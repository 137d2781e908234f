#include "qtikhonov/param_search.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "qtikhonov/amplitude_estimation.hpp"
#include "qtikhonov/hhl.hpp"
#include "qtikhonov/statevector.hpp"

namespace qtik {

namespace {

// Distribution entries below this are dropped from the searched register.
constexpr double kNegligible = 1e-14;

struct Support {
  std::vector<double> values;
  std::vector<double> probs;
  std::size_t modal = 0;
};

Support support_of(const NormEstimator& est, int repetitions) {
  const RVector d = est.distribution(repetitions);
  Support s;
  for (Eigen::Index v = 0; v < d.size(); ++v) {
    if (d(v) <= kNegligible) continue;
    if (s.probs.empty() || d(v) > s.probs[s.modal]) s.modal = s.probs.size();
    s.values.push_back(est.value_at(static_cast<std::uint64_t>(v)));
    s.probs.push_back(d(v));
  }
  return s;
}

std::size_t argmin_lowest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[best]) best = i;
  }
  return best;
}

double lcurve_value(double residual, double solution, const CriterionOptions& o) {
  const double a = residual - o.residual_shift;
  const double b = solution - o.solution_shift;
  return a * a + b * b;
}

std::string at_mu(double mu, const char* what) {
  std::ostringstream os;
  os << "at mu = " << mu << ": " << what;
  return os.str();
}

// HHL setup for one grid value, rethrowing with the offending mu named.
template <class F>
auto for_mu(double mu, F&& body) {
  try {
    return body();
  } catch (const SpectralError& e) {
    throw SpectralError(at_mu(mu, e.what()));
  } catch (const CapacityError& e) {
    throw CapacityError(at_mu(mu, e.what()));
  } catch (const NumericalError& e) {
    throw NumericalError(at_mu(mu, e.what()));
  }
}

// f(0), ..., f(count - 1) on up to hardware_concurrency threads. Results and
// the first error (by index) come back exactly as a sequential loop would
// produce them.
template <class F>
auto map_indices(std::size_t count, F&& f) {
  using R = decltype(f(std::size_t{0}));
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next++; j < count; j = next++) {
      try {
        slots[j].emplace(f(j));
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  std::vector<R> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    if (errors[j]) std::rethrow_exception(errors[j]);
    out.push_back(std::move(*slots[j]));
  }
  return out;
}

void require_problem(const RegularizedProblem& problem, const ParameterGrid& grid) {
  problem.validate();
  if (grid.size() == 0) throw std::invalid_argument("empty parameter grid");
  if (!(problem.b.norm() > 0.0)) throw InputError("right-hand side is zero");
}

// Per-branch value distributions (in units of ||b||^2) quantized into one
// shared fixed-point register.
struct Quantized {
  std::vector<SearchItem> items;
  std::vector<double> modal;
};

Quantized quantize(const std::vector<std::vector<std::pair<double, double>>>& branches,
                   double unit, int fraction_bits) {
  double top = 1.0;
  for (const auto& br : branches) {
    for (const auto& [v, pr] : br) top = std::max(top, std::abs(v) / unit);
  }
  FixedPointFormat fmt;
  fmt.fraction_bits = fraction_bits;
  fmt.integer_bits = std::max(2, static_cast<int>(std::ceil(std::log2(top))) + 2);
  if (fmt.width() > 62) throw NumericalError("criterion values too large for the value register");

  const double p = static_cast<double>(branches.size());
  Quantized q;
  for (std::size_t j = 0; j < branches.size(); ++j) {
    std::map<std::uint64_t, double> mass;
    for (const auto& [v, pr] : branches[j]) mass[encode_fixed(v / unit, fmt).code] += pr;
    auto modal = mass.begin();
    for (auto it = mass.begin(); it != mass.end(); ++it) {
      if (it->second > modal->second) modal = it;
      q.items.push_back({j, decode_fixed(it->first, fmt) * unit, it->second / p});
    }
    q.modal.push_back(decode_fixed(modal->first, fmt) * unit);
  }
  return q;
}

}  // namespace

ParameterGrid make_grid(double mu0, double rho, std::size_t p) {
  if (!(mu0 > 0.0)) throw std::invalid_argument("mu0 must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
  if (p == 0) throw std::invalid_argument("grid needs at least one value");
  ParameterGrid g;
  g.rho = rho;
  g.mus.resize(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    g.mus(static_cast<Eigen::Index>(j)) = mu0 * std::pow(rho, static_cast<double>(j));
  }
  return g;
}

SelectionResult classical_select(const RegularizedProblem& problem, const ParameterGrid& grid,
                                 Criterion criterion, const CriterionOptions& options) {
  problem.validate();
  if (grid.size() == 0) throw std::invalid_argument("empty parameter grid");
  const SvdFactorization svd = compute_svd(problem.A);
  const Eigen::Index m = problem.rows(), n = problem.cols();

  std::vector<double> sigma_r;
  if (criterion == Criterion::GcvLowRank) {
    if (options.rank < 1 || options.rank > svd.sigma.size()) {
      throw std::invalid_argument("low-rank GCV needs 1 <= rank <= min(m, n)");
    }
    sigma_r.assign(svd.sigma.data(), svd.sigma.data() + options.rank);
  }

  SelectionResult r;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double mu = grid.mus(static_cast<Eigen::Index>(j));
    const TikhonovSolution sol = tikhonov_solve(svd, problem.b, mu);
    r.points.push_back({mu, sol.residual_norm, sol.solution_norm});
    switch (criterion) {
      case Criterion::LCurveSum:
        r.criterion_values.push_back(lcurve_value(sol.residual_norm, sol.solution_norm, options));
        break;
      case Criterion::Gcv: {
        const double den = gcv_denominator(svd, mu);
        r.gcv_denominators.push_back(den);
        if (den <= 0.0) r.warnings.push_back(at_mu(mu, "nonpositive GCV denominator"));
        r.criterion_values.push_back(gcv_value(svd, problem.b, mu));
        break;
      }
      case Criterion::GcvLowRank: {
        const double den = gcv_lowrank_denominator(sigma_r, m, n, mu);
        r.gcv_denominators.push_back(den);
        if (den <= 0.0) r.warnings.push_back(at_mu(mu, "nonpositive GCV denominator"));
        r.criterion_values.push_back(
            gcv_lowrank(sigma_r, sol.residual_norm * sol.residual_norm, m, n, mu));
        break;
      }
    }
  }
  r.chosen_index = argmin_lowest(r.criterion_values);
  r.chosen_mu = grid.mus(static_cast<Eigen::Index>(r.chosen_index));
  r.chosen_value = r.criterion_values[r.chosen_index];
  r.queries_used = grid.size();
  r.threshold_history = {r.chosen_index};
  r.sigma_estimates = sigma_r;
  return r;
}

SelectionResult PreparedSearch::select(std::mt19937_64& rng) const {
  const std::size_t p = size();
  SelectionResult r;
  std::optional<MinimumSearch> best;
  for (int s = 0; s < std::max(1, searches_); ++s) {
    MinimumSearch run = durr_hoyer_search(items_, p, rng);
    r.queries_used += run.queries;
    if (!best) {
      best = std::move(run);
      continue;
    }
    const SearchItem& a = items_[run.item];
    const SearchItem& b = items_[best->item];
    if (a.value < b.value || (a.value == b.value && a.index < b.index)) best = std::move(run);
  }
  const SearchItem& chosen = items_[best->item];
  r.chosen_index = chosen.index;
  r.chosen_mu = grid_.mus(static_cast<Eigen::Index>(chosen.index));
  r.chosen_value = chosen.value;
  r.threshold_history = best->threshold_history;
  r.criterion_values = modal_values_;
  r.estimation_queries = estimation_queries_;
  r.points = points_;
  r.gcv_denominators = gcv_denominators_;
  r.sigma_estimates = sigma_estimates_;
  r.warnings = warnings_;
  return r;
}

PreparedSearch prepare_lcurve(const RegularizedProblem& problem, const ParameterGrid& grid,
                              const PipelineOptions& options) {
  require_problem(problem, grid);
  const SvdFactorization svd = compute_svd(problem.A);
  const double nb = problem.b.norm();

  PreparedSearch out;
  out.grid_ = grid;
  out.searches_ = options.searches;
  struct Branch {
    Support x, r;
    std::uint64_t queries = 0;
  };
  const std::vector<Branch> per_mu = map_indices(grid.size(), [&](std::size_t j) {
    const double mu = grid.mus(static_cast<Eigen::Index>(j));
    return for_mu(mu, [&] {
      const ExtendedMatrix ext = build_extended(problem.A, svd, mu);
      const HhlConfig cfg = make_hhl_config(ext, options.n_phase_bits, options.eigen_unit);
      const NormEstimator xe = solution_norm_estimator(ext, problem.b, cfg, options.epsilon);
      const NormEstimator re = residual_norm_estimator(ext, problem.b, cfg, options.epsilon);
      const int k = options.repetitions;
      return Branch{support_of(xe, k), support_of(re, k), xe.queries(k) + re.queries(k)};
    });
  });

  std::vector<std::vector<std::pair<double, double>>> branches;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double mu = grid.mus(static_cast<Eigen::Index>(j));
    const Branch& br = per_mu[j];
    out.estimation_queries_ = std::max(out.estimation_queries_, br.queries);

    const Support& xs = br.x;
    const Support& r = br.r;
    out.points_.push_back({mu, r.values[r.modal], xs.values[xs.modal]});
    std::vector<std::pair<double, double>> values;
    for (std::size_t a = 0; a < xs.values.size(); ++a) {
      for (std::size_t b = 0; b < r.values.size(); ++b) {
        const double pr = xs.probs[a] * r.probs[b];
        if (pr <= kNegligible && !(a == xs.modal && b == r.modal)) continue;
        values.emplace_back(lcurve_value(r.values[b], xs.values[a], options.criterion), pr);
      }
    }
    branches.push_back(std::move(values));
  }
  Quantized q = quantize(branches, nb * nb, options.fraction_bits);
  out.items_ = std::move(q.items);
  out.modal_values_ = std::move(q.modal);
  return out;
}

PreparedSearch prepare_gcv(const RegularizedProblem& problem, const ParameterGrid& grid,
                           std::span<const double> sigma_r, const PipelineOptions& options) {
  require_problem(problem, grid);
  if (sigma_r.empty()) throw std::invalid_argument("GCV needs at least one singular value");
  const SvdFactorization svd = compute_svd(problem.A);
  const double nb = problem.b.norm();
  const Eigen::Index m = problem.rows(), n = problem.cols();

  PreparedSearch out;
  out.grid_ = grid;
  out.searches_ = options.searches;
  out.sigma_estimates_.assign(sigma_r.begin(), sigma_r.end());
  struct Branch {
    Support r;
    std::uint64_t queries = 0;
    double den = 0.0;
  };
  const std::vector<Branch> per_mu = map_indices(grid.size(), [&](std::size_t j) {
    const double mu = grid.mus(static_cast<Eigen::Index>(j));
    const double den = gcv_lowrank_denominator(sigma_r, m, n, mu);
    if (den == 0.0) throw NumericalError(at_mu(mu, "GCV denominator vanishes"));
    return for_mu(mu, [&] {
      const ExtendedMatrix ext = build_extended(problem.A, svd, mu);
      const HhlConfig cfg = make_hhl_config(ext, options.n_phase_bits, options.eigen_unit);
      const NormEstimator est = residual_norm_estimator(ext, problem.b, cfg, options.epsilon);
      return Branch{support_of(est, options.repetitions), est.queries(options.repetitions), den};
    });
  });

  std::vector<std::vector<std::pair<double, double>>> branches;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double mu = grid.mus(static_cast<Eigen::Index>(j));
    const Support& r = per_mu[j].r;
    const double den = per_mu[j].den;
    out.estimation_queries_ = std::max(out.estimation_queries_, per_mu[j].queries);

    if (den < 0.0) out.warnings_.push_back(at_mu(mu, "nonpositive GCV denominator"));
    out.gcv_denominators_.push_back(den);
    out.points_.push_back({mu, r.values[r.modal], std::numeric_limits<double>::quiet_NaN()});

    std::vector<std::pair<double, double>> br;
    for (std::size_t b = 0; b < r.values.size(); ++b) {
      br.emplace_back(r.values[b] * r.values[b] / (den * den), r.probs[b]);
    }
    branches.push_back(std::move(br));
  }
  Quantized q = quantize(branches, nb * nb, options.fraction_bits);
  out.items_ = std::move(q.items);
  out.modal_values_ = std::move(q.modal);
  return out;
}

SelectionResult lcurve_pipeline(const RegularizedProblem& problem, const ParameterGrid& grid,
                                const PipelineOptions& options, std::mt19937_64& rng) {
  return prepare_lcurve(problem, grid, options).select(rng);
}

// ---------------------------------------------------------------------------
// Singular values from the matrix state

double SpectrumDistribution::magnitude(std::uint64_t y) const {
  const auto N = std::int64_t{1} << n_bits;
  auto v = static_cast<std::int64_t>(y);
  if (v >= N / 2) v -= N;
  return 2.0 * std::numbers::pi * std::abs(static_cast<double>(v)) /
         (static_cast<double>(N) * t);
}

SpectrumDistribution singular_value_phase_distribution(const ExtendedMatrix& ext, int n_bits,
                                                       std::optional<double> eigen_unit) {
  if (n_bits < 2) throw std::invalid_argument("spectrum sampling needs at least 2 phase bits");
  const CMatrix& D = ext.dilation;
  const int w = qubits_for_dimension(D.rows());
  check_capacity(n_bits + 2 * w, "singular-value sampling");
  const double fro = D.norm();
  if (!(fro > 0.0)) throw NumericalError("matrix state of a zero matrix");

  SpectrumDistribution out;
  out.n_bits = n_bits;
  if (eigen_unit) {
    if (!(*eigen_unit > 0.0)) throw std::invalid_argument("eigen_unit must be positive");
    out.t = 2.0 * std::numbers::pi / (std::ldexp(1.0, n_bits) * *eigen_unit);
  } else {
    const double top = extended_singular_values(compute_svd(ext.A_mu.topRows(ext.rows())), ext.mu)(0);
    out.t = std::numbers::pi / (2.0 * top);
  }

  const Eigen::Index dim = Eigen::Index{1} << w;
  CVector amps = CVector::Zero(dim * dim);
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    for (Eigen::Index j = 0; j < D.cols(); ++j) amps(i * dim + j) = D(i, j) / fro;
  }
  StateVector s = StateVector::basis(n_bits, 0).tensor(StateVector::from_amplitudes(std::move(amps)));

  CMatrix H = CMatrix::Zero(dim, dim);
  H.topLeftCorner(D.rows(), D.cols()) = D;
  const double t = out.t;
  const PowerOracle U = [H, t](std::uint64_t p) {
    return hamiltonian_evolution(H, t * static_cast<double>(p));
  };
  const std::vector<int> phase = qubit_range(0, n_bits);
  s = phase_estimation_on(s, U, phase, qubit_range(n_bits, w));
  out.probabilities = marginal_probabilities(s, phase);
  return out;
}

RVector principal_singular_values(const ExtendedMatrix& ext, Eigen::Index r,
                                  const SpectrumOptions& options, std::mt19937_64& rng) {
  if (r < 1 || r > ext.cols()) throw std::invalid_argument("rank must satisfy 1 <= r <= n");
  const int shots = options.shots > 0 ? options.shots : static_cast<int>(10 * r);
  const SpectrumDistribution dist =
      singular_value_phase_distribution(ext, options.n_phase_bits, options.eigen_unit);

  const std::size_t half = std::size_t{1} << (options.n_phase_bits - 1);
  std::vector<int> counts(half + 1, 0);
  const std::span<const double> probs(dist.probabilities.data(),
                                      static_cast<std::size_t>(dist.probabilities.size()));
  const std::uint64_t N = std::uint64_t{1} << options.n_phase_bits;
  for (int s = 0; s < shots; ++s) {
    const std::uint64_t y = sample_index(probs, rng);
    ++counts[std::min(y, N - y)];
  }

  struct Cluster {
    int count = 0;
    std::size_t center = 0;
  };
  std::vector<Cluster> clusters;
  for (std::size_t c = 1; c <= half; ++c) {
    if (counts[c] == 0) continue;
    if (clusters.empty() || counts[c - 1] == 0 || c == 1) {
      clusters.push_back({0, c});
    }
    Cluster& cl = clusters.back();
    cl.count += counts[c];
    if (counts[c] > counts[cl.center]) cl.center = c;
  }
  if (static_cast<Eigen::Index>(clusters.size()) < r) {
    std::ostringstream os;
    os << "singular-value sampling found " << clusters.size() << " of " << r << " clusters in "
       << shots << " shots";
    throw NumericalError(os.str());
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const Cluster& a, const Cluster& b) { return a.count > b.count; });

  RVector sigma(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const double st = dist.magnitude(clusters[static_cast<std::size_t>(i)].center);
    sigma(i) = std::sqrt(std::max(0.0, st * st - ext.mu * ext.mu));
  }
  std::sort(sigma.data(), sigma.data() + r, std::greater<>());
  return sigma;
}

SelectionResult gcv_pipeline(const RegularizedProblem& problem, const ParameterGrid& grid,
                             Eigen::Index r, const PipelineOptions& options,
                             std::mt19937_64& rng) {
  require_problem(problem, grid);
  const double mu = options.extraction_mu.value_or(grid.mus.minCoeff());
  const ExtendedMatrix ext = build_extended(problem.A, mu);
  SpectrumOptions so;
  so.n_phase_bits = options.n_phase_bits;
  so.shots = options.shots;
  so.eigen_unit = options.eigen_unit;
  const RVector sigma = principal_singular_values(ext, r, so, rng);
  const std::vector<double> sr(sigma.data(), sigma.data() + sigma.size());
  return prepare_gcv(problem, grid, sr, options).select(rng);
}

}  // namespace qtik
