#include "qtikhonov/run.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "qtikhonov/matrix_market.hpp"
#include "qtikhonov/param_search.hpp"
#include "qtikhonov/problem.hpp"

namespace qtik {

namespace {

using json = nlohmann::ordered_json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json row_template(std::size_t index) {
  json r;
  r["record"] = "row";
  r["index"] = index;
  r["mu"] = nullptr;
  r["k"] = nullptr;
  r["solution_norm"] = nullptr;
  r["residual_norm"] = nullptr;
  r["gcv"] = nullptr;
  r["criterion"] = nullptr;
  r["oracle_solution_norm"] = nullptr;
  r["oracle_residual_norm"] = nullptr;
  r["oracle_gcv"] = nullptr;
  r["oracle_criterion"] = nullptr;
  return r;
}

json summary_template(Method method) {
  json s;
  s["record"] = "summary";
  s["method"] = to_string(method);
  s["chosen_index"] = nullptr;
  s["chosen_mu"] = nullptr;
  s["chosen_value"] = nullptr;
  s["oracle_index"] = nullptr;
  s["queries_used"] = 0;
  s["query_budget"] = nullptr;
  s["estimation_queries"] = 0;
  s["threshold_history"] = json::array();
  s["sigma_estimates"] = json::array();
  s["warnings"] = json::array();
  return s;
}

void fill_selection(json& s, const SelectionResult& r) {
  s["chosen_index"] = r.chosen_index;
  s["chosen_mu"] = r.chosen_mu;
  s["chosen_value"] = number_or_null(r.chosen_value);
  s["queries_used"] = r.queries_used;
  s["estimation_queries"] = r.estimation_queries;
  s["threshold_history"] = r.threshold_history;
  s["sigma_estimates"] = r.sigma_estimates;
  s["warnings"] = r.warnings;
}

std::mt19937_64 pipeline_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 1u};
  return std::mt19937_64(seq);
}

}  // namespace

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {"lcurve",          "gcv",      "classical-lcurve",
                                                 "classical-gcv",   "tikhonov", "tsvd"};
  return names;
}

Method parse_method(const std::string& name) {
  const auto& names = method_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<Method>(i);
  }
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::string to_string(Method method) { return method_names()[static_cast<std::size_t>(method)]; }

void RunConfig::validate() const {
  parse_method(method);
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
  if (!(mu0 > 0.0)) throw std::invalid_argument("mu0 must be positive");
  if (p < 1) throw std::invalid_argument("p must be at least 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (phase_bits < 2) throw std::invalid_argument("phase-bits must be at least 2");
  if (rank < 1) throw std::invalid_argument("rank must be at least 1");
  if (!(noise >= 0.0)) throw std::invalid_argument("noise must be nonnegative");
  if (matrix_file.empty() != rhs_file.empty()) {
    throw std::invalid_argument("--matrix-file and --rhs-file go together");
  }
  if (matrix_file.empty() && (m < 1 || n < 1)) throw std::invalid_argument("m and n must be positive");
}

RegularizedProblem load_or_generate(const RunConfig& config) {
  if (!config.matrix_file.empty()) {
    RegularizedProblem p;
    p.A = load_matrix(config.matrix_file);
    p.b = load_vector(config.rhs_file);
    p.validate();
    return p;
  }
  ProblemSpec spec;
  spec.kind = parse_problem_kind(config.problem);
  spec.m = config.m;
  spec.n = config.n;
  spec.noise = config.noise;
  spec.seed = config.seed;
  spec.rank = config.rank;
  return generate_problem(spec);
}

RunReport run(const RunConfig& config) {
  config.validate();
  const Method method = parse_method(config.method);
  const RegularizedProblem problem = load_or_generate(config);
  const SvdFactorization svd = compute_svd(problem.A);
  const ParameterGrid grid = make_grid(config.mu0, config.rho, config.p);

  RunReport rep;
  json& c = rep.config;
  c["record"] = "config";
  c["problem"] = config.matrix_file.empty() ? json(config.problem) : json(nullptr);
  c["matrix_file"] = config.matrix_file.empty() ? json(nullptr) : json(config.matrix_file);
  c["rhs_file"] = config.rhs_file.empty() ? json(nullptr) : json(config.rhs_file);
  c["m"] = problem.rows();
  c["n"] = problem.cols();
  c["noise"] = config.matrix_file.empty() ? json(config.noise) : json(nullptr);
  c["mu0"] = config.mu0;
  c["rho"] = config.rho;
  c["p"] = config.p;
  c["method"] = config.method;
  c["epsilon"] = config.epsilon;
  c["phase_bits"] = config.phase_bits;
  c["rank"] = config.rank;
  c["seed"] = config.seed;
  c["norm_b"] = problem.b.norm();
  c["sigma"] = std::vector<double>(svd.sigma.data(), svd.sigma.data() + svd.sigma.size());

  json s = summary_template(method);
  std::mt19937_64 rng = pipeline_rng(config.seed);
  PipelineOptions po;
  po.n_phase_bits = config.phase_bits;
  po.epsilon = config.epsilon;

  auto oracle_row = [&](std::size_t j, double mu) {
    const TikhonovSolution sol = tikhonov_solve(svd, problem.b, mu);
    json r = row_template(j);
    r["mu"] = mu;
    r["oracle_solution_norm"] = sol.solution_norm;
    r["oracle_residual_norm"] = sol.residual_norm;
    r["oracle_gcv"] = number_or_null(gcv_value(svd, problem.b, mu));
    return r;
  };

  switch (method) {
    case Method::LCurve:
    case Method::ClassicalLCurve: {
      const SelectionResult oracle = classical_select(problem, grid, Criterion::LCurveSum);
      const SelectionResult r =
          method == Method::LCurve ? lcurve_pipeline(problem, grid, po, rng) : oracle;
      for (std::size_t j = 0; j < grid.size(); ++j) {
        json row = oracle_row(j, grid.mus(static_cast<Eigen::Index>(j)));
        row["solution_norm"] = r.points[j].solution_norm;
        row["residual_norm"] = r.points[j].residual_norm;
        row["criterion"] = r.criterion_values[j];
        row["oracle_criterion"] = oracle.criterion_values[j];
        rep.rows.push_back(std::move(row));
      }
      fill_selection(s, r);
      s["oracle_index"] = oracle.chosen_index;
      if (method == Method::LCurve) s["query_budget"] = durr_hoyer_budget(grid.size());
      break;
    }
    case Method::Gcv:
    case Method::ClassicalGcv: {
      CriterionOptions co;
      co.rank = std::min<Eigen::Index>(config.rank, svd.sigma.size());
      const SelectionResult oracle = classical_select(
          problem, grid, method == Method::Gcv ? Criterion::GcvLowRank : Criterion::Gcv, co);
      SelectionResult r = oracle;
      if (method == Method::Gcv) {
        r = gcv_pipeline(problem, grid, config.rank, po, rng);
        s["query_budget"] = durr_hoyer_budget(grid.size());
      }
      for (std::size_t j = 0; j < grid.size(); ++j) {
        json row = oracle_row(j, grid.mus(static_cast<Eigen::Index>(j)));
        if (method == Method::ClassicalGcv) row["solution_norm"] = r.points[j].solution_norm;
        row["residual_norm"] = r.points[j].residual_norm;
        row["gcv"] = number_or_null(r.criterion_values[j]);
        row["criterion"] = number_or_null(r.criterion_values[j]);
        row["oracle_criterion"] = number_or_null(oracle.criterion_values[j]);
        rep.rows.push_back(std::move(row));
      }
      fill_selection(s, r);
      s["oracle_index"] = oracle.chosen_index;
      break;
    }
    case Method::Tikhonov: {
      for (std::size_t j = 0; j < grid.size(); ++j) {
        json row = oracle_row(j, grid.mus(static_cast<Eigen::Index>(j)));
        row["solution_norm"] = row["oracle_solution_norm"];
        row["residual_norm"] = row["oracle_residual_norm"];
        row["gcv"] = row["oracle_gcv"];
        rep.rows.push_back(std::move(row));
      }
      break;
    }
    case Method::Tsvd: {
      const Eigen::Index k_max = svd.numerical_rank();
      for (Eigen::Index k = 1; k <= k_max; ++k) {
        const TikhonovSolution sol = tsvd_solve(svd, problem.b, k);
        json row = row_template(static_cast<std::size_t>(k - 1));
        row["k"] = k;
        row["solution_norm"] = sol.solution_norm;
        row["residual_norm"] = sol.residual_norm;
        row["oracle_solution_norm"] = sol.solution_norm;
        row["oracle_residual_norm"] = sol.residual_norm;
        rep.rows.push_back(std::move(row));
      }
      break;
    }
  }
  rep.summary = std::move(s);
  return rep;
}

std::string RunReport::to_jsonl() const {
  std::ostringstream os;
  write_report(*this, os);
  return os.str();
}

void write_report(const RunReport& report, std::ostream& out) {
  out << report.config.dump() << '\n';
  for (const auto& r : report.rows) out << r.dump() << '\n';
  out << report.summary.dump() << '\n';
}

}  // namespace qtik
