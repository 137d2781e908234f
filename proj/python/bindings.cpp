#include <random>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qtikhonov/hhl.hpp"
#include "qtikhonov/matrix_market.hpp"
#include "qtikhonov/param_search.hpp"
#include "qtikhonov/problem.hpp"
#include "qtikhonov/run.hpp"

namespace py = pybind11;
using namespace qtik;

namespace {

Criterion parse_criterion(const std::string& name) {
  if (name == "lcurve") return Criterion::LCurveSum;
  if (name == "gcv") return Criterion::Gcv;
  if (name == "gcv-lowrank") return Criterion::GcvLowRank;
  throw std::invalid_argument("criterion must be lcurve, gcv or gcv-lowrank");
}

RegularizedProblem make_problem(const CMatrix& A, const CVector& b) {
  RegularizedProblem p;
  p.A = A;
  p.b = b;
  p.validate();
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Simulated quantum Tikhonov parameter selection";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", m.attr("Error").ptr());
  py::register_exception<NumericalError>(m, "NumericalError", m.attr("Error").ptr());
  py::register_exception<CapacityError>(m, "CapacityError", m.attr("Error").ptr());
  py::register_exception<SpectralError>(m, "SpectralError", m.attr("Error").ptr());

  py::class_<SvdFactorization>(m, "SvdFactorization")
      .def_readonly("U", &SvdFactorization::U)
      .def_readonly("sigma", &SvdFactorization::sigma)
      .def_readonly("V", &SvdFactorization::V)
      .def("numerical_rank", &SvdFactorization::numerical_rank)
      .def("reconstruct", &SvdFactorization::reconstruct);

  py::class_<TikhonovSolution>(m, "TikhonovSolution")
      .def_readonly("mu", &TikhonovSolution::mu)
      .def_readonly("x", &TikhonovSolution::x)
      .def_readonly("solution_norm", &TikhonovSolution::solution_norm)
      .def_readonly("residual_norm", &TikhonovSolution::residual_norm)
      .def_readonly("rank_deficient", &TikhonovSolution::rank_deficient);

  py::class_<ExtendedMatrix>(m, "ExtendedMatrix")
      .def_readonly("mu", &ExtendedMatrix::mu)
      .def_readonly("A_mu", &ExtendedMatrix::A_mu)
      .def_readonly("dilation", &ExtendedMatrix::dilation)
      .def_readonly("kappa_mu", &ExtendedMatrix::kappa_mu);

  m.def("compute_svd", &compute_svd, py::arg("A"));
  m.def("tikhonov_solve", &tikhonov_solve, py::arg("svd"), py::arg("b"), py::arg("mu"));
  m.def("tsvd_solve", &tsvd_solve, py::arg("svd"), py::arg("b"), py::arg("k"));
  m.def("condition_number_mu", &condition_number_mu, py::arg("svd"), py::arg("mu"));
  m.def("gcv_value", &gcv_value, py::arg("svd"), py::arg("b"), py::arg("mu"));
  m.def(
      "gcv_lowrank",
      [](const std::vector<double>& sigma_r, double residual_sq, Eigen::Index rows,
         Eigen::Index cols, double mu) { return gcv_lowrank(sigma_r, residual_sq, rows, cols, mu); },
      py::arg("sigma_r"), py::arg("residual_sq"), py::arg("m"), py::arg("n"), py::arg("mu"));
  m.def("build_extended", py::overload_cast<const CMatrix&, double>(&build_extended), py::arg("A"),
        py::arg("mu"));

  m.def(
      "generate_problem",
      [](const std::string& kind, Eigen::Index rows, Eigen::Index cols, double noise,
         std::uint64_t seed, Eigen::Index rank) {
        ProblemSpec spec;
        spec.kind = parse_problem_kind(kind);
        spec.m = rows;
        spec.n = cols;
        spec.noise = noise;
        spec.seed = seed;
        spec.rank = rank;
        const RegularizedProblem p = generate_problem(spec);
        return py::make_tuple(p.A, p.b, *p.x_true);
      },
      py::arg("kind"), py::arg("m"), py::arg("n"), py::arg("noise") = 0.0, py::arg("seed") = 0,
      py::arg("rank") = 2, "Returns (A, b, x_true).");

  m.def(
      "estimate_norms",
      [](const CMatrix& A, const CVector& b, double mu, double epsilon, int phase_bits,
         std::uint64_t seed, int repetitions) {
        const ExtendedMatrix ext = build_extended(A, mu);
        const HhlConfig cfg = make_hhl_config(ext, phase_bits);
        std::mt19937_64 rng(seed);
        const NormEstimates e = estimate_norms(ext, b, cfg, epsilon, rng, repetitions);
        return py::make_tuple(e.solution_norm, e.residual_norm, e.queries_used);
      },
      py::arg("A"), py::arg("b"), py::arg("mu"), py::arg("epsilon") = 0.05,
      py::arg("phase_bits") = 8, py::arg("seed") = 0, py::arg("repetitions") = 1,
      "Returns (solution_norm, residual_norm, queries).");

  py::class_<LCurvePoint>(m, "LCurvePoint")
      .def_readonly("mu", &LCurvePoint::mu)
      .def_readonly("residual_norm", &LCurvePoint::residual_norm)
      .def_readonly("solution_norm", &LCurvePoint::solution_norm);

  py::class_<SelectionResult>(m, "SelectionResult")
      .def_readonly("chosen_index", &SelectionResult::chosen_index)
      .def_readonly("chosen_mu", &SelectionResult::chosen_mu)
      .def_readonly("chosen_value", &SelectionResult::chosen_value)
      .def_readonly("criterion_values", &SelectionResult::criterion_values)
      .def_readonly("queries_used", &SelectionResult::queries_used)
      .def_readonly("estimation_queries", &SelectionResult::estimation_queries)
      .def_readonly("threshold_history", &SelectionResult::threshold_history)
      .def_readonly("points", &SelectionResult::points)
      .def_readonly("sigma_estimates", &SelectionResult::sigma_estimates)
      .def_readonly("warnings", &SelectionResult::warnings);

  m.def("durr_hoyer_budget", &durr_hoyer_budget, py::arg("p"));
  m.def(
      "durr_hoyer_min",
      [](const std::vector<double>& values, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return durr_hoyer_min(values, rng);
      },
      py::arg("values"), py::arg("seed") = 0);

  m.def(
      "classical_select",
      [](const CMatrix& A, const CVector& b, const std::vector<double>& mus,
         const std::string& criterion, Eigen::Index rank) {
        ParameterGrid g;
        g.mus = Eigen::Map<const RVector>(mus.data(), static_cast<Eigen::Index>(mus.size()));
        CriterionOptions o;
        o.rank = rank;
        return classical_select(make_problem(A, b), g, parse_criterion(criterion), o);
      },
      py::arg("A"), py::arg("b"), py::arg("mus"), py::arg("criterion") = "lcurve",
      py::arg("rank") = 2);

  m.def(
      "make_grid",
      [](double mu0, double rho, std::size_t p) {
        const ParameterGrid g = make_grid(mu0, rho, p);
        return std::vector<double>(g.mus.data(), g.mus.data() + g.mus.size());
      },
      py::arg("mu0") = 1.0, py::arg("rho") = 0.9, py::arg("p") = 16);

  auto pipeline_options = [](double epsilon, int phase_bits) {
    PipelineOptions o;
    o.epsilon = epsilon;
    o.n_phase_bits = phase_bits;
    return o;
  };
  m.def(
      "lcurve_pipeline",
      [pipeline_options](const CMatrix& A, const CVector& b, double mu0, double rho,
                         std::size_t p, double epsilon, int phase_bits, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return lcurve_pipeline(make_problem(A, b), make_grid(mu0, rho, p),
                               pipeline_options(epsilon, phase_bits), rng);
      },
      py::arg("A"), py::arg("b"), py::arg("mu0") = 1.0, py::arg("rho") = 0.9, py::arg("p") = 8,
      py::arg("epsilon") = 0.05, py::arg("phase_bits") = 8, py::arg("seed") = 0);
  m.def(
      "gcv_pipeline",
      [pipeline_options](const CMatrix& A, const CVector& b, Eigen::Index rank, double mu0,
                         double rho, std::size_t p, double epsilon, int phase_bits,
                         std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return gcv_pipeline(make_problem(A, b), make_grid(mu0, rho, p), rank,
                            pipeline_options(epsilon, phase_bits), rng);
      },
      py::arg("A"), py::arg("b"), py::arg("rank") = 2, py::arg("mu0") = 1.0, py::arg("rho") = 0.9,
      py::arg("p") = 8, py::arg("epsilon") = 0.05, py::arg("phase_bits") = 8,
      py::arg("seed") = 0);

  m.def("load_matrix", &load_matrix, py::arg("path"));
  m.def("save_matrix", &save_matrix, py::arg("path"), py::arg("A"));

  m.def(
      "run",
      [](const py::kwargs& kw) {
        RunConfig c;
        for (const auto& [key, value] : kw) {
          const std::string k = py::str(key);
          if (k == "problem") c.problem = value.cast<std::string>();
          else if (k == "m") c.m = value.cast<Eigen::Index>();
          else if (k == "n") c.n = value.cast<Eigen::Index>();
          else if (k == "noise") c.noise = value.cast<double>();
          else if (k == "matrix_file") c.matrix_file = value.cast<std::string>();
          else if (k == "rhs_file") c.rhs_file = value.cast<std::string>();
          else if (k == "mu0") c.mu0 = value.cast<double>();
          else if (k == "rho") c.rho = value.cast<double>();
          else if (k == "p") c.p = value.cast<std::size_t>();
          else if (k == "method") c.method = value.cast<std::string>();
          else if (k == "epsilon") c.epsilon = value.cast<double>();
          else if (k == "phase_bits") c.phase_bits = value.cast<int>();
          else if (k == "rank") c.rank = value.cast<Eigen::Index>();
          else if (k == "seed") c.seed = value.cast<std::uint64_t>();
          else throw std::invalid_argument("unknown run option '" + k + "'");
        }
        return run(c).to_jsonl();
      },
      "Runs one configuration and returns the JSON Lines report.");
}
