#pragma once

// Regularization-parameter selection: Durr-Hoyer minimum finding, the L-curve
// and GCV pipelines built on the norm estimators, and exhaustive classical
// counterparts.
//
// The pipelines hold, for every grid index j, the exact distribution of the
// value the estimation circuit writes into its criterion register. Minimum
// finding then runs against that joint (index, value) distribution, which is
// what a measurement of the superposed state would return. Preparation is
// deterministic and expensive; selection is cheap and consumes the rng, so
// one prepared search can be replayed under many seeds.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qtikhonov/linalg.hpp"

namespace qtik {

struct ParameterGrid {
  RVector mus;  // mu_j = mu0 * rho^j, j = 0..p-1
  double rho = 0.9;

  std::size_t size() const { return static_cast<std::size_t>(mus.size()); }
};

/// Throws std::invalid_argument unless mu0 > 0, 0 < rho < 1, p >= 1.
ParameterGrid make_grid(double mu0, double rho, std::size_t p);

struct LCurvePoint {
  double mu = 0.0;
  double residual_norm = 0.0;
  double solution_norm = 0.0;
};

struct SelectionResult {
  std::size_t chosen_index = 0;
  double chosen_mu = 0.0;     // 0 when there is no grid
  double chosen_value = 0.0;  // value held by the final threshold
  // Exact values for classical selection; for the pipelines, the most likely
  // register value of each branch.
  std::vector<double> criterion_values;
  std::uint64_t queries_used = 0;        // minimum-finding oracle calls
  std::uint64_t estimation_queries = 0;  // controlled-G calls inside one oracle call
  std::vector<std::size_t> threshold_history;
  std::vector<LCurvePoint> points;
  std::vector<double> gcv_denominators;
  std::vector<double> sigma_estimates;
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Minimum finding

/// floor(22.5 sqrt(p) + 1.4 log2(p)^2).
std::uint64_t durr_hoyer_budget(std::size_t p);

/// One basis state of the searched register: grid index, the value it
/// carries, and its Born probability.
struct SearchItem {
  std::size_t index = 0;
  double value = 0.0;
  double probability = 0.0;
};

struct MinimumSearch {
  std::size_t item = 0;  // position in the item list
  std::uint64_t queries = 0;
  std::vector<std::size_t> threshold_history;  // grid indices
};

/// Threshold loop over items ordered by (value, index). Each round draws a
/// Grover iteration count j uniformly from [0, ceil(m)), pays j + 1 oracle
/// calls and succeeds with probability sin^2((2j + 1) asin sqrt(a)), a being
/// the marked mass. Stops before the budget for p grid indices would be
/// exceeded.
MinimumSearch durr_hoyer_search(std::span<const SearchItem> items, std::size_t p,
                                std::mt19937_64& rng);

/// Uniform superposition over p values.
SelectionResult durr_hoyer_min(std::span<const double> values, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Classical selection

enum class Criterion { LCurveSum, Gcv, GcvLowRank };

struct CriterionOptions {
  // The L-curve criterion is (||r|| - residual_shift)^2 + (||x|| - solution_shift)^2.
  double residual_shift = 0.0;
  double solution_shift = 0.0;
  Eigen::Index rank = 2;  // GcvLowRank only
};

SelectionResult classical_select(const RegularizedProblem& problem, const ParameterGrid& grid,
                                 Criterion criterion, const CriterionOptions& options = {});

// ---------------------------------------------------------------------------
// Pipelines

struct PipelineOptions {
  int n_phase_bits = 8;
  double epsilon = 0.05;  // norm accuracy, in units of ||b||
  int repetitions = 5;    // median-of-K for every norm estimate
  int searches = 1;       // independent minimum-finding runs, lowest value kept
  std::optional<double> eigen_unit;
  CriterionOptions criterion;
  int fraction_bits = 16;  // criterion register, value / ||b||^2
  // GCV only: shots for the singular-value sampling (0 picks 10 r) and the
  // mu it runs at (default: smallest grid value).
  int shots = 0;
  std::optional<double> extraction_mu;
};

class PreparedSearch {
 public:
  std::size_t size() const { return modal_values_.size(); }
  const std::vector<SearchItem>& items() const { return items_; }
  const std::vector<double>& modal_values() const { return modal_values_; }
  const std::vector<LCurvePoint>& points() const { return points_; }
  const ParameterGrid& grid() const { return grid_; }

  /// Controlled-G calls needed to prepare the searched state once.
  std::uint64_t estimation_queries() const { return estimation_queries_; }

  SelectionResult select(std::mt19937_64& rng) const;

 private:
  friend PreparedSearch prepare_lcurve(const RegularizedProblem&, const ParameterGrid&,
                                       const PipelineOptions&);
  friend PreparedSearch prepare_gcv(const RegularizedProblem&, const ParameterGrid&,
                                    std::span<const double>, const PipelineOptions&);
  ParameterGrid grid_;
  std::vector<SearchItem> items_;
  std::vector<double> modal_values_;
  std::vector<LCurvePoint> points_;
  std::vector<double> gcv_denominators_;
  std::vector<double> sigma_estimates_;
  std::vector<std::string> warnings_;
  std::uint64_t estimation_queries_ = 0;
  int searches_ = 1;
};

/// Steps 1-3 of the L-curve pipeline: per grid value, HHL states, norm
/// estimators, and the distribution of the criterion register.
PreparedSearch prepare_lcurve(const RegularizedProblem& problem, const ParameterGrid& grid,
                              const PipelineOptions& options);

/// Steps 1-3 of the GCV pipeline given estimated leading singular values.
PreparedSearch prepare_gcv(const RegularizedProblem& problem, const ParameterGrid& grid,
                           std::span<const double> sigma_r, const PipelineOptions& options);

SelectionResult lcurve_pipeline(const RegularizedProblem& problem, const ParameterGrid& grid,
                                const PipelineOptions& options, std::mt19937_64& rng);

struct SpectrumOptions {
  int n_phase_bits = 8;
  int shots = 0;  // 0 picks 10 r
  std::optional<double> eigen_unit;
};

/// Phase-register distribution after QPE with exp(-i t dilation) on the
/// normalized matrix state sum_ij a_ij |i>|j>. Index = raw register value.
struct SpectrumDistribution {
  int n_bits = 0;
  double t = 0.0;
  RVector probabilities;

  /// |eigenvalue| read from register value y.
  double magnitude(std::uint64_t y) const;
};

SpectrumDistribution singular_value_phase_distribution(const ExtendedMatrix& ext, int n_bits,
                                                       std::optional<double> eigen_unit = {});

/// Samples the phase register `shots` times, merges outcomes in adjacent
/// cells, keeps the r most frequent clusters (modal cell as center) and
/// returns sqrt(sigma~^2 - mu^2) for each, descending. Throws NumericalError
/// when fewer than r clusters show up.
RVector principal_singular_values(const ExtendedMatrix& ext, Eigen::Index r,
                                  const SpectrumOptions& options, std::mt19937_64& rng);

/// Extracts the leading singular values at the smallest grid value, then
/// prepares and selects.
SelectionResult gcv_pipeline(const RegularizedProblem& problem, const ParameterGrid& grid,
                             Eigen::Index r, const PipelineOptions& options,
                             std::mt19937_64& rng);

}  // namespace qtik
