#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qtikhonov/amplitude_estimation.hpp"
#include "support.hpp"

using namespace qtik;

namespace {

constexpr double kPi = std::numbers::pi;

// Ry(theta') on qubit 0 of a 1-qubit register gives good amplitude cos(theta').
StatePrep single_qubit_prep(double theta) {
  return StatePrep::from_unitary(gates::Ry(theta), 0);
}

StatePrep random_prep(int qubits, std::vector<int> flags, std::mt19937_64& rng) {
  const auto d = Eigen::Index{1} << qubits;
  return StatePrep::from_state(StateVector::normalized(fixtures::random_vector(d, rng)),
                               std::move(flags));
}

// |sum_k e^{2 pi i k d / N}|^2 / N^2, the Fejer kernel of textbook QPE.
double fejer(double d, double N) {
  const double s = std::sin(kPi * d / N);
  if (std::abs(s) < 1e-14) return 1.0;
  const double t = std::sin(kPi * d);
  return t * t / (N * N * s * s);
}

}  // namespace

TEST(FixedPoint, RoundTripAndSaturation) {
  const FixedPointFormat fmt;  // 2.16
  EXPECT_DOUBLE_EQ(fmt.min_value(), -2.0);
  EXPECT_DOUBLE_EQ(fmt.max_value(), 2.0 - std::ldexp(1.0, -16));
  for (double v : {0.0, 0.5, -0.75, 1.2345, -1.999}) {
    const EncodedValue e = encode_fixed(v, fmt);
    EXPECT_FALSE(e.saturated);
    EXPECT_NEAR(decode_fixed(e.code, fmt), v, fmt.resolution() / 2);
  }
  EXPECT_TRUE(encode_fixed(2.5, fmt).saturated);
  EXPECT_DOUBLE_EQ(decode_fixed(encode_fixed(2.5, fmt).code, fmt), fmt.max_value());
  EXPECT_TRUE(encode_fixed(-3.0, fmt).saturated);
  EXPECT_DOUBLE_EQ(decode_fixed(encode_fixed(-3.0, fmt).code, fmt), -2.0);
  EXPECT_TRUE(encode_fixed(std::nan(""), fmt).saturated);
  EXPECT_THROW(encode_fixed(0.0, FixedPointFormat{0, 4}), std::invalid_argument);
}

TEST(FixedPoint, CodeOrderMatchesSignedValueOrder) {
  const FixedPointFormat fmt{3, 2};
  EXPECT_EQ(encode_fixed(-0.25, fmt).code, 31u);
  EXPECT_EQ(encode_fixed(0.25, fmt).code, 1u);
}

TEST(StatePrepTest, GoodAmplitudeFromFlags) {
  const StatePrep p = single_qubit_prep(0.4);
  EXPECT_NEAR(p.good_amplitude(), std::cos(0.4), 1e-15);
  EXPECT_NEAR(p.theta(), 0.4, 1e-12);

  CVector amps(4);
  amps << 0.5, 0.5, 0.5, 0.5;
  const StatePrep two = StatePrep::from_state(StateVector::from_amplitudes(amps), std::vector<int>{0, 1});
  EXPECT_NEAR(two.good_amplitude(), 0.5, 1e-15);
  EXPECT_NEAR((two.good_component() + two.bad_component() - amps).norm(), 0.0, 1e-15);
}

TEST(StatePrepTest, RejectsBadFlags) {
  const StateVector s = StateVector::basis(2, 0);
  EXPECT_THROW(StatePrep::from_state(s, std::vector<int>{}), std::invalid_argument);
  EXPECT_THROW(StatePrep::from_state(s, 2), std::invalid_argument);
  EXPECT_THROW(StatePrep::from_state(s, std::vector<int>{1, 1}), std::invalid_argument);
}

TEST(Grover, RotatesByTwiceTheta) {
  const double theta = 0.3;
  const UnitaryOp G = grover_operator(single_qubit_prep(theta));
  Eigen::ComplexEigenSolver<CMatrix> eig(G.matrix());
  std::vector<double> phases;
  for (int k = 0; k < 2; ++k) phases.push_back(std::abs(std::arg(eig.eigenvalues()(k))));
  EXPECT_NEAR(phases[0], 2 * theta, 1e-12);
  EXPECT_NEAR(phases[1], 2 * theta, 1e-12);
}

TEST(Grover, DenseSizeLimited) {
  std::mt19937_64 rng(1);
  EXPECT_THROW(grover_operator(random_prep(9, {0}, rng)), CapacityError);
}

TEST(Accuracy, BitsForAccuracy) {
  EXPECT_EQ(bits_for_accuracy(0.05), 8);
  EXPECT_EQ(bits_for_accuracy(kPi / 8), 5);
  EXPECT_EQ(bits_for_accuracy(kPi), 2);
  EXPECT_THROW(bits_for_accuracy(0.0), std::invalid_argument);
}

TEST(Folding, Examples) {
  EXPECT_EQ(fold_register(0, 4), 0u);
  EXPECT_EQ(fold_register(3, 4), 3u);
  EXPECT_EQ(fold_register(13, 4), 3u);
  EXPECT_EQ(fold_register(8, 4), 8u);
  EXPECT_NEAR(fold_theta(13, 4), 3 * kPi / 16, 1e-15);
}

TEST(QpeDistribution, MatchesFejerKernel) {
  for (double theta : {0.3, 0.71, 1.2}) {
    for (int n : {3, 6}) {
      const double N = std::ldexp(1.0, n);
      const double w = theta / kPi * N;  // eigenphases +-2 theta read as y = +-w
      const RVector p = qpe_register_distribution(theta, n);
      EXPECT_NEAR(p.sum(), 1.0, 1e-12);
      for (int y = 0; y < p.size(); ++y) {
        EXPECT_NEAR(p(y), 0.5 * fejer(y - w, N) + 0.5 * fejer(y + w, N), 1e-12) << theta << " " << y;
      }
    }
  }
}

TEST(QpeDistribution, ExactAngleReadsMirrorPair) {
  const int n = 5;
  const double theta = 7 * kPi / 32;
  const RVector p = qpe_register_distribution(theta, n);
  EXPECT_NEAR(p(7), 0.5, 1e-12);
  EXPECT_NEAR(p(25), 0.5, 1e-12);
  const RVector f = folded_distribution(theta, n);
  EXPECT_NEAR(f(7), 1.0, 1e-12);
}

TEST(QpeDistribution, WithinOneCellWithProbabilityEightOverPiSquared) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, kPi / 2);
  for (int trial = 0; trial < 200; ++trial) {
    const double theta = u(rng);
    const int n = 7;
    const RVector f = folded_distribution(theta, n);
    double mass = 0;
    for (int v = 0; v < f.size(); ++v) {
      if (std::abs(v * kPi / std::ldexp(1.0, n) - theta) <= kPi / std::ldexp(1.0, n) + 1e-12) mass += f(v);
    }
    EXPECT_GE(mass, 8 / (kPi * kPi) - 1e-12) << theta;
  }
}

TEST(QpeState, PlaneRouteMatchesGateLevel) {
  std::mt19937_64 rng(8);
  const std::vector<std::vector<int>> flag_sets = {{0}, {0, 2}, {1}};
  for (const auto& flags : flag_sets) {
    const StatePrep prep = random_prep(3, flags, rng);
    for (int n : {2, 4, 5}) {
      const StateVector a = grover_qpe_state(prep, n);
      const StateVector b = grover_qpe_state_gate_level(prep, n);
      EXPECT_LE((a.amplitudes() - b.amplitudes()).norm(), 1e-10);
      const RVector marg = marginal_probabilities(b, qubit_range(0, n));
      EXPECT_LE((marg - qpe_register_distribution(prep, n)).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Median, MatchesEnumeration) {
  RVector f(4);
  f << 0.1, 0.4, 0.3, 0.2;
  for (int K : {3, 5}) {
    RVector brute = RVector::Zero(4);
    std::vector<int> draw(static_cast<std::size_t>(K), 0);
    const int total = static_cast<int>(std::pow(4, K));
    for (int code = 0; code < total; ++code) {
      int c = code;
      double p = 1.0;
      for (int k = 0; k < K; ++k) {
        draw[static_cast<std::size_t>(k)] = c % 4;
        p *= f(c % 4);
        c /= 4;
      }
      std::vector<int> s = draw;
      std::sort(s.begin(), s.end());
      brute(s[static_cast<std::size_t>(K / 2)]) += p;
    }
    EXPECT_LE((median_distribution(f, K) - brute).cwiseAbs().maxCoeff(), 1e-14) << K;
  }
  EXPECT_THROW(median_distribution(f, 2), std::invalid_argument);
}

TEST(Median, ConcentratesOnMode) {
  const RVector f = folded_distribution(0.6, 6);
  const RVector m = median_distribution(f, 9);
  Eigen::Index a = 0, b = 0;
  f.maxCoeff(&a);
  m.maxCoeff(&b);
  EXPECT_EQ(a, b);
  EXPECT_GT(m(b), f(a));
}

TEST(Estimate, SamplesFollowDistributionAndCountQueries) {
  std::mt19937_64 rng(21);
  const StatePrep prep = single_qubit_prep(0.9);
  const int n = 5;
  const RVector f = folded_distribution(prep.theta(), n);
  RVector counts = RVector::Zero(f.size());
  const int shots = 20000;
  for (int s = 0; s < shots; ++s) {
    const AmplitudeEstimate e = estimate_theta(prep, n, rng);
    counts(static_cast<Eigen::Index>(fold_register(e.raw_register, n))) += 1.0;
    EXPECT_NEAR(e.theta_tilde, fold_theta(e.raw_register, n), 0.0);
  }
  EXPECT_LE((counts / shots - f).cwiseAbs().maxCoeff(), 0.015);

  const AmplitudeEstimate e = estimate_theta(prep, n, rng, 3);
  EXPECT_EQ(e.queries, 3u * 31u);
  EXPECT_NEAR(e.probability_estimate, std::pow(std::sin(e.theta_tilde), 2), 1e-15);
  EXPECT_THROW(estimate_theta(prep, n, rng, 4), std::invalid_argument);
}

TEST(Estimate, SeedDeterminism) {
  const StatePrep prep = single_qubit_prep(0.77);
  std::mt19937_64 a(3), b(3);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(estimate_theta(prep, 6, a, 3).raw_register, estimate_theta(prep, 6, b, 3).raw_register);
  }
}

TEST(Coherent, ExactAngleRestoresInput) {
  const int n = 4;
  const StatePrep prep = single_qubit_prep(3 * kPi / 16);
  const FixedPointFormat fmt{2, 6};
  const CoherentEstimate ce = coherent_estimate(prep, [](double c) { return c; }, n, fmt);
  int live = 0;
  for (const auto& [code, p] : ce.code_probabilities()) live += p > 1e-20;
  EXPECT_EQ(live, 1);
  const std::uint64_t code = encode_fixed(std::cos(3 * kPi / 16), fmt).code;
  EXPECT_NEAR(std::abs(ce.input_overlap(code)), 1.0, 1e-12);
  EXPECT_NEAR(ce.norm(), 1.0, 1e-12);
}

TEST(Coherent, MatchesDenseCircuit) {
  std::mt19937_64 rng(12);
  const int n = 4;
  const FixedPointFormat fmt{2, 3};
  const int fw = fmt.width();
  const StatePrep prep = random_prep(2, {0}, rng);
  const RealFunction f = [](double c) { return 2 * c * c - 0.5; };
  const CoherentEstimate ce = coherent_estimate(prep, f, n, fmt);

  // Forward QPE on the dense G, write f into the register by permutation, undo QPE.
  const StateVector fwd = grover_qpe_state_gate_level(prep, n);
  const int total = n + prep.num_qubits() + fw;
  CVector amps = CVector::Zero(Eigen::Index{1} << total);
  const Eigen::Index sys_dim = Eigen::Index{1} << prep.num_qubits();
  for (Eigen::Index i = 0; i < fwd.dimension(); ++i) {
    const auto y = static_cast<std::uint64_t>(i / sys_dim);
    const std::uint64_t code = encode_fixed(f(std::cos(fold_theta(y, n))), fmt).code;
    amps((i << fw) | static_cast<Eigen::Index>(code)) = fwd.amplitudes()(i);
  }
  const UnitaryOp G = grover_operator(prep);
  const PowerOracle powers = [&](std::uint64_t p) { return G.power(p); };
  const StateVector dense = inverse_phase_estimation_on(unchecked_state(amps, total), powers,
                                                        qubit_range(0, n), qubit_range(n, prep.num_qubits()));
  EXPECT_LE((dense.amplitudes() - ce.to_statevector().amplitudes()).norm(), 1e-10);

  double sum = 0;
  for (const auto& [code, p] : ce.code_probabilities()) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Coherent, FlagsSaturationAndPhaseLimit) {
  const StatePrep prep = single_qubit_prep(0.2);
  const CoherentEstimate ce = coherent_estimate(prep, [](double c) { return 10 * c; }, 4, FixedPointFormat{2, 4});
  EXPECT_TRUE(ce.saturated());
  EXPECT_THROW(coherent_estimate(prep, [](double c) { return c; }, 12), CapacityError);
}

TEST(Parallel, JointDistributionMatchesDenseState) {
  const std::vector<StatePrep> preps = {single_qubit_prep(0.3), single_qubit_prep(1.1),
                                        single_qubit_prep(0.7)};
  const std::vector<RealFunction> fs(3, [](double c) { return c; });
  CVector w(3);
  w << 0.6, 0.0, 0.8;
  const FixedPointFormat fmt{2, 4};
  const ParallelEstimate pe = parallel_estimate(preps, fs, w, 4, fmt);
  EXPECT_EQ(pe.index_bits(), 2);
  const StateVector s = pe.to_statevector();
  EXPECT_NEAR(s.norm(), 1.0, 1e-12);

  const int total = s.num_qubits();
  std::vector<int> reg = qubit_range(0, 2);
  for (int q = total - fmt.width(); q < total; ++q) reg.push_back(q);
  const RVector marg = marginal_probabilities(s, reg);
  double sum = 0;
  for (const JointOutcome& o : pe.joint_distribution()) {
    EXPECT_NEAR(marg(static_cast<Eigen::Index>((o.index << fmt.width()) | o.code)), o.probability, 1e-12);
    sum += o.probability;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_THROW(parallel_estimate(preps, fs, CVector::Ones(3), 4, fmt), std::invalid_argument);
}
