/*
 * Copyright 2026 The klmsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "klmsim/analysis.hpp"
#include "klmsim/errors.hpp"
#include "klmsim/evolve.hpp"
#include "klmsim/gates.hpp"
#include "klmsim/noise.hpp"

namespace klm {
namespace {

const BasisPair kZZ{Basis::kZ, Basis::kZ};
const BasisPair kXX{Basis::kX, Basis::kX};

double deviation(const GateBundle& g, const Circuit& c) {
  return proportionality_check(conditional_map(c, g.herald, logical_encoding(g)), cnot_matrix()).deviation;
}

TEST(Hom, BalancedSplitterGivesFullDip) {
  EXPECT_NEAR(hom_coincidence_simulated(0.5, 1.0), 0.0, 1e-15);
  EXPECT_NEAR(hom_coincidence_simulated(0.5, 0.0), 0.5, 1e-15);
  EXPECT_NEAR(hom_visibility(0.5), 1.0, 1e-15);
}

TEST(Hom, AsymmetricSplitterVisibility) {
  // V = 2RT / (R^2 + T^2) at R = 0.23.
  const double r = 0.23, t = 0.77;
  const double expected = 2.0 * r * t / (r * r + t * t);
  EXPECT_NEAR(hom_visibility(r), expected, 1e-15);
  const double c0 = hom_coincidence_simulated(r, 0.0);
  const double c1 = hom_coincidence_simulated(r, 1.0);
  EXPECT_NEAR((c0 - c1) / c0, expected, 1e-10);
  EXPECT_NEAR(expected, 0.5485, 5e-5);
  EXPECT_EQ(std::lround(100.0 * expected), 55);
}

TEST(Hom, SimulatedMatchesAnalyticAcrossOverlaps) {
  for (double r : {0.1, 0.23, 0.5}) {
    double previous = 2.0;
    for (int i = 0; i <= 20; ++i) {
      const double o = i / 20.0;
      const double sim = hom_coincidence_simulated(r, o);
      EXPECT_NEAR(sim, hom_coincidence_analytic(r, o), 1e-12) << r << " " << o;
      EXPECT_LT(sim, previous + 1e-15);
      previous = sim;
    }
    const double c0 = hom_coincidence_analytic(r, 0.0);
    EXPECT_NEAR((c0 - hom_coincidence_analytic(r, 1.0)) / c0, hom_visibility(r), 1e-12);
  }
}

TEST(Hom, VisibilityRejectsDegenerateSplitters) {
  EXPECT_THROW(hom_visibility(0.0), std::invalid_argument);
  EXPECT_THROW(hom_visibility(1.0), std::invalid_argument);
}

TEST(DelayToOverlap, GaussianProfile) {
  EXPECT_DOUBLE_EQ(delay_to_overlap(0.0, 1.0), 1.0);
  EXPECT_NEAR(delay_to_overlap(1.0, 1.0), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(delay_to_overlap(-2.0, 2.0), std::exp(-0.5), 1e-15);
  EXPECT_LT(delay_to_overlap(6.0, 1.0), 1e-7);
  EXPECT_THROW(delay_to_overlap(0.0, 0.0), std::invalid_argument);
}

TEST(HomScanTest, DipCentredAtZeroDelay) {
  std::vector<double> delays;
  for (int i = -10; i <= 10; ++i) delays.push_back(i * 0.3);
  const auto points = hom_scan(0.23, delays, 1.0);
  ASSERT_EQ(points.size(), delays.size());
  const auto& centre = points[10];
  EXPECT_DOUBLE_EQ(centre.delay, 0.0);
  EXPECT_DOUBLE_EQ(centre.overlap, 1.0);
  for (const auto& p : points) {
    EXPECT_GE(p.coincidence_simulated, centre.coincidence_simulated - 1e-15);
    EXPECT_NEAR(p.coincidence_simulated, p.coincidence_analytic, 1e-12);
  }
  EXPECT_NEAR(points.front().coincidence_simulated, hom_coincidence_analytic(0.23, 0.0), 1e-3);
}

TEST(OverlapSpecTest, SymmetricLookupAndValidation) {
  OverlapSpec s;
  s.set("a", "b", 0.9);
  EXPECT_DOUBLE_EQ(s.get("b", "a"), 0.9);
  EXPECT_DOUBLE_EQ(s.get("a", "c"), 1.0);
  EXPECT_THROW(s.set("a", "a", 0.5), std::invalid_argument);
  EXPECT_THROW(s.set("a", "b", 1.5), std::invalid_argument);
}

TEST(SlotDecomposition, ReproducesGramMatrix) {
  Eigen::MatrixXd g(3, 3);
  g << 1.0, 0.9, 0.5, 0.9, 1.0, 0.6, 0.5, 0.6, 1.0;
  const Eigen::MatrixXd s = slot_decomposition(g);
  EXPECT_NEAR((s * s.transpose() - g).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_EQ(slot_decomposition(Eigen::MatrixXd::Ones(3, 3)).cols(), 1);
  EXPECT_EQ(slot_decomposition(Eigen::MatrixXd::Identity(3, 3)).cols(), 3);
}

TEST(SlotDecomposition, RejectsInconsistentOverlaps) {
  // a == b and a == c exactly, but b orthogonal to c.
  Eigen::MatrixXd g(3, 3);
  g << 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0;
  EXPECT_THROW(slot_decomposition(g), ModelError);
}

TEST(DistinguishableInput, FullOverlapMatchesIdealCircuit) {
  const GateBundle g = build_gate("klm-cnot-ppbs");
  TruthTableOptions ideal;
  TruthTableOptions unit;
  for (const auto& a : {"A1", "A2"}) {
    unit.noise.overlaps.set("control", a, 1.0);
    unit.noise.overlaps.set("target", a, 1.0);
  }
  for (const auto& pair : standard_basis_pairs()) {
    const TruthTable a = truth_table(g, pair.first, pair.second, ideal);
    const TruthTable b = truth_table(g, pair.first, pair.second, unit);
    EXPECT_NEAR((a.probabilities - b.probabilities).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  }
}

TEST(Perturbation, EmptySpecIsIdentity) {
  const GateBundle g = build_gate("klm-cnot-ppbs");
  EXPECT_EQ(perturb_circuit(g.circuit, {}), g.circuit);
}

TEST(Perturbation, OffsetDegradesGateSlightly) {
  const GateBundle g = build_gate("klm-cnot-ppbs");
  PerturbationSpec spec;
  spec.offsets["ppbs2.r_h"] = 0.005;
  const Circuit c = perturb_circuit(g.circuit, spec);
  EXPECT_NEAR(c.parameter("ppbs2.c.r_h"), g.circuit.parameter("ppbs2.c.r_h") + 0.005, 1e-15);
  EXPECT_GT(deviation(g, c), deviation(g, g.circuit) + 1e-4);
  const ConditionalMap before = conditional_map(g.circuit, g.herald, logical_encoding(g));
  const ConditionalMap after = conditional_map(c, g.herald, logical_encoding(g));
  for (std::size_t k = 0; k < 4; ++k) EXPECT_LT(std::abs(after.success[k] - before.success[k]), 1e-2);
}

TEST(Perturbation, PiLoopPhaseDestroysGate) {
  const GateBundle g = build_gate("klm-cnot-ppbs");
  PerturbationSpec spec;
  spec.offsets["loop.c.phi"] = std::numbers::pi;
  TruthTableOptions opt;
  opt.noise.perturbation = spec;
  std::array<TruthTable, 3> tables, ideals;
  const auto pairs = standard_basis_pairs();
  for (std::size_t i = 0; i < 3; ++i) {
    tables[i] = truth_table(g, pairs[i].first, pairs[i].second, opt);
    ideals[i] = ideal_table(*g.encoding, pairs[i].first, pairs[i].second);
  }
  const FidelityReport r = fidelity_report(tables, ideals);
  EXPECT_NEAR(r.f_p, 0.0, 1e-9);
}

TEST(Perturbation, JitterIsSeeded) {
  const GateBundle g = build_gate("klm-cnot-ppbs");
  PerturbationSpec spec;
  spec.reflectivity_sigma = 0.01;
  spec.phase_sigma = 0.05;
  spec.seed = 17;
  EXPECT_EQ(perturb_circuit(g.circuit, spec), perturb_circuit(g.circuit, spec));
  PerturbationSpec other = spec;
  other.seed = 18;
  EXPECT_NE(perturb_circuit(g.circuit, spec), perturb_circuit(g.circuit, other));
}

TEST(Perturbation, RejectsUnknownSelectorAndDomain) {
  const GateBundle g = build_gate("klm-cnot-ppbs");
  PerturbationSpec spec;
  spec.offsets["nothing.r"] = 0.1;
  EXPECT_THROW(perturb_circuit(g.circuit, spec), CircuitError);
  spec.offsets = {{"ppbs2.r_h", 0.9}};
  EXPECT_THROW(perturb_circuit(g.circuit, spec), CircuitError);
}

// A2 carries a wavepacket of overlap o with every other photon.
TruthTableOptions distinct_a2(double o) {
  TruthTableOptions opt;
  for (const auto& other : {"control", "target", "A1"}) opt.noise.overlaps.set(other, "A2", o);
  return opt;
}

TEST(DoublePair, BackgroundVanishesForIdenticalAncillas) {
  const GateBundle g = build_gate("klm-cnot-ppbs");
  for (const auto& pair : standard_basis_pairs()) {
    EXPECT_NEAR(double_pair_background(g, pair.second).cwiseAbs().maxCoeff(), 0.0, 1e-14);
  }
}

TEST(DoublePair, BackgroundAppearsForDistinguishableAncillas) {
  const GateBundle g = build_gate("klm-cnot-ppbs");
  TruthTableOptions opt = distinct_a2(0.5);
  const Eigen::Vector4d bg = double_pair_background(g, kZZ, opt);
  EXPECT_GT(bg.sum(), 1e-4);
  for (int i = 0; i < 4; ++i) EXPECT_GE(bg(i), 0.0);
}

TEST(DoublePair, NoCrossingPhotonsMeansNoBackground) {
  GateBundle g = build_gate("klm-cnot-ppbs");
  g.circuit.set_parameter("ppbs2.r_h", 1.0);
  TruthTableOptions opt = distinct_a2(0.5);
  EXPECT_NEAR(double_pair_background(g, kXX, opt).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(DoublePair, RawTableIsSignalPlusRateTimesBackground) {
  const GateBundle g = build_gate("klm-cnot-ppbs");
  TruthTableOptions opt = distinct_a2(0.5);
  const TruthTable clean = truth_table(g, kZZ, kZZ, opt);
  const Eigen::Vector4d bg = double_pair_background(g, kZZ, opt);
  for (double rate : {0.1, 0.2}) {
    opt.noise.double_pair = {true, rate};
    const TruthTable t = truth_table(g, kZZ, kZZ, opt);
    ASSERT_TRUE(t.raw.has_value());
    for (int k = 0; k < 4; ++k) {
      EXPECT_NEAR((t.raw->row(k) - clean.raw->row(k) - rate * bg.transpose()).cwiseAbs().maxCoeff(), 0.0, 1e-14);
    }
    EXPECT_NEAR((t.probabilities - clean.probabilities).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  }
}

TEST(PartialDistinguishability, FidelityFallsMonotonically) {
  const GateBundle g = build_gate("klm-cnot-ppbs");
  double previous = 1.0 + 1e-12;
  for (double o : {1.0, 0.98, 0.95, 0.9, 0.8}) {
    TruthTableOptions opt;
    for (const auto& a : {"A1", "A2"}) {
      opt.noise.overlaps.set("control", a, o);
      opt.noise.overlaps.set("target", a, o);
    }
    const TruthTable t = truth_table(g, kXX, kXX, opt);
    const double f = classical_fidelity(t, ideal_table(*g.encoding, kXX, kXX));
    EXPECT_LE(f, previous);
    previous = f;
  }
  EXPECT_LT(previous, 0.95);
}

}  // namespace
}  // namespace klm
