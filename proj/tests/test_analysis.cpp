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
#include <random>
#include <sstream>

#include "klmsim/analysis.hpp"
#include "klmsim/errors.hpp"
#include "klmsim/gates.hpp"
#include "klmsim/scenario.hpp"
#include "oracles.hpp"

namespace klm {
namespace {

const BasisPair kZZ{Basis::kZ, Basis::kZ};
const BasisPair kXX{Basis::kX, Basis::kX};
const BasisPair kXZ{Basis::kX, Basis::kZ};
const BasisPair kYY{Basis::kY, Basis::kY};

char letter(Basis b) { return b == Basis::kZ ? 'Z' : b == Basis::kX ? 'X' : 'Y'; }

Eigen::Matrix4d oracle_table(BasisPair in, BasisPair out) {
  using oracle::AnalyzerStates;
  return oracle::table(oracle::physical_cnot(),
                       oracle::product_basis(AnalyzerStates::control(letter(in.control)),
                                             AnalyzerStates::target(letter(in.target))),
                       oracle::product_basis(AnalyzerStates::control(letter(out.control)),
                                             AnalyzerStates::target(letter(out.target))));
}

const CnotEncoding& ppbs_encoding() {
  static const GateBundle g = build_gate("klm-cnot-ppbs");
  return *g.encoding;
}

std::array<TruthTable, 3> ideal_tables() {
  std::array<TruthTable, 3> out;
  const auto pairs = standard_basis_pairs();
  for (std::size_t i = 0; i < 3; ++i) out[i] = ideal_table(ppbs_encoding(), pairs[i].first, pairs[i].second);
  return out;
}

ChiDiagonal random_chi(std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::array<double, 4> w{};
  double total = 0.0;
  for (auto& x : w) total += (x = e(rng));
  return {w[0] / total, w[1] / total, w[2] / total, w[3] / total};
}

TEST(BasisPairTest, ParseAndLabel) {
  EXPECT_EQ(parse_basis_pair("XZ"), kXZ);
  EXPECT_EQ(parse_basis_pair("YY")->label(), "YY");
  EXPECT_FALSE(parse_basis_pair("QZ").has_value());
  EXPECT_FALSE(parse_basis_pair("ZZZ").has_value());
}

TEST(BasisStatesTest, PolarizationAnalyzerStates) {
  const CnotEncoding& enc = ppbs_encoding();
  for (char b : {'Z', 'X', 'Y'}) {
    const Basis basis = b == 'Z' ? Basis::kZ : b == 'X' ? Basis::kX : Basis::kY;
    const auto c = basis_vectors(basis, Qubit::kControl, enc);
    const auto t = basis_vectors(basis, Qubit::kTarget, enc);
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_NEAR(std::abs(oracle::AnalyzerStates::control(b)[k].dot(c[k])), 1.0, 1e-15) << b;
      EXPECT_NEAR(std::abs(oracle::AnalyzerStates::target(b)[k].dot(t[k])), 1.0, 1e-15) << b;
    }
    const auto states = basis_states(basis, Qubit::kControl, enc);
    EXPECT_NEAR(states[0].norm(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(inner_product(states[0], states[1])), 0.0, 1e-15);
  }
}

TEST(IdealTable, MatchesHandWrittenAnalyzers) {
  for (const auto& [in, out] : standard_basis_pairs()) {
    const TruthTable t = ideal_table(ppbs_encoding(), in, out);
    EXPECT_NEAR((t.probabilities - oracle_table(in, out)).cwiseAbs().maxCoeff(), 0.0, 1e-12) << in.label();
  }
}

TEST(IdealTable, PermutationsAndHalfSplit) {
  Eigen::Matrix4d zz = Eigen::Matrix4d::Zero();
  zz(0, 0) = zz(1, 1) = zz(2, 3) = zz(3, 2) = 1.0;
  Eigen::Matrix4d xx = Eigen::Matrix4d::Zero();
  xx(0, 0) = xx(1, 3) = xx(2, 2) = xx(3, 1) = 1.0;
  Eigen::Matrix4d yy = Eigen::Matrix4d::Zero();
  yy(0, 0) = yy(0, 3) = yy(3, 0) = yy(3, 3) = 0.5;
  yy(1, 1) = yy(1, 2) = yy(2, 1) = yy(2, 2) = 0.5;
  EXPECT_NEAR((ideal_table(ppbs_encoding(), kZZ, kZZ).probabilities - zz).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR((ideal_table(ppbs_encoding(), kXX, kXX).probabilities - xx).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR((ideal_table(ppbs_encoding(), kXZ, kYY).probabilities - yy).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(IdealTable, EveryRowIsADistribution) {
  for (Basis a : {Basis::kZ, Basis::kX, Basis::kY}) {
    for (Basis b : {Basis::kZ, Basis::kX, Basis::kY}) {
      const TruthTable t = ideal_table(ppbs_encoding(), {a, b}, {b, a});
      for (int r = 0; r < 4; ++r) EXPECT_NEAR(t.probabilities.row(r).sum(), 1.0, 1e-12);
      EXPECT_GE(t.probabilities.minCoeff(), 0.0);
    }
  }
}

TEST(SimulatedTable, ExactGateMatchesOracle) {
  const GateBundle g = build_gate("klm-cnot-ppbs");
  for (const auto& [in, out] : standard_basis_pairs()) {
    const TruthTable t = truth_table(g, in, out);
    EXPECT_NEAR((t.probabilities - oracle_table(in, out)).cwiseAbs().maxCoeff(), 0.0, 1e-10) << in.label();
    for (int r = 0; r < 4; ++r) EXPECT_NEAR(t.probabilities.row(r).sum(), 1.0, 1e-10);
  }
}

TEST(SimulatedTable, RawFourfoldRateIsSuccessProbability) {
  const double r = (3.0 - std::sqrt(2.0)) / 7.0;
  const TruthTable t = truth_table(build_gate("klm-cnot-ppbs"), kZZ, kZZ);
  ASSERT_TRUE(t.raw.has_value());
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(t.raw->row(k).sum(), r * r, 1e-10);
}

TEST(ClassicalFidelity, Examples) {
  const TruthTable ideal = ideal_table(ppbs_encoding(), kZZ, kZZ);
  EXPECT_NEAR(classical_fidelity(ideal, ideal), 1.0, 1e-15);
  TruthTable noisy = ideal;
  noisy.probabilities = 0.9 * ideal.probabilities + 0.1 * Eigen::Matrix4d::Constant(0.25);
  EXPECT_NEAR(classical_fidelity(noisy, ideal), 0.925, 1e-15);
  TruthTable uniform = ideal;
  uniform.probabilities.setConstant(0.25);
  EXPECT_NEAR(classical_fidelity(uniform, ideal), 0.25, 1e-15);
  EXPECT_THROW(classical_fidelity(ideal, ideal_table(ppbs_encoding(), kXX, kXX)), std::invalid_argument);
}

TEST(ClassicalFidelity, HalfSplitTableCountsBothCells) {
  const TruthTable ideal = ideal_table(ppbs_encoding(), kXZ, kYY);
  EXPECT_NEAR(classical_fidelity(ideal, ideal), 1.0, 1e-12);
}

TEST(ClassicalFidelity, FixtureRatios) {
  const auto tables = fixture_tables("paper-fig3");
  const auto ideals = ideal_tables();
  EXPECT_NEAR(classical_fidelity(tables[0], ideals[0]), 0.87, 1e-12);
  EXPECT_NEAR(classical_fidelity(tables[1], ideals[1]), 0.88, 1e-12);
  EXPECT_NEAR(classical_fidelity(tables[2], ideals[2]), 0.81, 1e-12);
  EXPECT_NEAR(count_weighted_fidelity(*tables[0].counts, ideals[0]), 0.87, 1e-12);
}

TEST(FidelityArithmetic, PrintedValues) {
  EXPECT_NEAR(process_fidelity(0.87, 0.88, 0.81), 0.78, 1e-12);
  EXPECT_NEAR(average_gate_fidelity(0.78), 0.824, 1e-12);
  EXPECT_NEAR(std::round(100.0 * average_gate_fidelity(process_fidelity(0.87, 0.88, 0.81))) / 100.0, 0.82, 1e-12);
  EXPECT_NEAR(process_fidelity(1.0, 1.0, 1.0), 1.0, 0.0);
  EXPECT_NEAR(average_gate_fidelity(0.0), 0.2, 1e-15);
}

TEST(FidelityArithmetic, AffineAndMonotone) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng), d = 0.01 * u(rng);
    const double base = process_fidelity(a, b, c);
    EXPECT_NEAR(process_fidelity(a + d, b, c) - base, d / 2.0, 1e-12);
    EXPECT_NEAR(process_fidelity(a, b + d, c) - base, d / 2.0, 1e-12);
    EXPECT_NEAR(process_fidelity(a, b, c + d) - base, d / 2.0, 1e-12);
    EXPECT_GT(average_gate_fidelity(base + d), average_gate_fidelity(base));
  }
}

TEST(Dephasing, OperatorsArePhysicalDiagonals) {
  // In this encoding the physical gate is a controlled sign on |HH>.
  const Eigen::Matrix4cd g = oracle::physical_cnot();
  EXPECT_NEAR((g - Eigen::Vector4cd(1, 1, 1, -1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  const auto ops = dephasing_operators(ppbs_encoding());
  const std::array<Eigen::Vector4d, 4> diag = {Eigen::Vector4d(1, 1, 1, -1), Eigen::Vector4d(1, 1, -1, 1),
                                               Eigen::Vector4d(1, -1, 1, 1), Eigen::Vector4d(1, -1, -1, -1)};
  for (std::size_t n = 0; n < 4; ++n) {
    const Amplitude phase = ops[n](0, 0);
    EXPECT_NEAR(std::abs(phase), 1.0, 1e-12);
    const Eigen::Matrix4cd expected = phase * diag[n].cast<Amplitude>().asDiagonal().toDenseMatrix();
    EXPECT_NEAR((ops[n] - expected).cwiseAbs().maxCoeff(), 0.0, 1e-12) << n;
  }
}

TEST(Dephasing, PredictionMatchesDirectSimulation) {
  std::mt19937_64 rng(2011);
  for (int i = 0; i < 100; ++i) {
    const ChiDiagonal chi = random_chi(rng);
    const PredictedFidelities p = dephasing_predict(chi);
    const PredictedFidelities s = dephasing_simulate(chi, ppbs_encoding());
    EXPECT_NEAR(p.f_zz, s.f_zz, 1e-12);
    EXPECT_NEAR(p.f_xx, s.f_xx, 1e-12);
    EXPECT_NEAR(p.f_xzyy, s.f_xzyy, 1e-12);
    EXPECT_NEAR(p.f_zz, chi.f_p + chi.eta_t, 1e-15);
  }
}

TEST(Dephasing, FitInvertsForward) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const ChiDiagonal chi = random_chi(rng);
    const PredictedFidelities p = dephasing_predict(chi);
    const ChiDiagonal back = dephasing_fit(p.f_zz, p.f_xx, p.f_xzyy);
    EXPECT_NEAR(back.f_p, chi.f_p, 1e-12);
    EXPECT_NEAR(back.eta_t, chi.eta_t, 1e-12);
    EXPECT_NEAR(back.eta_c, chi.eta_c, 1e-12);
    EXPECT_NEAR(back.eta_ct, chi.eta_ct, 1e-12);
    EXPECT_NEAR(back.sum(), 1.0, 1e-12);
  }
}

TEST(Dephasing, FixtureFit) {
  const ChiDiagonal chi = dephasing_fit(0.87, 0.88, 0.81);
  EXPECT_NEAR(chi.f_p, 0.78, 1e-12);
  EXPECT_NEAR(chi.eta_t, 0.09, 1e-12);
  EXPECT_NEAR(chi.eta_c, 0.10, 1e-12);
  EXPECT_NEAR(chi.eta_ct, 0.03, 1e-12);
}

TEST(Dephasing, NormalizationAndSignEnforced) {
  EXPECT_THROW((ChiDiagonal{0.5, 0.2, 0.2, 0.2}.validate()), ModelError);
  EXPECT_THROW((ChiDiagonal{1.1, -0.1, 0.0, 0.0}.validate()), ModelError);
  EXPECT_NO_THROW((ChiDiagonal{0.25, 0.25, 0.25, 0.25}.validate()));
  EXPECT_THROW(dephasing_fit(1.0, 1.0, 0.5), ModelError);
}

TEST(Dephasing, ChoiFidelityMatchesTraceFormula) {
  std::mt19937_64 rng(19);
  const auto ops = dephasing_operators(ppbs_encoding());
  const Eigen::Matrix4cd g = ideal_physical_gate(ppbs_encoding());
  for (int i = 0; i < 20; ++i) {
    const ChiDiagonal chi = random_chi(rng);
    const std::array<double, 4> w = {chi.f_p, chi.eta_t, chi.eta_c, chi.eta_ct};
    std::vector<std::pair<double, Eigen::Matrix4cd>> terms;
    double expected = 0.0;
    for (std::size_t n = 0; n < 4; ++n) {
      terms.emplace_back(w[n], ops[n]);
      expected += w[n] * std::norm((g.adjoint() * ops[n]).trace()) / 16.0;
    }
    EXPECT_NEAR(choi_process_fidelity(terms, g), expected, 1e-12);
    EXPECT_NEAR(choi_process_fidelity(terms, g), chi.f_p, 1e-12);
    const PredictedFidelities p = dephasing_predict(chi);
    EXPECT_NEAR(process_fidelity(p.f_zz, p.f_xx, p.f_xzyy), chi.f_p, 1e-12);
  }
}

TEST(Dephasing, ForwardMapPreservesTrace) {
  std::mt19937_64 rng(23);
  const Eigen::Vector4cd psi = oracle::kron(oracle::pauli_eigenstates('X')[0], oracle::pauli_eigenstates('Y')[1]);
  const Eigen::Matrix4cd rho = psi * psi.adjoint();
  for (int i = 0; i < 10; ++i) {
    const Eigen::Matrix4cd out = dephasing_forward(random_chi(rng), rho, ppbs_encoding());
    EXPECT_NEAR(out.trace().real(), 1.0, 1e-12);
    EXPECT_NEAR((out - out.adjoint()).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  }
}

TEST(FidelityReportTest, IdealSimulationIsPerfect) {
  const GateBundle g = build_gate("klm-cnot-ppbs");
  std::array<TruthTable, 3> tables;
  const auto pairs = standard_basis_pairs();
  for (std::size_t i = 0; i < 3; ++i) tables[i] = truth_table(g, pairs[i].first, pairs[i].second);
  const FidelityReport r = fidelity_report(tables, ideal_tables());
  EXPECT_NEAR(r.f_p, 1.0, 1e-10);
  EXPECT_NEAR(r.f_avg, 1.0, 1e-10);
  EXPECT_TRUE(r.entanglement_capable);
  EXPECT_FALSE(r.uncertainties.has_value());
}

TEST(FidelityReportTest, FixtureReport) {
  const FidelityReport r = fidelity_report(fixture_tables("paper-fig3"), ideal_tables(), 1000, 2011);
  EXPECT_NEAR(r.f_p, 0.78, 1e-12);
  EXPECT_NEAR(r.f_avg, 0.824, 1e-12);
  EXPECT_TRUE(r.entanglement_capable);
  ASSERT_TRUE(r.uncertainties.has_value());
  ASSERT_TRUE(r.count_weighted.has_value());
  EXPECT_NEAR((*r.count_weighted)[1], 0.88, 1e-12);
}

// Binomial standard error of a four-row mean fidelity.
double binomial_sd(const TruthTable& t, const TruthTable& ideal) {
  double var = 0.0;
  for (int r = 0; r < 4; ++r) {
    double p = 0.0;
    for (int c = 0; c < 4; ++c) {
      if (ideal.probabilities(r, c) > 1e-9) p += t.probabilities(r, c);
    }
    var += p * (1.0 - p) / static_cast<double>(t.counts->row(r).sum());
  }
  return std::sqrt(var) / 4.0;
}

TEST(Bootstrap, MatchesBinomialErrorAndIsSeeded) {
  const auto tables = fixture_tables("paper-fig3");
  const auto ideals = ideal_tables();
  const Uncertainties u = bootstrap_uncertainties(tables, ideals, 1000, 2011);
  EXPECT_NEAR(u.f_zz, binomial_sd(tables[0], ideals[0]), 0.2 * binomial_sd(tables[0], ideals[0]));
  EXPECT_NEAR(u.f_xx, binomial_sd(tables[1], ideals[1]), 0.2 * binomial_sd(tables[1], ideals[1]));
  EXPECT_NEAR(u.f_xzyy, binomial_sd(tables[2], ideals[2]), 0.2 * binomial_sd(tables[2], ideals[2]));
  // Printed uncertainties are +-0.02 on each ratio.
  EXPECT_LT(u.f_xx, 0.025);
  EXPECT_LT(u.f_xzyy, 0.025);
  const Uncertainties again = bootstrap_uncertainties(tables, ideals, 1000, 2011);
  EXPECT_EQ(u.f_p, again.f_p);
  EXPECT_NE(u.f_p, bootstrap_uncertainties(tables, ideals, 1000, 2012).f_p);
}

TEST(SampleTableTest, RowTotalsAndFrequencies) {
  const TruthTable ideal = ideal_table(ppbs_encoding(), kXZ, kYY);
  const TruthTable s = sample_table(ideal, 500, 4);
  ASSERT_TRUE(s.counts.has_value());
  for (int r = 0; r < 4; ++r) {
    EXPECT_EQ(s.counts->row(r).sum(), 500);
    for (int c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(s.probabilities(r, c), (*s.counts)(r, c) / 500.0);
  }
  EXPECT_EQ(*sample_table(ideal, 500, 4).counts, *s.counts);
}

TEST(SampleTableTest, TenThousandTrialsWithinOnePercentOfExact) {
  const TruthTable ideal = ideal_table(ppbs_encoding(), kXZ, kYY);
  const TruthTable s = sample_table(ideal, 10000, 8);
  EXPECT_NEAR(classical_fidelity(s, ideal), 1.0, 1e-12);
  EXPECT_NEAR((s.probabilities - ideal.probabilities).cwiseAbs().maxCoeff(), 0.0, 0.02);
}

TEST(NoisyOverlap, ErrorsPreserveHVValues) {
  const GateBundle g = build_gate("klm-cnot-ppbs");
  TruthTableOptions opt;
  for (const auto& a : {"A1", "A2"}) {
    opt.noise.overlaps.set("control", a, 0.95);
    opt.noise.overlaps.set("target", a, 0.95);
  }
  const TruthTable zz = truth_table(g, kZZ, kZZ, opt);
  const TruthTable xx = truth_table(g, kXX, kXX, opt);
  // ZZ reads the control in H/V, XX reads the target in H/V.
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (r / 2 != c / 2) {
        EXPECT_LT(zz.probabilities(r, c), 1e-12);
      }
      if (r % 2 != c % 2) {
        EXPECT_LT(xx.probabilities(r, c), 1e-12);
      }
    }
  }
  const double f = classical_fidelity(zz, ideal_table(*g.encoding, kZZ, kZZ));
  EXPECT_GT(f, 0.7);
  EXPECT_LT(f, 1.0 - 1e-3);
}

TEST(Visibility, RelativeVisibilityArithmetic) {
  EXPECT_NEAR(relative_visibility(0.5485, 0.23), 0.5485 / hom_visibility(0.23), 1e-15);
  EXPECT_NEAR(relative_visibility(0.49, 0.23), 0.893, 1e-3);
  EXPECT_NEAR(relative_visibility(0.48, 0.23), 0.875, 1e-3);
}

TEST(CsvOutput, HeaderAndTwelveDigits) {
  TruthTable t = ideal_table(ppbs_encoding(), kZZ, kZZ);
  t.probabilities(0, 0) = 1.0 / 3.0;
  std::ostringstream out;
  write_truth_table_csv(out, t);
  const std::string s = out.str();
  EXPECT_EQ(s.rfind("input,00,01,10,11\n", 0), 0u);
  EXPECT_NE(s.find("0.333333333333"), std::string::npos);
  EXPECT_EQ(s.find('\r'), std::string::npos);
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0), "1");
}

}  // namespace
}  // namespace klm
