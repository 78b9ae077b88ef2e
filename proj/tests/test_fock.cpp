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

#include "klmsim/errors.hpp"
#include "klmsim/fock.hpp"
#include "oracles.hpp"

namespace klm {
namespace {

ModeLayout line(const std::string& prefix, int modes) {
  std::vector<ModeLabel> labels;
  for (int i = 0; i < modes; ++i) labels.push_back({prefix + std::to_string(i), Polarization::kNone, 0});
  return ModeLayout(labels);
}

TEST(EnumerateBasis, SingleModeHoldsEverything) {
  const auto basis = enumerate_basis(1, 2);
  ASSERT_EQ(basis.size(), 1u);
  EXPECT_EQ(basis[0].occupations, (std::vector<int>{2}));
}

TEST(EnumerateBasis, TwoModesOnePhotonDescending) {
  const auto basis = enumerate_basis(2, 1);
  ASSERT_EQ(basis.size(), 2u);
  EXPECT_EQ(basis[0].occupations, (std::vector<int>{1, 0}));
  EXPECT_EQ(basis[1].occupations, (std::vector<int>{0, 1}));
}

TEST(EnumerateBasis, SixteenModesFourPhotons) {
  EXPECT_EQ(enumerate_basis(16, 4).size(), oracle::count_basis(16, 4));
  EXPECT_EQ(oracle::count_basis(16, 4), 3876u);
}

TEST(EnumerateBasis, CountsMatchRecursiveCounting) {
  for (int m = 1; m <= 8; ++m) {
    for (int n = 0; n <= 4; ++n) {
      const auto basis = enumerate_basis(static_cast<std::size_t>(m), n);
      EXPECT_EQ(basis.size(), oracle::count_basis(m, n)) << m << " modes, " << n << " photons";
      EXPECT_EQ(basis_size(static_cast<std::size_t>(m), n), oracle::count_basis(m, n));
      for (const auto& b : basis) EXPECT_EQ(b.photons(), n);
    }
  }
}

TEST(EnumerateBasis, OrderIsStrictlyDescendingAndRepeatable) {
  const auto a = enumerate_basis(5, 3);
  const auto b = enumerate_basis(5, 3);
  EXPECT_EQ(a, b);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_GT(a[i - 1], a[i]);
}

TEST(EnumerateBasis, CapRaisesStateSpaceTooLarge) {
  EXPECT_THROW(enumerate_basis(16, 4, 1000), StateSpaceTooLarge);
}

TEST(Tensor, SinglePhotons) {
  const StateVector a = StateVector::basis(line("a", 1), {1});
  const StateVector b = StateVector::basis(line("b", 1), {1});
  const StateVector ab = tensor(a, b);
  EXPECT_EQ(ab.photons(), 2);
  EXPECT_NEAR(std::abs(ab.amplitude({1, 1}) - Amplitude(1.0)), 0.0, 1e-15);
}

TEST(Tensor, SuperpositionIsLinear) {
  // (alpha|0> + beta|1>) is not a fixed-sector state, so the linear map is
  // checked sector by sector.
  const Amplitude alpha(0.6, 0.0);
  const Amplitude beta(0.0, 0.8);
  const StateVector one = StateVector::basis(line("b", 1), {1});
  const StateVector s0 = alpha * StateVector::basis(line("a", 1), {0});
  const StateVector s1 = beta * StateVector::basis(line("a", 1), {1});
  EXPECT_NEAR(std::abs(tensor(s0, one).amplitude({0, 1}) - alpha), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(tensor(s1, one).amplitude({1, 1}) - beta), 0.0, 1e-15);
}

TEST(Tensor, FourPhotonExperimentInput) {
  StateVector state = StateVector::vacuum(ModeLayout());
  for (const std::string path : {"C", "T", "A1", "A2"}) {
    state = tensor(state, StateVector::basis(ModeLayout({{path, Polarization::kH, 0}}), {1}));
  }
  EXPECT_EQ(state.photons(), 4);
  EXPECT_EQ(state.layout().size(), 4u);
  EXPECT_NEAR(state.norm(), 1.0, 1e-12);
  EXPECT_EQ(state.layout().label(3).path, "A2");
}

TEST(Tensor, OverlappingLabelsRejected) {
  const StateVector a = StateVector::basis(line("a", 1), {1});
  EXPECT_THROW(tensor(a, a), LayoutError);
}

TEST(Tensor, NormMultiplies) {
  StateVector a(line("a", 2), 1);
  a.add({1, 0}, 0.3);
  a.add({0, 1}, Amplitude(0.0, 0.4));
  StateVector b(line("b", 2), 2);
  b.add({2, 0}, 1.5);
  b.add({1, 1}, -0.5);
  EXPECT_NEAR(tensor(a, b).norm(), a.norm() * b.norm(), 1e-12);
}

TEST(InnerProduct, NormalizedSelfOverlapIsOne) {
  StateVector psi(line("m", 3), 2);
  psi.add({2, 0, 0}, Amplitude(1.0, 2.0));
  psi.add({0, 1, 1}, -0.5);
  psi = psi.normalized();
  const Amplitude p = inner_product(psi, psi);
  EXPECT_NEAR(p.real(), 1.0, 1e-12);
  EXPECT_NEAR(p.imag(), 0.0, 1e-15);
}

TEST(InnerProduct, OrthogonalBasisStates) {
  const auto layout = line("m", 2);
  EXPECT_EQ(inner_product(StateVector::basis(layout, {1, 0}), StateVector::basis(layout, {0, 1})), Amplitude(0.0));
}

TEST(InnerProduct, ProjectionOntoTwoZero) {
  const auto layout = line("m", 2);
  StateVector noon(layout, 2);
  noon.add({2, 0}, 1.0 / std::sqrt(2.0));
  noon.add({0, 2}, -1.0 / std::sqrt(2.0));
  EXPECT_NEAR(std::abs(inner_product(StateVector::basis(layout, {2, 0}), noon) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
}

TEST(InnerProduct, ConjugateLinearInFirstArgument) {
  const auto layout = line("m", 2);
  StateVector a = StateVector::basis(layout, {1, 0});
  const StateVector b = StateVector::basis(layout, {1, 0});
  a *= Amplitude(0.0, 1.0);
  EXPECT_NEAR(std::abs(inner_product(a, b) - Amplitude(0.0, -1.0)), 0.0, 1e-15);
}

TEST(InnerProduct, LayoutMismatchRejected) {
  EXPECT_THROW(inner_product(StateVector::basis(line("a", 2), {1, 0}), StateVector::basis(line("b", 2), {1, 0})),
               LayoutError);
}

TEST(InnerProduct, TensorFactorizes) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  auto random_state = [&](const ModeLayout& layout, int photons) {
    StateVector s(layout, photons);
    for (const auto& b : enumerate_basis(layout.size(), photons)) s.add(b, Amplitude(g(rng), g(rng)));
    return s;
  };
  for (int trial = 0; trial < 20; ++trial) {
    const auto la = line("a", 3);
    const auto lb = line("b", 2);
    const StateVector a = random_state(la, 2), c = random_state(la, 2);
    const StateVector b = random_state(lb, 1), d = random_state(lb, 1);
    const Amplitude lhs = inner_product(tensor(a, b), tensor(c, d));
    const Amplitude rhs = inner_product(a, c) * inner_product(b, d);
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(ModeLayoutTest, BijectiveLookup) {
  const ModeLayout layout({{"C", Polarization::kH, 0}, {"C", Polarization::kV, 0}, {"C", Polarization::kH, 1}});
  for (std::size_t i = 0; i < layout.size(); ++i) EXPECT_EQ(layout.index(layout.label(i)), i);
  EXPECT_THROW(ModeLayout({{"C", Polarization::kH, 0}, {"C", Polarization::kH, 0}}), LayoutError);
}

TEST(StateVectorTest, SectorIsEnforced) {
  StateVector s(line("m", 2), 1);
  EXPECT_THROW(s.add({1, 1}, 1.0), LayoutError);
}

}  // namespace
}  // namespace klm
