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

// Serial reference vs OpenMP kernel for permanent-based evolution.

#include <benchmark/benchmark.h>

#include <random>

#include "klmsim/analysis.hpp"
#include "klmsim/evolve.hpp"
#include "klmsim/gates.hpp"
#include "klmsim/noise.hpp"

namespace {

using namespace klm;

// Random mesh of beamsplitters and phases on `modes` paths.
ModeUnitary random_network(int modes) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Circuit c;
  for (int m = 0; m < modes; ++m) c.add_path("m" + std::to_string(m));
  for (int layer = 0; layer < modes; ++layer) {
    for (int m = layer % 2; m + 1 < modes; m += 2) {
      const Port a{"m" + std::to_string(m), std::nullopt}, b{"m" + std::to_string(m + 1), std::nullopt};
      const std::string tag = std::to_string(layer) + "." + std::to_string(m);
      c.add(Element::beamsplitter("bs" + tag, a, b, u(rng)));
      c.add(Element::phase_shift("ph" + tag, a, 6.28 * u(rng)));
    }
  }
  return compile(c);
}

StateVector spread_input(const ModeUnitary& u, int photons) {
  std::vector<int> occ(u.modes(), 0);
  for (int p = 0; p < photons; ++p) occ[static_cast<std::size_t>(p * 2) % occ.size()] += 1;
  return StateVector::basis(u.layout, occ);
}

void BM_RandomSerial(benchmark::State& state) {
  const ModeUnitary u = random_network(static_cast<int>(state.range(0)));
  const StateVector in = spread_input(u, static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_unitary_serial(u, in));
}

void BM_RandomParallel(benchmark::State& state) {
  const ModeUnitary u = random_network(static_cast<int>(state.range(0)));
  const StateVector in = spread_input(u, static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(apply_unitary(u, in));
}

// Polarization CNOT with three internal slots, as used by partial
// distinguishability runs.
struct SlottedCnot {
  ModeUnitary unitary;
  StateVector input;
};

SlottedCnot slotted_cnot() {
  const GateBundle g = build_gate("klm-cnot-ppbs");
  const auto names = photon_names(g);
  OverlapSpec overlaps;
  for (int i = 0; i < 2; ++i) overlaps.set(names[i], names[2], 0.9);
  for (int i = 0; i < 3; ++i) overlaps.set(names[i], names[3], 0.8);
  std::vector<PhotonSource> photons;
  photons.push_back({names[0], {{g.encoding->control.modes[0], 1.0}}});
  photons.push_back({names[1], {{g.encoding->target.modes[1], 1.0}}});
  for (std::size_t a = 0; a < g.ancillas.size(); ++a) photons.push_back({names[a + 2], {{g.ancillas[a], 1.0}}});
  SlottedInput in = distinguishable_input(g.circuit, photons, overlaps);
  return {compile(in.circuit), in.state};
}

void BM_SlottedCnotSerial(benchmark::State& state) {
  const SlottedCnot s = slotted_cnot();
  for (auto _ : state) benchmark::DoNotOptimize(apply_unitary_serial(s.unitary, s.input));
}

void BM_SlottedCnotParallel(benchmark::State& state) {
  const SlottedCnot s = slotted_cnot();
  for (auto _ : state) benchmark::DoNotOptimize(apply_unitary(s.unitary, s.input));
}

BENCHMARK(BM_RandomSerial)->Args({10, 3})->Args({12, 4})->Args({16, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RandomParallel)->Args({10, 3})->Args({12, 4})->Args({16, 4})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SlottedCnotSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SlottedCnotParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
