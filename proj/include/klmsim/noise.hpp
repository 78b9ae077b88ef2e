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

#ifndef KLMSIM_NOISE_HPP
#define KLMSIM_NOISE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "klmsim/circuit.hpp"
#include "klmsim/fock.hpp"

namespace klm {

/// One input photon: a named source and its amplitudes over circuit ports.
struct PhotonSource {
  std::string name;
  std::vector<std::pair<Port, Amplitude>> modes;
};

/// Pairwise overlaps |<phi_i|phi_j>| of the photons' internal wavepackets,
/// keyed by source name. Unlisted pairs are fully indistinguishable.
class OverlapSpec {
 public:
  /// Throws std::invalid_argument for o outside [0, 1] or a == b.
  void set(const std::string& a, const std::string& b, double overlap);
  double get(const std::string& a, const std::string& b) const;
  const std::map<std::pair<std::string, std::string>, double>& entries() const { return entries_; }

  /// Gram matrix of `photons` in the given order.
  Eigen::MatrixXd gram(std::span<const PhotonSource> photons) const;

 private:
  std::map<std::pair<std::string, std::string>, double> entries_;
};

/// Row j holds photon j's coordinates in an orthonormal slot basis, found by
/// incremental Cholesky in photon order; slots whose residual weight is below
/// 1e-12 are dropped. Throws ModelError if the Gram matrix is not positive
/// semidefinite (no consistent set of wavepackets exists).
Eigen::MatrixXd slot_decomposition(const Eigen::MatrixXd& gram);

struct SlottedInput {
  Circuit circuit;  // original circuit with one slot per decomposition column
  StateVector state;
};

/// Product of the photons' creation operators, each spread over internal slots
/// according to its wavepacket.
SlottedInput distinguishable_input(const Circuit& circuit, std::span<const PhotonSource> photons,
                                   const OverlapSpec& overlaps);

/// Same, on an already-slotted circuit with a given decomposition.
StateVector slotted_product(const ModeLayout& layout, std::span<const PhotonSource> photons,
                            const Eigen::MatrixXd& slots);

/// Gaussian wavepacket overlap exp(-(tau/tau_c)^2 / 2). Throws
/// std::invalid_argument for tau_c <= 0.
double delay_to_overlap(double delay, double coherence_time);

/// R^2 + T^2 - 2RT o^2.
double hom_coincidence_analytic(double reflectivity, double overlap);

/// One photon per input port of BS(R), threshold coincidence at the outputs.
double hom_coincidence_simulated(double reflectivity, double overlap);

struct PerturbationSpec {
  /// "<selector>.<key>" -> additive offset on every matching element.
  std::map<std::string, double> offsets;
  /// Standard deviation of Gaussian jitter on every BS r and PPBS r_h.
  double reflectivity_sigma = 0.0;
  /// Standard deviation of Gaussian jitter on every PHASE element.
  double phase_sigma = 0.0;
  std::uint64_t seed = 0;

  bool empty() const { return offsets.empty() && reflectivity_sigma == 0.0 && phase_sigma == 0.0; }
};

/// Deterministic for a fixed seed. Throws CircuitError if a parameter leaves
/// [0, 1] or a selector matches nothing.
Circuit perturb_circuit(const Circuit& circuit, const PerturbationSpec& spec);

}  // namespace klm

#endif  // KLMSIM_NOISE_HPP
