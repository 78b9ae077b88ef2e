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

#ifndef KLMSIM_EVOLVE_HPP
#define KLMSIM_EVOLVE_HPP

#include <Eigen/Dense>
#include <map>
#include <mutex>
#include <span>
#include <vector>

#include "klmsim/circuit.hpp"
#include "klmsim/fock.hpp"

namespace klm {

/// Ryser's formula with Gray-code subset iteration, O(2^n n). The empty
/// matrix has permanent 1. Throws std::invalid_argument if not square.
Amplitude permanent(const Eigen::MatrixXcd& matrix);

/// Same kernel on an n x n row-major buffer.
Amplitude permanent(std::span<const Amplitude> row_major, std::size_t n);

/// <out| U |in> = Per(U[out|in]) / sqrt(prod in_i! prod out_j!), where rows of
/// U are repeated by output occupation and columns by input occupation.
/// Returns 0 when photon totals differ.
Amplitude fock_amplitude(const ModeUnitary& unitary, const FockBasisState& input,
                         const FockBasisState& output);

struct EvolveOptions {
  int max_photons = kDefaultMaxPhotons;
  std::size_t max_basis = kDefaultBasisCap;
};

/// Permanent-based evolution, output amplitudes computed in parallel (OpenMP)
/// over the output basis.
StateVector apply_unitary(const ModeUnitary& unitary, const StateVector& state,
                          const EvolveOptions& options = {});

/// Single-threaded reference for apply_unitary; identical arithmetic per
/// output amplitude.
StateVector apply_unitary_serial(const ModeUnitary& unitary, const StateVector& state,
                                 const EvolveOptions& options = {});

/// Element-by-element evolution directly on occupation numbers (binomial
/// expansion of each two-mode action); no permanents involved.
StateVector apply_sequential(const Circuit& circuit, const StateVector& state);

/// Dense transfer columns of one unitary restricted to one photon sector,
/// cached per input basis state so repeated inputs (truth tables) reuse them.
/// Thread-safe.
class SectorTransfer {
 public:
  SectorTransfer(ModeUnitary unitary, int photons, const EvolveOptions& options = {});

  const ModeUnitary& unitary() const { return unitary_; }
  int photons() const { return photons_; }
  const std::vector<FockBasisState>& output_basis() const { return basis_; }

  /// Amplitudes <out|U|input> for every out in output_basis().
  const std::vector<Amplitude>& column(const FockBasisState& input) const;

  StateVector apply(const StateVector& state) const;

 private:
  ModeUnitary unitary_;
  int photons_;
  std::vector<FockBasisState> basis_;
  mutable std::mutex mutex_;
  mutable std::map<FockBasisState, std::vector<Amplitude>> cache_;
};

}  // namespace klm

#endif  // KLMSIM_EVOLVE_HPP
