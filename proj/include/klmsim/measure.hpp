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

#ifndef KLMSIM_MEASURE_HPP
#define KLMSIM_MEASURE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "klmsim/circuit.hpp"
#include "klmsim/fock.hpp"

namespace klm {

enum class DetectorKind { kThreshold, kNumberResolving };

struct DetectorModel {
  DetectorKind kind = DetectorKind::kNumberResolving;
  double efficiency = 1.0;
};

/// One detector watching every (polarization, slot) mode behind its ports.
/// `count` is the exact photon number for number-resolving detectors; for
/// threshold detectors 0 means "no click" and anything positive "click".
struct Detection {
  std::string name;
  std::vector<Port> ports;
  int count = 1;
};

struct HeraldRule {
  std::vector<Detection> detections;
  DetectorModel detector;
  /// Require every loss mode to be empty (the no-loss branch is the one the
  /// output detectors eventually accept). When false, loss modes are
  /// marginalized.
  bool postselect_no_loss = true;
};

/// Probability of the detection pattern in `rule`, summed over every basis
/// state consistent with it (unmonitored modes marginalized).
double outcome_probability(const StateVector& state, const HeraldRule& rule);

/// Layout left after heralding: every mode that is neither watched by a
/// detector in `rule` nor a loss mode, in layout order.
ModeLayout retained_layout(const ModeLayout& layout, const HeraldRule& rule);

/// Projects onto the herald outcome and drops the herald and loss modes. The
/// squared norm of the result is outcome_probability(state, rule). Throws
/// MixedConditionalState when more than one detector configuration is
/// consistent with the outcome (e.g. an ambiguous threshold click).
StateVector herald(const StateVector& state, const HeraldRule& rule);

/// Inserts a LOSS element (named "det.<path>") in front of each listed
/// detector path; a no-op for efficiency 1.
Circuit with_detector_efficiency(const Circuit& circuit, std::span<const std::string> paths,
                                 double efficiency);

/// Logical inputs (on the full circuit layout, ancillas included) and the
/// logical output basis (on the retained layout left after heralding).
struct LogicalEncoding {
  std::vector<StateVector> inputs;
  std::vector<StateVector> outputs;
};

/// Heralded logical map: column k holds <out_j| herald(U |in_k>)>.
struct ConditionalMap {
  Eigen::MatrixXcd matrix;
  /// Probability of heralding into the logical subspace, per input.
  std::vector<double> success;
  /// Heralded probability outside the logical subspace, per input.
  std::vector<double> leakage;
  HeraldRule rule;
};

/// Global phase is fixed so that the first nonzero entry of column 0 is real
/// positive.
ConditionalMap conditional_map(const Circuit& circuit, const HeraldRule& rule,
                               const LogicalEncoding& encoding);

struct Proportionality {
  Amplitude scale;
  double deviation = 0.0;
  double max_leakage = 0.0;
};

/// scale = Tr(target^dagger M) / d; deviation = max |M - scale * target|.
Proportionality proportionality_check(const ConditionalMap& map, const Eigen::MatrixXcd& target);

/// Multinomial draw of `trials` events; probabilities are normalized by their
/// sum. Reproducible for a fixed seed. Throws std::invalid_argument on
/// negative or all-zero probabilities.
std::vector<std::int64_t> sample_counts(std::span<const double> probabilities, std::int64_t trials,
                                        std::uint64_t seed);

}  // namespace klm

#endif  // KLMSIM_MEASURE_HPP
