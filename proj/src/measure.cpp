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

#include "klmsim/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "klmsim/errors.hpp"
#include "klmsim/evolve.hpp"

namespace klm {

namespace {

struct ResolvedRule {
  std::vector<std::vector<std::size_t>> detector_modes;
  std::vector<std::size_t> loss_modes;
  std::vector<std::size_t> retained;
};

ResolvedRule resolve(const ModeLayout& layout, const HeraldRule& rule) {
  ResolvedRule out;
  std::vector<bool> hidden(layout.size(), false);
  for (const auto& det : rule.detections) {
    std::vector<std::size_t> modes;
    for (const auto& port : det.ports) {
      const auto found = layout.modes_on(port.path, port.pol);
      if (found.empty()) {
        throw LayoutError("detector '" + det.name + "' references unknown mode " + to_string(port));
      }
      modes.insert(modes.end(), found.begin(), found.end());
    }
    for (auto m : modes) {
      if (hidden[m]) throw LayoutError("detector '" + det.name + "' overlaps another detector");
      hidden[m] = true;
    }
    out.detector_modes.push_back(std::move(modes));
  }
  for (std::size_t m = 0; m < layout.size(); ++m) {
    if (is_loss_path(layout.label(m).path)) {
      out.loss_modes.push_back(m);
      hidden[m] = true;
    }
  }
  for (std::size_t m = 0; m < layout.size(); ++m) {
    if (!hidden[m]) out.retained.push_back(m);
  }
  return out;
}

bool matches(const FockBasisState& basis, const HeraldRule& rule, const ResolvedRule& resolved) {
  for (std::size_t d = 0; d < rule.detections.size(); ++d) {
    int n = 0;
    for (auto m : resolved.detector_modes[d]) n += basis.occupations[m];
    const int want = rule.detections[d].count;
    if (rule.detector.kind == DetectorKind::kThreshold) {
      if ((n > 0) != (want > 0)) return false;
    } else if (n != want) {
      return false;
    }
  }
  if (rule.postselect_no_loss) {
    for (auto m : resolved.loss_modes) {
      if (basis.occupations[m] != 0) return false;
    }
  }
  return true;
}

}  // namespace

ModeLayout retained_layout(const ModeLayout& layout, const HeraldRule& rule) {
  return layout.select(resolve(layout, rule).retained);
}

double outcome_probability(const StateVector& state, const HeraldRule& rule) {
  const auto resolved = resolve(state.layout(), rule);
  double p = 0.0;
  for (const auto& [basis, amp] : state.amplitudes()) {
    if (matches(basis, rule, resolved)) p += std::norm(amp);
  }
  return p;
}

StateVector herald(const StateVector& state, const HeraldRule& rule) {
  const auto resolved = resolve(state.layout(), rule);
  std::vector<std::size_t> hidden_modes;
  for (const auto& modes : resolved.detector_modes) hidden_modes.insert(hidden_modes.end(), modes.begin(), modes.end());
  hidden_modes.insert(hidden_modes.end(), resolved.loss_modes.begin(), resolved.loss_modes.end());

  std::optional<std::vector<int>> configuration;
  std::vector<std::pair<std::vector<int>, Amplitude>> kept;
  for (const auto& [basis, amp] : state.amplitudes()) {
    if (std::abs(amp) < kPruneTolerance || !matches(basis, rule, resolved)) continue;
    std::vector<int> hidden;
    hidden.reserve(hidden_modes.size());
    for (auto m : hidden_modes) hidden.push_back(basis.occupations[m]);
    if (!configuration) {
      configuration = hidden;
    } else if (*configuration != hidden) {
      if (rule.detector.kind == DetectorKind::kThreshold) {
        throw MixedConditionalState(
            "threshold herald is ambiguous: several photon-number configurations click; use "
            "number-resolving detectors or query outcome probabilities instead");
      }
      throw MixedConditionalState(
          "herald outcome is consistent with several detector/loss mode configurations; the "
          "conditional state is mixed");
    }
    std::vector<int> occ;
    occ.reserve(resolved.retained.size());
    for (auto m : resolved.retained) occ.push_back(basis.occupations[m]);
    kept.emplace_back(std::move(occ), amp);
  }

  int hidden_photons = 0;
  if (configuration) hidden_photons = std::accumulate(configuration->begin(), configuration->end(), 0);
  else {
    // Nothing heralded: report an empty state in the nominal sector.
    for (const auto& det : rule.detections) hidden_photons += det.count;
    if (rule.detector.kind == DetectorKind::kThreshold) hidden_photons = 0;
  }
  const int retained_photons = std::max(0, state.photons() - hidden_photons);
  StateVector out(state.layout().select(resolved.retained), retained_photons);
  for (auto& [occ, amp] : kept) out.add(std::move(occ), amp);
  return out;
}

Circuit with_detector_efficiency(const Circuit& circuit, std::span<const std::string> paths,
                                 double efficiency) {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
    throw CircuitError("detector efficiency must lie in [0, 1]");
  }
  Circuit out = circuit;
  if (efficiency == 1.0) return out;
  for (const auto& path : paths) {
    out.add(Element::loss("det." + path, Port{path, std::nullopt}, efficiency));
  }
  return out;
}

ConditionalMap conditional_map(const Circuit& circuit, const HeraldRule& rule,
                               const LogicalEncoding& encoding) {
  if (encoding.inputs.empty() || encoding.outputs.empty()) {
    throw LayoutError("conditional_map: empty logical encoding");
  }
  const int photons = encoding.inputs.front().photons();
  for (const auto& in : encoding.inputs) {
    if (in.photons() != photons) throw LayoutError("conditional_map: inputs differ in photon number");
  }
  const SectorTransfer transfer(compile(circuit), photons);

  const auto rows = static_cast<Eigen::Index>(encoding.outputs.size());
  const auto cols = static_cast<Eigen::Index>(encoding.inputs.size());
  ConditionalMap map{Eigen::MatrixXcd::Zero(rows, cols), {}, {}, rule};
  for (Eigen::Index k = 0; k < cols; ++k) {
    const StateVector heralded = herald(transfer.apply(encoding.inputs[static_cast<std::size_t>(k)]), rule);
    double inside = 0.0;
    for (Eigen::Index j = 0; j < rows; ++j) {
      const auto& basis = encoding.outputs[static_cast<std::size_t>(j)];
      const Amplitude c = heralded.photons() == basis.photons() ? inner_product(basis, heralded) : Amplitude{};
      map.matrix(j, k) = c;
      inside += std::norm(c);
    }
    map.success.push_back(inside);
    map.leakage.push_back(std::max(0.0, heralded.norm_squared() - inside));
  }

  for (Eigen::Index j = 0; j < rows; ++j) {
    const Amplitude ref = map.matrix(j, 0);
    if (std::abs(ref) > 1e-12) {
      map.matrix *= std::conj(ref) / std::abs(ref);
      break;
    }
  }
  return map;
}

Proportionality proportionality_check(const ConditionalMap& map, const Eigen::MatrixXcd& target) {
  if (map.matrix.rows() != target.rows() || map.matrix.cols() != target.cols()) {
    throw std::invalid_argument("proportionality_check: dimension mismatch");
  }
  Proportionality out;
  out.scale = (target.adjoint() * map.matrix).trace() / static_cast<double>(target.cols());
  out.deviation = (map.matrix - out.scale * target).cwiseAbs().maxCoeff();
  out.max_leakage = map.leakage.empty() ? 0.0 : *std::max_element(map.leakage.begin(), map.leakage.end());
  return out;
}

std::vector<std::int64_t> sample_counts(std::span<const double> probabilities, std::int64_t trials,
                                        std::uint64_t seed) {
  if (trials < 0) throw std::invalid_argument("sample_counts: negative trial count");
  double mass = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw std::invalid_argument("sample_counts: negative probability");
    mass += p;
  }
  if (mass <= 0.0) throw std::invalid_argument("sample_counts: probabilities sum to zero");

  std::mt19937_64 rng(seed);
  std::vector<std::int64_t> counts(probabilities.size(), 0);
  std::int64_t remaining = trials;
  double remaining_mass = mass;
  for (std::size_t i = 0; i < probabilities.size() && remaining > 0; ++i) {
    if (i + 1 == probabilities.size() || remaining_mass <= 0.0) {
      counts[i] = remaining;
      break;
    }
    const double p = std::clamp(probabilities[i] / remaining_mass, 0.0, 1.0);
    std::binomial_distribution<std::int64_t> draw(remaining, p);
    counts[i] = draw(rng);
    remaining -= counts[i];
    remaining_mass -= probabilities[i];
  }
  return counts;
}

}  // namespace klm
