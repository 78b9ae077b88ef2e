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

#include "klmsim/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "klmsim/errors.hpp"
#include "klmsim/evolve.hpp"
#include "klmsim/measure.hpp"

namespace klm {

namespace {

std::pair<std::string, std::string> ordered(const std::string& a, const std::string& b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

}  // namespace

void OverlapSpec::set(const std::string& a, const std::string& b, double overlap) {
  if (a == b) throw std::invalid_argument("overlap of photon '" + a + "' with itself is fixed to 1");
  if (!(overlap >= 0.0 && overlap <= 1.0)) {
    throw std::invalid_argument("overlap " + a + "-" + b + " must lie in [0, 1]");
  }
  entries_[ordered(a, b)] = overlap;
}

double OverlapSpec::get(const std::string& a, const std::string& b) const {
  if (a == b) return 1.0;
  auto it = entries_.find(ordered(a, b));
  return it == entries_.end() ? 1.0 : it->second;
}

Eigen::MatrixXd OverlapSpec::gram(std::span<const PhotonSource> photons) const {
  const auto n = static_cast<Eigen::Index>(photons.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      g(i, j) = get(photons[static_cast<std::size_t>(i)].name, photons[static_cast<std::size_t>(j)].name);
    }
  }
  return g;
}

Eigen::MatrixXd slot_decomposition(const Eigen::MatrixXd& gram) {
  constexpr double kDrop = 1e-12;
  constexpr double kNegative = 1e-9;
  const Eigen::Index n = gram.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::Index> owner;  // photon that opened each slot
  for (Eigen::Index j = 0; j < n; ++j) {
    for (std::size_t s = 0; s < owner.size(); ++s) {
      const Eigen::Index i = owner[s];
      double c = gram(j, i);
      for (std::size_t t = 0; t < s; ++t) c -= v(j, static_cast<Eigen::Index>(t)) * v(i, static_cast<Eigen::Index>(t));
      v(j, static_cast<Eigen::Index>(s)) = c / v(i, static_cast<Eigen::Index>(s));
    }
    const auto k = static_cast<Eigen::Index>(owner.size());
    const double residual = gram(j, j) - v.row(j).head(k).squaredNorm();
    if (residual < -kNegative) {
      throw ModelError("overlap matrix is not positive semidefinite at photon " + std::to_string(j) +
                       "; the pairwise overlaps cannot belong to a single set of wavepackets");
    }
    if (residual > kDrop) {
      v(j, k) = std::sqrt(residual);
      owner.push_back(j);
    }
  }
  const auto k = static_cast<Eigen::Index>(std::max<std::size_t>(owner.size(), 1));
  Eigen::MatrixXd out = v.leftCols(k);
  if ((out * out.transpose() - gram).cwiseAbs().maxCoeff() > kNegative) {
    throw ModelError("overlap matrix is inconsistent with any set of wavepackets");
  }
  return out;
}

StateVector slotted_product(const ModeLayout& layout, std::span<const PhotonSource> photons,
                            const Eigen::MatrixXd& slots) {
  std::vector<PhotonWavefunction> wfs;
  for (std::size_t j = 0; j < photons.size(); ++j) {
    PhotonWavefunction wf;
    for (Eigen::Index s = 0; s < slots.cols(); ++s) {
      const double w = slots(static_cast<Eigen::Index>(j), s);
      if (w == 0.0) continue;
      for (const auto& [port, amp] : photons[j].modes) {
        const ModeLabel label{port.path, port.pol.value_or(Polarization::kNone), static_cast<int>(s)};
        wf.emplace_back(layout.index(label), w * amp);
      }
    }
    wfs.push_back(std::move(wf));
  }
  return create_photons(layout, wfs);
}

SlottedInput distinguishable_input(const Circuit& circuit, std::span<const PhotonSource> photons,
                                   const OverlapSpec& overlaps) {
  const Eigen::MatrixXd slots = slot_decomposition(overlaps.gram(photons));
  Circuit slotted = circuit.with_slots(static_cast<int>(slots.cols()));
  StateVector state = slotted_product(slotted.layout(), photons, slots);
  return {std::move(slotted), std::move(state)};
}

double delay_to_overlap(double delay, double coherence_time) {
  if (!(coherence_time > 0.0)) throw std::invalid_argument("coherence time must be positive");
  const double x = delay / coherence_time;
  return std::exp(-0.5 * x * x);
}

double hom_coincidence_analytic(double r, double overlap) {
  const double t = 1.0 - r;
  return r * r + t * t - 2.0 * r * t * overlap * overlap;
}

double hom_coincidence_simulated(double reflectivity, double overlap) {
  Circuit c;
  c.add_path("a").add_path("b");
  c.add(Element::beamsplitter("bs", {"a", std::nullopt}, {"b", std::nullopt}, reflectivity));
  const std::vector<PhotonSource> photons = {{"p1", {{{"a", std::nullopt}, 1.0}}},
                                             {"p2", {{{"b", std::nullopt}, 1.0}}}};
  OverlapSpec spec;
  spec.set("p1", "p2", overlap);
  const auto input = distinguishable_input(c, photons, spec);
  const StateVector out = apply_unitary(compile(input.circuit), input.state);
  HeraldRule rule;
  rule.detector.kind = DetectorKind::kThreshold;
  rule.detections = {{"Da", {{"a", std::nullopt}}, 1}, {"Db", {{"b", std::nullopt}}, 1}};
  return outcome_probability(out, rule);
}

Circuit perturb_circuit(const Circuit& circuit, const PerturbationSpec& spec) {
  Circuit out = circuit;
  for (const auto& [qualified, offset] : spec.offsets) {
    const auto dot = qualified.rfind('.');
    if (dot == std::string::npos) throw CircuitError("perturbation key '" + qualified + "' lacks a parameter");
    const std::string selector = qualified.substr(0, dot);
    const std::string key = qualified.substr(dot + 1);
    const auto hits = out.select(selector);
    if (hits.empty()) throw CircuitError("no element matches '" + selector + "'");
    for (auto i : hits) {
      Element& e = out.element(i);
      e.set_parameter(key, e.parameter(key) + offset);
    }
  }
  if (spec.reflectivity_sigma > 0.0 || spec.phase_sigma > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < out.elements().size(); ++i) {
      Element& e = out.element(i);
      if (e.kind == ElementKind::kBeamsplitter && spec.reflectivity_sigma > 0.0) {
        e.set_parameter("r", e.reflectivity + spec.reflectivity_sigma * unit(rng));
      } else if (e.kind == ElementKind::kPpbs && spec.reflectivity_sigma > 0.0) {
        e.set_parameter("r_h", e.reflectivity_h + spec.reflectivity_sigma * unit(rng));
      } else if (e.kind == ElementKind::kPhase && spec.phase_sigma > 0.0) {
        e.set_parameter("phi", e.phase + spec.phase_sigma * unit(rng));
      }
    }
  }
  return out;
}

}  // namespace klm
