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

#include "klmsim/gates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "klmsim/errors.hpp"
#include "klmsim/evolve.hpp"

namespace klm {

using P = Polarization;

NsAmplitudes ns_component_amplitudes(double r) {
  const double s = std::sqrt(r);
  return {s, 1.0 - 2.0 * r, s * (3.0 * r - 2.0)};
}

NsBalance solve_ns_balance() {
  const double r = (3.0 - std::sqrt(2.0)) / 7.0;
  return {r, 1.0 / (2.0 - 3.0 * r)};
}

std::array<double, 3> ns_original_amplitudes(const std::array<double, 3>& r) {
  const GateBundle gate = build_ns_original(r);
  const ModeUnitary u = compile(gate.circuit);
  std::array<double, 3> out{};
  for (int n = 0; n < 3; ++n) {
    const FockBasisState state{{n, 1, 0}};
    out[static_cast<std::size_t>(n)] = fock_amplitude(u, state, state).real();
  }
  return out;
}

namespace {

Eigen::Vector3d original_residual(const Eigen::Vector3d& x) {
  const auto a = ns_original_amplitudes({x(0), x(1), x(2)});
  return {a[0] - a[1], a[0] + a[2], a[0] - 0.5};
}

Eigen::Vector3d clip(Eigen::Vector3d x) {
  for (int i = 0; i < 3; ++i) x(i) = std::clamp(x(i), 0.0, 1.0);
  return x;
}

}  // namespace

NsOriginalSolution solve_ns_original() {
  constexpr double kStep = 1e-7;
  constexpr double kAccept = 1e-12;
  NsOriginalSolution best;
  best.residual = INFINITY;
  for (double outer : {0.9, 0.8, 0.7, 0.6, 0.95}) {
    for (double inner : {0.3, 0.2, 0.4, 0.1}) {
      Eigen::Vector3d x(outer, inner, outer);
      Eigen::Vector3d f = original_residual(x);
      int it = 0;
      for (; it < 200 && f.norm() > 1e-15; ++it) {
        Eigen::Matrix3d jac;
        for (int k = 0; k < 3; ++k) {
          Eigen::Vector3d hi = x, lo = x;
          hi(k) = std::min(1.0, x(k) + kStep);
          lo(k) = std::max(0.0, x(k) - kStep);
          jac.col(k) = (original_residual(hi) - original_residual(lo)) / (hi(k) - lo(k));
        }
        const Eigen::Vector3d step = jac.completeOrthogonalDecomposition().solve(f);
        double scale = 1.0;
        Eigen::Vector3d next = clip(x - step);
        Eigen::Vector3d fn = original_residual(next);
        while (fn.norm() >= f.norm() && scale > 1e-6) {
          scale *= 0.5;
          next = clip(x - scale * step);
          fn = original_residual(next);
        }
        if (fn.norm() >= f.norm()) break;
        x = next;
        f = fn;
      }
      if (f.norm() < best.residual) {
        best = {{x(0), x(1), x(2)}, f.norm(), it};
      }
      if (best.residual < kAccept) return best;
    }
  }
  throw SimulationError("solve_ns_original did not converge; best residual " +
                        std::to_string(best.residual));
}

std::optional<Preset> parse_preset(std::string_view name) {
  if (name == "exact") return Preset::kExact;
  if (name == "paper-rounded") return Preset::kPaperRounded;
  return std::nullopt;
}

std::string_view to_string(Preset preset) {
  return preset == Preset::kExact ? "exact" : "paper-rounded";
}

NsBalance preset_parameters(Preset preset) {
  if (preset == Preset::kPaperRounded) return {0.23, 0.76};
  return solve_ns_balance();
}

GateBundle build_ns_simplified(double reflectivity, std::optional<double> loss_transmissivity) {
  GateBundle g;
  g.name = "ns-simplified";
  g.signal = "s";
  g.circuit.add_path("s").add_path("a");
  g.circuit.add(Element::beamsplitter("ns.bs", {"s", std::nullopt}, {"a", std::nullopt}, reflectivity));
  if (loss_transmissivity) g.circuit.add(Element::loss("ns.loss", {"s", std::nullopt}, *loss_transmissivity));
  g.ancillas = {{"a", std::nullopt}};
  g.herald.detections = {{"Da", {{"a", std::nullopt}}, 1}};
  return g;
}

GateBundle build_ns_original(const std::array<double, 3>& r) {
  GateBundle g;
  g.name = "ns-original";
  g.signal = "s";
  g.circuit.add_path("s").add_path("a1").add_path("a2");
  const Port s{"s", std::nullopt}, a1{"a1", std::nullopt}, a2{"a2", std::nullopt};
  g.circuit.add(Element::beamsplitter("ns.bs1", s, a2, r[0]));
  g.circuit.add(Element::beamsplitter("ns.bs2", s, a1, r[1]));
  g.circuit.add(Element::beamsplitter("ns.bs3", s, a2, r[2]));
  g.ancillas = {a1};
  g.herald.detections = {{"upper", {a1}, 1}, {"lower", {a2}, 0}};
  return g;
}

namespace {

// Appends one NS gate acting on `signal`; returns its herald detections.
std::vector<Detection> add_ns(GateBundle& g, const std::string& prefix, const std::string& signal,
                              const std::string& aux, DualRailVariant variant, Preset preset) {
  const Port s{signal, std::nullopt}, a{aux, std::nullopt};
  g.ancillas.push_back(a);
  if (variant == DualRailVariant::kSimplified) {
    const NsBalance p = preset_parameters(preset);
    g.circuit.add_path(aux);
    g.circuit.add(Element::beamsplitter(prefix + ".bs", s, a, p.reflectivity));
    g.circuit.add(Element::loss(prefix + ".loss", s, p.transmissivity));
    return {{"D" + aux, {a}, 1}};
  }
  static const NsOriginalSolution solution = solve_ns_original();
  const Port z{aux + "z", std::nullopt};
  g.circuit.add_path(aux).add_path(z.path);
  g.circuit.add(Element::beamsplitter(prefix + ".bs1", s, z, solution.reflectivities[0]));
  g.circuit.add(Element::beamsplitter(prefix + ".bs2", s, a, solution.reflectivities[1]));
  g.circuit.add(Element::beamsplitter(prefix + ".bs3", s, z, solution.reflectivities[2]));
  return {{"D" + aux, {a}, 1}, {"D" + z.path, {z}, 0}};
}

}  // namespace

GateBundle build_klm_cnot_dualrail(DualRailVariant variant, Preset preset) {
  GateBundle g;
  g.name = "klm-cnot-dualrail";
  for (const char* path : {"C0", "C1", "T0", "T1"}) g.circuit.add_path(path);
  const Port c1{"C1", std::nullopt}, t0{"T0", std::nullopt}, t1{"T1", std::nullopt};
  g.circuit.add(Element::beamsplitter("bs3", t0, t1, 0.5));
  g.circuit.add(Element::beamsplitter("bs1", c1, t0, 0.5));
  auto d1 = add_ns(g, "ns1", "C1", "A1", variant, preset);
  auto d2 = add_ns(g, "ns2", "T0", "A2", variant, preset);
  g.circuit.add(Element::beamsplitter("bs2", c1, t0, 0.5));
  g.circuit.add(Element::beamsplitter("bs4", t0, t1, 0.5));
  g.herald.detections = std::move(d1);
  g.herald.detections.insert(g.herald.detections.end(), d2.begin(), d2.end());

  CnotEncoding enc;
  enc.control.modes = {Port{"C0", std::nullopt}, c1};
  enc.target.modes = {t0, t1};
  g.encoding = enc;
  return g;
}

PolarizationCnotParameters polarization_cnot_parameters(Preset preset) {
  const NsBalance p = preset_parameters(preset);
  PolarizationCnotParameters out;
  out.ppbs2_reflectivity_h = p.reflectivity;
  out.ppbs3_transmissivity_h = p.transmissivity;
  return out;
}

GateBundle build_klm_cnot_polarization(const PolarizationCnotParameters& params) {
  GateBundle g;
  g.name = "klm-cnot-ppbs";
  for (const char* path : {"C", "T", "A1", "A2"}) g.circuit.add_path(path, {P::kH, P::kV});
  auto& c = g.circuit;
  c.add(Element::ppbs("ppbs1.first", "C", "T", params.ppbs1_reflectivity_h, 1.0));
  c.add(Element::ppbs("ppbs2.c", "C", "A1", params.ppbs2_reflectivity_h, 1.0, Orientation::kNegativeSecond));
  c.add(Element::ppbs("ppbs2.t", "T", "A2", params.ppbs2_reflectivity_h, 1.0, Orientation::kNegativeSecond));
  if (params.loop_phases) {
    c.add(Element::phase_shift("loop.c", {"C", std::nullopt}, 0.0));
    c.add(Element::phase_shift("loop.t", {"T", std::nullopt}, 0.0));
  }
  c.add(Element::ppbs("ppbs1.second", "C", "T", params.ppbs1_reflectivity_h, 1.0));
  c.add(Element::loss("ppbs3.c", {"C", P::kH}, params.ppbs3_transmissivity_h));
  c.add(Element::loss("ppbs3.t", {"T", P::kH}, params.ppbs3_transmissivity_h));
  // Local Z corrections: the fully reflected V components pick up a sign at PPBS2.
  c.add(Element::phase_shift("wp.c", {"C", P::kV}, std::numbers::pi));
  c.add(Element::phase_shift("wp.t", {"T", P::kV}, std::numbers::pi));

  g.ancillas = {{"A1", P::kH}, {"A2", P::kH}};
  g.herald.detections = {{"DA1", {{"A1", std::nullopt}}, 1}, {"DA2", {{"A2", std::nullopt}}, 1}};

  const double h = 1.0 / std::sqrt(2.0);
  CnotEncoding enc;
  enc.control.modes = {Port{"C", P::kV}, Port{"C", P::kH}};
  enc.target.modes = {Port{"T", P::kV}, Port{"T", P::kH}};
  enc.target.logical << h, h, h, -h;
  // Physical analyzer states in (V, H) order.
  const Amplitude i{0.0, 1.0};
  Eigen::Matrix2cd pm, vh, y;
  pm << h, -h, h, h;
  vh << 1.0, 0.0, 0.0, 1.0;
  y << i * h, -i * h, h, h;
  enc.control.physical_bases = std::array{vh, pm, y};
  enc.target.physical_bases = std::array{pm, vh, y};
  g.encoding = enc;
  return g;
}

const std::vector<std::string>& gate_names() {
  static const std::vector<std::string> names = {"ns-simplified", "ns-original", "klm-cnot-dualrail",
                                                  "klm-cnot-ppbs"};
  return names;
}

GateBundle build_gate(std::string_view name, Preset preset, DualRailVariant variant) {
  if (name == "ns-simplified") {
    const NsBalance p = preset_parameters(preset);
    return build_ns_simplified(p.reflectivity, p.transmissivity);
  }
  if (name == "ns-original") return build_ns_original(solve_ns_original().reflectivities);
  if (name == "klm-cnot-dualrail") return build_klm_cnot_dualrail(variant, preset);
  if (name == "klm-cnot-ppbs") return build_klm_cnot_polarization(polarization_cnot_parameters(preset));
  std::string msg = "unknown gate '" + std::string(name) + "'; expected one of:";
  for (const auto& n : gate_names()) msg += " " + n;
  throw std::invalid_argument(msg);
}

Eigen::Matrix4cd cnot_matrix() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

namespace {

std::size_t mode_of(const ModeLayout& layout, const Port& port, int slot) {
  return layout.index(ModeLabel{port.path, port.pol.value_or(P::kNone), slot});
}

}  // namespace

PhotonWavefunction qubit_photon(const ModeLayout& layout, const QubitEncoding& qubit,
                                const Eigen::Vector2cd& physical, int slot) {
  PhotonWavefunction wf;
  for (int k = 0; k < 2; ++k) {
    if (physical(k) != Amplitude{}) wf.emplace_back(mode_of(layout, qubit.modes[static_cast<std::size_t>(k)], slot), physical(k));
  }
  return wf;
}

PhotonWavefunction port_photon(const ModeLayout& layout, const Port& port, int slot) {
  return {{mode_of(layout, port, slot), 1.0}};
}

LogicalEncoding logical_encoding(const GateBundle& bundle) {
  if (!bundle.encoding) throw LayoutError("gate '" + bundle.name + "' has no two-qubit encoding");
  const auto& enc = *bundle.encoding;
  const ModeLayout full = bundle.circuit.layout();
  const ModeLayout kept = retained_layout(full, bundle.herald);
  LogicalEncoding out;
  for (int c = 0; c < 2; ++c) {
    for (int t = 0; t < 2; ++t) {
      std::vector<PhotonWavefunction> in = {qubit_photon(full, enc.control, enc.control.logical.col(c)),
                                            qubit_photon(full, enc.target, enc.target.logical.col(t))};
      for (const auto& a : bundle.ancillas) in.push_back(port_photon(full, a));
      out.inputs.push_back(create_photons(full, in));
      const std::vector<PhotonWavefunction> o = {qubit_photon(kept, enc.control, enc.control.logical.col(c)),
                                                 qubit_photon(kept, enc.target, enc.target.logical.col(t))};
      out.outputs.push_back(create_photons(kept, o));
    }
  }
  return out;
}

std::array<Amplitude, 3> ns_heralded_amplitudes(const GateBundle& bundle) {
  const ModeLayout full = bundle.circuit.layout();
  const ModeUnitary u = compile(bundle.circuit);
  const std::size_t signal = full.index(ModeLabel{bundle.signal, P::kNone, 0});
  std::array<Amplitude, 3> out{};
  for (int n = 0; n < 3; ++n) {
    std::vector<PhotonWavefunction> photons(static_cast<std::size_t>(n), PhotonWavefunction{{signal, 1.0}});
    for (const auto& a : bundle.ancillas) photons.push_back(port_photon(full, a));
    // create_photons yields sqrt(n!) |n>; rescale to the normalized Fock state.
    StateVector in = create_photons(full, photons);
    in *= 1.0 / std::sqrt(std::tgamma(n + 1.0));
    const StateVector h = herald(apply_unitary(u, in), bundle.herald);
    std::vector<int> occ(h.layout().size(), 0);
    occ[h.layout().index(ModeLabel{bundle.signal, P::kNone, 0})] = n;
    out[static_cast<std::size_t>(n)] = h.photons() == n ? h.amplitude(occ) : Amplitude{};
  }
  return out;
}

}  // namespace klm
