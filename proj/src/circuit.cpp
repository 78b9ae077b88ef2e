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

#include "klmsim/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "klmsim/errors.hpp"

namespace klm {

namespace {

void check_unit_interval(double value, std::string_view what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw CircuitError(std::string(what) + " = " + std::to_string(value) +
                       " lies outside [0, 1]");
  }
}

bool contains(const std::vector<Polarization>& pols, Polarization p) {
  return std::find(pols.begin(), pols.end(), p) != pols.end();
}

}  // namespace

bool is_loss_path(std::string_view path) { return path.starts_with(kLossPathPrefix); }

Eigen::Matrix2d beamsplitter_matrix(double reflectivity, Orientation orientation) {
  check_unit_interval(reflectivity, "beamsplitter reflectivity");
  const double r = std::sqrt(reflectivity);
  const double t = std::sqrt(1.0 - reflectivity);
  Eigen::Matrix2d m;
  if (orientation == Orientation::kNegativeFirst) {
    m << -r, t, t, r;
  } else {
    m << r, t, t, -r;
  }
  return m;
}

Eigen::Matrix4d ppbs_matrix(double reflectivity_h, double reflectivity_v, Orientation orientation) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<2, 2>() = beamsplitter_matrix(reflectivity_h, orientation);
  m.bottomRightCorner<2, 2>() = beamsplitter_matrix(reflectivity_v, orientation);
  return m;
}

std::string to_string(const Port& port) {
  if (!port.pol) return port.path;
  return port.path + "." + std::string(to_string(*port.pol));
}

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::kBeamsplitter:
      return "BS";
    case ElementKind::kPpbs:
      return "PPBS";
    case ElementKind::kPhase:
      return "PHASE";
    case ElementKind::kLoss:
      return "LOSS";
  }
  return "?";
}

Element Element::beamsplitter(std::string name, Port first, Port second, double reflectivity,
                              Orientation orientation) {
  Element e;
  e.kind = ElementKind::kBeamsplitter;
  e.name = std::move(name);
  e.ports = {std::move(first), std::move(second)};
  e.reflectivity = reflectivity;
  e.orientation = orientation;
  return e;
}

Element Element::ppbs(std::string name, std::string first, std::string second,
                      double reflectivity_h, double reflectivity_v, Orientation orientation) {
  Element e;
  e.kind = ElementKind::kPpbs;
  e.name = std::move(name);
  e.ports = {Port{std::move(first), std::nullopt}, Port{std::move(second), std::nullopt}};
  e.reflectivity_h = reflectivity_h;
  e.reflectivity_v = reflectivity_v;
  e.orientation = orientation;
  return e;
}

Element Element::phase_shift(std::string name, Port port, double phase) {
  Element e;
  e.kind = ElementKind::kPhase;
  e.name = std::move(name);
  e.ports = {std::move(port)};
  e.phase = phase;
  return e;
}

Element Element::loss(std::string name, Port port, double transmissivity) {
  Element e;
  e.kind = ElementKind::kLoss;
  e.name = std::move(name);
  e.ports = {std::move(port)};
  e.transmissivity = transmissivity;
  return e;
}

std::vector<std::string_view> Element::parameter_keys() const {
  switch (kind) {
    case ElementKind::kBeamsplitter:
      return {"r"};
    case ElementKind::kPpbs:
      return {"r_h", "r_v"};
    case ElementKind::kPhase:
      return {"phi"};
    case ElementKind::kLoss:
      return {"t"};
  }
  return {};
}

double Element::parameter(std::string_view key) const {
  if (kind == ElementKind::kBeamsplitter && key == "r") return reflectivity;
  if (kind == ElementKind::kPpbs && key == "r_h") return reflectivity_h;
  if (kind == ElementKind::kPpbs && key == "r_v") return reflectivity_v;
  if (kind == ElementKind::kPhase && key == "phi") return phase;
  if (kind == ElementKind::kLoss && key == "t") return transmissivity;
  throw CircuitError("element '" + name + "' (" + std::string(to_string(kind)) +
                     ") has no parameter '" + std::string(key) + "'");
}

void Element::set_parameter(std::string_view key, double value) {
  if (key != "phi") check_unit_interval(value, name + "." + std::string(key));
  if (kind == ElementKind::kBeamsplitter && key == "r") {
    reflectivity = value;
  } else if (kind == ElementKind::kPpbs && key == "r_h") {
    reflectivity_h = value;
  } else if (kind == ElementKind::kPpbs && key == "r_v") {
    reflectivity_v = value;
  } else if (kind == ElementKind::kPhase && key == "phi") {
    phase = value;
  } else if (kind == ElementKind::kLoss && key == "t") {
    transmissivity = value;
  } else {
    throw CircuitError("element '" + name + "' (" + std::string(to_string(kind)) +
                       ") has no parameter '" + std::string(key) + "'");
  }
}

Circuit& Circuit::add_path(std::string name, std::vector<Polarization> pols) {
  if (name.empty()) throw CircuitError("path name must not be empty");
  if (is_loss_path(name)) throw CircuitError("path names starting with 'loss:' are reserved");
  if (has_path(name)) throw CircuitError("duplicate path '" + name + "'");
  if (pols.empty()) throw CircuitError("path '" + name + "' carries no polarization");
  paths_.push_back(PathSpec{std::move(name), std::move(pols)});
  return *this;
}

const PathSpec& Circuit::path(std::string_view name) const {
  auto it = std::find_if(paths_.begin(), paths_.end(),
                         [&](const PathSpec& p) { return p.name == name; });
  if (it == paths_.end()) throw CircuitError("unknown path '" + std::string(name) + "'");
  return *it;
}

bool Circuit::has_path(std::string_view name) const {
  return std::any_of(paths_.begin(), paths_.end(),
                     [&](const PathSpec& p) { return p.name == name; });
}

std::vector<std::string> Circuit::loss_paths() const {
  std::vector<std::string> out;
  for (const auto& p : paths_) {
    if (is_loss_path(p.name)) out.push_back(p.name);
  }
  return out;
}

void Circuit::check_port(const Port& port, const Element& element) const {
  if (!has_path(port.path)) {
    throw CircuitError("element '" + element.name + "' references unknown path '" + port.path +
                       "'");
  }
  if (is_loss_path(port.path)) {
    throw CircuitError("element '" + element.name + "' reuses loss mode '" + port.path +
                       "' as an input");
  }
  if (port.pol && !contains(path(port.path).pols, *port.pol)) {
    throw CircuitError("element '" + element.name + "' references missing polarization " +
                       to_string(port));
  }
}

Circuit& Circuit::add(Element element) {
  const std::size_t expected_ports =
      (element.kind == ElementKind::kBeamsplitter || element.kind == ElementKind::kPpbs) ? 2 : 1;
  if (element.ports.size() != expected_ports) {
    throw CircuitError("element '" + element.name + "' needs " + std::to_string(expected_ports) +
                       " port(s)");
  }
  if (!element.name.empty()) {
    for (const auto& e : elements_) {
      if (e.name == element.name) throw CircuitError("duplicate element name '" + e.name + "'");
    }
  }
  for (const auto& port : element.ports) check_port(port, element);
  if (expected_ports == 2 && element.ports[0].path == element.ports[1].path) {
    throw CircuitError("element '" + element.name + "' has identical ports");
  }
  for (auto key : element.parameter_keys()) {
    if (key != "phi") check_unit_interval(element.parameter(key), element.name + "." + std::string(key));
  }

  switch (element.kind) {
    case ElementKind::kBeamsplitter: {
      const auto& a = element.ports[0];
      const auto& b = element.ports[1];
      if (a.pol.has_value() != b.pol.has_value()) {
        throw CircuitError("beamsplitter '" + element.name +
                           "': either both ports name a polarization or neither does");
      }
      if (!a.pol && path(a.path).pols != path(b.path).pols) {
        throw CircuitError("beamsplitter '" + element.name +
                           "' joins paths with different polarization sets");
      }
      break;
    }
    case ElementKind::kPpbs:
      for (const auto& port : element.ports) {
        const auto& pols = path(port.path).pols;
        if (!contains(pols, Polarization::kH) || !contains(pols, Polarization::kV)) {
          throw CircuitError("PPBS '" + element.name + "' needs H and V on path '" + port.path +
                             "'");
        }
      }
      break;
    case ElementKind::kLoss: {
      if (element.name.empty()) throw CircuitError("LOSS elements must be named");
      const auto& port = element.ports[0];
      std::vector<Polarization> pols =
          port.pol ? std::vector<Polarization>{*port.pol} : path(port.path).pols;
      paths_.push_back(PathSpec{std::string(kLossPathPrefix) + element.name, std::move(pols)});
      break;
    }
    case ElementKind::kPhase:
      break;
  }
  elements_.push_back(std::move(element));
  return *this;
}

Circuit Circuit::with_slots(int slots) const {
  if (slots < 1) throw CircuitError("slot count must be positive");
  Circuit out = *this;
  out.slots_ = slots;
  return out;
}

ModeLayout Circuit::layout() const {
  std::vector<ModeLabel> labels;
  for (const auto& p : paths_) {
    for (auto pol : p.pols) {
      for (int s = 0; s < slots_; ++s) labels.push_back(ModeLabel{p.name, pol, s});
    }
  }
  return ModeLayout(std::move(labels));
}

std::vector<std::size_t> Circuit::select(std::string_view selector) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const auto& name = elements_[i].name;
    if (name == selector ||
        (name.size() > selector.size() && name.starts_with(selector) && name[selector.size()] == '.')) {
      out.push_back(i);
    }
  }
  return out;
}

namespace {

std::pair<std::string_view, std::string_view> split_key(std::string_view qualified) {
  const auto dot = qualified.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == qualified.size()) {
    throw CircuitError("parameter key '" + std::string(qualified) +
                       "' must look like <element>.<parameter>");
  }
  return {qualified.substr(0, dot), qualified.substr(dot + 1)};
}

}  // namespace

void Circuit::set_parameter(std::string_view qualified_key, double value) {
  auto [selector, key] = split_key(qualified_key);
  const auto hits = select(selector);
  if (hits.empty()) throw CircuitError("no element matches '" + std::string(selector) + "'");
  for (auto i : hits) elements_[i].set_parameter(key, value);
}

double Circuit::parameter(std::string_view qualified_key) const {
  auto [selector, key] = split_key(qualified_key);
  const auto hits = select(selector);
  if (hits.empty()) throw CircuitError("no element matches '" + std::string(selector) + "'");
  return elements_[hits.front()].parameter(key);
}

std::vector<ModeAction> element_actions(const Circuit& circuit, const Element& element,
                                        const ModeLayout& layout) {
  std::vector<ModeAction> actions;
  const int slots = circuit.slots();
  auto mode = [&](const std::string& path, Polarization pol, int slot) {
    return layout.index(ModeLabel{path, pol, slot});
  };
  auto pols_of = [&](const Port& port) {
    return port.pol ? std::vector<Polarization>{*port.pol} : circuit.path(port.path).pols;
  };

  switch (element.kind) {
    case ElementKind::kBeamsplitter: {
      const Eigen::Matrix2cd m =
          beamsplitter_matrix(element.reflectivity, element.orientation).cast<Amplitude>();
      const auto& a = element.ports[0];
      const auto& b = element.ports[1];
      const auto pa = pols_of(a);
      const auto pb = pols_of(b);
      for (std::size_t k = 0; k < pa.size(); ++k) {
        for (int s = 0; s < slots; ++s) {
          actions.push_back({mode(a.path, pa[k], s), mode(b.path, pb[k], s), m});
        }
      }
      break;
    }
    case ElementKind::kPpbs: {
      const auto& a = element.ports[0].path;
      const auto& b = element.ports[1].path;
      const Eigen::Matrix2cd mh =
          beamsplitter_matrix(element.reflectivity_h, element.orientation).cast<Amplitude>();
      const Eigen::Matrix2cd mv =
          beamsplitter_matrix(element.reflectivity_v, element.orientation).cast<Amplitude>();
      for (int s = 0; s < slots; ++s) {
        actions.push_back({mode(a, Polarization::kH, s), mode(b, Polarization::kH, s), mh});
        actions.push_back({mode(a, Polarization::kV, s), mode(b, Polarization::kV, s), mv});
      }
      break;
    }
    case ElementKind::kPhase: {
      Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
      m(0, 0) = std::polar(1.0, element.phase);
      const auto& port = element.ports[0];
      for (auto pol : pols_of(port)) {
        for (int s = 0; s < slots; ++s) {
          const auto i = mode(port.path, pol, s);
          actions.push_back({i, i, m});
        }
      }
      break;
    }
    case ElementKind::kLoss: {
      const double t = std::sqrt(element.transmissivity);
      const double l = std::sqrt(1.0 - element.transmissivity);
      Eigen::Matrix2cd m;
      m << t, -l, l, t;
      const auto& port = element.ports[0];
      const std::string sink = std::string(kLossPathPrefix) + element.name;
      for (auto pol : pols_of(port)) {
        for (int s = 0; s < slots; ++s) {
          actions.push_back({mode(port.path, pol, s), mode(sink, pol, s), m});
        }
      }
      break;
    }
  }
  return actions;
}

ModeUnitary compile(const Circuit& circuit) {
  ModeUnitary out{circuit.layout(), {}};
  const auto m = static_cast<Eigen::Index>(out.layout.size());
  out.matrix = Eigen::MatrixXcd::Identity(m, m);
  std::vector<std::string> used_inputs;
  for (const auto& element : circuit.elements()) {
    for (const auto& port : element.ports) {
      if (is_loss_path(port.path)) {
        throw CircuitError("element '" + element.name + "' reuses loss mode '" + port.path + "'");
      }
    }
    for (const auto& action : element_actions(circuit, element, out.layout)) {
      const auto i = static_cast<Eigen::Index>(action.first);
      const auto j = static_cast<Eigen::Index>(action.second);
      if (action.single_mode()) {
        out.matrix.row(i) *= action.matrix(0, 0);
        continue;
      }
      const Eigen::RowVectorXcd ri = out.matrix.row(i);
      const Eigen::RowVectorXcd rj = out.matrix.row(j);
      out.matrix.row(i) = action.matrix(0, 0) * ri + action.matrix(0, 1) * rj;
      out.matrix.row(j) = action.matrix(1, 0) * ri + action.matrix(1, 1) * rj;
    }
  }
  return out;
}

bool validate_unitary(const Eigen::MatrixXcd& matrix, double tol) {
  if (matrix.rows() != matrix.cols()) return false;
  const Eigen::MatrixXcd gram = matrix.adjoint() * matrix;
  const Eigen::MatrixXcd diff = gram - Eigen::MatrixXcd::Identity(matrix.rows(), matrix.cols());
  return matrix.size() == 0 || diff.cwiseAbs().maxCoeff() <= tol;
}

}  // namespace klm
