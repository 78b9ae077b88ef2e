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

#include "klmsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include "klmsim/errors.hpp"
#include "klmsim/evolve.hpp"

namespace klm {

using nlohmann::json;

namespace {

// Object reader that records consumed keys so leftovers can be rejected.
class Fields {
 public:
  Fields(const json& doc, std::string where) : doc_(doc), where_(std::move(where)) {
    if (!doc_.is_object()) fail(where_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& field, const std::string& what) {
    throw SchemaError(field + ": " + what);
  }

  std::string at(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) fail(at(key), "missing required field");
    return *v;
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number()) fail(at(key), "expected a number");
    return v->get<double>();
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(at(key), "expected an integer");
    return v->get<std::int64_t>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(at(key), "expected a string");
    return v->get<std::string>();
  }

  bool flag(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(at(key), "expected true or false");
    return v->get<bool>();
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown field");
    }
  }

 private:
  const json& doc_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string indexed(const std::string& field, std::size_t i) { return field + "[" + std::to_string(i) + "]"; }

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

// Values are rounded to twelve significant digits, as in the CSV files.
json num(double value) { return json(std::stod(format_number(value))); }

const std::vector<std::pair<ScenarioKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ScenarioKind, std::string>> names = {
      {ScenarioKind::kGateFidelity, "gate-fidelity"}, {ScenarioKind::kFixtureFidelity, "fixture-fidelity"},
      {ScenarioKind::kHomScan, "hom-scan"},           {ScenarioKind::kNsCheck, "ns-check"},
      {ScenarioKind::kSweep, "sweep"}};
  return names;
}

std::string kind_name(ScenarioKind kind) {
  for (const auto& [k, n] : kind_names()) {
    if (k == kind) return n;
  }
  return "?";
}

Port parse_port(const json& v, const std::string& field) {
  if (!v.is_string()) Fields::fail(field, "expected a port string \"path\" or \"path.H\"");
  const auto s = v.get<std::string>();
  if (s.size() > 2 && s[s.size() - 2] == '.') {
    const char p = s.back();
    if (p == 'H') return {s.substr(0, s.size() - 2), Polarization::kH};
    if (p == 'V') return {s.substr(0, s.size() - 2), Polarization::kV};
  }
  if (s.empty()) Fields::fail(field, "empty port");
  return {s, std::nullopt};
}

std::string orientation_name(Orientation o) {
  return o == Orientation::kNegativeFirst ? "negative-first" : "negative-second";
}

Orientation parse_orientation(const std::string& s, const std::string& field) {
  if (s == "negative-first") return Orientation::kNegativeFirst;
  if (s == "negative-second") return Orientation::kNegativeSecond;
  Fields::fail(field, "unknown orientation '" + s + "'; expected negative-first, negative-second");
}

Element parse_element(const json& doc, const std::string& where) {
  Fields f(doc, where);
  const json& kind_v = f.require("kind");
  if (!kind_v.is_string()) Fields::fail(f.at("kind"), "expected a string");
  const auto kind = kind_v.get<std::string>();
  const std::string name = f.text("name", "");
  if (name.empty()) Fields::fail(f.at("name"), "missing required field");
  const json& ports_v = f.require("ports");
  if (!ports_v.is_array()) Fields::fail(f.at("ports"), "expected an array");
  std::vector<Port> ports;
  for (std::size_t i = 0; i < ports_v.size(); ++i) ports.push_back(parse_port(ports_v[i], indexed(f.at("ports"), i)));
  const Orientation orient = parse_orientation(f.text("orientation", "negative-first"), f.at("orientation"));
  auto want_ports = [&](std::size_t n) {
    if (ports.size() != n) Fields::fail(f.at("ports"), kind + " takes " + std::to_string(n) + " port(s)");
  };
  Element e;
  if (kind == "BS") {
    want_ports(2);
    e = Element::beamsplitter(name, ports[0], ports[1], f.number("r", 0.5), orient);
  } else if (kind == "PPBS") {
    want_ports(2);
    if (ports[0].pol || ports[1].pol) Fields::fail(f.at("ports"), "PPBS ports are whole paths");
    e = Element::ppbs(name, ports[0].path, ports[1].path, f.number("r_h", 0.5), f.number("r_v", 1.0), orient);
  } else if (kind == "PHASE") {
    want_ports(1);
    e = Element::phase_shift(name, ports[0], f.number("phi", 0.0));
  } else if (kind == "LOSS") {
    want_ports(1);
    e = Element::loss(name, ports[0], f.number("t", 1.0));
  } else {
    Fields::fail(f.at("kind"), "unknown element kind '" + kind + "'; expected BS, PPBS, PHASE, LOSS");
  }
  f.finish();
  return e;
}

Circuit parse_circuit(const json& doc, const std::string& where) {
  Fields f(doc, where);
  Circuit c;
  const json& paths = f.require("paths");
  if (!paths.is_array()) Fields::fail(f.at("paths"), "expected an array");
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const std::string pw = indexed(f.at("paths"), i);
    Fields pf(paths[i], pw);
    const std::string name = pf.text("name", "");
    std::vector<Polarization> pols;
    if (const json* pv = pf.find("pols")) {
      if (!pv->is_array()) Fields::fail(pf.at("pols"), "expected an array");
      for (const auto& p : *pv) {
        const auto s = p.is_string() ? p.get<std::string>() : std::string();
        if (s == "H") {
          pols.push_back(Polarization::kH);
        } else if (s == "V") {
          pols.push_back(Polarization::kV);
        } else {
          Fields::fail(pf.at("pols"), "expected \"H\" or \"V\"");
        }
      }
    }
    if (pols.empty()) pols = {Polarization::kNone};
    pf.finish();
    try {
      c.add_path(name, pols);
    } catch (const CircuitError& e) {
      Fields::fail(pw, e.what());
    }
  }
  const json& elements = f.require("elements");
  if (!elements.is_array()) Fields::fail(f.at("elements"), "expected an array");
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const std::string ew = indexed(f.at("elements"), i);
    Element e = parse_element(elements[i], ew);
    try {
      c.add(std::move(e));
    } catch (const CircuitError& err) {
      Fields::fail(ew, err.what());
    }
  }
  f.finish();
  return c;
}

NoiseModel parse_noise(const json& doc, const std::string& where) {
  Fields f(doc, where);
  NoiseModel noise;
  if (const json* ov = f.find("overlaps")) {
    if (!ov->is_array()) Fields::fail(f.at("overlaps"), "expected an array");
    for (std::size_t i = 0; i < ov->size(); ++i) {
      const std::string ow = indexed(f.at("overlaps"), i);
      Fields of((*ov)[i], ow);
      const json& ph = of.require("photons");
      if (!ph.is_array() || ph.size() != 2 || !ph[0].is_string() || !ph[1].is_string()) {
        Fields::fail(of.at("photons"), "expected two photon names");
      }
      const json& value = of.require("value");
      if (!value.is_number()) Fields::fail(of.at("value"), "expected a number");
      of.finish();
      try {
        noise.overlaps.set(ph[0].get<std::string>(), ph[1].get<std::string>(), value.get<double>());
      } catch (const std::invalid_argument& e) {
        Fields::fail(ow, e.what());
      }
    }
  }
  if (const json* pv = f.find("perturbations")) {
    Fields pf(*pv, f.at("perturbations"));
    if (const json* off = pf.find("offsets")) {
      if (!off->is_object()) Fields::fail(pf.at("offsets"), "expected an object");
      for (auto it = off->begin(); it != off->end(); ++it) {
        if (!it->is_number()) Fields::fail(pf.at("offsets") + "." + it.key(), "expected a number");
        noise.perturbation.offsets[it.key()] = it->get<double>();
      }
    }
    noise.perturbation.reflectivity_sigma = pf.number("reflectivity_sigma", 0.0);
    noise.perturbation.phase_sigma = pf.number("phase_sigma", 0.0);
    const auto seed = pf.integer("seed", 0);
    if (seed < 0) Fields::fail(pf.at("seed"), "must be non-negative");
    noise.perturbation.seed = static_cast<std::uint64_t>(seed);
    if (noise.perturbation.reflectivity_sigma < 0.0) Fields::fail(pf.at("reflectivity_sigma"), "must be >= 0");
    if (noise.perturbation.phase_sigma < 0.0) Fields::fail(pf.at("phase_sigma"), "must be >= 0");
    pf.finish();
  }
  if (const json* dv = f.find("double_pair")) {
    Fields df(*dv, f.at("double_pair"));
    noise.double_pair.enabled = df.flag("enabled", false);
    noise.double_pair.rate = df.number("rate", 0.0);
    if (noise.double_pair.rate < 0.0) Fields::fail(df.at("rate"), "must be >= 0");
    df.finish();
  }
  f.finish();
  return noise;
}

std::pair<BasisPair, BasisPair> parse_basis_entry(const json& v, const std::string& field) {
  const std::string expected = "expected \"ZZ\", \"XX\", \"XZ->YY\" style labels over Z, X, Y";
  if (!v.is_string()) Fields::fail(field, expected);
  const auto s = v.get<std::string>();
  const auto arrow = s.find("->");
  const auto in = parse_basis_pair(s.substr(0, arrow));
  const auto out = arrow == std::string::npos ? in : parse_basis_pair(s.substr(arrow + 2));
  if (!in || !out) Fields::fail(field, "unknown basis '" + s + "'; " + expected);
  return {*in, *out};
}

std::string basis_entry_label(const std::pair<BasisPair, BasisPair>& b) {
  return b.first.label() + "->" + b.second.label();
}

}  // namespace

json circuit_to_json(const Circuit& circuit) {
  json paths = json::array();
  for (const auto& p : circuit.paths()) {
    if (is_loss_path(p.name)) continue;
    json entry = {{"name", p.name}};
    json pols = json::array();
    for (auto pol : p.pols) {
      if (pol != Polarization::kNone) pols.push_back(std::string(to_string(pol)));
    }
    if (!pols.empty()) entry["pols"] = pols;
    paths.push_back(entry);
  }
  json elements = json::array();
  for (const auto& e : circuit.elements()) {
    json entry = {{"kind", std::string(to_string(e.kind))}, {"name", e.name}};
    json ports = json::array();
    for (const auto& p : e.ports) ports.push_back(to_string(p));
    entry["ports"] = ports;
    for (auto key : e.parameter_keys()) entry[std::string(key)] = e.parameter(key);
    if (e.kind == ElementKind::kBeamsplitter || e.kind == ElementKind::kPpbs) {
      entry["orientation"] = orientation_name(e.orientation);
    }
    elements.push_back(entry);
  }
  return {{"paths", paths}, {"elements", elements}};
}

Circuit circuit_from_json(const json& doc) { return parse_circuit(doc, "circuit"); }

Scenario parse_scenario(const json& doc) {
  Fields f(doc, "");
  Scenario s;
  const json& version = f.require("schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    Fields::fail("schema_version", "unsupported version; expected " + std::to_string(kSchemaVersion));
  }
  s.name = f.text("name", "");
  const json& kind = f.require("kind");
  std::vector<std::string> kinds;
  bool found = false;
  for (const auto& [k, n] : kind_names()) {
    kinds.push_back(n);
    if (kind.is_string() && kind.get<std::string>() == n) {
      s.kind = k;
      found = true;
    }
  }
  if (!found) Fields::fail("kind", "unknown kind; expected one of " + join(kinds));

  const std::string default_gate = s.kind == ScenarioKind::kNsCheck ? "ns-simplified" : "klm-cnot-ppbs";
  s.gate = f.text("gate", default_gate);
  const auto& names = gate_names();
  if (std::find(names.begin(), names.end(), s.gate) == names.end()) {
    Fields::fail("gate", "unknown gate '" + s.gate + "'; expected one of " + join(names));
  }
  const std::string variant = f.text("variant", "original");
  if (variant == "original") {
    s.variant = DualRailVariant::kOriginal;
  } else if (variant == "simplified") {
    s.variant = DualRailVariant::kSimplified;
  } else {
    Fields::fail("variant", "unknown variant '" + variant + "'; expected original, simplified");
  }
  const std::string preset = f.text("preset", "exact");
  const auto parsed_preset = parse_preset(preset);
  if (!parsed_preset) Fields::fail("preset", "unknown preset '" + preset + "'; expected exact, paper-rounded");
  s.preset = *parsed_preset;
  if (const json* ov = f.find("overrides")) {
    if (!ov->is_object()) Fields::fail("overrides", "expected an object");
    for (auto it = ov->begin(); it != ov->end(); ++it) {
      if (!it->is_number()) Fields::fail("overrides." + it.key(), "expected a number");
      if (it.key().find('.') == std::string::npos) {
        Fields::fail("overrides." + it.key(), "expected \"<element>.<parameter>\"");
      }
      s.overrides[it.key()] = it->get<double>();
    }
  }
  if (const json* cv = f.find("circuit")) s.circuit = parse_circuit(*cv, "circuit");

  if (const json* dv = f.find("detector")) {
    Fields df(*dv, "detector");
    const std::string dk = df.text("kind", "threshold");
    if (dk == "threshold") {
      s.detector.kind = DetectorKind::kThreshold;
    } else if (dk == "number-resolving") {
      s.detector.kind = DetectorKind::kNumberResolving;
    } else {
      Fields::fail("detector.kind", "unknown detector '" + dk + "'; expected threshold, number-resolving");
    }
    s.detector.efficiency = df.number("efficiency", 1.0);
    if (!(s.detector.efficiency > 0.0 && s.detector.efficiency <= 1.0)) {
      Fields::fail("detector.efficiency", "must lie in (0, 1]");
    }
    df.finish();
  }
  if (const json* nv = f.find("noise")) s.noise = parse_noise(*nv, "noise");

  if (const json* bv = f.find("bases")) {
    if (!bv->is_array() || bv->empty()) Fields::fail("bases", "expected a non-empty array");
    for (std::size_t i = 0; i < bv->size(); ++i) s.bases.push_back(parse_basis_entry((*bv)[i], indexed("bases", i)));
  } else {
    const auto standard = standard_basis_pairs();
    s.bases.assign(standard.begin(), standard.end());
  }

  s.trials = f.integer("trials", 0);
  if (s.trials < 0) Fields::fail("trials", "must be >= 0");
  if (const json* sv = f.find("seed")) {
    if (!sv->is_number_integer() || sv->get<std::int64_t>() < 0) Fields::fail("seed", "expected a non-negative integer");
    s.seed = sv->get<std::uint64_t>();
  }
  s.resamples = static_cast<int>(f.integer("resamples", 0));
  if (s.resamples < 0) Fields::fail("resamples", "must be >= 0");
  if ((s.trials > 0 || s.resamples > 0) && !s.seed) {
    Fields::fail("seed", "required when trials or resamples are positive");
  }
  s.fixture = f.text("fixture", "");
  if (s.kind == ScenarioKind::kFixtureFidelity && s.fixture != "paper-fig3") {
    Fields::fail("fixture", "unknown fixture '" + s.fixture + "'; expected paper-fig3");
  }

  if (const json* hv = f.find("hom")) {
    Fields hf(*hv, "hom");
    s.hom.reflectivity = hf.number("reflectivity", s.hom.reflectivity);
    s.hom.coherence_time = hf.number("coherence_time", s.hom.coherence_time);
    s.hom.delay_from = hf.number("delay_from", s.hom.delay_from);
    s.hom.delay_to = hf.number("delay_to", s.hom.delay_to);
    s.hom.steps = static_cast<int>(hf.integer("steps", s.hom.steps));
    hf.finish();
  }
  if (!(s.hom.reflectivity > 0.0 && s.hom.reflectivity < 1.0)) Fields::fail("hom.reflectivity", "must lie in (0, 1)");
  if (!(s.hom.coherence_time > 0.0)) Fields::fail("hom.coherence_time", "must be positive");
  if (s.hom.steps < 1) Fields::fail("hom.steps", "must be >= 1");

  if (const json* wv = f.find("sweep")) {
    Fields wf(*wv, "sweep");
    s.sweep.parameter = wf.text("parameter", "");
    s.sweep.from = wf.number("from", s.sweep.from);
    s.sweep.to = wf.number("to", s.sweep.to);
    s.sweep.steps = static_cast<int>(wf.integer("steps", s.sweep.steps));
    wf.finish();
  }
  if (s.kind == ScenarioKind::kSweep) {
    if (s.sweep.parameter.find('.') == std::string::npos) {
      Fields::fail("sweep.parameter", "expected \"<element>.<parameter>\"");
    }
    if (s.sweep.steps < 1) Fields::fail("sweep.steps", "must be >= 1");
  }
  s.output = f.text("output", "out");
  if (s.output.empty()) Fields::fail("output", "must not be empty");
  f.finish();
  return s;
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["name"] = s.name;
  doc["kind"] = kind_name(s.kind);
  doc["gate"] = s.gate;
  doc["variant"] = s.variant == DualRailVariant::kOriginal ? "original" : "simplified";
  doc["preset"] = std::string(to_string(s.preset));
  doc["overrides"] = json::object();
  for (const auto& [k, v] : s.overrides) doc["overrides"][k] = v;
  if (s.circuit) doc["circuit"] = circuit_to_json(*s.circuit);
  doc["detector"] = {{"kind", s.detector.kind == DetectorKind::kThreshold ? "threshold" : "number-resolving"},
                     {"efficiency", s.detector.efficiency}};
  json overlaps = json::array();
  for (const auto& [pair, value] : s.noise.overlaps.entries()) {
    overlaps.push_back({{"photons", {pair.first, pair.second}}, {"value", value}});
  }
  json offsets = json::object();
  for (const auto& [k, v] : s.noise.perturbation.offsets) offsets[k] = v;
  doc["noise"] = {{"overlaps", overlaps},
                  {"perturbations",
                   {{"offsets", offsets},
                    {"reflectivity_sigma", s.noise.perturbation.reflectivity_sigma},
                    {"phase_sigma", s.noise.perturbation.phase_sigma},
                    {"seed", s.noise.perturbation.seed}}},
                  {"double_pair", {{"enabled", s.noise.double_pair.enabled}, {"rate", s.noise.double_pair.rate}}}};
  json bases = json::array();
  for (const auto& b : s.bases) bases.push_back(basis_entry_label(b));
  doc["bases"] = bases;
  doc["trials"] = s.trials;
  if (s.seed) doc["seed"] = *s.seed;
  doc["resamples"] = s.resamples;
  if (!s.fixture.empty()) doc["fixture"] = s.fixture;
  doc["hom"] = {{"reflectivity", s.hom.reflectivity},
                {"coherence_time", s.hom.coherence_time},
                {"delay_from", s.hom.delay_from},
                {"delay_to", s.hom.delay_to},
                {"steps", s.hom.steps}};
  if (s.kind == ScenarioKind::kSweep) {
    doc["sweep"] = {{"parameter", s.sweep.parameter}, {"from", s.sweep.from}, {"to", s.sweep.to}, {"steps", s.sweep.steps}};
  }
  doc["output"] = s.output;
  return doc;
}

const std::map<std::string, std::string>& bundled_scenarios() {
  static const std::map<std::string, std::string> scenarios = {
      {"klm-cnot-ideal", R"({
  "schema_version": 1,
  "name": "klm-cnot-ideal",
  "kind": "gate-fidelity",
  "gate": "klm-cnot-ppbs",
  "preset": "exact",
  "bases": ["ZZ->ZZ", "XX->XX", "XZ->YY"],
  "output": "klm-cnot-ideal"
})"},
      {"paper-fig3", R"({
  "schema_version": 1,
  "name": "paper-fig3",
  "kind": "fixture-fidelity",
  "gate": "klm-cnot-ppbs",
  "fixture": "paper-fig3",
  "resamples": 1000,
  "seed": 2011,
  "output": "paper-fig3"
})"},
      {"hom-ppbs2", R"({
  "schema_version": 1,
  "name": "hom-ppbs2",
  "kind": "hom-scan",
  "hom": {"reflectivity": 0.23, "coherence_time": 1.0, "delay_from": -3.0, "delay_to": 3.0, "steps": 61},
  "output": "hom-ppbs2"
})"},
      {"noisy-overlap", R"({
  "schema_version": 1,
  "name": "noisy-overlap",
  "kind": "gate-fidelity",
  "gate": "klm-cnot-ppbs",
  "preset": "exact",
  "noise": {
    "overlaps": [
      {"photons": ["control", "A1"], "value": 0.95},
      {"photons": ["control", "A2"], "value": 0.95},
      {"photons": ["target", "A1"], "value": 0.95},
      {"photons": ["target", "A2"], "value": 0.95}
    ]
  },
  "output": "noisy-overlap"
})"},
      {"ns-balance", R"({
  "schema_version": 1,
  "name": "ns-balance",
  "kind": "ns-check",
  "gate": "ns-simplified",
  "preset": "exact",
  "output": "ns-balance"
})"},
      {"ppbs2-sweep", R"({
  "schema_version": 1,
  "name": "ppbs2-sweep",
  "kind": "sweep",
  "gate": "klm-cnot-ppbs",
  "sweep": {"parameter": "ppbs2.r_h", "from": 0.18, "to": 0.28, "steps": 11},
  "output": "ppbs2-sweep"
})"}};
  return scenarios;
}

Scenario load_scenario(const std::string& name_or_path) {
  const auto& bundled = bundled_scenarios();
  std::string text;
  if (auto it = bundled.find(name_or_path); it != bundled.end()) {
    text = it->second;
  } else {
    std::ifstream in(name_or_path, std::ios::binary);
    if (!in) {
      std::vector<std::string> names;
      for (const auto& [n, _] : bundled) names.push_back(n);
      throw SchemaError("scenario: '" + name_or_path + "' is neither a readable file nor a bundled scenario (" +
                        join(names) + ")");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("scenario: not valid JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

std::array<TruthTable, 3> fixture_tables(const std::string& name) {
  if (name != "paper-fig3") throw SchemaError("fixture: unknown fixture '" + name + "'; expected paper-fig3");
  // Rows 00, 01, 10, 11; correct cells give 0.87, 0.88 and 0.81 on average.
  const std::array<Matrix4i, 3> counts = [] {
    std::array<Matrix4i, 3> c;
    c[0] << 264, 30, 4, 2,  //
        33, 258, 3, 6,      //
        3, 5, 31, 261,      //
        4, 2, 261, 33;
    c[1] << 66, 1, 7, 1,  //
        1, 8, 1, 65,      //
        7, 0, 67, 1,      //
        1, 66, 0, 8;
    c[2] << 41, 10, 9, 40,  //
        10, 40, 40, 10,     //
        9, 41, 41, 9,       //
        40, 10, 9, 41;
    return c;
  }();
  const auto pairs = standard_basis_pairs();
  std::array<TruthTable, 3> out;
  for (std::size_t k = 0; k < 3; ++k) {
    out[k].input = pairs[k].first;
    out[k].output = pairs[k].second;
    out[k].counts = counts[k];
    for (int r = 0; r < 4; ++r) {
      const double total = static_cast<double>(counts[k].row(r).sum());
      for (int c = 0; c < 4; ++c) out[k].probabilities(r, c) = static_cast<double>(counts[k](r, c)) / total;
    }
  }
  return out;
}

GateBundle scenario_gate(const Scenario& s) {
  GateBundle bundle = build_gate(s.gate, s.preset, s.variant);
  if (s.circuit) bundle.circuit = *s.circuit;
  for (const auto& [key, value] : s.overrides) {
    try {
      bundle.circuit.set_parameter(key, value);
    } catch (const CircuitError& e) {
      throw SchemaError("overrides." + key + ": " + e.what());
    }
  }
  return bundle;
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

json report_to_json(const FidelityReport& r) {
  json doc = {{"f_zz_zz", num(r.f_zz)},       {"f_xx_xx", num(r.f_xx)},     {"f_xz_yy", num(r.f_xzyy)},
              {"f_p", num(r.f_p)},            {"f_avg", num(r.f_avg)},      {"eta_t", num(r.chi.eta_t)},
              {"eta_c", num(r.chi.eta_c)},    {"eta_ct", num(r.chi.eta_ct)},
              {"entanglement_capable", r.entanglement_capable}};
  if (r.uncertainties) {
    const auto& u = *r.uncertainties;
    doc["uncertainties"] = {{"f_zz_zz", num(u.f_zz)}, {"f_xx_xx", num(u.f_xx)}, {"f_xz_yy", num(u.f_xzyy)},
                            {"f_p", num(u.f_p)},      {"f_avg", num(u.f_avg)}};
  }
  if (r.count_weighted) {
    const auto& c = *r.count_weighted;
    doc["count_weighted"] = {{"f_zz_zz", num(c[0])}, {"f_xx_xx", num(c[1])}, {"f_xz_yy", num(c[2])}};
  }
  return doc;
}

namespace {

std::string table_csv(const TruthTable& t) {
  std::ostringstream out;
  write_truth_table_csv(out, t);
  return out.str();
}

std::string counts_csv(const TruthTable& t) {
  std::ostringstream out;
  out << "input,00,01,10,11\n";
  for (int r = 0; r < 4; ++r) {
    out << (r >> 1) << (r & 1);
    for (int c = 0; c < 4; ++c) out << ',' << (*t.counts)(r, c);
    out << '\n';
  }
  return out.str();
}

std::string table_stem(const TruthTable& t) { return t.input.label() + "_" + t.output.label(); }

void check_photon_names(const Scenario& s, const GateBundle& bundle) {
  const auto names = photon_names(bundle);
  std::size_t i = 0;
  for (const auto& [pair, _] : s.noise.overlaps.entries()) {
    for (const auto& n : {pair.first, pair.second}) {
      if (std::find(names.begin(), names.end(), n) == names.end()) {
        throw SchemaError(indexed("noise.overlaps", i) + ": unknown photon '" + n + "'; expected one of " +
                          join(names));
      }
    }
    ++i;
  }
}

const CnotEncoding& require_cnot(const Scenario& s, const GateBundle& bundle) {
  if (!bundle.encoding) {
    throw SchemaError("gate: '" + s.gate + "' is not a CNOT gate; expected klm-cnot-dualrail, klm-cnot-ppbs");
  }
  return *bundle.encoding;
}

std::optional<std::size_t> standard_index(const std::pair<BasisPair, BasisPair>& b) {
  const auto pairs = standard_basis_pairs();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (pairs[k] == b) return k;
  }
  return std::nullopt;
}

json gate_summary(const GateBundle& bundle) {
  const ConditionalMap map = conditional_map(bundle.circuit, bundle.herald, logical_encoding(bundle));
  const Proportionality p = proportionality_check(map, cnot_matrix());
  json success = json::array();
  for (double v : map.success) success.push_back(num(v));
  return {{"gate", bundle.name},
          {"scale_abs2", num(std::norm(p.scale))},
          {"deviation", num(p.deviation)},
          {"max_leakage", num(p.max_leakage)},
          {"success", success}};
}

void table_artifacts(Artifacts& out, const TruthTable& t) {
  out["truth_" + table_stem(t) + ".csv"] = table_csv(t);
  if (t.counts) out["counts_" + table_stem(t) + ".csv"] = counts_csv(t);
}

Artifacts run_gate_fidelity(const Scenario& s, Scenario& resolved) {
  const GateBundle bundle = scenario_gate(s);
  const CnotEncoding& enc = require_cnot(s, bundle);
  check_photon_names(s, bundle);
  resolved.circuit = bundle.circuit;
  TruthTableOptions opts;
  opts.noise = s.noise;
  opts.detector = s.detector;
  Artifacts out;
  std::array<std::optional<TruthTable>, 3> standard;
  for (std::size_t k = 0; k < s.bases.size(); ++k) {
    const auto& [in, outb] = s.bases[k];
    TruthTable t = truth_table(bundle, in, outb, opts);
    if (s.trials > 0) t = sample_table(t, s.trials, *s.seed + k);
    table_artifacts(out, t);
    if (auto idx = standard_index(s.bases[k])) standard[*idx] = t;
  }
  out["gate.json"] = dump_json(gate_summary(bundle));
  if (standard[0] && standard[1] && standard[2]) {
    std::array<TruthTable, 3> tables{*standard[0], *standard[1], *standard[2]};
    std::array<TruthTable, 3> ideals;
    const auto pairs = standard_basis_pairs();
    for (std::size_t k = 0; k < 3; ++k) ideals[k] = ideal_table(enc, pairs[k].first, pairs[k].second);
    const int resamples = s.trials > 0 ? s.resamples : 0;
    out["report.json"] = dump_json(report_to_json(fidelity_report(tables, ideals, resamples, s.seed.value_or(0))));
  }
  return out;
}

Artifacts run_fixture_fidelity(const Scenario& s, Scenario& resolved) {
  const GateBundle bundle = scenario_gate(s);
  const CnotEncoding& enc = require_cnot(s, bundle);
  resolved.circuit = bundle.circuit;
  const auto tables = fixture_tables(s.fixture);
  std::array<TruthTable, 3> ideals;
  Artifacts out;
  for (std::size_t k = 0; k < 3; ++k) {
    ideals[k] = ideal_table(enc, tables[k].input, tables[k].output);
    table_artifacts(out, tables[k]);
  }
  out["report.json"] = dump_json(report_to_json(fidelity_report(tables, ideals, s.resamples, s.seed.value_or(0))));
  return out;
}

std::vector<double> grid(double from, double to, int steps) {
  std::vector<double> xs;
  for (int i = 0; i < steps; ++i) xs.push_back(steps == 1 ? from : from + (to - from) * i / (steps - 1));
  return xs;
}

Artifacts run_hom_scan(const Scenario& s) {
  const auto delays = grid(s.hom.delay_from, s.hom.delay_to, s.hom.steps);
  std::ostringstream csv;
  csv << "delay,overlap,coincidence_simulated,coincidence_analytic,visibility_analytic\n";
  for (const auto& p : hom_scan(s.hom.reflectivity, delays, s.hom.coherence_time)) {
    csv << format_number(p.delay) << ',' << format_number(p.overlap) << ',' << format_number(p.coincidence_simulated)
        << ',' << format_number(p.coincidence_analytic) << ',' << format_number(p.visibility_analytic) << '\n';
  }
  return {{"hom_scan.csv", csv.str()}};
}

struct NsMetrics {
  std::array<double, 3> amplitudes{};
  double success = 0.0;
  double balance_residual = 0.0;
};

NsMetrics ns_metrics(const GateBundle& bundle) {
  const auto amps = ns_heralded_amplitudes(bundle);
  NsMetrics m;
  for (std::size_t i = 0; i < 3; ++i) m.amplitudes[i] = amps[i].real();
  m.success = std::norm(amps[0]);
  m.balance_residual = std::max(std::abs(amps[1] - amps[0]), std::abs(amps[2] + amps[0]));
  return m;
}

Artifacts run_ns_check(const Scenario& s, Scenario& resolved) {
  const GateBundle bundle = scenario_gate(s);
  if (bundle.encoding) {
    throw SchemaError("gate: '" + s.gate + "' is not an NS gate; expected ns-simplified, ns-original");
  }
  resolved.circuit = bundle.circuit;
  const NsMetrics m = ns_metrics(bundle);
  json doc = {{"gate", bundle.name},
              {"amplitudes", {num(m.amplitudes[0]), num(m.amplitudes[1]), num(m.amplitudes[2])}},
              {"success_probability", num(m.success)},
              {"balance_residual", num(m.balance_residual)}};
  if (s.gate == "ns-simplified") {
    const NsBalance balance = solve_ns_balance();
    doc["balanced_reflectivity"] = num(balance.reflectivity);
    doc["loss_transmissivity"] = num(balance.transmissivity);
  } else {
    const NsOriginalSolution sol = solve_ns_original();
    doc["solved_reflectivities"] = {num(sol.reflectivities[0]), num(sol.reflectivities[1]), num(sol.reflectivities[2])};
    doc["solver_residual"] = num(sol.residual);
  }
  return {{"ns_check.json", dump_json(doc)}};
}

std::vector<std::pair<std::string, double>> sweep_point(const Scenario& s, double value) {
  GateBundle bundle = scenario_gate(s);
  bundle.circuit.set_parameter(s.sweep.parameter, value);
  if (!bundle.encoding) {
    const NsMetrics m = ns_metrics(bundle);
    return {{"a0", m.amplitudes[0]},
            {"a1", m.amplitudes[1]},
            {"a2", m.amplitudes[2]},
            {"success", m.success},
            {"balance_residual", m.balance_residual}};
  }
  const ConditionalMap map = conditional_map(bundle.circuit, bundle.herald, logical_encoding(bundle));
  const Proportionality p = proportionality_check(map, cnot_matrix());
  const auto [lo, hi] = std::minmax_element(map.success.begin(), map.success.end());
  return {{"deviation", p.deviation},
          {"scale_abs2", std::norm(p.scale)},
          {"success_min", *lo},
          {"success_max", *hi},
          {"max_leakage", p.max_leakage}};
}

Artifacts run_sweep(const Scenario& s, Scenario& resolved, int jobs) {
  {
    GateBundle probe = scenario_gate(s);
    try {
      probe.circuit.parameter(s.sweep.parameter);
    } catch (const CircuitError& e) {
      throw SchemaError("sweep.parameter: " + std::string(e.what()));
    }
    for (const auto& [field, value] : {std::pair{"sweep.from", s.sweep.from}, std::pair{"sweep.to", s.sweep.to}}) {
      GateBundle check = probe;
      try {
        check.circuit.set_parameter(s.sweep.parameter, value);
      } catch (const CircuitError& e) {
        throw SchemaError(std::string(field) + ": " + e.what());
      }
    }
    resolved.circuit = probe.circuit;
  }
  const auto xs = grid(s.sweep.from, s.sweep.to, s.sweep.steps);
  std::vector<std::vector<std::pair<std::string, double>>> rows(xs.size());
  std::vector<std::exception_ptr> errors(xs.size());
  const int n = static_cast<int>(xs.size());
#pragma omp parallel for num_threads(std::max(jobs, 1)) schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      rows[static_cast<std::size_t>(i)] = sweep_point(s, xs[static_cast<std::size_t>(i)]);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::ostringstream csv;
  csv << "parameter,metric,value\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (const auto& [metric, value] : rows[i]) {
      csv << format_number(xs[i]) << ',' << metric << ',' << format_number(value) << '\n';
    }
  }
  return {{"sweep.csv", csv.str()}};
}

}  // namespace

Artifacts run_scenario(const Scenario& s, const RunOptions& options) {
  Scenario resolved = s;
  Artifacts out;
  switch (s.kind) {
    case ScenarioKind::kGateFidelity:
      out = run_gate_fidelity(s, resolved);
      break;
    case ScenarioKind::kFixtureFidelity:
      out = run_fixture_fidelity(s, resolved);
      break;
    case ScenarioKind::kHomScan:
      out = run_hom_scan(s);
      break;
    case ScenarioKind::kNsCheck:
      out = run_ns_check(s, resolved);
      break;
    case ScenarioKind::kSweep:
      out = run_sweep(s, resolved, options.jobs);
      break;
  }
  out["manifest.json"] = dump_json(scenario_to_json(resolved));
  return out;
}

void write_artifacts(const Artifacts& artifacts, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  for (const auto& [name, contents] : artifacts) {
    std::ofstream f(directory / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (directory / name).string());
    f << contents;
  }
}

}  // namespace klm
