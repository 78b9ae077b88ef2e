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

// klmsim: scenario runner and analysis subcommands.
//
// Exit codes: 0 success, 2 schema or usage error, 3 simulation error.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "klmsim/errors.hpp"
#include "klmsim/scenario.hpp"

namespace {

constexpr int kExitSchema = 2;
constexpr int kExitSimulation = 3;

struct Common {
  std::string gate;
  std::string basis = "ZZ";
  std::string preset = "exact";
  std::string variant = "original";
  std::optional<double> reflectivity;
  std::optional<double> overlap;
  std::int64_t trials = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
  std::string param;
  double from = 0.0;
  double to = 1.0;
  int steps = 11;
};

// Builds a scenario document from flags so that flag input goes through the
// same validation as scenario files.
nlohmann::json base_doc(const std::string& kind, const Common& c, const std::string& default_gate) {
  nlohmann::json doc = {{"schema_version", klm::kSchemaVersion},
                        {"name", kind},
                        {"kind", kind},
                        {"gate", c.gate.empty() ? default_gate : c.gate},
                        {"preset", c.preset},
                        {"variant", c.variant},
                        {"trials", c.trials}};
  if (c.seed) doc["seed"] = *c.seed;
  return doc;
}

void add_overlap(nlohmann::json& doc, const Common& c) {
  if (!c.overlap) return;
  const klm::Scenario probe = klm::parse_scenario(doc);
  const auto names = klm::photon_names(klm::scenario_gate(probe));
  nlohmann::json overlaps = nlohmann::json::array();
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t a = 2; a < names.size(); ++a) {
      overlaps.push_back({{"photons", {names[s], names[a]}}, {"value", *c.overlap}});
    }
  }
  doc["noise"] = {{"overlaps", overlaps}};
}

klm::Artifacts execute(const klm::Scenario& scenario, const Common& c) {
  const klm::Artifacts artifacts = klm::run_scenario(scenario, {c.jobs});
  if (!c.out.empty()) klm::write_artifacts(artifacts, c.out);
  return artifacts;
}

void add_gate_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--gate", c.gate, "Gate name (see `klmsim list`)");
  cmd->add_option("--preset", c.preset, "exact | paper-rounded");
  cmd->add_option("--variant", c.variant, "Dual-rail NS variant: original | simplified");
}

void add_out_flag(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Write all artifacts, including manifest.json, to this directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear-optics simulator for heralded KLM CNOT gates"};
  app.require_subcommand(1);
  Common c;
  std::string scenario_ref;

  auto* run = app.add_subcommand("run", "Run a scenario file or bundled scenario");
  run->add_option("scenario", scenario_ref, "Scenario JSON file or bundled name")->required();
  run->add_option("--out", c.out, "Output directory (default: the scenario's output field)");
  run->add_option("--jobs", c.jobs, "Worker threads for sweep points")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "List bundled scenarios and gates");

  auto* truth = app.add_subcommand("truth-table", "Print one truth table as CSV");
  add_gate_flags(truth, c);
  truth->add_option("--basis", c.basis, "Basis pair, e.g. ZZ, XX or XZ->YY");
  truth->add_option("--overlap", c.overlap, "Signal-ancilla wavepacket overlap");
  truth->add_option("--trials", c.trials, "Sampled events per input row");
  truth->add_option("--seed", c.seed, "Seed for count sampling");
  add_out_flag(truth, c);

  auto* report = app.add_subcommand("fidelity-report", "Print the fidelity report as JSON");
  add_gate_flags(report, c);
  report->add_option("--overlap", c.overlap, "Signal-ancilla wavepacket overlap");
  report->add_option("--trials", c.trials, "Sampled events per input row");
  report->add_option("--seed", c.seed, "Seed for count sampling and resampling");
  add_out_flag(report, c);

  auto* hom = app.add_subcommand("hom-scan", "Print a two-photon interference dip as CSV");
  hom->add_option("--reflectivity", c.reflectivity, "Beamsplitter reflectivity (default 0.23)");
  hom->add_option("--from", c.from, "First delay in coherence times")->default_val(-3.0);
  hom->add_option("--to", c.to, "Last delay in coherence times")->default_val(3.0);
  hom->add_option("--steps", c.steps, "Grid points")->default_val(61);
  add_out_flag(hom, c);

  auto* ns = app.add_subcommand("ns-check", "Print NS balance point, residual and success probability");
  add_gate_flags(ns, c);
  ns->add_option("--reflectivity", c.reflectivity, "Override the NS beamsplitter reflectivity");
  add_out_flag(ns, c);

  auto* sweep = app.add_subcommand("sweep", "Vary one element parameter and print metrics as CSV");
  add_gate_flags(sweep, c);
  sweep->add_option("--param", c.param, "Parameter as <element>.<key>, e.g. ppbs2.r_h")->required();
  sweep->add_option("--from", c.from, "First value")->required();
  sweep->add_option("--to", c.to, "Last value")->required();
  sweep->add_option("--steps", c.steps, "Grid points")->default_val(11);
  sweep->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
  add_out_flag(sweep, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitSchema;
  }

  try {
    if (*list) {
      std::cout << "scenarios:\n";
      for (const auto& [name, _] : klm::bundled_scenarios()) std::cout << "  " << name << '\n';
      std::cout << "gates:\n";
      for (const auto& name : klm::gate_names()) std::cout << "  " << name << '\n';
    } else if (*run) {
      klm::Scenario scenario = klm::load_scenario(scenario_ref);
      if (c.out.empty()) c.out = scenario.output;
      const auto artifacts = execute(scenario, c);
      for (const auto& [name, _] : artifacts) std::cout << (std::filesystem::path(c.out) / name).string() << '\n';
    } else if (*truth) {
      auto doc = base_doc("gate-fidelity", c, "klm-cnot-ppbs");
      doc["bases"] = {c.basis};
      add_overlap(doc, c);
      const auto artifacts = execute(klm::parse_scenario(doc), c);
      for (const auto& [name, contents] : artifacts) {
        if (name.rfind("truth_", 0) == 0) std::cout << contents;
      }
    } else if (*report) {
      auto doc = base_doc("gate-fidelity", c, "klm-cnot-ppbs");
      add_overlap(doc, c);
      if (c.trials > 0) doc["resamples"] = 1000;
      std::cout << execute(klm::parse_scenario(doc), c).at("report.json");
    } else if (*hom) {
      auto doc = base_doc("hom-scan", c, "klm-cnot-ppbs");
      doc["hom"] = {{"reflectivity", c.reflectivity.value_or(0.23)}, {"delay_from", c.from}, {"delay_to", c.to},
                    {"steps", c.steps}};
      std::cout << execute(klm::parse_scenario(doc), c).at("hom_scan.csv");
    } else if (*ns) {
      auto doc = base_doc("ns-check", c, "ns-simplified");
      if (c.reflectivity) {
        const std::string element = doc["gate"] == "ns-original" ? "ns.bs2.r" : "ns.bs.r";
        doc["overrides"] = {{element, *c.reflectivity}};
      }
      const auto result = nlohmann::json::parse(execute(klm::parse_scenario(doc), c).at("ns_check.json"));
      for (auto it = result.begin(); it != result.end(); ++it) std::cout << it.key() << ": " << it->dump() << '\n';
    } else if (*sweep) {
      auto doc = base_doc("sweep", c, "klm-cnot-ppbs");
      doc["sweep"] = {{"parameter", c.param}, {"from", c.from}, {"to", c.to}, {"steps", c.steps}};
      std::cout << execute(klm::parse_scenario(doc), c).at("sweep.csv");
    }
  } catch (const klm::SchemaError& e) {
    std::cerr << "klmsim: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::invalid_argument& e) {
    std::cerr << "klmsim: " << e.what() << '\n';
    return kExitSchema;
  } catch (const klm::SimulationError& e) {
    std::cerr << "klmsim: simulation error: " << e.what() << '\n';
    return kExitSimulation;
  } catch (const std::exception& e) {
    std::cerr << "klmsim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
