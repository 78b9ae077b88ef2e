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

#ifndef KLMSIM_SCENARIO_HPP
#define KLMSIM_SCENARIO_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "klmsim/analysis.hpp"
#include "klmsim/gates.hpp"

namespace klm {

/// Scenario text that does not match the schema. The CLI maps it to exit 2.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

enum class ScenarioKind { kGateFidelity, kFixtureFidelity, kHomScan, kNsCheck, kSweep };

struct HomSettings {
  double reflectivity = 0.23;
  double coherence_time = 1.0;
  double delay_from = -3.0;
  double delay_to = 3.0;
  int steps = 61;
};

struct SweepSettings {
  std::string parameter;
  double from = 0.0;
  double to = 1.0;
  int steps = 11;
};

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::kGateFidelity;
  std::string gate = "klm-cnot-ppbs";
  DualRailVariant variant = DualRailVariant::kOriginal;
  Preset preset = Preset::kExact;
  /// Replaces the named gate's network; herald and encoding stay the gate's.
  std::optional<Circuit> circuit;
  /// "<selector>.<key>" -> absolute value, applied after the preset.
  std::map<std::string, double> overrides;
  DetectorModel detector{DetectorKind::kThreshold, 1.0};
  NoiseModel noise;
  std::vector<std::pair<BasisPair, BasisPair>> bases;
  std::int64_t trials = 0;
  std::optional<std::uint64_t> seed;
  int resamples = 0;
  std::string fixture;
  HomSettings hom;
  SweepSettings sweep;
  std::string output = "out";
};

/// Paths (loss paths omitted) and elements with kind, ports, parameters and
/// orientation. Ports are written "path" or "path.H" / "path.V".
nlohmann::json circuit_to_json(const Circuit& circuit);
Circuit circuit_from_json(const nlohmann::json& doc);

/// Validates every key; throws SchemaError naming the offending field.
Scenario parse_scenario(const nlohmann::json& doc);

/// Fully resolved form; parse_scenario(scenario_to_json(s)) reproduces s.
nlohmann::json scenario_to_json(const Scenario& scenario);

/// Named scenarios compiled into the binary, as JSON text.
const std::map<std::string, std::string>& bundled_scenarios();

/// Reads a bundled scenario by name, or else a JSON file by path.
Scenario load_scenario(const std::string& name_or_path);

/// Fixture count tables (ZZ->ZZ, XX->XX, XZ->YY); "paper-fig3" is the only
/// fixture.
std::array<TruthTable, 3> fixture_tables(const std::string& name);

/// The scenario's gate with preset and overrides applied.
GateBundle scenario_gate(const Scenario& scenario);

struct RunOptions {
  int jobs = 1;
};

/// Artifact file name -> exact file contents; always contains manifest.json.
using Artifacts = std::map<std::string, std::string>;

/// Executes the scenario. Throws SchemaError or SimulationError.
Artifacts run_scenario(const Scenario& scenario, const RunOptions& options = {});

void write_artifacts(const Artifacts& artifacts, const std::filesystem::path& directory);

/// Serialization helpers used by the CLI.
std::string dump_json(const nlohmann::json& doc);
nlohmann::json report_to_json(const FidelityReport& report);

}  // namespace klm

#endif  // KLMSIM_SCENARIO_HPP
