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

#ifndef KLMSIM_GATES_HPP
#define KLMSIM_GATES_HPP

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "klmsim/circuit.hpp"
#include "klmsim/fock.hpp"
#include "klmsim/measure.hpp"

namespace klm {

/// Heralded amplitudes of the one-beamsplitter NS gate for signal |0>, |1>, |2>.
struct NsAmplitudes {
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
};

/// (sqrt(R), 1 - 2R, sqrt(R)(3R - 2)).
NsAmplitudes ns_component_amplitudes(double reflectivity);

/// Reflectivity and output transmissivity that equalize |a0|, |a1|, |a2|.
struct NsBalance {
  double reflectivity = 0.0;
  double transmissivity = 0.0;
};

/// Smaller root of 7R^2 - 6R + 1 = 0, i.e. R* = (3 - sqrt 2)/7, and
/// eta* = 1/(2 - 3R*).
NsBalance solve_ns_balance();

struct NsOriginalSolution {
  std::array<double, 3> reflectivities{};
  double residual = 0.0;
  int iterations = 0;
};

/// Reflectivities (R1, R2, R3) of the three-beamsplitter NS gate such that the
/// heralded map is diag(1, 1, -1)/2. Gauss-Newton with a pseudo-inverse step
/// from symmetric seeds. Throws SimulationError if no seed converges to 1e-12.
NsOriginalSolution solve_ns_original();

/// Heralded (signal |0>, |1>, |2>) amplitudes of the three-beamsplitter gate.
std::array<double, 3> ns_original_amplitudes(const std::array<double, 3>& reflectivities);

/// Parameter presets: "exact" uses (R*, eta*), "paper-rounded" uses 0.23/0.76.
enum class Preset { kExact, kPaperRounded };

std::optional<Preset> parse_preset(std::string_view name);
std::string_view to_string(Preset preset);
NsBalance preset_parameters(Preset preset);

/// Logical qubit on two physical modes: column k of `logical` is logical |k>
/// in the (modes[0], modes[1]) basis.
struct QubitEncoding {
  std::array<Port, 2> modes;
  Eigen::Matrix2cd logical = Eigen::Matrix2cd::Identity();
  /// Optional physical Z, X, Y eigenstates (columns), in that order.
  std::optional<std::array<Eigen::Matrix2cd, 3>> physical_bases;
};

struct CnotEncoding {
  QubitEncoding control;
  QubitEncoding target;
};

/// A circuit together with its ancilla photons (one per port), herald rule and,
/// for CNOT builders, the logical encoding.
struct GateBundle {
  std::string name;
  Circuit circuit;
  HeraldRule herald;
  std::vector<Port> ancillas;
  std::optional<CnotEncoding> encoding;
  /// Signal path of the NS builders.
  std::string signal;
};

enum class DualRailVariant { kOriginal, kSimplified };

/// Signal path "s", auxiliary path "a" with one photon, element "ns.bs"
/// (signal port negative) and, if `loss_transmissivity` is set, "ns.loss" on
/// the signal output.
GateBundle build_ns_simplified(double reflectivity, std::optional<double> loss_transmissivity);

/// Signal "s", upper auxiliary "a1" (one photon, herald 1), lower auxiliary
/// "a2" (vacuum, herald 0). Elements ns.bs1 (s, a2), ns.bs2 (s, a1),
/// ns.bs3 (s, a2), all signal port negative.
GateBundle build_ns_original(const std::array<double, 3>& reflectivities);

/// Paths C0, C1, T0, T1 and per-NS auxiliaries. Element order: bs3 (T0, T1),
/// bs1 (C1, T0), NS on C1 and on T0, bs2 (C1, T0), bs4 (T0, T1); all 50:50
/// with the first port negative.
GateBundle build_klm_cnot_dualrail(DualRailVariant variant, Preset preset = Preset::kExact);

struct PolarizationCnotParameters {
  double ppbs1_reflectivity_h = 0.5;
  double ppbs2_reflectivity_h = 0.0;
  double ppbs3_transmissivity_h = 1.0;
  /// Adds PHASE elements loop.c / loop.t between the two PPBS1 passes.
  bool loop_phases = true;
};

PolarizationCnotParameters polarization_cnot_parameters(Preset preset);

/// Paths C, T, A1, A2, each carrying H and V. Element order and orientation:
///   ppbs1.first  (C, T)   first port negative
///   ppbs2.c      (C, A1)  second port negative
///   ppbs2.t      (T, A2)  second port negative
///   loop.c, loop.t        phase 0 on C and T
///   ppbs1.second (C, T)   first port negative
///   ppbs3.c, ppbs3.t      H-only loss on C and T
///   wp.c, wp.t            phase pi on C.V and T.V
/// Ancilla photons A1.H and A2.H; herald exactly one photon on A1 and on A2.
/// Encoding: control |0> = V, |1> = H; target |0> = (H + V)/sqrt 2,
/// |1> = (V - H)/sqrt 2.
GateBundle build_klm_cnot_polarization(const PolarizationCnotParameters& params);

/// Gate names accepted by build_gate.
const std::vector<std::string>& gate_names();

/// Builds a named gate: "ns-simplified", "ns-original", "klm-cnot-dualrail",
/// "klm-cnot-ppbs". Throws std::invalid_argument listing the valid names.
GateBundle build_gate(std::string_view name, Preset preset = Preset::kExact,
                      DualRailVariant variant = DualRailVariant::kOriginal);

/// Standard CNOT in the |control target> basis, index 2c + t.
Eigen::Matrix4cd cnot_matrix();

/// One photon in the state `physical` (amplitudes on qubit.modes) at `slot`.
PhotonWavefunction qubit_photon(const ModeLayout& layout, const QubitEncoding& qubit,
                                const Eigen::Vector2cd& physical, int slot = 0);

/// Single photon on an ancilla port at `slot`.
PhotonWavefunction port_photon(const ModeLayout& layout, const Port& port, int slot = 0);

/// Logical inputs |c t> (ancillas included) and logical outputs on the
/// retained layout. Requires a CNOT bundle.
LogicalEncoding logical_encoding(const GateBundle& bundle);

/// Heralded amplitudes <n| herald(U |n>|ancillas>) for n = 0, 1, 2 of an NS
/// bundle.
std::array<Amplitude, 3> ns_heralded_amplitudes(const GateBundle& bundle);

}  // namespace klm

#endif  // KLMSIM_GATES_HPP
