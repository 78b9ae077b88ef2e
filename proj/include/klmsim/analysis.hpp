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

#ifndef KLMSIM_ANALYSIS_HPP
#define KLMSIM_ANALYSIS_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "klmsim/gates.hpp"
#include "klmsim/measure.hpp"
#include "klmsim/noise.hpp"

namespace klm {

enum class Basis { kZ, kX, kY };
enum class Qubit { kControl, kTarget };

char to_char(Basis basis);

/// Basis of the control followed by the basis of the target, e.g. "XZ".
struct BasisPair {
  Basis control = Basis::kZ;
  Basis target = Basis::kZ;

  std::string label() const;
  bool operator==(const BasisPair&) const = default;
};

std::optional<BasisPair> parse_basis_pair(std::string_view label);

/// Physical amplitudes, on (qubit.modes[0], qubit.modes[1]), of the two
/// eigenstates. Uses the encoding's explicit physical bases when present and
/// otherwise derives them from the logical states.
std::array<Eigen::Vector2cd, 2> basis_vectors(Basis basis, Qubit qubit, const CnotEncoding& encoding);

/// The same eigenstates as one-photon states on the qubit's two modes.
std::array<StateVector, 2> basis_states(Basis basis, Qubit qubit, const CnotEncoding& encoding);

using Matrix4i = Eigen::Matrix<std::int64_t, 4, 4>;

/// Rows are input products |b_c b_t>, columns output products, both indexed
/// 2 * control + target.
struct TruthTable {
  BasisPair input;
  BasisPair output;
  Eigen::Matrix4d probabilities = Eigen::Matrix4d::Zero();
  /// Fourfold probabilities before background subtraction and normalization.
  std::optional<Eigen::Matrix4d> raw;
  std::optional<Matrix4i> counts;
};

/// E (CNOT) E^dagger on the physical two-qubit space, E = E_control (x) E_target.
Eigen::Matrix4cd ideal_physical_gate(const CnotEncoding& encoding);

/// Truth table of the mixture sum_n w_n U_n rho U_n^dagger of physical
/// unitaries, evaluated on product basis states.
TruthTable mixture_table(std::span<const std::pair<double, Eigen::Matrix4cd>> terms,
                         const CnotEncoding& encoding, BasisPair input, BasisPair output);

TruthTable ideal_table(const CnotEncoding& encoding, BasisPair input, BasisPair output);

struct DoublePairSpec {
  bool enabled = false;
  /// Weight of the |2>_A1 |2>_A2 term relative to the signal term.
  double rate = 0.0;
};

struct NoiseModel {
  OverlapSpec overlaps;
  PerturbationSpec perturbation;
  DoublePairSpec double_pair;
};

struct TruthTableOptions {
  NoiseModel noise;
  DetectorModel detector{DetectorKind::kThreshold, 1.0};
};

/// Names of the input photons as used by OverlapSpec: "control", "target"
/// and one entry per ancilla port path.
std::vector<std::string> photon_names(const GateBundle& bundle);

/// Fourfold coincidence (DC, DT, DA1, DA2) probabilities for every input and
/// output product; with a double-pair term the raw table is
/// signal + rate * background and the reported table has it subtracted.
/// Rows are normalized over post-selected events.
TruthTable truth_table(const GateBundle& bundle, BasisPair input, BasisPair output,
                       const TruthTableOptions& options = {});

/// Fourfold probabilities, per output product, for |2>_A1,H |2>_A2,H with the
/// signal inputs empty.
Eigen::Vector4d double_pair_background(const GateBundle& bundle, BasisPair output,
                                       const TruthTableOptions& options = {});

/// Equal-weight mean over inputs of the probability on ideal outcomes
/// (cells where the ideal table exceeds 1e-9). Throws std::invalid_argument on
/// a basis mismatch.
double classical_fidelity(const TruthTable& table, const TruthTable& ideal);

/// Correct events over all events, from raw counts.
double count_weighted_fidelity(const Matrix4i& counts, const TruthTable& ideal);

/// (F_zz + F_xx + F_xzyy - 1) / 2.
double process_fidelity(double f_zz, double f_xx, double f_xzyy);

/// (d F_p + 1) / (d + 1).
double average_gate_fidelity(double f_p, int dimension = 4);

struct ChiDiagonal {
  double f_p = 1.0;
  double eta_t = 0.0;
  double eta_c = 0.0;
  double eta_ct = 0.0;

  double sum() const { return f_p + eta_t + eta_c + eta_ct; }
  /// Throws ModelError unless all weights are >= -1e-9 and sum to 1 +- 1e-9.
  void validate() const;
};

struct PredictedFidelities {
  double f_zz = 0.0;
  double f_xx = 0.0;
  double f_xzyy = 0.0;
};

/// U_gate = G, U_T = G Z_C, U_C = G X_T, U_CT = G Z_C X_T (logical Paulis)
/// mapped to the physical space; for the polarization encoding these are
/// diag(1,1,1,-1), diag(1,1,-1,1), diag(1,-1,1,1), diag(1,-1,-1,-1) in
/// (VV, VH, HV, HH).
std::array<Eigen::Matrix4cd, 4> dephasing_operators(const CnotEncoding& encoding);

/// sum_n chi_n U_n rho U_n^dagger.
Eigen::Matrix4cd dephasing_forward(const ChiDiagonal& chi, const Eigen::Matrix4cd& rho,
                                   const CnotEncoding& encoding);

/// (F_p + eta_T, F_p + eta_C, F_p + eta_CT).
PredictedFidelities dephasing_predict(const ChiDiagonal& chi);

/// Classical fidelities from truth tables of the dephasing process.
PredictedFidelities dephasing_simulate(const ChiDiagonal& chi, const CnotEncoding& encoding);

/// Inverts the prediction. Throws ModelError on a weight below -1e-9.
ChiDiagonal dephasing_fit(double f_zz, double f_xx, double f_xzyy);

/// <<G| J(E) |G>> / d^2 with J(E) = sum_n w_n |U_n>><<U_n| the Choi matrix.
double choi_process_fidelity(std::span<const std::pair<double, Eigen::Matrix4cd>> terms,
                             const Eigen::Matrix4cd& target);

/// 2RT / (R^2 + T^2). Throws std::invalid_argument for R outside (0, 1).
double hom_visibility(double reflectivity);

/// V_exp / V_th.
double relative_visibility(double measured, double reflectivity);

struct HomPoint {
  double delay = 0.0;
  double overlap = 0.0;
  double coincidence_simulated = 0.0;
  double coincidence_analytic = 0.0;
  double visibility_analytic = 0.0;
};

std::vector<HomPoint> hom_scan(double reflectivity, std::span<const double> delays,
                               double coherence_time);

struct Uncertainties {
  double f_zz = 0.0;
  double f_xx = 0.0;
  double f_xzyy = 0.0;
  double f_p = 0.0;
  double f_avg = 0.0;
};

/// Standard deviations over `resamples` multinomial resamplings of each row of
/// the three count tables (ZZ, XX, XZ->YY).
Uncertainties bootstrap_uncertainties(const std::array<TruthTable, 3>& tables,
                                      const std::array<TruthTable, 3>& ideals, int resamples,
                                      std::uint64_t seed);

/// Draws `trials_per_row` events per row of `table` and attaches them as
/// counts; probabilities are replaced by the row frequencies.
TruthTable sample_table(const TruthTable& table, std::int64_t trials_per_row, std::uint64_t seed);

struct FidelityReport {
  double f_zz = 0.0;
  double f_xx = 0.0;
  double f_xzyy = 0.0;
  double f_p = 0.0;
  double f_avg = 0.0;
  ChiDiagonal chi;
  bool entanglement_capable = false;
  std::optional<Uncertainties> uncertainties;
  /// Count-weighted ratios (ZZ, XX, XZ->YY) when counts are available.
  std::optional<std::array<double, 3>> count_weighted;
};

/// The three standard basis pairs (ZZ->ZZ, XX->XX, XZ->YY).
std::array<std::pair<BasisPair, BasisPair>, 3> standard_basis_pairs();

/// Fidelities, dephasing fit and, if every table carries counts and
/// `resamples` > 0, bootstrap uncertainties.
FidelityReport fidelity_report(const std::array<TruthTable, 3>& tables,
                               const std::array<TruthTable, 3>& ideals, int resamples = 0,
                               std::uint64_t seed = 0);

/// Header "input,00,01,10,11", twelve significant digits, LF line endings.
void write_truth_table_csv(std::ostream& out, const TruthTable& table);

/// printf("%.12g").
std::string format_number(double value);

}  // namespace klm

#endif  // KLMSIM_ANALYSIS_HPP
