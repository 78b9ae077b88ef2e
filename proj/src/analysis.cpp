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

#include "klmsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>

#include "klmsim/errors.hpp"
#include "klmsim/evolve.hpp"

namespace klm {

namespace {

constexpr double kIdealSupport = 1e-9;

const Amplitude kI{0.0, 1.0};

Eigen::Vector4cd kron(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
  return {a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1)};
}

Eigen::Matrix4cd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  }
  return out;
}

const QubitEncoding& qubit_of(const CnotEncoding& enc, Qubit q) {
  return q == Qubit::kControl ? enc.control : enc.target;
}

Basis basis_from_char(char c, bool& ok) {
  ok = true;
  switch (c) {
    case 'Z':
      return Basis::kZ;
    case 'X':
      return Basis::kX;
    case 'Y':
      return Basis::kY;
    default:
      ok = false;
      return Basis::kZ;
  }
}

}  // namespace

char to_char(Basis basis) {
  switch (basis) {
    case Basis::kZ:
      return 'Z';
    case Basis::kX:
      return 'X';
    case Basis::kY:
      return 'Y';
  }
  return '?';
}

std::string BasisPair::label() const { return {to_char(control), to_char(target)}; }

std::optional<BasisPair> parse_basis_pair(std::string_view label) {
  if (label.size() != 2) return std::nullopt;
  bool ok_c = false, ok_t = false;
  const BasisPair out{basis_from_char(label[0], ok_c), basis_from_char(label[1], ok_t)};
  if (!ok_c || !ok_t) return std::nullopt;
  return out;
}

std::array<Eigen::Vector2cd, 2> basis_vectors(Basis basis, Qubit qubit, const CnotEncoding& encoding) {
  const QubitEncoding& q = qubit_of(encoding, qubit);
  if (q.physical_bases) {
    const Eigen::Matrix2cd& m = (*q.physical_bases)[static_cast<std::size_t>(basis)];
    return {m.col(0), m.col(1)};
  }
  const Eigen::Vector2cd l0 = q.logical.col(0), l1 = q.logical.col(1);
  const double h = 1.0 / std::sqrt(2.0);
  switch (basis) {
    case Basis::kZ:
      return {l0, l1};
    case Basis::kX:
      return {h * (l0 + l1), h * (l0 - l1)};
    case Basis::kY:
      return {h * (l0 + kI * l1), h * (l0 - kI * l1)};
  }
  return {l0, l1};
}

std::array<StateVector, 2> basis_states(Basis basis, Qubit qubit, const CnotEncoding& encoding) {
  const QubitEncoding& q = qubit_of(encoding, qubit);
  std::vector<ModeLabel> labels;
  for (const auto& port : q.modes) labels.push_back({port.path, port.pol.value_or(Polarization::kNone), 0});
  const ModeLayout layout(labels);
  const auto v = basis_vectors(basis, qubit, encoding);
  std::array<StateVector, 2> out{StateVector(layout, 1), StateVector(layout, 1)};
  for (std::size_t k = 0; k < 2; ++k) {
    out[k].add({1, 0}, v[k](0));
    out[k].add({0, 1}, v[k](1));
    out[k].prune();
  }
  return out;
}

Eigen::Matrix4cd ideal_physical_gate(const CnotEncoding& encoding) {
  const Eigen::Matrix4cd e = kron(encoding.control.logical, encoding.target.logical);
  return e * cnot_matrix() * e.adjoint();
}

namespace {

std::array<Eigen::Vector4cd, 4> product_states(const CnotEncoding& enc, BasisPair pair) {
  const auto c = basis_vectors(pair.control, Qubit::kControl, enc);
  const auto t = basis_vectors(pair.target, Qubit::kTarget, enc);
  return {kron(c[0], t[0]), kron(c[0], t[1]), kron(c[1], t[0]), kron(c[1], t[1])};
}

void clean(Eigen::Matrix4d& m) {
  for (Eigen::Index i = 0; i < 16; ++i) {
    if (std::abs(m(i)) < 1e-15) m(i) = 0.0;
  }
}

}  // namespace

TruthTable mixture_table(std::span<const std::pair<double, Eigen::Matrix4cd>> terms,
                         const CnotEncoding& encoding, BasisPair input, BasisPair output) {
  const auto in = product_states(encoding, input);
  const auto out = product_states(encoding, output);
  TruthTable t{input, output, Eigen::Matrix4d::Zero(), std::nullopt, std::nullopt};
  for (int k = 0; k < 4; ++k) {
    for (int j = 0; j < 4; ++j) {
      double p = 0.0;
      for (const auto& [w, u] : terms) p += w * std::norm(out[static_cast<std::size_t>(j)].dot(u * in[static_cast<std::size_t>(k)]));
      t.probabilities(k, j) = p;
    }
  }
  clean(t.probabilities);
  return t;
}

TruthTable ideal_table(const CnotEncoding& encoding, BasisPair input, BasisPair output) {
  const std::pair<double, Eigen::Matrix4cd> term{1.0, ideal_physical_gate(encoding)};
  return mixture_table(std::span(&term, 1), encoding, input, output);
}

std::vector<std::string> photon_names(const GateBundle& bundle) {
  std::vector<std::string> names = {"control", "target"};
  for (const auto& a : bundle.ancillas) names.push_back(a.path);
  return names;
}

namespace {

struct Prepared {
  Circuit circuit;
  Eigen::MatrixXd slots;
  ModeLayout layout;
};

const CnotEncoding& require_encoding(const GateBundle& bundle) {
  if (!bundle.encoding) throw LayoutError("gate '" + bundle.name + "' is not a two-qubit gate");
  return *bundle.encoding;
}

std::vector<PhotonSource> sources(const GateBundle& bundle, const Eigen::Vector2cd& control,
                                  const Eigen::Vector2cd& target) {
  const auto& enc = require_encoding(bundle);
  const auto names = photon_names(bundle);
  std::vector<PhotonSource> out;
  out.push_back({names[0], {{enc.control.modes[0], control(0)}, {enc.control.modes[1], control(1)}}});
  out.push_back({names[1], {{enc.target.modes[0], target(0)}, {enc.target.modes[1], target(1)}}});
  for (std::size_t a = 0; a < bundle.ancillas.size(); ++a) out.push_back({names[a + 2], {{bundle.ancillas[a], 1.0}}});
  return out;
}

Prepared prepare(const GateBundle& bundle, const TruthTableOptions& options) {
  const auto& enc = require_encoding(bundle);
  Circuit c = options.noise.perturbation.empty() ? bundle.circuit
                                                 : perturb_circuit(bundle.circuit, options.noise.perturbation);
  if (options.detector.efficiency < 1.0) {
    std::set<std::string> paths;
    for (const auto& p : enc.control.modes) paths.insert(p.path);
    for (const auto& p : enc.target.modes) paths.insert(p.path);
    for (const auto& d : bundle.herald.detections) {
      for (const auto& p : d.ports) paths.insert(p.path);
    }
    const std::vector<std::string> list(paths.begin(), paths.end());
    c = with_detector_efficiency(c, list, options.detector.efficiency);
  }
  // Gram matrix from photon names only.
  const auto probe = sources(bundle, Eigen::Vector2cd(1.0, 0.0), Eigen::Vector2cd(1.0, 0.0));
  Eigen::MatrixXd slots = slot_decomposition(options.noise.overlaps.gram(probe));
  Circuit slotted = c.with_slots(static_cast<int>(slots.cols()));
  ModeLayout layout = slotted.layout();
  return {std::move(slotted), std::move(slots), std::move(layout)};
}

// Analyzer rows are the conjugated output basis vectors, applied after the
// circuit on every slot of the control and target modes.
ModeUnitary analyzed_unitary(const Prepared& prep, const CnotEncoding& enc, BasisPair output) {
  ModeUnitary u = compile(prep.circuit);
  const auto n = static_cast<Eigen::Index>(u.modes());
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n);
  const std::array<std::pair<const QubitEncoding*, Basis>, 2> qubits = {
      std::pair{&enc.control, output.control}, std::pair{&enc.target, output.target}};
  for (std::size_t q = 0; q < 2; ++q) {
    const auto v = basis_vectors(qubits[q].second, q == 0 ? Qubit::kControl : Qubit::kTarget, enc);
    for (Eigen::Index s = 0; s < prep.slots.cols(); ++s) {
      std::array<Eigen::Index, 2> m{};
      for (std::size_t k = 0; k < 2; ++k) {
        const Port& port = qubits[q].first->modes[k];
        m[k] = static_cast<Eigen::Index>(
            prep.layout.index({port.path, port.pol.value_or(Polarization::kNone), static_cast<int>(s)}));
      }
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t l = 0; l < 2; ++l) a(m[i], m[l]) = std::conj(v[i](static_cast<Eigen::Index>(l)));
      }
    }
  }
  u.matrix = a * u.matrix;
  return u;
}

std::array<HeraldRule, 4> fourfold_rules(const GateBundle& bundle, const DetectorModel& detector) {
  const auto& enc = require_encoding(bundle);
  std::array<HeraldRule, 4> rules;
  for (int jc = 0; jc < 2; ++jc) {
    for (int jt = 0; jt < 2; ++jt) {
      HeraldRule& r = rules[static_cast<std::size_t>(2 * jc + jt)];
      r.detector = detector;
      r.postselect_no_loss = false;
      for (int k = 0; k < 2; ++k) {
        r.detections.push_back({"DC" + std::to_string(k), {enc.control.modes[static_cast<std::size_t>(k)]}, k == jc ? 1 : 0});
        r.detections.push_back({"DT" + std::to_string(k), {enc.target.modes[static_cast<std::size_t>(k)]}, k == jt ? 1 : 0});
      }
      for (const auto& d : bundle.herald.detections) r.detections.push_back(d);
    }
  }
  return rules;
}

Eigen::Vector4d background_row(const GateBundle& bundle, const Prepared& prep, const SectorTransfer* reuse,
                               const ModeUnitary& u, const std::array<HeraldRule, 4>& rules,
                               const OverlapSpec& overlaps) {
  std::vector<PhotonSource> photons;
  for (const auto& a : bundle.ancillas) {
    photons.push_back({a.path, {{a, 1.0}}});
    photons.push_back({a.path, {{a, 1.0}}});
  }
  // Sub-Gram of the signal photons' Gram matrix, so its rank fits the slots.
  const Eigen::MatrixXd own = slot_decomposition(overlaps.gram(photons));
  Eigen::MatrixXd slots = Eigen::MatrixXd::Zero(own.rows(), prep.slots.cols());
  slots.leftCols(own.cols()) = own;
  const StateVector in = slotted_product(prep.layout, photons, slots).normalized();
  const StateVector out = (reuse && reuse->photons() == in.photons()) ? reuse->apply(in) : apply_unitary(u, in);
  Eigen::Vector4d row;
  for (std::size_t j = 0; j < 4; ++j) row(static_cast<Eigen::Index>(j)) = outcome_probability(out, rules[j]);
  return row;
}

}  // namespace

Eigen::Vector4d double_pair_background(const GateBundle& bundle, BasisPair output,
                                       const TruthTableOptions& options) {
  const Prepared prep = prepare(bundle, options);
  const ModeUnitary u = analyzed_unitary(prep, require_encoding(bundle), output);
  return background_row(bundle, prep, nullptr, u, fourfold_rules(bundle, options.detector),
                        options.noise.overlaps);
}

TruthTable truth_table(const GateBundle& bundle, BasisPair input, BasisPair output,
                       const TruthTableOptions& options) {
  const auto& enc = require_encoding(bundle);
  const Prepared prep = prepare(bundle, options);
  const ModeUnitary u = analyzed_unitary(prep, enc, output);
  const int photons = 2 + static_cast<int>(bundle.ancillas.size());
  const SectorTransfer transfer(u, photons);
  const auto rules = fourfold_rules(bundle, options.detector);
  const auto c = basis_vectors(input.control, Qubit::kControl, enc);
  const auto t = basis_vectors(input.target, Qubit::kTarget, enc);

  Eigen::Matrix4d signal;
  for (int k = 0; k < 4; ++k) {
    const auto src = sources(bundle, c[static_cast<std::size_t>(k / 2)], t[static_cast<std::size_t>(k % 2)]);
    const StateVector out = transfer.apply(slotted_product(prep.layout, src, prep.slots));
    for (std::size_t j = 0; j < 4; ++j) signal(k, static_cast<Eigen::Index>(j)) = outcome_probability(out, rules[j]);
  }

  TruthTable table{input, output, signal, std::nullopt, std::nullopt};
  if (options.noise.double_pair.enabled) {
    const Eigen::Vector4d bg = background_row(bundle, prep, &transfer, u, rules, options.noise.overlaps);
    const double rate = options.noise.double_pair.rate;
    Eigen::Matrix4d raw = signal;
    for (int k = 0; k < 4; ++k) raw.row(k) += rate * bg.transpose();
    table.raw = raw;
    table.probabilities = raw;
    for (int k = 0; k < 4; ++k) table.probabilities.row(k) -= rate * bg.transpose();
  } else {
    table.raw = signal;
  }
  for (int k = 0; k < 4; ++k) {
    table.probabilities.row(k) = table.probabilities.row(k).cwiseMax(0.0);
    const double sum = table.probabilities.row(k).sum();
    if (!(sum > 0.0)) {
      throw ModelError("no fourfold coincidences for input " + std::to_string(k / 2) + std::to_string(k % 2) +
                       " in " + input.label() + "->" + output.label());
    }
    table.probabilities.row(k) /= sum;
  }
  clean(table.probabilities);
  return table;
}

namespace {

void check_match(const TruthTable& a, const TruthTable& ideal) {
  if (!(a.input == ideal.input) || !(a.output == ideal.output)) {
    throw std::invalid_argument("truth table " + a.input.label() + "->" + a.output.label() +
                                " compared against " + ideal.input.label() + "->" + ideal.output.label());
  }
}

}  // namespace

double classical_fidelity(const TruthTable& table, const TruthTable& ideal) {
  check_match(table, ideal);
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    for (int j = 0; j < 4; ++j) {
      if (ideal.probabilities(k, j) > kIdealSupport) total += table.probabilities(k, j);
    }
  }
  return total / 4.0;
}

double count_weighted_fidelity(const Matrix4i& counts, const TruthTable& ideal) {
  std::int64_t correct = 0, all = 0;
  for (int k = 0; k < 4; ++k) {
    for (int j = 0; j < 4; ++j) {
      all += counts(k, j);
      if (ideal.probabilities(k, j) > kIdealSupport) correct += counts(k, j);
    }
  }
  if (all == 0) throw std::invalid_argument("count table is empty");
  return static_cast<double>(correct) / static_cast<double>(all);
}

double process_fidelity(double f_zz, double f_xx, double f_xzyy) { return (f_zz + f_xx + f_xzyy - 1.0) / 2.0; }

double average_gate_fidelity(double f_p, int dimension) {
  return (dimension * f_p + 1.0) / (dimension + 1.0);
}

void ChiDiagonal::validate() const {
  for (double w : {f_p, eta_t, eta_c, eta_ct}) {
    if (w < -1e-9) throw ModelError("process-matrix weight " + format_number(w) + " is negative");
  }
  if (std::abs(sum() - 1.0) > 1e-9) {
    throw ModelError("process-matrix weights sum to " + format_number(sum()) + ", not 1");
  }
}

std::array<Eigen::Matrix4cd, 4> dephasing_operators(const CnotEncoding& encoding) {
  Eigen::Matrix2cd z, x, id = Eigen::Matrix2cd::Identity();
  z << 1.0, 0.0, 0.0, -1.0;
  x << 0.0, 1.0, 1.0, 0.0;
  const Eigen::Matrix4cd e = kron(encoding.control.logical, encoding.target.logical);
  const Eigen::Matrix4cd g = cnot_matrix();
  const auto phys = [&](const Eigen::Matrix4cd& logical) -> Eigen::Matrix4cd { return e * logical * e.adjoint(); };
  return {phys(g), phys(g * kron(z, id)), phys(g * kron(id, x)), phys(g * kron(z, x))};
}

Eigen::Matrix4cd dephasing_forward(const ChiDiagonal& chi, const Eigen::Matrix4cd& rho,
                                   const CnotEncoding& encoding) {
  chi.validate();
  const auto ops = dephasing_operators(encoding);
  const std::array<double, 4> w = {chi.f_p, chi.eta_t, chi.eta_c, chi.eta_ct};
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  for (std::size_t n = 0; n < 4; ++n) out += w[n] * ops[n] * rho * ops[n].adjoint();
  return out;
}

PredictedFidelities dephasing_predict(const ChiDiagonal& chi) {
  chi.validate();
  return {chi.f_p + chi.eta_t, chi.f_p + chi.eta_c, chi.f_p + chi.eta_ct};
}

PredictedFidelities dephasing_simulate(const ChiDiagonal& chi, const CnotEncoding& encoding) {
  chi.validate();
  const auto ops = dephasing_operators(encoding);
  const std::array<std::pair<double, Eigen::Matrix4cd>, 4> terms = {
      std::pair{chi.f_p, ops[0]}, std::pair{chi.eta_t, ops[1]}, std::pair{chi.eta_c, ops[2]},
      std::pair{chi.eta_ct, ops[3]}};
  std::array<double, 3> f{};
  const auto pairs = standard_basis_pairs();
  for (std::size_t i = 0; i < 3; ++i) {
    const TruthTable t = mixture_table(terms, encoding, pairs[i].first, pairs[i].second);
    f[i] = classical_fidelity(t, ideal_table(encoding, pairs[i].first, pairs[i].second));
  }
  return {f[0], f[1], f[2]};
}

ChiDiagonal dephasing_fit(double f_zz, double f_xx, double f_xzyy) {
  const double f_p = process_fidelity(f_zz, f_xx, f_xzyy);
  ChiDiagonal chi{f_p, f_zz - f_p, f_xx - f_p, f_xzyy - f_p};
  for (double eta : {chi.eta_t, chi.eta_c, chi.eta_ct}) {
    if (eta < -1e-9) {
      throw ModelError("fidelities (" + format_number(f_zz) + ", " + format_number(f_xx) + ", " +
                       format_number(f_xzyy) + ") imply a negative error weight " + format_number(eta) +
                       "; the diagonal dephasing model does not apply");
    }
  }
  chi.validate();
  return chi;
}

double choi_process_fidelity(std::span<const std::pair<double, Eigen::Matrix4cd>> terms,
                             const Eigen::Matrix4cd& target) {
  constexpr int d = 4;
  const auto vec = [](const Eigen::Matrix4cd& m) {
    return Eigen::Map<const Eigen::Matrix<Amplitude, 16, 1>>(m.data()).eval();
  };
  Eigen::Matrix<Amplitude, 16, 16> choi = Eigen::Matrix<Amplitude, 16, 16>::Zero();
  for (const auto& [w, u] : terms) {
    const auto v = vec(u);
    choi += w * v * v.adjoint() / static_cast<double>(d);
  }
  const auto g = vec(target);
  return (g.adjoint() * choi * g)(0, 0).real() / static_cast<double>(d);
}

double hom_visibility(double r) {
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("HOM visibility needs 0 < R < 1");
  const double t = 1.0 - r;
  return 2.0 * r * t / (r * r + t * t);
}

double relative_visibility(double measured, double reflectivity) {
  return measured / hom_visibility(reflectivity);
}

std::vector<HomPoint> hom_scan(double reflectivity, std::span<const double> delays, double coherence_time) {
  const double v = hom_visibility(reflectivity);
  std::vector<HomPoint> out;
  out.reserve(delays.size());
  for (double tau : delays) {
    const double o = delay_to_overlap(tau, coherence_time);
    out.push_back({tau, o, hom_coincidence_simulated(reflectivity, o), hom_coincidence_analytic(reflectivity, o), v});
  }
  return out;
}

std::array<std::pair<BasisPair, BasisPair>, 3> standard_basis_pairs() {
  return {std::pair{BasisPair{Basis::kZ, Basis::kZ}, BasisPair{Basis::kZ, Basis::kZ}},
          std::pair{BasisPair{Basis::kX, Basis::kX}, BasisPair{Basis::kX, Basis::kX}},
          std::pair{BasisPair{Basis::kX, Basis::kZ}, BasisPair{Basis::kY, Basis::kY}}};
}

namespace {

double std_dev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(xs.size() - 1));
}

}  // namespace

Uncertainties bootstrap_uncertainties(const std::array<TruthTable, 3>& tables,
                                      const std::array<TruthTable, 3>& ideals, int resamples,
                                      std::uint64_t seed) {
  std::mt19937_64 seeds(seed);
  std::array<std::vector<double>, 3> f;
  std::vector<double> fp, favg;
  for (int r = 0; r < resamples; ++r) {
    std::array<double, 3> fr{};
    for (std::size_t i = 0; i < 3; ++i) {
      if (!tables[i].counts) throw std::invalid_argument("bootstrap needs count tables");
      const Matrix4i& counts = *tables[i].counts;
      TruthTable resampled = tables[i];
      for (int k = 0; k < 4; ++k) {
        const std::int64_t n = counts.row(k).sum();
        std::array<double, 4> p{};
        for (int j = 0; j < 4; ++j) p[static_cast<std::size_t>(j)] = static_cast<double>(counts(k, j));
        const std::uint64_t row_seed = seeds();
        if (n == 0) continue;
        const auto draw = sample_counts(p, n, row_seed);
        for (int j = 0; j < 4; ++j) {
          resampled.probabilities(k, j) = static_cast<double>(draw[static_cast<std::size_t>(j)]) / static_cast<double>(n);
        }
      }
      fr[i] = classical_fidelity(resampled, ideals[i]);
      f[i].push_back(fr[i]);
    }
    const double p = process_fidelity(fr[0], fr[1], fr[2]);
    fp.push_back(p);
    favg.push_back(average_gate_fidelity(p));
  }
  return {std_dev(f[0]), std_dev(f[1]), std_dev(f[2]), std_dev(fp), std_dev(favg)};
}

TruthTable sample_table(const TruthTable& table, std::int64_t trials_per_row, std::uint64_t seed) {
  std::mt19937_64 seeds(seed);
  TruthTable out = table;
  Matrix4i counts = Matrix4i::Zero();
  for (int k = 0; k < 4; ++k) {
    std::array<double, 4> p{};
    for (int j = 0; j < 4; ++j) p[static_cast<std::size_t>(j)] = table.probabilities(k, j);
    const auto draw = sample_counts(p, trials_per_row, seeds());
    for (int j = 0; j < 4; ++j) {
      counts(k, j) = draw[static_cast<std::size_t>(j)];
      out.probabilities(k, j) = static_cast<double>(counts(k, j)) / static_cast<double>(trials_per_row);
    }
  }
  out.counts = counts;
  return out;
}

FidelityReport fidelity_report(const std::array<TruthTable, 3>& tables,
                               const std::array<TruthTable, 3>& ideals, int resamples, std::uint64_t seed) {
  FidelityReport r;
  r.f_zz = classical_fidelity(tables[0], ideals[0]);
  r.f_xx = classical_fidelity(tables[1], ideals[1]);
  r.f_xzyy = classical_fidelity(tables[2], ideals[2]);
  r.f_p = process_fidelity(r.f_zz, r.f_xx, r.f_xzyy);
  r.f_avg = average_gate_fidelity(r.f_p);
  r.chi = dephasing_fit(r.f_zz, r.f_xx, r.f_xzyy);
  r.entanglement_capable = r.f_p >= 0.5;
  const bool counted = tables[0].counts && tables[1].counts && tables[2].counts;
  if (counted) {
    r.count_weighted = std::array{count_weighted_fidelity(*tables[0].counts, ideals[0]),
                                  count_weighted_fidelity(*tables[1].counts, ideals[1]),
                                  count_weighted_fidelity(*tables[2].counts, ideals[2])};
    if (resamples > 0) r.uncertainties = bootstrap_uncertainties(tables, ideals, resamples, seed);
  }
  return r;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value == 0.0 ? 0.0 : value);
  return buf;
}

void write_truth_table_csv(std::ostream& out, const TruthTable& table) {
  static const char* kLabels[4] = {"00", "01", "10", "11"};
  out << "input,00,01,10,11\n";
  for (int k = 0; k < 4; ++k) {
    out << kLabels[k];
    for (int j = 0; j < 4; ++j) out << ',' << format_number(table.probabilities(k, j));
    out << '\n';
  }
}

}  // namespace klm
