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

#ifndef KLMSIM_CIRCUIT_HPP
#define KLMSIM_CIRCUIT_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "klmsim/fock.hpp"

namespace klm {

/// Loss (environment) paths carry this prefix in every layout.
inline constexpr std::string_view kLossPathPrefix = "loss:";

bool is_loss_path(std::string_view path);

/// Which input port's self-reflection picks up the minus sign (the "gray
/// surface" of a drawn beamsplitter).
enum class Orientation { kNegativeFirst, kNegativeSecond };

/// Real asymmetric beamsplitter on (first, second) ports. Column j is the
/// image of input port j, so kNegativeFirst gives
///   [[-sqrt(R), sqrt(1-R)], [sqrt(1-R), sqrt(R)]].
Eigen::Matrix2d beamsplitter_matrix(double reflectivity,
                                    Orientation orientation = Orientation::kNegativeFirst);

/// Partially polarizing beamsplitter in mode order (a.H, b.H, a.V, b.V):
/// block diagonal with beamsplitter_matrix(R_H) and beamsplitter_matrix(R_V).
Eigen::Matrix4d ppbs_matrix(double reflectivity_h, double reflectivity_v,
                            Orientation orientation = Orientation::kNegativeFirst);

/// A path, optionally restricted to a single polarization.
struct Port {
  std::string path;
  std::optional<Polarization> pol;

  bool operator==(const Port&) const = default;
};

std::string to_string(const Port& port);

enum class ElementKind { kBeamsplitter, kPpbs, kPhase, kLoss };

std::string_view to_string(ElementKind kind);

struct Element {
  ElementKind kind = ElementKind::kBeamsplitter;
  std::string name;
  std::vector<Port> ports;
  double reflectivity = 0.0;    // kBeamsplitter
  double reflectivity_h = 0.0;  // kPpbs
  double reflectivity_v = 0.0;  // kPpbs
  double phase = 0.0;           // kPhase, radians
  double transmissivity = 1.0;  // kLoss
  Orientation orientation = Orientation::kNegativeFirst;

  static Element beamsplitter(std::string name, Port first, Port second, double reflectivity,
                              Orientation orientation = Orientation::kNegativeFirst);
  static Element ppbs(std::string name, std::string first, std::string second,
                      double reflectivity_h, double reflectivity_v,
                      Orientation orientation = Orientation::kNegativeFirst);
  static Element phase_shift(std::string name, Port port, double phase);
  static Element loss(std::string name, Port port, double transmissivity);

  /// Named scalar parameter ("r", "r_h", "r_v", "phi", "t").
  double parameter(std::string_view key) const;
  void set_parameter(std::string_view key, double value);
  std::vector<std::string_view> parameter_keys() const;

  bool operator==(const Element&) const = default;
};

/// Declared spatial path and the polarizations it carries.
struct PathSpec {
  std::string name;
  std::vector<Polarization> pols;

  bool operator==(const PathSpec&) const = default;
};

/// Ordered optical network. Element ports are path-level; every element acts
/// identically on all internal slots. LOSS elements own a private vacuum path
/// named kLossPathPrefix + element name.
class Circuit {
 public:
  Circuit() = default;

  Circuit& add_path(std::string name, std::vector<Polarization> pols = {Polarization::kNone});
  /// Appends an element and validates its ports against declared paths.
  Circuit& add(Element element);

  const std::vector<PathSpec>& paths() const { return paths_; }
  const std::vector<Element>& elements() const { return elements_; }
  int slots() const { return slots_; }

  /// Same network with `slots` internal slots per (path, polarization).
  Circuit with_slots(int slots) const;

  /// Full layout: paths in declaration order, then polarization, then slot.
  /// Loss paths appear where their LOSS element was added.
  ModeLayout layout() const;

  const PathSpec& path(std::string_view name) const;
  bool has_path(std::string_view name) const;
  std::vector<std::string> loss_paths() const;

  /// Elements matched by `selector`: exact name, or name prefix up to a '.'.
  std::vector<std::size_t> select(std::string_view selector) const;
  Element& element(std::size_t index) { return elements_.at(index); }

  /// Sets "<selector>.<key>" on every matching element; throws CircuitError
  /// when nothing matches or the value leaves its domain.
  void set_parameter(std::string_view qualified_key, double value);
  double parameter(std::string_view qualified_key) const;

  bool operator==(const Circuit&) const = default;

 private:
  void check_port(const Port& port, const Element& element) const;

  std::vector<PathSpec> paths_;
  std::vector<Element> elements_;
  int slots_ = 1;
};

/// Elementary action of an element on the mode space.
struct ModeAction {
  std::size_t first = 0;
  std::size_t second = 0;  // == first for single-mode actions
  Eigen::Matrix2cd matrix = Eigen::Matrix2cd::Identity();  // single-mode: matrix(0, 0)
  bool single_mode() const { return first == second; }
};

/// Decomposes `element` into disjoint two-mode / single-mode actions on
/// `layout`, one per matched (polarization, slot).
std::vector<ModeAction> element_actions(const Circuit& circuit, const Element& element,
                                        const ModeLayout& layout);

/// m x m matrix on creation-operator amplitudes: a_j^dagger -> sum_i U(i, j) a_i^dagger.
struct ModeUnitary {
  ModeLayout layout;
  Eigen::MatrixXcd matrix;

  std::size_t modes() const { return static_cast<std::size_t>(matrix.rows()); }
};

/// Product of element matrices in element order, on the full layout
/// (loss modes included). Validates ports and loss-mode usage.
ModeUnitary compile(const Circuit& circuit);

/// True iff max |(U^dagger U - I)_ij| <= tol.
bool validate_unitary(const Eigen::MatrixXcd& matrix, double tol);
inline bool validate_unitary(const ModeUnitary& u, double tol) {
  return validate_unitary(u.matrix, tol);
}

}  // namespace klm

#endif  // KLMSIM_CIRCUIT_HPP
