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

#ifndef KLMSIM_FOCK_HPP
#define KLMSIM_FOCK_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace klm {

using Amplitude = std::complex<double>;

/// Absolute tolerance used for normalization assertions.
inline constexpr double kNormTolerance = 1e-12;

/// Amplitudes with magnitude below this are dropped from sparse states.
inline constexpr double kPruneTolerance = 1e-14;

/// Default cap on the number of basis states a single sector may hold.
inline constexpr std::size_t kDefaultBasisCap = std::size_t{1} << 21;

/// Default photon-number cap (signal + ancilla photons plus a double pair).
inline constexpr int kDefaultMaxPhotons = 6;

enum class Polarization : std::uint8_t { kNone, kH, kV };

std::string_view to_string(Polarization pol);

/// Physical identity of one optical mode: spatial path, polarization and an
/// internal slot used to purify partial distinguishability.
struct ModeLabel {
  std::string path;
  Polarization pol = Polarization::kNone;
  int slot = 0;

  auto operator<=>(const ModeLabel&) const = default;
};

std::string to_string(const ModeLabel& label);

/// Bijection between mode labels and dense mode indices.
class ModeLayout {
 public:
  ModeLayout() = default;
  explicit ModeLayout(std::vector<ModeLabel> entries);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const ModeLabel& label(std::size_t index) const { return entries_.at(index); }
  const std::vector<ModeLabel>& entries() const { return entries_; }

  std::optional<std::size_t> find(const ModeLabel& label) const;
  /// Throws LayoutError when the label is absent.
  std::size_t index(const ModeLabel& label) const;

  /// All modes on `path`, optionally restricted to one polarization, in
  /// layout order (every slot included).
  std::vector<std::size_t> modes_on(std::string_view path,
                                    std::optional<Polarization> pol = std::nullopt) const;
  bool has_path(std::string_view path) const;

  /// Layout of `*this` followed by `other`; throws on shared labels.
  ModeLayout concat(const ModeLayout& other) const;

  /// Sub-layout keeping the listed indices in the given order.
  ModeLayout select(std::span<const std::size_t> indices) const;

  bool operator==(const ModeLayout& other) const { return entries_ == other.entries_; }

 private:
  std::vector<ModeLabel> entries_;
  std::map<ModeLabel, std::size_t> index_;
};

/// Occupation numbers, one per mode of the owning layout.
struct FockBasisState {
  std::vector<int> occupations;

  int photons() const;
  std::size_t modes() const { return occupations.size(); }
  int operator[](std::size_t mode) const { return occupations[mode]; }

  auto operator<=>(const FockBasisState&) const = default;
};

std::string to_string(const FockBasisState& state);

/// Number of occupation vectors of `photons` bosons in `mode_count` modes.
std::size_t basis_size(std::size_t mode_count, int photons);

/// All occupation vectors of the sector, lexicographically descending:
/// (n,0,...,0) first and (0,...,0,n) last. Throws StateSpaceTooLarge above
/// `max_states`.
std::vector<FockBasisState> enumerate_basis(std::size_t mode_count, int photons,
                                            std::size_t max_states = kDefaultBasisCap);

/// Sparse pure state in a fixed photon-number sector.
class StateVector {
 public:
  /// Canonical (lexicographically descending) iteration order.
  using AmplitudeMap = std::map<FockBasisState, Amplitude, std::greater<>>;

  StateVector(ModeLayout layout, int photons);

  /// |occupations> with unit amplitude.
  static StateVector basis(ModeLayout layout, std::vector<int> occupations);
  /// The vacuum of `layout`.
  static StateVector vacuum(ModeLayout layout);

  const ModeLayout& layout() const { return layout_; }
  int photons() const { return photons_; }
  const AmplitudeMap& amplitudes() const { return amplitudes_; }
  std::size_t nonzero_count() const { return amplitudes_.size(); }

  Amplitude amplitude(const FockBasisState& state) const;
  Amplitude amplitude(std::vector<int> occupations) const;

  /// Adds `value` to the amplitude of `state`; checks length and sector.
  void add(const FockBasisState& state, Amplitude value);
  void add(std::vector<int> occupations, Amplitude value);

  double norm_squared() const;
  double norm() const;
  /// Copy scaled to unit norm; throws on the zero vector.
  StateVector normalized() const;
  /// Drops amplitudes with magnitude below `tolerance`.
  void prune(double tolerance = kPruneTolerance);

  StateVector& operator*=(Amplitude factor);
  StateVector& operator+=(const StateVector& other);
  friend StateVector operator*(Amplitude factor, StateVector state) { return state *= factor; }
  friend StateVector operator+(StateVector lhs, const StateVector& rhs) { return lhs += rhs; }

 private:
  ModeLayout layout_;
  int photons_ = 0;
  AmplitudeMap amplitudes_;
};

/// One photon as a superposition over mode indices.
using PhotonWavefunction = std::vector<std::pair<std::size_t, Amplitude>>;

/// Applies one creation operator per photon, (sum_m c_m a_m^dagger), to the
/// vacuum and returns the resulting (generally unnormalized) Fock state.
StateVector create_photons(const ModeLayout& layout, std::span<const PhotonWavefunction> photons);

/// a (x) b over the concatenated layout. Throws LayoutError on shared labels.
StateVector tensor(const StateVector& a, const StateVector& b);

/// <a|b>, conjugate-linear in `a`. Throws LayoutError unless layouts and
/// sectors coincide.
Amplitude inner_product(const StateVector& a, const StateVector& b);

}  // namespace klm

#endif  // KLMSIM_FOCK_HPP
