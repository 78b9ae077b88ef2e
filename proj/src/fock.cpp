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

#include "klmsim/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "klmsim/errors.hpp"

namespace klm {

std::string_view to_string(Polarization pol) {
  switch (pol) {
    case Polarization::kH:
      return "H";
    case Polarization::kV:
      return "V";
    case Polarization::kNone:
      break;
  }
  return "-";
}

std::string to_string(const ModeLabel& label) {
  std::string out = label.path;
  if (label.pol != Polarization::kNone) {
    out += '.';
    out += to_string(label.pol);
  }
  if (label.slot != 0) {
    out += '#';
    out += std::to_string(label.slot);
  }
  return out;
}

ModeLayout::ModeLayout(std::vector<ModeLabel> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!index_.emplace(entries_[i], i).second) {
      throw LayoutError("duplicate mode label " + to_string(entries_[i]));
    }
  }
}

std::optional<std::size_t> ModeLayout::find(const ModeLabel& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ModeLayout::index(const ModeLabel& label) const {
  auto found = find(label);
  if (!found) throw LayoutError("unknown mode " + to_string(label));
  return *found;
}

std::vector<std::size_t> ModeLayout::modes_on(std::string_view path,
                                              std::optional<Polarization> pol) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].path == path && (!pol || entries_[i].pol == *pol)) out.push_back(i);
  }
  return out;
}

bool ModeLayout::has_path(std::string_view path) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const ModeLabel& l) { return l.path == path; });
}

ModeLayout ModeLayout::concat(const ModeLayout& other) const {
  std::vector<ModeLabel> merged = entries_;
  merged.insert(merged.end(), other.entries_.begin(), other.entries_.end());
  return ModeLayout(std::move(merged));
}

ModeLayout ModeLayout::select(std::span<const std::size_t> indices) const {
  std::vector<ModeLabel> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(entries_.at(i));
  return ModeLayout(std::move(picked));
}

int FockBasisState::photons() const {
  return std::accumulate(occupations.begin(), occupations.end(), 0);
}

std::string to_string(const FockBasisState& state) {
  std::string out = "|";
  for (std::size_t i = 0; i < state.occupations.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(state.occupations[i]);
  }
  out += '>';
  return out;
}

std::size_t basis_size(std::size_t mode_count, int photons) {
  if (mode_count == 0) return photons == 0 ? 1 : 0;
  // C(photons + modes - 1, photons), saturating.
  const auto n = static_cast<std::size_t>(photons);
  std::size_t result = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t num = mode_count - 1 + k;
    if (result > std::numeric_limits<std::size_t>::max() / num) {
      return std::numeric_limits<std::size_t>::max();
    }
    result = result * num / k;
  }
  return result;
}

namespace {

void enumerate_into(std::vector<int>& prefix, std::size_t mode, int remaining,
                    std::vector<FockBasisState>& out) {
  if (mode + 1 == prefix.size()) {
    prefix[mode] = remaining;
    out.push_back(FockBasisState{prefix});
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    prefix[mode] = k;
    enumerate_into(prefix, mode + 1, remaining - k, out);
  }
  prefix[mode] = 0;
}

}  // namespace

std::vector<FockBasisState> enumerate_basis(std::size_t mode_count, int photons,
                                            std::size_t max_states) {
  if (mode_count == 0) throw LayoutError("enumerate_basis: mode_count must be positive");
  if (photons < 0) throw LayoutError("enumerate_basis: negative photon number");
  const std::size_t size = basis_size(mode_count, photons);
  if (size > max_states) {
    throw StateSpaceTooLarge("state space too large: " + std::to_string(mode_count) +
                             " modes with " + std::to_string(photons) + " photons gives " +
                             std::to_string(size) + " basis states (cap " +
                             std::to_string(max_states) + ")");
  }
  std::vector<FockBasisState> out;
  out.reserve(size);
  std::vector<int> prefix(mode_count, 0);
  enumerate_into(prefix, 0, photons, out);
  return out;
}

StateVector::StateVector(ModeLayout layout, int photons)
    : layout_(std::move(layout)), photons_(photons) {
  if (photons < 0) throw LayoutError("negative photon sector");
}

StateVector StateVector::basis(ModeLayout layout, std::vector<int> occupations) {
  FockBasisState state{std::move(occupations)};
  StateVector out(std::move(layout), state.photons());
  out.add(state, 1.0);
  return out;
}

StateVector StateVector::vacuum(ModeLayout layout) {
  std::vector<int> zeros(layout.size(), 0);
  return basis(std::move(layout), std::move(zeros));
}

Amplitude StateVector::amplitude(const FockBasisState& state) const {
  auto it = amplitudes_.find(state);
  return it == amplitudes_.end() ? Amplitude{} : it->second;
}

Amplitude StateVector::amplitude(std::vector<int> occupations) const {
  return amplitude(FockBasisState{std::move(occupations)});
}

void StateVector::add(const FockBasisState& state, Amplitude value) {
  if (state.modes() != layout_.size()) {
    throw LayoutError("basis state " + to_string(state) + " does not match layout of " +
                      std::to_string(layout_.size()) + " modes");
  }
  if (state.photons() != photons_) {
    throw LayoutError("basis state " + to_string(state) + " lies outside the " +
                      std::to_string(photons_) + "-photon sector");
  }
  if (std::any_of(state.occupations.begin(), state.occupations.end(),
                  [](int n) { return n < 0; })) {
    throw LayoutError("negative occupation in " + to_string(state));
  }
  amplitudes_[state] += value;
}

void StateVector::add(std::vector<int> occupations, Amplitude value) {
  add(FockBasisState{std::move(occupations)}, value);
}

double StateVector::norm_squared() const {
  double sum = 0.0;
  for (const auto& [state, amp] : amplitudes_) sum += std::norm(amp);
  return sum;
}

double StateVector::norm() const { return std::sqrt(norm_squared()); }

StateVector StateVector::normalized() const {
  const double n = norm();
  if (n == 0.0) throw SimulationError("cannot normalize the zero vector");
  StateVector out = *this;
  out *= 1.0 / n;
  return out;
}

void StateVector::prune(double tolerance) {
  std::erase_if(amplitudes_, [&](const auto& kv) { return std::abs(kv.second) < tolerance; });
}

StateVector& StateVector::operator*=(Amplitude factor) {
  for (auto& [state, amp] : amplitudes_) amp *= factor;
  return *this;
}

StateVector& StateVector::operator+=(const StateVector& other) {
  if (!(layout_ == other.layout_) || photons_ != other.photons_) {
    throw LayoutError("cannot add states with different layouts or sectors");
  }
  for (const auto& [state, amp] : other.amplitudes_) amplitudes_[state] += amp;
  return *this;
}

StateVector create_photons(const ModeLayout& layout, std::span<const PhotonWavefunction> photons) {
  // Coefficients of creation-operator monomials.
  std::map<std::vector<int>, Amplitude> monomials;
  monomials.emplace(std::vector<int>(layout.size(), 0), 1.0);
  for (const auto& photon : photons) {
    std::map<std::vector<int>, Amplitude> next;
    for (const auto& [occ, coeff] : monomials) {
      for (const auto& [mode, amp] : photon) {
        if (mode >= layout.size()) throw LayoutError("photon placed on unknown mode index");
        auto raised = occ;
        ++raised[mode];
        next[raised] += coeff * amp;
      }
    }
    monomials = std::move(next);
  }
  StateVector out(layout, static_cast<int>(photons.size()));
  for (const auto& [occ, coeff] : monomials) {
    double weight = 1.0;
    for (int n : occ) weight *= std::tgamma(n + 1.0);
    const Amplitude amp = coeff * std::sqrt(weight);
    if (std::abs(amp) >= kPruneTolerance) out.add(occ, amp);
  }
  return out;
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  StateVector out(a.layout().concat(b.layout()), a.photons() + b.photons());
  for (const auto& [sa, va] : a.amplitudes()) {
    for (const auto& [sb, vb] : b.amplitudes()) {
      std::vector<int> occ = sa.occupations;
      occ.insert(occ.end(), sb.occupations.begin(), sb.occupations.end());
      out.add(std::move(occ), va * vb);
    }
  }
  return out;
}

Amplitude inner_product(const StateVector& a, const StateVector& b) {
  if (!(a.layout() == b.layout())) throw LayoutError("inner_product: layouts differ");
  if (a.photons() != b.photons()) throw LayoutError("inner_product: photon sectors differ");
  Amplitude sum{};
  const auto& small = a.nonzero_count() <= b.nonzero_count() ? a : b;
  const auto& large = &small == &a ? b : a;
  for (const auto& [state, amp] : small.amplitudes()) {
    const Amplitude other = large.amplitude(state);
    sum += &small == &a ? std::conj(amp) * other : std::conj(other) * amp;
  }
  return sum;
}

}  // namespace klm
