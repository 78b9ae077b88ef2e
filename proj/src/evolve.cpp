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

#include "klmsim/evolve.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "klmsim/errors.hpp"

namespace klm {

Amplitude permanent(std::span<const Amplitude> a, std::size_t n) {
  if (a.size() != n * n) throw std::invalid_argument("permanent: matrix is not square");
  if (n == 0) return 1.0;
  if (n == 1) return a[0];
  if (n > 30) throw std::invalid_argument("permanent: matrix too large for Ryser");

  // row_sums[i] = sum_{j in S} a[i][j] for the current Gray-code subset S.
  Amplitude row_sums[32] = {};
  Amplitude total{};
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::uint64_t gray = 0;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    const int j = std::countr_zero(k);
    const std::uint64_t bit = std::uint64_t{1} << j;
    gray ^= bit;
    const double sign = (gray & bit) ? 1.0 : -1.0;
    Amplitude prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      row_sums[i] += sign * a[i * n + static_cast<std::size_t>(j)];
      prod *= row_sums[i];
    }
    // (-1)^{n - |S|}
    total += ((n - static_cast<std::size_t>(std::popcount(gray))) % 2 == 0) ? prod : -prod;
  }
  return total;
}

Amplitude permanent(const Eigen::MatrixXcd& matrix) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("permanent: matrix is not square");
  const auto n = static_cast<std::size_t>(matrix.rows());
  std::vector<Amplitude> buffer(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      buffer[i * n + j] = matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return permanent(buffer, n);
}

namespace {

// Mode index repeated once per photon.
std::vector<Eigen::Index> expand(const FockBasisState& state) {
  std::vector<Eigen::Index> out;
  for (std::size_t m = 0; m < state.occupations.size(); ++m) {
    for (int k = 0; k < state.occupations[m]; ++k) out.push_back(static_cast<Eigen::Index>(m));
  }
  return out;
}

double factorial_product(const FockBasisState& state) {
  double p = 1.0;
  for (int n : state.occupations) p *= std::tgamma(n + 1.0);
  return p;
}

struct PreparedInput {
  std::vector<Eigen::Index> cols;
  double factorials;
  Amplitude coefficient;
};

Amplitude transfer(const Eigen::MatrixXcd& u, const std::vector<Eigen::Index>& rows,
                   double out_factorials, const PreparedInput& in, std::vector<Amplitude>& scratch) {
  const std::size_t n = rows.size();
  scratch.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) scratch[i * n + j] = u(rows[i], in.cols[j]);
  }
  return permanent(scratch, n) / std::sqrt(in.factorials * out_factorials);
}

void check_compatible(const ModeUnitary& unitary, const StateVector& state,
                      const EvolveOptions& options) {
  if (unitary.modes() != state.layout().size() || !(unitary.layout == state.layout())) {
    throw LayoutError("unitary acts on " + std::to_string(unitary.modes()) +
                      " modes but the state lives on " + std::to_string(state.layout().size()));
  }
  if (state.photons() > options.max_photons) {
    throw StateSpaceTooLarge("photon cap exceeded: " + std::to_string(state.photons()) +
                             " photons > cap " + std::to_string(options.max_photons));
  }
}

std::vector<PreparedInput> prepare(const StateVector& state) {
  std::vector<PreparedInput> inputs;
  inputs.reserve(state.nonzero_count());
  for (const auto& [basis, amp] : state.amplitudes()) {
    inputs.push_back({expand(basis), factorial_product(basis), amp});
  }
  return inputs;
}

StateVector collect(const StateVector& like, const std::vector<FockBasisState>& basis,
                    const std::vector<Amplitude>& amplitudes) {
  StateVector out(like.layout(), like.photons());
  for (std::size_t o = 0; o < basis.size(); ++o) {
    if (std::abs(amplitudes[o]) >= kPruneTolerance) out.add(basis[o], amplitudes[o]);
  }
  return out;
}

}  // namespace

Amplitude fock_amplitude(const ModeUnitary& unitary, const FockBasisState& input,
                         const FockBasisState& output) {
  if (input.modes() != unitary.modes() || output.modes() != unitary.modes()) {
    throw LayoutError("fock_amplitude: occupation length does not match the unitary");
  }
  if (input.photons() != output.photons()) return 0.0;
  std::vector<Amplitude> scratch;
  const PreparedInput in{expand(input), factorial_product(input), 1.0};
  return transfer(unitary.matrix, expand(output), factorial_product(output), in, scratch);
}

StateVector apply_unitary(const ModeUnitary& unitary, const StateVector& state,
                          const EvolveOptions& options) {
  check_compatible(unitary, state, options);
  const auto basis = enumerate_basis(unitary.modes(), state.photons(), options.max_basis);
  const auto inputs = prepare(state);
  std::vector<Amplitude> amplitudes(basis.size());
  const auto count = static_cast<std::int64_t>(basis.size());

#pragma omp parallel
  {
    std::vector<Amplitude> scratch;
#pragma omp for schedule(static)
    for (std::int64_t o = 0; o < count; ++o) {
      const auto& out = basis[static_cast<std::size_t>(o)];
      const auto rows = expand(out);
      const double out_fact = factorial_product(out);
      Amplitude sum{};
      for (const auto& in : inputs) sum += transfer(unitary.matrix, rows, out_fact, in, scratch) * in.coefficient;
      amplitudes[static_cast<std::size_t>(o)] = sum;
    }
  }
  return collect(state, basis, amplitudes);
}

StateVector apply_unitary_serial(const ModeUnitary& unitary, const StateVector& state,
                                 const EvolveOptions& options) {
  check_compatible(unitary, state, options);
  const auto basis = enumerate_basis(unitary.modes(), state.photons(), options.max_basis);
  const auto inputs = prepare(state);
  std::vector<Amplitude> amplitudes(basis.size());
  std::vector<Amplitude> scratch;
  for (std::size_t o = 0; o < basis.size(); ++o) {
    const auto rows = expand(basis[o]);
    const double out_fact = factorial_product(basis[o]);
    Amplitude sum{};
    for (const auto& in : inputs) sum += transfer(unitary.matrix, rows, out_fact, in, scratch) * in.coefficient;
    amplitudes[o] = sum;
  }
  return collect(state, basis, amplitudes);
}

namespace {

double binomial(int n, int k) { return std::round(std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0))); }

Amplitude ipow(Amplitude base, int exp) {
  Amplitude out = 1.0;
  for (int k = 0; k < exp; ++k) out *= base;
  return out;
}

// (a_i^dag)^ni (a_j^dag)^nj / sqrt(ni! nj!) with
//   a_i^dag -> m00 a_i^dag + m10 a_j^dag,  a_j^dag -> m01 a_i^dag + m11 a_j^dag.
void apply_two_mode(const ModeAction& action, StateVector::AmplitudeMap& amps) {
  StateVector::AmplitudeMap next;
  const auto& m = action.matrix;
  for (const auto& [basis, coeff] : amps) {
    const int ni = basis.occupations[action.first];
    const int nj = basis.occupations[action.second];
    const double in_norm = std::sqrt(std::tgamma(ni + 1.0) * std::tgamma(nj + 1.0));
    for (int k = 0; k <= ni; ++k) {
      // k of the ni photons stay in i.
      const Amplitude ci = binomial(ni, k) * ipow(m(0, 0), k) * ipow(m(1, 0), ni - k);
      for (int l = 0; l <= nj; ++l) {
        // l of the nj photons move to i.
        const Amplitude cj = binomial(nj, l) * ipow(m(0, 1), l) * ipow(m(1, 1), nj - l);
        const int oi = k + l;
        const int oj = ni + nj - oi;
        const double out_norm = std::sqrt(std::tgamma(oi + 1.0) * std::tgamma(oj + 1.0));
        FockBasisState target = basis;
        target.occupations[action.first] = oi;
        target.occupations[action.second] = oj;
        next[std::move(target)] += coeff * ci * cj * out_norm / in_norm;
      }
    }
  }
  amps = std::move(next);
}

}  // namespace

StateVector apply_sequential(const Circuit& circuit, const StateVector& state) {
  const ModeLayout layout = circuit.layout();
  if (!(layout == state.layout())) {
    throw LayoutError("apply_sequential: state layout does not match the circuit");
  }
  StateVector::AmplitudeMap amps = state.amplitudes();
  for (const auto& element : circuit.elements()) {
    for (const auto& action : element_actions(circuit, element, layout)) {
      if (action.single_mode()) {
        for (auto& [basis, coeff] : amps) coeff *= ipow(action.matrix(0, 0), basis.occupations[action.first]);
      } else {
        apply_two_mode(action, amps);
      }
    }
  }
  StateVector out(layout, state.photons());
  for (const auto& [basis, coeff] : amps) {
    if (std::abs(coeff) >= kPruneTolerance) out.add(basis, coeff);
  }
  return out;
}

SectorTransfer::SectorTransfer(ModeUnitary unitary, int photons, const EvolveOptions& options)
    : unitary_(std::move(unitary)), photons_(photons) {
  if (photons > options.max_photons) {
    throw StateSpaceTooLarge("photon cap exceeded: " + std::to_string(photons) + " photons > cap " +
                             std::to_string(options.max_photons));
  }
  basis_ = enumerate_basis(unitary_.modes(), photons, options.max_basis);
}

const std::vector<Amplitude>& SectorTransfer::column(const FockBasisState& input) const {
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(input);
    if (it != cache_.end()) return it->second;
  }
  if (input.photons() != photons_ || input.modes() != unitary_.modes()) {
    throw LayoutError("SectorTransfer: input " + to_string(input) + " outside the sector");
  }
  const PreparedInput in{expand(input), factorial_product(input), 1.0};
  std::vector<Amplitude> col(basis_.size());
  const auto count = static_cast<std::int64_t>(basis_.size());
#pragma omp parallel
  {
    std::vector<Amplitude> scratch;
#pragma omp for schedule(static)
    for (std::int64_t o = 0; o < count; ++o) {
      const auto& out = basis_[static_cast<std::size_t>(o)];
      col[static_cast<std::size_t>(o)] =
          transfer(unitary_.matrix, expand(out), factorial_product(out), in, scratch);
    }
  }
  std::lock_guard lock(mutex_);
  // std::map never invalidates references to existing nodes.
  return cache_.emplace(input, std::move(col)).first->second;
}

StateVector SectorTransfer::apply(const StateVector& state) const {
  if (!(state.layout() == unitary_.layout) || state.photons() != photons_) {
    throw LayoutError("SectorTransfer::apply: state does not match layout/sector");
  }
  std::vector<Amplitude> amplitudes(basis_.size());
  for (const auto& [basis, coeff] : state.amplitudes()) {
    const auto& col = column(basis);
    for (std::size_t o = 0; o < basis_.size(); ++o) amplitudes[o] += col[o] * coeff;
  }
  return collect(state, basis_, amplitudes);
}

}  // namespace klm
