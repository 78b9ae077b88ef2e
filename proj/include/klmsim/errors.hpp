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

#ifndef KLMSIM_ERRORS_HPP
#define KLMSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace klm {

/// Base class for failures raised while building or running a simulation.
/// The CLI maps these to exit code 3.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Basis enumeration or photon count exceeded the configured cap.
class StateSpaceTooLarge : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Two objects that must share a mode layout (or disjoint labels) do not.
class LayoutError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// A circuit element or its parameters are invalid.
class CircuitError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Heralding would produce a mixed conditional state.
class MixedConditionalState : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Inputs violate a model assumption (e.g. negative process-matrix weight).
class ModelError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

}  // namespace klm

#endif  // KLMSIM_ERRORS_HPP
