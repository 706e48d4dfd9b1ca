// Copyright 2026 The qbatt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qbatt {

// Root of every error the library raises on purpose.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad argument: out-of-range index, mismatched dimensions, invalid parameters.
class ArgumentError : public Error {
public:
  using Error::Error;
};

// Input violates an operation's precondition (e.g. non-Hermitian operator
// passed to a Hermitian eigensolver).
class ContractViolation : public Error {
public:
  using Error::Error;
};

// Problem size exceeds a configured capacity cap.
class CapacityError : public Error {
public:
  using Error::Error;
};

// Quantity that must be nonzero (a denominator, a driving potential) is zero.
class DegenerateInputError : public Error {
public:
  using Error::Error;
};

// Adaptive integrator could not meet its tolerance.
class IntegrationError : public Error {
public:
  using Error::Error;
};

// A proven physical bound was violated; signals a construction or integrator bug.
class InvariantViolation : public Error {
public:
  using Error::Error;
};

class FitFailure : public Error {
public:
  using Error::Error;
};

// Time grid too coarse for the fastest frequency in the problem.
class ResolutionError : public Error {
public:
  using Error::Error;
};

class InsufficientDataError : public Error {
public:
  using Error::Error;
};

// Configuration file failed schema or physical validation.
class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string &message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

} // namespace qbatt
