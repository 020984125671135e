// Copyright 2026 The rokit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ROKIT_ERRORS_HPP
#define ROKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rokit {

// Bad input: violated preconditions, malformed files, inconsistent parameters.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation that could not produce a meaningful result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationDiverged : public NumericalError {
 public:
  IntegrationDiverged(const std::string& what, double time)
      : NumericalError(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

class DegenerateFit : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Both qubit branches produce the same resonator response.
class DegenerateReadout : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IonizationRegime : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class Infeasible : public NumericalError {
 public:
  Infeasible(const std::string& what, double best_penalty)
      : NumericalError(what), best_penalty_(best_penalty) {}
  double best_penalty() const { return best_penalty_; }

 private:
  double best_penalty_;
};

}  // namespace rokit

#endif  // ROKIT_ERRORS_HPP
