// Copyright 2026 The epsense Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace epsense {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
   public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionError : public Error {
   public:
    explicit DimensionError(const std::string& msg) : Error("dimension mismatch: " + msg) {}
};

class MalformedStateError : public Error {
   public:
    explicit MalformedStateError(const std::string& msg) : Error("malformed state: " + msg) {}
};

class PreconditionError : public Error {
   public:
    explicit PreconditionError(const std::string& msg) : Error("precondition violated: " + msg) {}
};

class DomainError : public Error {
   public:
    explicit DomainError(const std::string& msg) : Error("domain error: " + msg) {}
};

/// Raised when theta*Pi - M cannot be inverted at the requested perturbation.
class SingularResponseError : public Error {
   public:
    SingularResponseError(double theta, double condition)
        : Error("singular response at theta=" + std::to_string(theta) +
                " (condition number " + std::to_string(condition) + ")"),
          theta_(theta),
          condition_(condition) {}
    double theta() const noexcept { return theta_; }
    double condition() const noexcept { return condition_; }

   private:
    double theta_;
    double condition_;
};

class IllConditionedCovarianceError : public Error {
   public:
    explicit IllConditionedCovarianceError(const std::string& msg)
        : Error("ill-conditioned covariance: " + msg) {}
};

class DecompositionError : public Error {
   public:
    explicit DecompositionError(const std::string& msg) : Error("jordan decomposition failed: " + msg) {}
};

class SweepFailure : public Error {
   public:
    explicit SweepFailure(const std::string& msg) : Error("sweep failed: " + msg) {}
};

/// The drift is not strictly stable, or a trajectory blew up while integrating.
class InstabilityError : public Error {
   public:
    explicit InstabilityError(const std::string& msg) : Error("instability: " + msg) {}
};

class InsufficientDataError : public Error {
   public:
    explicit InsufficientDataError(const std::string& msg) : Error("insufficient data: " + msg) {}
};

}  // namespace epsense
