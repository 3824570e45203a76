// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace costa {

// Base class for every error the toolkit raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operands have incompatible dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A matrix required to be (near-)PSD has an eigenvalue below the tolerance band.
class NotPsdError : public Error {
 public:
  using Error::Error;
};

// A matrix required to be strictly positive definite is singular to working precision.
class SingularError : public Error {
 public:
  using Error::Error;
};

// A documented operation precondition does not hold (e.g. non-commuting inputs).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A scalar argument is outside the operation's domain (e.g. gamma >= 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace costa
