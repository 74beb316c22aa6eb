/* Copyright 2026 The qntk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace qntk {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A dimension argument is out of range (d = 0, n = 0, d < 2 where a formula
// needs it).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Operands are not conformable.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A numerical invariant failed: non-unitary input, non-Hermitian observable,
// asymmetric or indefinite kernel.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// The operation needs a representation the argument does not have, e.g. a
// diagonal observable.
class UnsupportedRepresentation : public Error {
 public:
  using Error::Error;
};

// Parameters outside their domain (distribution shapes, evaluation points).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Gradient descent diverged for the given step size.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qntk
