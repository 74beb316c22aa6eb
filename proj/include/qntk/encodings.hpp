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

// Diagonal data-encoding unitaries S(x) = diag(e^{i lambda_k(x)}) and the
// overlap s(x, x') = |Tr(S(x') S(x)^dagger)|^2.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include <boost/math/special_functions/binomial.hpp>

#include "qntk/errors.hpp"
#include "qntk/linalg.hpp"

namespace qntk {

// Half: S(x) = (e^{-ixZ/2})^{⊗n}, phase differences k·Δ.
// Full: S(x) = (e^{-ixZ})^{⊗n}, phase differences 2k·Δ.
enum class AngleConvention { Half, Full };

inline std::string to_string(AngleConvention c) { return c == AngleConvention::Half ? "half" : "full"; }

inline AngleConvention angle_convention_from_string(const std::string& s) {
  if (s == "half") return AngleConvention::Half;
  if (s == "full") return AngleConvention::Full;
  throw DomainError("unknown angle convention '" + s + "' (expected 'half' or 'full')");
}

class EncodingSpec {
 public:
  enum class Kind { PauliZProduct, DiagonalTable };
  using PhaseFunction = std::function<RealVector(double)>;

  static EncodingSpec pauli_z_product(int qubits, AngleConvention convention) {
    if (qubits < 1 || qubits > 30) throw DimensionError("pauli_z_product: qubit count must be in [1, 30]");
    EncodingSpec e(Kind::PauliZProduct, Index{1} << qubits);
    e.qubits_ = qubits;
    e.convention_ = convention;
    return e;
  }

  // User-supplied phases; the callable must return a length-d vector.
  static EncodingSpec diagonal_table(Index d, PhaseFunction phases) {
    if (d < 1) throw DimensionError("diagonal_table: d must be >= 1");
    if (!phases) throw DomainError("diagonal_table: empty phase function");
    EncodingSpec e(Kind::DiagonalTable, d);
    e.phases_ = std::move(phases);
    return e;
  }

  // Phases looked up from a finite table keyed by input value.
  static EncodingSpec tabulated(Index d, std::map<double, RealVector> table) {
    for (const auto& [x, lambda] : table)
      if (lambda.size() != d) throw ShapeError("tabulated encoding: phase vector length differs from d");
    return diagonal_table(d, [table = std::move(table)](double x) {
      auto it = table.find(x);
      if (it == table.end()) throw DomainError("tabulated encoding: no entry for input " + std::to_string(x));
      return it->second;
    });
  }

  Kind kind() const { return kind_; }
  Index dim() const { return dim_; }
  int qubits() const { return qubits_; }
  AngleConvention convention() const { return convention_; }

  RealVector phases(double x) const {
    if (!std::isfinite(x)) throw DomainError("encoding: input must be finite");
    if (kind_ == Kind::DiagonalTable) {
      RealVector lambda = phases_(x);
      if (lambda.size() != dim_) throw ShapeError("encoding: phase function returned wrong length");
      return lambda;
    }
    // Bit 0 of a qubit contributes e^{-i·scale·x}, bit 1 contributes e^{+i·scale·x}.
    const double scale = convention_ == AngleConvention::Half ? 0.5 : 1.0;
    RealVector lambda(dim_);
    for (Index k = 0; k < dim_; ++k) {
      const int ones = std::popcount(static_cast<std::uint64_t>(k));
      lambda[k] = scale * x * static_cast<double>(2 * ones - qubits_);
    }
    return lambda;
  }

 private:
  EncodingSpec(Kind kind, Index dim) : kind_(kind), dim_(dim) {}

  Kind kind_;
  Index dim_;
  int qubits_ = 0;
  AngleConvention convention_ = AngleConvention::Full;
  PhaseFunction phases_;
};

inline RealVector phase_vector(const EncodingSpec& spec, double x) { return spec.phases(x); }

inline UnitaryMatrix encode(const EncodingSpec& spec, double x) {
  return UnitaryMatrix::diagonal(spec.phases(x));
}

// |sum_k e^{i(lambda_k(x') - lambda_k(x))}|^2, in [0, d^2].
inline double overlap_s(const EncodingSpec& spec, double x, double x_prime) {
  const RealVector a = spec.phases(x);
  const RealVector b = spec.phases(x_prime);
  Complex tr{};
  for (Index k = 0; k < a.size(); ++k) tr += std::polar(1.0, b[k] - a[k]);
  return std::norm(tr);
}

// C(2n, n) + 2 sum_{k=1}^{n} C(2n, n-k) cos(k·ω·Δ), with ω = 2 for the full
// angle convention and ω = 1 for the half-angle one.
inline double overlap_s_closed_form(int qubits, double x, double x_prime,
                                    AngleConvention convention = AngleConvention::Full) {
  if (qubits < 1) throw DimensionError("overlap_s_closed_form: qubit count must be >= 1");
  if (!std::isfinite(x) || !std::isfinite(x_prime)) throw DomainError("overlap_s_closed_form: inputs must be finite");
  const unsigned n = static_cast<unsigned>(qubits);
  const double omega = convention == AngleConvention::Full ? 2.0 : 1.0;
  const double delta = x - x_prime;
  double s = boost::math::binomial_coefficient<double>(2 * n, n);
  for (unsigned k = 1; k <= n; ++k)
    s += 2.0 * boost::math::binomial_coefficient<double>(2 * n, n - k) * std::cos(omega * k * delta);
  return s;
}

}  // namespace qntk
