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

// Dense complex linear algebra carriers, Haar sampling and Hermitian
// observables. Everything here is immutable after construction.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "qntk/errors.hpp"

namespace qntk {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kUnitaryTolerance = 1e-10;
inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-12;

namespace detail {

inline void require_finite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) throw ContractViolation(std::string(what) + ": non-finite entry");
}

inline double unitarity_defect(const ComplexMatrix& m) {
  const Index d = m.rows();
  return (m * m.adjoint() - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
}

struct Trusted {};

}  // namespace detail

class UnitaryMatrix;
class StateVector;

template <class Rng>
UnitaryMatrix sample_haar_unitary(Index d, Rng& rng);
template <class Rng>
StateVector sample_haar_state(Index d, Rng& rng);

// Square complex matrix with ||U U^dagger - I||_max <= 1e-10.
class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols())
      throw ShapeError("UnitaryMatrix: matrix must be square and non-empty");
    detail::require_finite(m_, "UnitaryMatrix");
    const double defect = detail::unitarity_defect(m_);
    if (defect > kUnitaryTolerance)
      throw ContractViolation("UnitaryMatrix: ||UU^dagger - I||_max = " + std::to_string(defect));
  }

  // Skips validation; callers guarantee unitarity by construction.
  UnitaryMatrix(ComplexMatrix m, detail::Trusted) : m_(std::move(m)) {}

  static UnitaryMatrix identity(Index d) {
    if (d < 1) throw DimensionError("UnitaryMatrix::identity: d must be >= 1");
    return {ComplexMatrix::Identity(d, d), detail::Trusted{}};
  }

  // diag(e^{i phases_0}, ..., e^{i phases_{d-1}}).
  static UnitaryMatrix diagonal(const RealVector& phases) {
    if (phases.size() < 1) throw DimensionError("UnitaryMatrix::diagonal: empty phase vector");
    if (!phases.allFinite()) throw DomainError("UnitaryMatrix::diagonal: non-finite phase");
    ComplexMatrix m = ComplexMatrix::Zero(phases.size(), phases.size());
    for (Index k = 0; k < phases.size(); ++k) m(k, k) = std::polar(1.0, phases[k]);
    return {std::move(m), detail::Trusted{}};
  }

  Index dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(Index i, Index j) const { return m_(i, j); }

  bool is_diagonal() const {
    for (Index j = 0; j < dim(); ++j)
      for (Index i = 0; i < dim(); ++i)
        if (i != j && m_(i, j) != Complex{}) return false;
    return true;
  }

  Complex trace() const { return m_.trace(); }

 private:
  ComplexMatrix m_;
};

// Unit-norm amplitude vector, |‖psi‖ - 1| <= 1e-12.
class StateVector {
 public:
  explicit StateVector(ComplexVector amplitudes) : psi_(std::move(amplitudes)) {
    if (psi_.size() == 0) throw DimensionError("StateVector: empty amplitude vector");
    if (!psi_.allFinite()) throw ContractViolation("StateVector: non-finite amplitude");
    if (std::abs(psi_.norm() - 1.0) > kNormTolerance)
      throw ContractViolation("StateVector: amplitudes are not normalized");
  }

  StateVector(ComplexVector amplitudes, detail::Trusted) : psi_(std::move(amplitudes)) {}

  // |k> in dimension d.
  static StateVector basis(Index d, Index k = 0) {
    if (d < 1) throw DimensionError("StateVector::basis: d must be >= 1");
    if (k < 0 || k >= d) throw ShapeError("StateVector::basis: index out of range");
    ComplexVector v = ComplexVector::Zero(d);
    v[k] = 1.0;
    return {std::move(v), detail::Trusted{}};
  }

  Index dim() const { return psi_.size(); }
  const ComplexVector& amplitudes() const { return psi_; }
  Complex operator[](Index k) const { return psi_[k]; }

 private:
  ComplexVector psi_;
};

// ---------------------------------------------------------------------------
// Composition.

inline ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  return a * b;
}

inline UnitaryMatrix matmul(const UnitaryMatrix& a, const UnitaryMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("matmul: unitary dimensions differ");
  return {a.matrix() * b.matrix(), detail::Trusted{}};
}

inline ComplexMatrix adjoint(const ComplexMatrix& a) { return a.adjoint(); }

inline UnitaryMatrix adjoint(const UnitaryMatrix& u) {
  return {u.matrix().adjoint(), detail::Trusted{}};
}

inline ComplexVector apply(const ComplexMatrix& a, const ComplexVector& v) {
  if (a.cols() != v.size()) throw ShapeError("apply: matrix and vector are not conformable");
  return a * v;
}

inline StateVector apply(const UnitaryMatrix& u, const StateVector& psi) {
  if (u.dim() != psi.dim()) throw ShapeError("apply: unitary and state dimensions differ");
  return {u.matrix() * psi.amplitudes(), detail::Trusted{}};
}

// ---------------------------------------------------------------------------
// Observables.

// Hermitian measurement operator. Three representations are supported:
//  * Diagonal: H = diag(h_0, ..., h_{d-1}).
//  * PauliString: letters over {I,X,Y,Z}; letter 0 acts on the most
//    significant bit of the basis index (Kronecker order).
//  * Dense: a full Hermitian matrix.
// Tr(H) and Tr(H^2) are cached at construction.
class Observable {
 public:
  enum class Kind { Diagonal, PauliString, Dense };

  static Observable diagonal(RealVector h) {
    if (h.size() < 1) throw DimensionError("Observable::diagonal: empty spectrum");
    if (!h.allFinite()) throw ContractViolation("Observable::diagonal: non-finite entry");
    Observable o(Kind::Diagonal, h.size());
    o.trace_ = h.sum();
    o.trace_sq_ = h.squaredNorm();
    o.lambda_min_ = h.minCoeff();
    o.lambda_max_ = h.maxCoeff();
    o.diag_ = std::move(h);
    return o;
  }

  static Observable pauli(std::string letters) {
    if (letters.empty()) throw DimensionError("Observable::pauli: empty Pauli string");
    if (letters.size() > 30) throw DimensionError("Observable::pauli: too many qubits");
    bool identity = true;
    for (char& c : letters) {
      if (c == 'i' || c == 'x' || c == 'y' || c == 'z') c = static_cast<char>(c - 'a' + 'A');
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
        throw DomainError("Observable::pauli: letters must be in {I,X,Y,Z}");
      identity = identity && c == 'I';
    }
    const Index d = Index{1} << letters.size();
    Observable o(Kind::PauliString, d);
    o.trace_ = identity ? static_cast<double>(d) : 0.0;
    o.trace_sq_ = static_cast<double>(d);
    o.lambda_min_ = identity ? 1.0 : -1.0;
    o.lambda_max_ = 1.0;
    o.letters_ = std::move(letters);
    return o;
  }

  // Z on every one of n qubits.
  static Observable pauli_z_string(int qubits) {
    if (qubits < 1) throw DimensionError("Observable::pauli_z_string: qubits must be >= 1");
    return pauli(std::string(static_cast<std::size_t>(qubits), 'Z'));
  }

  static Observable dense(ComplexMatrix h) {
    if (h.rows() < 1 || h.rows() != h.cols()) throw ShapeError("Observable::dense: matrix must be square");
    detail::require_finite(h, "Observable::dense");
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance)
      throw ContractViolation("Observable::dense: matrix is not Hermitian");
    Observable o(Kind::Dense, h.rows());
    ComplexMatrix herm = 0.5 * (h + h.adjoint());
    o.trace_ = herm.trace().real();
    o.trace_sq_ = herm.cwiseAbs2().sum();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(herm, Eigen::EigenvaluesOnly);
    o.lambda_min_ = eig.eigenvalues().minCoeff();
    o.lambda_max_ = eig.eigenvalues().maxCoeff();
    o.dense_ = std::move(herm);
    return o;
  }

  static Observable zero(Index d) { return diagonal(RealVector::Zero(d)); }
  static Observable identity(Index d) { return diagonal(RealVector::Ones(d)); }

  Kind kind() const { return kind_; }
  Index dim() const { return dim_; }
  double trace() const { return trace_; }
  double trace_sq() const { return trace_sq_; }
  double min_eigenvalue() const { return lambda_min_; }
  double max_eigenvalue() const { return lambda_max_; }
  double spectral_norm() const { return std::max(std::abs(lambda_min_), std::abs(lambda_max_)); }
  const std::string& pauli_letters() const { return letters_; }

  // Diagonal entries when H is diagonal in the computational basis: Diagonal
  // kind, or a Pauli string made of I and Z only.
  std::optional<RealVector> diagonal_entries() const {
    switch (kind_) {
      case Kind::Diagonal:
        return diag_;
      case Kind::PauliString: {
        if (letters_.find_first_of("XY") != std::string::npos) return std::nullopt;
        RealVector h(dim_);
        const int n = static_cast<int>(letters_.size());
        for (Index k = 0; k < dim_; ++k) {
          int parity = 0;
          for (int q = 0; q < n; ++q)
            if (letters_[q] == 'Z') parity ^= static_cast<int>((k >> (n - 1 - q)) & 1);
          h[k] = parity ? -1.0 : 1.0;
        }
        return h;
      }
      case Kind::Dense:
        break;
    }
    return std::nullopt;
  }

  ComplexMatrix to_matrix() const {
    switch (kind_) {
      case Kind::Diagonal:
        return diag_.cast<Complex>().asDiagonal();
      case Kind::Dense:
        return dense_;
      case Kind::PauliString: {
        ComplexMatrix m = ComplexMatrix::Zero(dim_, dim_);
        for (Index k = 0; k < dim_; ++k) {
          auto [target, phase] = pauli_action(k);
          m(target, k) = phase;
        }
        return m;
      }
    }
    return {};
  }

  ComplexVector apply(const ComplexVector& v) const {
    if (v.size() != dim_) throw ShapeError("Observable::apply: dimension mismatch");
    switch (kind_) {
      case Kind::Diagonal:
        return diag_.cast<Complex>().cwiseProduct(v);
      case Kind::Dense:
        return dense_ * v;
      case Kind::PauliString: {
        ComplexVector out = ComplexVector::Zero(dim_);
        for (Index k = 0; k < dim_; ++k) {
          auto [target, phase] = pauli_action(k);
          out[target] += phase * v[k];
        }
        return out;
      }
    }
    return {};
  }

  // <v|H|v> for an arbitrary (not necessarily normalized) vector.
  Complex quadratic_form(const ComplexVector& v) const {
    if (v.size() != dim_) throw ShapeError("Observable: dimension mismatch");
    switch (kind_) {
      case Kind::Diagonal:
        return {diag_.dot(v.cwiseAbs2()), 0.0};
      case Kind::Dense:
        return v.dot(dense_ * v);
      case Kind::PauliString: {
        Complex acc{};
        for (Index k = 0; k < dim_; ++k) {
          auto [target, phase] = pauli_action(k);
          acc += std::conj(v[target]) * phase * v[k];
        }
        return acc;
      }
    }
    return {};
  }

 private:
  Observable(Kind kind, Index dim) : kind_(kind), dim_(dim) {}

  // P|k> = phase |target>.
  std::pair<Index, Complex> pauli_action(Index k) const {
    const int n = static_cast<int>(letters_.size());
    Index target = k;
    Complex phase{1.0, 0.0};
    for (int q = 0; q < n; ++q) {
      const int shift = n - 1 - q;
      const bool bit = (k >> shift) & 1;
      switch (letters_[q]) {
        case 'X':
          target ^= Index{1} << shift;
          break;
        case 'Y':
          target ^= Index{1} << shift;
          phase *= bit ? Complex{0.0, -1.0} : Complex{0.0, 1.0};
          break;
        case 'Z':
          if (bit) phase = -phase;
          break;
        default:
          break;
      }
    }
    return {target, phase};
  }

  Kind kind_;
  Index dim_;
  double trace_ = 0.0;
  double trace_sq_ = 0.0;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
  RealVector diag_;
  std::string letters_;
  ComplexMatrix dense_;
};

// Real expectation <psi|H|psi>. The imaginary residue must stay below 1e-10
// (scaled by ||H||); it is discarded.
inline double expectation(const ComplexVector& psi, const Observable& h) {
  if (psi.size() != h.dim()) throw ShapeError("expectation: state and observable dimensions differ");
  const Complex value = h.quadratic_form(psi);
  if (std::abs(value.imag()) > 1e-10 * std::max(1.0, h.spectral_norm()))
    throw ContractViolation("expectation: imaginary residue above 1e-10");
  return value.real();
}

inline double expectation(const StateVector& psi, const Observable& h) {
  return expectation(psi.amplitudes(), h);
}

// ---------------------------------------------------------------------------
// Haar sampling.

// d x d matrix of i.i.d. standard complex Gaussians (E|z|^2 = 1).
template <class Rng>
ComplexMatrix sample_ginibre(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ComplexMatrix z(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = Complex{re, im};
    }
  return z;
}

// QR of a Ginibre matrix with the column phases of Q fixed by the diagonal of
// R. Without the phase fix the distribution is not Haar.
template <class Rng>
UnitaryMatrix sample_haar_unitary(Index d, Rng& rng) {
  if (d < 1) throw DimensionError("sample_haar_unitary: d must be >= 1");
  ComplexMatrix z = sample_ginibre(d, d, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (Index j = 0; j < d; ++j) {
    const Complex rjj = r(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0.0) q.col(j) *= rjj / mag;
  }
  return {std::move(q), detail::Trusted{}};
}

// Normalized vector of i.i.d. standard complex Gaussians: uniform on the
// complex unit sphere.
template <class Rng>
StateVector sample_haar_state(Index d, Rng& rng) {
  if (d < 1) throw DimensionError("sample_haar_state: d must be >= 1");
  ComplexVector v = sample_ginibre(d, 1, rng).col(0);
  double norm = v.norm();
  while (norm == 0.0) {
    v = sample_ginibre(d, 1, rng).col(0);
    norm = v.norm();
  }
  v /= norm;
  return {std::move(v), detail::Trusted{}};
}

}  // namespace qntk
