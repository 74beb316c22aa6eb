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

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qntk/linalg.hpp"
#include "qntk/rng.hpp"

namespace qntk {
namespace {

// Kronecker product of single-qubit Paulis, letter 0 on the most significant bit.
ComplexMatrix kron_pauli(const std::string& letters) {
  auto single = [](char c) {
    ComplexMatrix p(2, 2);
    const Complex i{0.0, 1.0};
    switch (c) {
      case 'I': p << 1, 0, 0, 1; break;
      case 'X': p << 0, 1, 1, 0; break;
      case 'Y': p << 0, -i, i, 0; break;
      default: p << 1, 0, 0, -1; break;
    }
    return p;
  };
  ComplexMatrix m = ComplexMatrix::Identity(1, 1);
  for (char c : letters) {
    const ComplexMatrix s = single(c);
    ComplexMatrix next(m.rows() * 2, m.cols() * 2);
    for (Index r = 0; r < m.rows(); ++r)
      for (Index q = 0; q < m.cols(); ++q) next.block(2 * r, 2 * q, 2, 2) = m(r, q) * s;
    m = next;
  }
  return m;
}

TEST(UnitaryMatrix, RejectsNonUnitary) {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 0) = 1.1;
  EXPECT_THROW(UnitaryMatrix{m}, ContractViolation);
  EXPECT_THROW(UnitaryMatrix{ComplexMatrix::Identity(2, 3)}, Error);
}

TEST(UnitaryMatrix, DiagonalAndTrace) {
  RealVector phases(2);
  phases << 0.0, std::numbers::pi;
  const UnitaryMatrix z = UnitaryMatrix::diagonal(phases);
  EXPECT_TRUE(z.is_diagonal());
  EXPECT_NEAR(std::abs(z.trace()), 0.0, 1e-15);
  EXPECT_EQ(UnitaryMatrix::identity(4).trace(), Complex(4.0, 0.0));
}

TEST(StateVector, NormalizationEnforced) {
  ComplexVector v = ComplexVector::Zero(2);
  v[0] = 1.0;
  v[1] = 1.0;
  EXPECT_THROW(StateVector{v}, ContractViolation);
  const StateVector b = StateVector::basis(4, 2);
  EXPECT_EQ(b[2], Complex(1.0, 0.0));
}

TEST(Observable, PauliMatchesKroneckerOracle) {
  for (const std::string letters : {"Z", "X", "Y", "ZZ", "XY", "IZ", "YXZ", "ZIXY"}) {
    const Observable h = Observable::pauli(letters);
    const ComplexMatrix oracle = kron_pauli(letters);
    EXPECT_LT((h.to_matrix() - oracle).cwiseAbs().maxCoeff(), 1e-14) << letters;
    EXPECT_NEAR(h.trace(), oracle.trace().real(), 1e-12) << letters;
    EXPECT_NEAR(h.trace_sq(), (oracle * oracle).trace().real(), 1e-12) << letters;
    Engine rng(7);
    const StateVector psi = sample_haar_state(h.dim(), rng);
    const ComplexVector direct = oracle * psi.amplitudes();
    EXPECT_LT((h.apply(psi.amplitudes()) - direct).norm(), 1e-13) << letters;
    EXPECT_NEAR(expectation(psi, h), psi.amplitudes().dot(direct).real(), 1e-13) << letters;
  }
}

TEST(Observable, DiagonalEntriesForZStrings) {
  const Observable zz = Observable::pauli("ZZ");
  ASSERT_TRUE(zz.diagonal_entries().has_value());
  RealVector expected(4);
  expected << 1, -1, -1, 1;
  EXPECT_EQ(*zz.diagonal_entries(), expected);
  EXPECT_FALSE(Observable::pauli("XZ").diagonal_entries().has_value());
  EXPECT_EQ(Observable::pauli_z_string(3).trace_sq(), 8.0);
  EXPECT_EQ(Observable::identity(4).trace(), 4.0);
}

TEST(Observable, DenseRequiresHermitian) {
  ComplexMatrix m(2, 2);
  m << 0, 1, 0, 0;
  EXPECT_THROW(Observable::dense(m), ContractViolation);
  m << 1, Complex(0, 1), Complex(0, -1), -1;
  const Observable h = Observable::dense(m);
  EXPECT_NEAR(h.trace(), 0.0, 1e-15);
  EXPECT_NEAR(h.max_eigenvalue(), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(h.spectral_norm(), std::sqrt(2.0), 1e-12);
}

TEST(Observable, RejectsBadLetters) { EXPECT_THROW(Observable::pauli("ZQ"), DomainError); }

TEST(Haar, SamplesAreUnitary) {
  Engine rng(11);
  for (Index d : {1, 2, 5, 16}) {
    const UnitaryMatrix u = sample_haar_unitary(d, rng);
    EXPECT_LT(detail::unitarity_defect(u.matrix()), 1e-12);
  }
}

// Entry moments of Haar unitaries: E|U00|^2 = 1/d, E|U00|^4 = 2/(d(d+1)),
// E|U00 U11|^2 = 1/(d^2-1), E|U00 U01|^2 = 1/(d(d+1)).
TEST(Haar, EntryMomentsWithinFourSigma) {
  for (Index d : {2, 4}) {
    constexpr int kSamples = 20000;
    std::vector<double> m2(kSamples), m4(kSamples), diag(kSamples), row(kSamples);
    for (int s = 0; s < kSamples; ++s) {
      Engine rng = make_stream(99, static_cast<std::uint64_t>(s));
      const UnitaryMatrix u = sample_haar_unitary(d, rng);
      const double a = std::norm(u(0, 0));
      m2[s] = a;
      m4[s] = a * a;
      diag[s] = a * std::norm(u(1, 1));
      row[s] = a * std::norm(u(0, 1));
    }
    auto check = [&](const std::vector<double>& v, double expected) {
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / kSamples;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double se = std::sqrt(ss / (kSamples - 1) / kSamples);
      EXPECT_LE(std::abs(mean - expected), 4.0 * se) << "d=" << d << " expected " << expected;
    };
    const double dd = static_cast<double>(d);
    check(m2, 1.0 / dd);
    check(m4, 2.0 / (dd * (dd + 1)));
    check(diag, 1.0 / (dd * dd - 1));
    check(row, 1.0 / (dd * (dd + 1)));
  }
}

TEST(Haar, StateIsNormalized) {
  Engine rng(3);
  const StateVector psi = sample_haar_state(8, rng);
  EXPECT_NEAR(psi.amplitudes().norm(), 1.0, 1e-14);
}

TEST(Rng, DeriveSeedIsDeterministicAndDistinct) {
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
  Engine a = make_stream(5, 0);
  Engine b = make_stream(5, 0);
  EXPECT_EQ(a(), b());
}

TEST(Rng, ParallelForIndependentOfWorkers) {
  std::vector<double> one(1000), four(1000);
  auto fill = [](std::vector<double>& out) {
    return [&out](std::size_t i) {
      Engine e = make_stream(42, i);
      out[i] = std::uniform_real_distribution<double>()(e);
    };
  };
  parallel_for(one.size(), fill(one), 1);
  parallel_for(four.size(), fill(four), 4);
  EXPECT_EQ(one, four);
}

TEST(Rng, ParallelForRethrows) {
  EXPECT_THROW(parallel_for(
                   100, [](std::size_t i) { if (i == 57) throw std::runtime_error("x"); }, 3),
               std::runtime_error);
}

}  // namespace
}  // namespace qntk
