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

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "qntk/ntk.hpp"
#include "qntk/rng.hpp"

namespace qntk {
namespace {

RealMatrix random_matrix(Index r, Index c, std::uint64_t seed) {
  Engine rng(seed);
  std::normal_distribution<double> n01;
  RealMatrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n01(rng);
  return m;
}

TEST(KernelMatrix, RejectsAsymmetricAndIndefinite) {
  RealMatrix a(2, 2);
  a << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(KernelMatrix(a, KernelSource::Empirical), ContractViolation);
  a << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(KernelMatrix(a, KernelSource::Empirical), ContractViolation);
  RealMatrix nan = RealMatrix::Identity(2, 2);
  nan(0, 0) = std::nan("");
  EXPECT_THROW(KernelMatrix(nan, KernelSource::Empirical), ContractViolation);
  EXPECT_THROW(KernelMatrix(RealMatrix::Zero(2, 3), KernelSource::Empirical), Error);
}

TEST(KernelMatrix, EigenvaluesAscending) {
  const KernelMatrix k = gram_from_jacobian(random_matrix(5, 4, 1));
  for (Index i = 1; i < k.size(); ++i) EXPECT_LE(k.eigenvalues()[i - 1], k.eigenvalues()[i]);
  EXPECT_NEAR(k.eigenvalues().sum(), k.trace(), 1e-12);
}

TEST(Flow, IdentityKernelClosedForm) {
  RealVector f0(3), y(3);
  f0 << 1.0, -2.0, 0.5;
  y << 0.0, 1.0, 3.0;
  const LinearizedModel m(f0, KernelMatrix(RealMatrix::Identity(3, 3), KernelSource::Empirical), y);
  for (double t : {0.0, 0.3, 1.0, 7.5}) {
    const RealVector expected = y + std::exp(-t) * (f0 - y);
    EXPECT_LE((flow_solution(m, t) - expected).cwiseAbs().maxCoeff(), 1e-12) << t;
  }
  EXPECT_THROW(flow_solution(m, -1.0), DomainError);
}

TEST(Flow, MatchesMatrixExponential) {
  const KernelMatrix k = gram_from_jacobian(random_matrix(6, 4, 2));
  const RealVector f0 = random_matrix(4, 1, 3).col(0);
  const RealVector y = random_matrix(4, 1, 4).col(0);
  const LinearizedModel m(f0, k, y);
  for (double t : {0.1, 1.0, 4.0}) {
    const RealMatrix e = (-t * k.matrix()).exp();
    EXPECT_LE((flow_solution(m, t) - (y + e * (f0 - y))).norm(), 1e-10 * (1.0 + y.norm()));
  }
}

TEST(Flow, LossIsMonotone) {
  const KernelMatrix k = gram_from_jacobian(random_matrix(3, 5, 5));
  const RealVector y = random_matrix(5, 1, 6).col(0);
  const LinearizedModel m(RealVector::Zero(5), k, y);
  double prev = INFINITY;
  for (double t = 0.0; t < 5.0; t += 0.25) {
    const double loss = (flow_solution(m, t) - y).squaredNorm();
    EXPECT_LE(loss, prev + 1e-14);
    prev = loss;
  }
}

TEST(GradientDescent, EulerConvergesToFlowFirstOrder) {
  const RealMatrix f = random_matrix(6, 12, 7) / std::sqrt(12.0);
  const RealVector y = random_matrix(6, 1, 8).col(0);
  const KernelMatrix k = gram_from_jacobian(f.transpose());
  const LinearizedModel model(RealVector::Zero(6), k, y);
  const double total = 1.0;
  auto error_at = [&](double eta, std::size_t steps) {
    const auto traj = simulate_gradient_descent(f, y, RealVector::Zero(12), eta, steps);
    const RealVector exact = flow_solution(model, total);
    return (traj.outputs.back() - exact).norm() / exact.norm();
  };
  const double eta = 0.005 / k.max_eigenvalue();
  const auto steps = static_cast<std::size_t>(std::llround(total / eta));
  const double eta_exact = total / static_cast<double>(steps);
  const double e1 = error_at(eta_exact, steps);
  const double e2 = error_at(eta_exact / 2.0, 2 * steps);
  EXPECT_LE(e1, 1e-3);
  EXPECT_GE(e1 / e2, 1.8);
  EXPECT_LE(e1 / e2, 2.2);
}

TEST(GradientDescent, TrajectoryShapeAndDivergence) {
  const RealMatrix f = random_matrix(3, 4, 9);
  const RealVector y = RealVector::Ones(3);
  const auto traj = simulate_gradient_descent(f, y, RealVector::Zero(4), 1e-3, 5);
  EXPECT_EQ(traj.outputs.size(), 6u);
  EXPECT_EQ(traj.losses.front(), 1.5);
  const double lmax = gram_from_jacobian(f.transpose()).max_eigenvalue();
  EXPECT_THROW(simulate_gradient_descent(f, y, RealVector::Zero(4), 5.0 / lmax, 200), StepSizeError);
  EXPECT_THROW(simulate_gradient_descent(f, y, RealVector::Zero(4), 0.0, 1), DomainError);
}

TEST(KernelRegression, MatchesDirectSolveOnFullRankKernel) {
  const KernelMatrix k = gram_from_jacobian(random_matrix(8, 5, 10));
  const RealVector y = random_matrix(5, 1, 11).col(0);
  const RealVector c = kernel_regression_weights(k, y, 0.1);
  const RealMatrix shifted = k.matrix() + 0.1 * RealMatrix::Identity(5, 5);
  EXPECT_LT((c - shifted.ldlt().solve(y)).norm(), 1e-10);
  EXPECT_LT((kernel_regression(k, y, RealMatrix(k.matrix()), 0.1) - k.matrix() * c).norm(), 1e-12);
}

TEST(KernelRegression, PseudoinverseOnSingularKernel) {
  const RealMatrix f = random_matrix(6, 2, 12);  // rank 2, P = 6
  const KernelMatrix k = gram_from_jacobian(f.transpose());
  const RealVector y = random_matrix(6, 1, 13).col(0);
  const RealVector c = kernel_regression_weights(k, y, 0.0);
  Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(k.matrix());
  cod.setThreshold(1e-10);
  EXPECT_LT((c - cod.pseudoInverse() * y).norm(), 1e-8 * (1.0 + c.norm()));
  EXPECT_GT(default_ridge(k), 0.0);
  EXPECT_THROW(kernel_regression_weights(k, y, -1.0), DomainError);
}

}  // namespace
}  // namespace qntk
