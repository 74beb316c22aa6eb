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

// Generic tangent-kernel machinery: Jacobian Gram matrices, the linearized
// gradient-flow solution, an explicit gradient-descent reference and kernel
// regression.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qntk/errors.hpp"
#include "qntk/linalg.hpp"

namespace qntk {

enum class KernelSource { Empirical, ExpectedClosedForm, Qnn };

inline std::string to_string(KernelSource s) {
  switch (s) {
    case KernelSource::Empirical:
      return "empirical";
    case KernelSource::ExpectedClosedForm:
      return "expected-closed-form";
    case KernelSource::Qnn:
      return "qnn";
  }
  return "unknown";
}

inline constexpr double kKernelSymmetryTolerance = 1e-10;
inline constexpr double kKernelPsdTolerance = 1e-8;

// Symmetric positive semi-definite Gram matrix. Both tolerances are absolute
// for kernels with entries of order one and scale with max|K| beyond that.
class KernelMatrix {
 public:
  KernelMatrix(RealMatrix k, KernelSource source) : k_(std::move(k)), source_(source) {
    if (k_.rows() != k_.cols()) throw ShapeError("KernelMatrix: matrix must be square");
    if (!k_.allFinite()) throw ContractViolation("KernelMatrix: non-finite entry");
    if (k_.size() == 0) return;
    const double scale = std::max(1.0, k_.cwiseAbs().maxCoeff());
    if ((k_ - k_.transpose()).cwiseAbs().maxCoeff() > kKernelSymmetryTolerance * scale)
      throw ContractViolation("KernelMatrix: matrix is not symmetric");
    k_ = 0.5 * (k_ + k_.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<RealMatrix> eig(k_);
    eigenvalues_ = eig.eigenvalues();
    eigenvectors_ = eig.eigenvectors();
    if (eigenvalues_[0] < -kKernelPsdTolerance * scale)
      throw ContractViolation("KernelMatrix: minimum eigenvalue " + std::to_string(eigenvalues_[0]) +
                              " below -1e-8");
  }

  Index size() const { return k_.rows(); }
  const RealMatrix& matrix() const { return k_; }
  double operator()(Index i, Index j) const { return k_(i, j); }
  KernelSource source() const { return source_; }
  double trace() const { return k_.trace(); }

  // Ascending.
  const RealVector& eigenvalues() const { return eigenvalues_; }
  const RealMatrix& eigenvectors() const { return eigenvectors_; }
  double min_eigenvalue() const { return eigenvalues_.size() ? eigenvalues_[0] : 0.0; }
  double max_eigenvalue() const { return eigenvalues_.size() ? eigenvalues_[eigenvalues_.size() - 1] : 0.0; }

 private:
  RealMatrix k_;
  KernelSource source_;
  RealVector eigenvalues_;
  RealMatrix eigenvectors_;
};

// K = J^T J for a (parameter count) x (points) Jacobian.
inline KernelMatrix gram_from_jacobian(const RealMatrix& jacobian, KernelSource source = KernelSource::Empirical) {
  if (!jacobian.allFinite()) throw ContractViolation("gram_from_jacobian: non-finite entry");
  RealMatrix k = jacobian.transpose() * jacobian;
  return {std::move(k), source};
}

// f(x; θ) ≈ f(x; θ0) + ∇f(x; θ0)^T (θ - θ0) on the training inputs.
struct LinearizedModel {
  RealVector initial_outputs;
  KernelMatrix kernel;
  RealVector targets;

  LinearizedModel(RealVector f0, KernelMatrix k, RealVector y)
      : initial_outputs(std::move(f0)), kernel(std::move(k)), targets(std::move(y)) {
    if (initial_outputs.size() != kernel.size() || targets.size() != kernel.size())
      throw ShapeError("LinearizedModel: f0, K and y sizes differ");
  }
};

// f(t) = y + V e^{-Λt} V^T (f0 - y), the solution of df/dt = -K (f - y).
inline RealVector flow_solution(const LinearizedModel& model, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("flow_solution: t must be finite and >= 0");
  const RealVector& y = model.targets;
  if (t == 0.0) return model.initial_outputs;
  const RealMatrix& v = model.kernel.eigenvectors();
  const RealVector decay = (-model.kernel.eigenvalues().array() * t).exp().matrix();
  const RealVector r0 = v.transpose() * (model.initial_outputs - y);
  return y + v * decay.cwiseProduct(r0);
}

struct GradientDescentTrajectory {
  // outputs[k] is f = F a after k steps; outputs[0] is the initial f.
  std::vector<RealVector> outputs;
  std::vector<double> losses;
  RealVector coefficients;
};

// Explicit Euler on L(a) = ½‖F a - y‖²: a ← a - η Fᵀ(F a - y). Aborts with
// StepSizeError once the loss exceeds 10x its initial value.
inline GradientDescentTrajectory simulate_gradient_descent(const RealMatrix& features, const RealVector& targets,
                                                           const RealVector& initial_coefficients,
                                                           double learning_rate, std::size_t steps) {
  if (!(learning_rate > 0.0)) throw DomainError("simulate_gradient_descent: learning rate must be > 0");
  if (features.rows() != targets.size() || features.cols() != initial_coefficients.size())
    throw ShapeError("simulate_gradient_descent: F, y and a0 are not conformable");
  GradientDescentTrajectory traj;
  traj.outputs.reserve(steps + 1);
  traj.losses.reserve(steps + 1);
  RealVector a = initial_coefficients;
  RealVector f = features * a;
  const double initial_loss = 0.5 * (f - targets).squaredNorm();
  const double floor = 1e-24 * (1.0 + targets.squaredNorm());
  traj.outputs.push_back(f);
  traj.losses.push_back(initial_loss);
  for (std::size_t step = 0; step < steps; ++step) {
    a -= learning_rate * (features.transpose() * (f - targets));
    f = features * a;
    const double loss = 0.5 * (f - targets).squaredNorm();
    if (!std::isfinite(loss) || (loss > 10.0 * initial_loss && loss > floor))
      throw StepSizeError("simulate_gradient_descent: loss grew above 10x its initial value at step " +
                          std::to_string(step + 1) + "; reduce the learning rate");
    traj.outputs.push_back(f);
    traj.losses.push_back(loss);
  }
  traj.coefficients = std::move(a);
  return traj;
}

// 1e-8 · Tr(K) / P.
inline double default_ridge(const KernelMatrix& k) {
  return k.size() == 0 ? 0.0 : 1e-8 * k.trace() / static_cast<double>(k.size());
}

// Coefficients c = (K + ridge I)^{-1} y. Eigenvalues at or below
// 1e-10 · λ_max are treated as zero, which makes ridge = 0 on a singular
// kernel the pseudoinverse solution.
inline RealVector kernel_regression_weights(const KernelMatrix& k, const RealVector& targets, double ridge) {
  if (!(ridge >= 0.0)) throw DomainError("kernel_regression: ridge must be >= 0");
  if (targets.size() != k.size()) throw ShapeError("kernel_regression: K and y sizes differ");
  const RealVector shifted = k.eigenvalues().array() + ridge;
  const double cutoff = 1e-10 * std::max(0.0, shifted.maxCoeff());
  RealVector inv(shifted.size());
  for (Index i = 0; i < shifted.size(); ++i) inv[i] = shifted[i] > cutoff ? 1.0 / shifted[i] : 0.0;
  const RealMatrix& v = k.eigenvectors();
  return v * inv.cwiseProduct(v.transpose() * targets);
}

// k_cross^T (K + ridge I)^{-1} y.
inline double kernel_regression(const KernelMatrix& k, const RealVector& targets, const RealVector& k_cross,
                                double ridge) {
  if (k_cross.size() != k.size()) throw ShapeError("kernel_regression: cross-kernel length differs from P");
  return k_cross.dot(kernel_regression_weights(k, targets, ridge));
}

// Batched: one row of `cross` per test point.
inline RealVector kernel_regression(const KernelMatrix& k, const RealVector& targets, const RealMatrix& cross,
                                    double ridge) {
  if (cross.cols() != k.size()) throw ShapeError("kernel_regression: cross-kernel width differs from P");
  return cross * kernel_regression_weights(k, targets, ridge);
}

}  // namespace qntk
