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

// Quantum ensemble model
//
//   f(x) = sqrt(d/N) · sum_n a_n <0|U_n^† S(x)^† W_n^† H W_n S(x) U_n|0>,
//
// its feature matrix, minimum-norm least-squares fit, empirical tangent
// kernel, and the Haar expectation of that kernel.

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qntk/encodings.hpp"
#include "qntk/errors.hpp"
#include "qntk/linalg.hpp"
#include "qntk/ntk.hpp"
#include "qntk/rng.hpp"

namespace qntk {

struct EnsembleTerm {
  double weight = 0.0;
  UnitaryMatrix u;
  UnitaryMatrix w;
};

class EnsembleSpec {
 public:
  EnsembleSpec(std::vector<EnsembleTerm> terms, Observable observable, EncodingSpec encoding)
      : terms_(std::move(terms)), observable_(std::move(observable)), encoding_(std::move(encoding)) {
    if (terms_.empty()) throw DimensionError("EnsembleSpec: at least one term is required");
    const Index d = encoding_.dim();
    if (observable_.dim() != d) throw ShapeError("EnsembleSpec: observable dimension differs from encoding");
    for (const auto& t : terms_)
      if (t.u.dim() != d || t.w.dim() != d) throw ShapeError("EnsembleSpec: unitary dimension differs from d");
    scale_ = std::sqrt(static_cast<double>(d)) / std::sqrt(static_cast<double>(terms_.size()));
  }

  // N terms with U_n, W_n drawn i.i.d. from the Haar measure; term n uses
  // substream n of `seed`. Weights start at zero.
  static EnsembleSpec sample_haar(Index terms, const EncodingSpec& encoding, Observable observable,
                                  std::uint64_t seed) {
    if (terms < 1) throw DimensionError("EnsembleSpec::sample_haar: N must be >= 1");
    const Index d = encoding.dim();
    std::vector<std::optional<EnsembleTerm>> slots(static_cast<std::size_t>(terms));
    parallel_for(slots.size(), [&](std::size_t n) {
      Engine rng = make_stream(seed, n);
      UnitaryMatrix u = sample_haar_unitary(d, rng);
      UnitaryMatrix w = sample_haar_unitary(d, rng);
      slots[n] = EnsembleTerm{0.0, std::move(u), std::move(w)};
    });
    std::vector<EnsembleTerm> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return {std::move(out), std::move(observable), encoding};
  }

  Index size() const { return static_cast<Index>(terms_.size()); }
  Index dim() const { return encoding_.dim(); }
  double scale() const { return scale_; }
  const std::vector<EnsembleTerm>& terms() const { return terms_; }
  const Observable& observable() const { return observable_; }
  const EncodingSpec& encoding() const { return encoding_; }

  RealVector weights() const {
    RealVector a(size());
    for (Index n = 0; n < size(); ++n) a[n] = terms_[static_cast<std::size_t>(n)].weight;
    return a;
  }

  EnsembleSpec with_weights(const RealVector& a) const {
    if (a.size() != size()) throw ShapeError("EnsembleSpec::with_weights: length differs from N");
    EnsembleSpec copy = *this;
    for (Index n = 0; n < size(); ++n) copy.terms_[static_cast<std::size_t>(n)].weight = a[n];
    return copy;
  }

 private:
  std::vector<EnsembleTerm> terms_;
  Observable observable_;
  EncodingSpec encoding_;
  double scale_ = 1.0;
};

struct Dataset {
  RealVector inputs;
  RealVector targets;

  Dataset(RealVector x, RealVector y) : inputs(std::move(x)), targets(std::move(y)) {
    if (inputs.size() != targets.size()) throw ShapeError("Dataset: inputs and targets differ in length");
    if (!inputs.allFinite() || !targets.allFinite()) throw DomainError("Dataset: non-finite entry");
  }

  Index size() const { return inputs.size(); }
};

// |psi_n(x)> = W_n S(x) U_n |0>.
inline ComplexVector ensemble_state(const EnsembleTerm& term, const RealVector& phases) {
  ComplexVector v = term.u.matrix().col(0);
  for (Index k = 0; k < v.size(); ++k) v[k] *= std::polar(1.0, phases[k]);
  return term.w.matrix() * v;
}

// Entry n is scale · <psi_n(x)|H|psi_n(x)>; this is also ∇_a f(x).
inline RealVector feature_row(const EnsembleSpec& spec, double x) {
  const RealVector phases = spec.encoding().phases(x);
  RealVector row(spec.size());
  for (Index n = 0; n < spec.size(); ++n)
    row[n] = spec.scale() * expectation(ensemble_state(spec.terms()[static_cast<std::size_t>(n)], phases),
                                        spec.observable());
  return row;
}

// P x N matrix of feature rows.
inline RealMatrix feature_matrix(const EnsembleSpec& spec, const RealVector& inputs) {
  RealMatrix f(inputs.size(), spec.size());
  parallel_for(static_cast<std::size_t>(inputs.size()),
               [&](std::size_t p) { f.row(static_cast<Index>(p)) = feature_row(spec, inputs[static_cast<Index>(p)]); });
  return f;
}

inline double predict(const EnsembleSpec& spec, const RealVector& a, double x) {
  if (a.size() != spec.size()) throw ShapeError("predict: weight vector length differs from N");
  return a.dot(feature_row(spec, x));
}

inline double predict(const EnsembleSpec& spec, double x) { return predict(spec, spec.weights(), x); }

struct LeastSquaresFit {
  RealVector coefficients;
  double residual_norm = 0.0;
  Index rank = 0;
};

// Minimum-norm solution of min_a ‖F a - y‖ through the pseudoinverse;
// singular values at or below tol · σ_max count as zero.
inline LeastSquaresFit fit_least_squares(const RealMatrix& features, const RealVector& targets, double tol = 1e-10) {
  if (features.rows() < 1 || features.cols() < 1) throw DimensionError("fit_least_squares: F must be non-empty");
  if (features.rows() != targets.size()) throw ShapeError("fit_least_squares: F rows differ from target count");
  if (!(tol >= 0.0)) throw DomainError("fit_least_squares: tol must be >= 0");
  LeastSquaresFit fit;
  fit.coefficients = RealVector::Zero(features.cols());
  Eigen::BDCSVD<RealMatrix> svd(features, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sigma = svd.singularValues();
  const double cutoff = sigma.size() ? tol * sigma[0] : 0.0;
  RealVector projected = svd.matrixU().transpose() * targets;
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma[i] > cutoff && sigma[i] > 0.0) {
      projected[i] /= sigma[i];
      ++fit.rank;
    } else {
      projected[i] = 0.0;
    }
  }
  fit.coefficients = svd.matrixV() * projected;
  fit.residual_norm = (features * fit.coefficients - targets).norm();
  return fit;
}

// K = F Fᵀ.
inline KernelMatrix empirical_kernel(const RealMatrix& features) {
  return {features * features.transpose(), KernelSource::Empirical};
}

namespace detail {
inline void require_kernel_dim(Index d, const char* where) {
  if (d < 2) throw DimensionError(std::string(where) + ": d must be >= 2");
}
}  // namespace detail

// Haar expectation of K(x, x') as a function of s = |Tr(S(x')S(x)^†)|^2:
//   (d^3+d^2-d-s) / (d (d^3+d^2-d-1)) · Tr(H)^2 + (s-1)/(d^3+d^2-d-1) · Tr(H^2).
inline double expected_kernel(Index d, const Observable& h, double s) {
  detail::require_kernel_dim(d, "expected_kernel");
  if (h.dim() != d) throw ShapeError("expected_kernel: observable dimension differs from d");
  const double dd = static_cast<double>(d);
  if (!(s >= 0.0 && s <= dd * dd * (1.0 + 1e-12))) throw DomainError("expected_kernel: s must lie in [0, d^2]");
  const double denom = dd * dd * dd + dd * dd - dd - 1.0;
  const double tr = h.trace();
  return (dd * dd * dd + dd * dd - dd - s) / (dd * denom) * tr * tr + (s - 1.0) / denom * h.trace_sq();
}

// Traceless H with Tr(H^2) = d (Pauli strings): d (s-1) / (d^3+d^2-d-1).
inline double expected_kernel_limit(Index d, double s) {
  detail::require_kernel_dim(d, "expected_kernel_limit");
  const double dd = static_cast<double>(d);
  return dd * (s - 1.0) / (dd * dd * dd + dd * dd - dd - 1.0);
}

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  Index samples = 0;

  // (reference - mean) / SE; zero when both coincide with zero spread.
  double z_score(double reference) const {
    const double diff = reference - mean;
    if (standard_error == 0.0) return diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
    return diff / standard_error;
  }
};

// Mean and standard error of `values`, summed in index order.
inline McEstimate summarize(const std::vector<double>& values) {
  McEstimate est;
  est.samples = static_cast<Index>(values.size());
  if (values.empty()) return est;
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    est.standard_error = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
  return est;
}

// Monte Carlo estimate of E_{U,W} [ d · <psi|H|psi> <psi'|H|psi'> ] with
// psi = W S(x) U|0>, psi' = W S(x') U|0>. Sample i uses substream i of `seed`.
// When `left` is given every sampled U is replaced by left · U.
inline McEstimate mc_expected_kernel(Index d, const Observable& h, const EncodingSpec& encoding, double x,
                                     double x_prime, Index samples, std::uint64_t seed,
                                     const std::optional<UnitaryMatrix>& left = std::nullopt) {
  if (samples < 100) throw DomainError("mc_expected_kernel: at least 100 samples are required");
  if (encoding.dim() != d || h.dim() != d) throw ShapeError("mc_expected_kernel: dimensions differ");
  if (left && left->dim() != d) throw ShapeError("mc_expected_kernel: left multiplier dimension differs");
  const RealVector lambda = encoding.phases(x);
  const RealVector lambda_prime = encoding.phases(x_prime);
  const double dd = static_cast<double>(d);
  std::vector<double> values(static_cast<std::size_t>(samples));
  parallel_for(values.size(), [&](std::size_t i) {
    Engine rng = make_stream(seed, i);
    UnitaryMatrix u = sample_haar_unitary(d, rng);
    const UnitaryMatrix w = sample_haar_unitary(d, rng);
    if (left) u = matmul(*left, u);
    const EnsembleTerm term{0.0, std::move(u), w};
    values[i] = dd * expectation(ensemble_state(term, lambda), h) * expectation(ensemble_state(term, lambda_prime), h);
  });
  return summarize(values);
}

}  // namespace qntk
