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

// Diagonal quantum neural network Y(x) = <0|U^† S(x)^† W^† H W S(x) U|0>
// with H = diag(h) and S(x) = diag(e^{i lambda(x)}), written as the Fourier
// sum
//
//   Y = sum_i alpha_i a_i
//       + 2 sum_{i<k} [cos θ_ik (γ_ik c_ik - δ_ik d_ik) - sin θ_ik (γ_ik d_ik + δ_ik c_ik)],
//
// θ_ik = λ_k - λ_i, over the coefficients
//   alpha_i = |u_i1|^2,   a_i = sum_j h_j |w_ji|^2,
//   β_ik = conj(u_i1) u_k1 = γ_ik + i δ_ik,
//   b_ik = sum_j h_j conj(w_ji) w_jk = c_ik + i d_ik.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qntk/ensemble.hpp"
#include "qntk/errors.hpp"
#include "qntk/linalg.hpp"
#include "qntk/rng.hpp"

namespace qntk {

constexpr Index pair_count(Index d) { return d * (d - 1) / 2; }

// Row-major position of the pair (i, k), i < k.
constexpr Index pair_index(Index i, Index k, Index d) { return i * d - i * (i + 1) / 2 + (k - i - 1); }

struct QnnParams {
  Index d = 0;
  RealVector alpha;  // length d
  RealVector a;      // length d
  RealVector gamma;  // Re β, length d(d-1)/2
  RealVector delta;  // Im β
  RealVector c;      // Re b
  RealVector dd;     // Im b

  // Free parameters; only lengths and finiteness are checked.
  static QnnParams free(Index d, RealVector alpha, RealVector a, RealVector gamma, RealVector delta, RealVector c,
                        RealVector dd) {
    QnnParams p{d, std::move(alpha), std::move(a), std::move(gamma), std::move(delta), std::move(c), std::move(dd)};
    p.validate();
    return p;
  }

  static QnnParams zeros(Index d) {
    const Index m = pair_count(d);
    return free(d, RealVector::Zero(d), RealVector::Zero(d), RealVector::Zero(m), RealVector::Zero(m),
                RealVector::Zero(m), RealVector::Zero(m));
  }

  Index parameter_count() const { return 2 * d + 4 * pair_count(d); }

  // Layout [alpha, a, gamma, delta, c, dd], the same as gradient().
  RealVector to_vector() const {
    RealVector v(parameter_count());
    v << alpha, a, gamma, delta, c, dd;
    return v;
  }

  static QnnParams from_vector(Index d, const RealVector& v) {
    const Index m = pair_count(d);
    if (v.size() != 2 * d + 4 * m) throw ShapeError("QnnParams::from_vector: wrong length");
    return free(d, v.segment(0, d), v.segment(d, d), v.segment(2 * d, m), v.segment(2 * d + m, m),
                v.segment(2 * d + 2 * m, m), v.segment(2 * d + 3 * m, m));
  }

  void validate() const {
    if (d < 1) throw DimensionError("QnnParams: d must be >= 1");
    const Index m = pair_count(d);
    if (alpha.size() != d || a.size() != d || gamma.size() != m || delta.size() != m || c.size() != m ||
        dd.size() != m)
      throw ShapeError("QnnParams: coefficient vector lengths are inconsistent with d");
    if (!alpha.allFinite() || !a.allFinite() || !gamma.allFinite() || !delta.allFinite() || !c.allFinite() ||
        !dd.allFinite())
      throw DomainError("QnnParams: non-finite coefficient");
  }
};

// Coefficients of the Fourier form extracted from (U, W, H). H must be
// diagonal in the computational basis.
inline QnnParams params_from_unitaries(const UnitaryMatrix& u, const UnitaryMatrix& w, const Observable& h) {
  const Index d = u.dim();
  if (w.dim() != d || h.dim() != d) throw ShapeError("params_from_unitaries: dimensions differ");
  const auto diag = h.diagonal_entries();
  if (!diag) throw UnsupportedRepresentation("params_from_unitaries: observable must be diagonal");
  const RealVector& hv = *diag;
  QnnParams p = QnnParams::zeros(d);
  const ComplexMatrix& um = u.matrix();
  const ComplexMatrix& wm = w.matrix();
  const ComplexVector u1 = um.col(0);
  p.alpha = u1.cwiseAbs2();
  // a = (|W|^2)^T h
  p.a = wm.cwiseAbs2().transpose() * hv;
  // B = W^† diag(h) W, so B(i, k) = sum_j h_j conj(w_ji) w_jk.
  const ComplexMatrix b = wm.adjoint() * (hv.cast<Complex>().asDiagonal() * wm);
  for (Index i = 0; i < d; ++i)
    for (Index k = i + 1; k < d; ++k) {
      const Index idx = pair_index(i, k, d);
      const Complex beta = std::conj(u1[i]) * u1[k];
      p.gamma[idx] = beta.real();
      p.delta[idx] = beta.imag();
      p.c[idx] = b(i, k).real();
      p.dd[idx] = b(i, k).imag();
    }
  return p;
}

namespace detail {
inline void require_phases(const QnnParams& p, const RealVector& lambda) {
  if (lambda.size() != p.d) throw ShapeError("qnn: phase vector length differs from d");
}
}  // namespace detail

inline double evaluate_Y(const QnnParams& p, const RealVector& lambda) {
  detail::require_phases(p, lambda);
  double y = p.alpha.dot(p.a);
  for (Index i = 0; i < p.d; ++i)
    for (Index k = i + 1; k < p.d; ++k) {
      const Index idx = pair_index(i, k, p.d);
      const double theta = lambda[k] - lambda[i];
      y += 2.0 * (std::cos(theta) * (p.gamma[idx] * p.c[idx] - p.delta[idx] * p.dd[idx]) -
                  std::sin(theta) * (p.gamma[idx] * p.dd[idx] + p.delta[idx] * p.c[idx]));
    }
  return y;
}

// <0|U^† S^† W^† H W S U|0> by statevector composition. S must be diagonal.
inline double evaluate_Y_direct(const UnitaryMatrix& u, const UnitaryMatrix& w, const Observable& h,
                                const UnitaryMatrix& s) {
  const Index d = u.dim();
  if (w.dim() != d || h.dim() != d || s.dim() != d) throw ShapeError("evaluate_Y_direct: dimensions differ");
  if (!s.is_diagonal()) throw UnsupportedRepresentation("evaluate_Y_direct: encoding block must be diagonal");
  const StateVector psi = apply(w, apply(s, apply(u, StateVector::basis(d))));
  return expectation(psi, h);
}

inline double normalized_Y(const QnnParams& p, const RealVector& lambda) {
  return evaluate_Y(p, lambda) / std::sqrt(static_cast<double>(p.d));
}

// ∂Y over [alpha, a, gamma, delta, c, dd].
inline RealVector gradient(const QnnParams& p, const RealVector& lambda) {
  detail::require_phases(p, lambda);
  const Index d = p.d;
  const Index m = pair_count(d);
  RealVector g(p.parameter_count());
  g.segment(0, d) = p.a;
  g.segment(d, d) = p.alpha;
  for (Index i = 0; i < d; ++i)
    for (Index k = i + 1; k < d; ++k) {
      const Index idx = pair_index(i, k, d);
      const double theta = lambda[k] - lambda[i];
      const double cs = std::cos(theta);
      const double sn = std::sin(theta);
      g[2 * d + idx] = 2.0 * cs * p.c[idx] - 2.0 * sn * p.dd[idx];
      g[2 * d + m + idx] = -2.0 * cs * p.dd[idx] - 2.0 * sn * p.c[idx];
      g[2 * d + 2 * m + idx] = 2.0 * cs * p.gamma[idx] - 2.0 * sn * p.delta[idx];
      g[2 * d + 3 * m + idx] = -2.0 * cs * p.delta[idx] - 2.0 * sn * p.gamma[idx];
    }
  return g;
}

// K(x, x') = ∇Y(x)ᵀ ∇Y(x'). This is the reference definition.
inline double tangent_kernel(const QnnParams& p, const RealVector& lambda, const RealVector& lambda_prime) {
  return gradient(p, lambda).dot(gradient(p, lambda_prime));
}

// Same value as tangent_kernel, after the γ·δ and c·d cross terms cancel:
//   Σa² + Σα² + 4 Σ_{i<k} cos(θ_ik - θ'_ik) (γ² + δ² + c² + d²).
inline double tangent_kernel_reduced(const QnnParams& p, const RealVector& lambda, const RealVector& lambda_prime) {
  detail::require_phases(p, lambda);
  detail::require_phases(p, lambda_prime);
  double k = p.a.squaredNorm() + p.alpha.squaredNorm();
  for (Index i = 0; i < p.d; ++i)
    for (Index j = i + 1; j < p.d; ++j) {
      const Index idx = pair_index(i, j, p.d);
      const double w = p.gamma[idx] * p.gamma[idx] + p.delta[idx] * p.delta[idx] + p.c[idx] * p.c[idx] +
                       p.dd[idx] * p.dd[idx];
      k += 4.0 * std::cos((lambda[j] - lambda[i]) - (lambda_prime[j] - lambda_prime[i])) * w;
    }
  return k;
}

// Separable expression
//   Σa² + Σα² + 8 Σ cos θ cos θ' (c² + γ²) + 8 Σ sin θ sin θ' (d² + δ²).
// Kept for comparison against tangent_kernel; it does not equal the
// gradient dot product in general.
inline double tangent_kernel_separable_form(const QnnParams& p, const RealVector& lambda,
                                            const RealVector& lambda_prime) {
  detail::require_phases(p, lambda);
  detail::require_phases(p, lambda_prime);
  double k = p.a.squaredNorm() + p.alpha.squaredNorm();
  for (Index i = 0; i < p.d; ++i)
    for (Index j = i + 1; j < p.d; ++j) {
      const Index idx = pair_index(i, j, p.d);
      const double t = lambda[j] - lambda[i];
      const double tp = lambda_prime[j] - lambda_prime[i];
      k += 8.0 * std::cos(t) * std::cos(tp) * (p.c[idx] * p.c[idx] + p.gamma[idx] * p.gamma[idx]);
      k += 8.0 * std::sin(t) * std::sin(tp) * (p.dd[idx] * p.dd[idx] + p.delta[idx] * p.delta[idx]);
    }
  return k;
}

namespace detail {
inline double phase_cosine_sum(const RealVector& lambda, const RealVector& lambda_prime) {
  double s = 0.0;
  const Index d = lambda.size();
  for (Index i = 0; i < d; ++i)
    for (Index k = i + 1; k < d; ++k) s += std::cos(lambda[k] - lambda[i] - lambda_prime[k] + lambda_prime[i]);
  return s;
}
}  // namespace detail

// Large-d closed form for E[K(x, x')]:
//   d + (2 + d(d-1) Tr(H^2)) / (d+1) + (4/d^2)(1 + Tr(H^2)) Σ_{i<k} cos(θ_ik - θ'_ik).
inline double expected_tangent_kernel(Index d, const Observable& h, const RealVector& lambda,
                                      const RealVector& lambda_prime) {
  detail::require_kernel_dim(d, "expected_tangent_kernel");
  if (h.dim() != d || lambda.size() != d || lambda_prime.size() != d)
    throw ShapeError("expected_tangent_kernel: dimensions differ");
  const double dd = static_cast<double>(d);
  const double tr2 = h.trace_sq();
  return dd + (2.0 + dd * (dd - 1.0) * tr2) / (dd + 1.0) +
         4.0 / (dd * dd) * (1.0 + tr2) * detail::phase_cosine_sum(lambda, lambda_prime);
}

// Exact finite-d Haar expectation of tangent_kernel, from the second moments
//   E Σa_i² = (Tr(H²) + Tr(H)²)/(d+1),          E Σα_i² = 2/(d+1),
//   E(γ²+δ²) = 1/(d(d+1)),   E(c²+d²) = (d Tr(H²) - Tr(H)²)/(d(d²-1)).
inline double expected_tangent_kernel_exact(Index d, const Observable& h, const RealVector& lambda,
                                            const RealVector& lambda_prime) {
  detail::require_kernel_dim(d, "expected_tangent_kernel_exact");
  if (h.dim() != d || lambda.size() != d || lambda_prime.size() != d)
    throw ShapeError("expected_tangent_kernel_exact: dimensions differ");
  const double dd = static_cast<double>(d);
  const double tr = h.trace();
  const double tr2 = h.trace_sq();
  const double pair_weight = (dd * tr2 - tr * tr) / (dd * (dd * dd - 1.0)) + 1.0 / (dd * (dd + 1.0));
  return (tr2 + tr * tr + 2.0) / (dd + 1.0) + 4.0 * pair_weight * detail::phase_cosine_sum(lambda, lambda_prime);
}

// Monte Carlo estimate of E[K(x, x')] over Haar (U, W). With `normalized` the
// model is Y/√d, which divides every kernel value by d.
inline McEstimate mc_expected_tangent_kernel(Index d, const Observable& h, const RealVector& lambda,
                                             const RealVector& lambda_prime, Index samples, std::uint64_t seed,
                                             bool normalized = false) {
  if (samples < 100) throw DomainError("mc_expected_tangent_kernel: at least 100 samples are required");
  if (h.dim() != d || lambda.size() != d || lambda_prime.size() != d)
    throw ShapeError("mc_expected_tangent_kernel: dimensions differ");
  const double norm = normalized ? 1.0 / static_cast<double>(d) : 1.0;
  std::vector<double> values(static_cast<std::size_t>(samples));
  parallel_for(values.size(), [&](std::size_t i) {
    Engine rng = make_stream(seed, i);
    const UnitaryMatrix u = sample_haar_unitary(d, rng);
    const UnitaryMatrix w = sample_haar_unitary(d, rng);
    values[i] = norm * tangent_kernel(params_from_unitaries(u, w, h), lambda, lambda_prime);
  });
  return summarize(values);
}

// Closed forms against Monte Carlo at one (λ, λ') pair.
struct QnnKernelComparison {
  Index d = 0;
  double closed_form = 0.0;  // expected_tangent_kernel
  double exact = 0.0;        // expected_tangent_kernel_exact
  McEstimate mc;
  double closed_form_z = 0.0;
  double exact_z = 0.0;
  bool closed_form_agrees = false;  // |z| <= 4
  bool exact_agrees = false;
};

inline QnnKernelComparison compare_expected_tangent_kernel(Index d, const Observable& h, const RealVector& lambda,
                                                           const RealVector& lambda_prime, Index samples,
                                                           std::uint64_t seed) {
  QnnKernelComparison r;
  r.d = d;
  r.closed_form = expected_tangent_kernel(d, h, lambda, lambda_prime);
  r.exact = expected_tangent_kernel_exact(d, h, lambda, lambda_prime);
  r.mc = mc_expected_tangent_kernel(d, h, lambda, lambda_prime, samples, seed);
  r.closed_form_z = r.mc.z_score(r.closed_form);
  r.exact_z = r.mc.z_score(r.exact);
  r.closed_form_agrees = std::abs(r.closed_form_z) <= 4.0;
  r.exact_agrees = std::abs(r.exact_z) <= 4.0;
  return r;
}

}  // namespace qntk
