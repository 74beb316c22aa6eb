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

// Shot-noise model of the Hadamard test for Tr(U). The probe-qubit
// expectations <X> = Re Tr(U)/d and <Y> = -Im Tr(U)/d are computed
// classically; only the ±1 measurement statistics are simulated.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qntk/encodings.hpp"
#include "qntk/errors.hpp"
#include "qntk/linalg.hpp"
#include "qntk/rng.hpp"

namespace qntk {

enum class ProbeBasis { X, Y };

// Minimal n with 2·exp(-n ε²/2) <= δ: Hoeffding for the mean of n outcomes in
// {-1, +1}.
inline std::int64_t hoeffding_shots(double epsilon, double delta) {
  return static_cast<std::int64_t>(std::ceil(2.0 * std::log(2.0 / delta) / (epsilon * epsilon)));
}

class ShotPlan {
 public:
  ShotPlan(double epsilon, double delta, std::int64_t shots_per_basis)
      : epsilon_(epsilon), delta_(delta), shots_(shots_per_basis) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("ShotPlan: epsilon must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("ShotPlan: delta must lie in (0, 1)");
    if (shots_per_basis < hoeffding_shots(epsilon, delta))
      throw DomainError("ShotPlan: " + std::to_string(shots_per_basis) + " shots cannot reach epsilon=" +
                        std::to_string(epsilon) + " at delta=" + std::to_string(delta));
  }

  // Fewest shots meeting (ε, δ) per basis.
  static ShotPlan for_accuracy(double epsilon, double delta) {
    if (!(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0)) throw DomainError("ShotPlan: invalid epsilon or delta");
    return {epsilon, delta, hoeffding_shots(epsilon, delta)};
  }

  // ε/2 with exactly 4x the shots.
  ShotPlan halved() const { return {epsilon_ / 2.0, delta_, 4 * shots_}; }

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  std::int64_t shots_per_basis() const { return shots_; }

 private:
  double epsilon_;
  double delta_;
  std::int64_t shots_;
};

// Expectation m of the probe measurement in `basis`.
inline double probe_expectation(const UnitaryMatrix& u, ProbeBasis basis) {
  const Complex tr = u.trace();
  const double d = static_cast<double>(u.dim());
  return basis == ProbeBasis::X ? tr.real() / d : -tr.imag() / d;
}

// Mean of `shots` ±1 outcomes with P(+1) = (1 + m)/2.
template <class Rng>
double hadamard_test(const UnitaryMatrix& u, ProbeBasis basis, std::int64_t shots, Rng& rng) {
  if (shots < 1) throw DomainError("hadamard_test: shots must be >= 1");
  const double m = probe_expectation(u, basis);
  const double p_plus = std::clamp(0.5 * (1.0 + m), 0.0, 1.0);
  std::binomial_distribution<std::int64_t> draw(shots, p_plus);
  const std::int64_t plus = draw(rng);
  return static_cast<double>(2 * plus - shots) / static_cast<double>(shots);
}

// d·X̂ - i·d·Ŷ.
template <class Rng>
Complex estimate_trace(const UnitaryMatrix& u, const ShotPlan& plan, Rng& rng) {
  const double d = static_cast<double>(u.dim());
  const double x = hadamard_test(u, ProbeBasis::X, plan.shots_per_basis(), rng);
  const double y = hadamard_test(u, ProbeBasis::Y, plan.shots_per_basis(), rng);
  return {d * x, -d * y};
}

struct OverlapEstimate {
  double estimate = 0.0;   // |T̂|², never negative
  double corrected = 0.0;  // |T̂|² minus the unbiased shot-noise variance; may be negative
  double error_bound = 0.0;  // holds when both parts are within d·ε (prob. >= 1 - 2δ)
  Complex trace_estimate;
};

// Plug-in estimate of s(x, x') = |Tr(S(x')S(x)^†)|^2 from two Hadamard tests.
// With r = √2·d·ε the error bound is 2 r |T̂| + r².
template <class Rng>
OverlapEstimate estimate_overlap_s(const EncodingSpec& spec, double x, double x_prime, const ShotPlan& plan, Rng& rng) {
  const UnitaryMatrix u = matmul(encode(spec, x_prime), adjoint(encode(spec, x)));
  const double d = static_cast<double>(u.dim());
  const std::int64_t shots = plan.shots_per_basis();
  const double xh = hadamard_test(u, ProbeBasis::X, shots, rng);
  const double yh = hadamard_test(u, ProbeBasis::Y, shots, rng);
  OverlapEstimate out;
  out.trace_estimate = Complex{d * xh, -d * yh};
  out.estimate = std::norm(out.trace_estimate);
  const double var = shots > 1 ? d * d * ((1.0 - xh * xh) + (1.0 - yh * yh)) / static_cast<double>(shots - 1) : 0.0;
  out.corrected = out.estimate - var;
  const double r = std::sqrt(2.0) * d * plan.epsilon();
  out.error_bound = 2.0 * r * std::abs(out.trace_estimate) + r * r;
  return out;
}

struct CalibrationResult {
  double epsilon = 0.0;
  double delta = 0.0;
  std::int64_t shots_per_basis = 0;
  std::size_t trials = 0;
  double failure_rate_real = 0.0;  // fraction with |Re T̂ - Re T| > d ε
  double failure_rate_imag = 0.0;
  // Quantiles of max(|Re error|, |Im error|)/d at 0.5, 0.9, 0.99.
  double error_q50 = 0.0;
  double error_q90 = 0.0;
  double error_q99 = 0.0;
};

// Repeats estimate_trace `trials` times; trial t uses substream t of `seed`.
inline CalibrationResult calibrate_trace_estimator(const UnitaryMatrix& u, const ShotPlan& plan, std::size_t trials,
                                                   std::uint64_t seed) {
  if (trials < 1) throw DomainError("calibrate_trace_estimator: trials must be >= 1");
  const Complex truth = u.trace();
  const double d = static_cast<double>(u.dim());
  std::vector<double> err_re(trials), err_im(trials);
  parallel_for(trials, [&](std::size_t t) {
    Engine rng = make_stream(seed, t);
    const Complex est = estimate_trace(u, plan, rng);
    err_re[t] = std::abs(est.real() - truth.real()) / d;
    err_im[t] = std::abs(est.imag() - truth.imag()) / d;
  });
  CalibrationResult r;
  r.epsilon = plan.epsilon();
  r.delta = plan.delta();
  r.shots_per_basis = plan.shots_per_basis();
  r.trials = trials;
  std::vector<double> worst(trials);
  std::size_t fail_re = 0, fail_im = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    fail_re += err_re[t] > plan.epsilon();
    fail_im += err_im[t] > plan.epsilon();
    worst[t] = std::max(err_re[t], err_im[t]);
  }
  r.failure_rate_real = static_cast<double>(fail_re) / static_cast<double>(trials);
  r.failure_rate_imag = static_cast<double>(fail_im) / static_cast<double>(trials);
  std::sort(worst.begin(), worst.end());
  auto quantile = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(trials))) - 1;
    return worst[std::min(idx, trials - 1)];
  };
  r.error_q50 = quantile(0.5);
  r.error_q90 = quantile(0.9);
  r.error_q99 = quantile(0.99);
  return r;
}

}  // namespace qntk
