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

// Reference distributions, Kolmogorov-Smirnov checks of the Haar coefficient
// laws, and the density of <psi|H|psi> for Haar-random states.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/laplace.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/uniform.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/factorials.hpp>

#include "qntk/ensemble.hpp"
#include "qntk/errors.hpp"
#include "qntk/linalg.hpp"
#include "qntk/qnn.hpp"
#include "qntk/rng.hpp"

namespace qntk {

// Beta(shape_a, shape_b), Laplace(location, scale), Normal(mean, variance),
// Uniform(lo, hi). Laplace is parametrized by its scale b (variance 2b²) and
// Normal by its variance.
class ReferenceDistribution {
 public:
  enum class Kind { Beta, Laplace, Normal, Uniform };

  static ReferenceDistribution beta(double shape_a, double shape_b) {
    if (!(shape_a > 0.0) || !(shape_b > 0.0)) throw DomainError("Beta: shapes must be > 0");
    return {Kind::Beta, shape_a, shape_b};
  }
  static ReferenceDistribution laplace(double location, double scale) {
    if (!std::isfinite(location) || !(scale > 0.0)) throw DomainError("Laplace: scale must be > 0");
    return {Kind::Laplace, location, scale};
  }
  static ReferenceDistribution normal(double mean, double variance) {
    if (!std::isfinite(mean) || !(variance > 0.0)) throw DomainError("Normal: variance must be > 0");
    return {Kind::Normal, mean, variance};
  }
  static ReferenceDistribution uniform(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) throw DomainError("Uniform: need lo < hi");
    return {Kind::Uniform, lo, hi};
  }

  Kind kind() const { return kind_; }
  double first() const { return p1_; }
  double second() const { return p2_; }

  std::string name() const {
    switch (kind_) {
      case Kind::Beta:
        return "Beta";
      case Kind::Laplace:
        return "Laplace";
      case Kind::Normal:
        return "Normal";
      case Kind::Uniform:
        return "Uniform";
    }
    return "";
  }

  double mean() const {
    switch (kind_) {
      case Kind::Beta:
        return p1_ / (p1_ + p2_);
      case Kind::Laplace:
      case Kind::Normal:
        return p1_;
      case Kind::Uniform:
        return 0.5 * (p1_ + p2_);
    }
    return 0.0;
  }

  double variance() const {
    switch (kind_) {
      case Kind::Beta:
        return p1_ * p2_ / ((p1_ + p2_) * (p1_ + p2_) * (p1_ + p2_ + 1.0));
      case Kind::Laplace:
        return 2.0 * p2_ * p2_;
      case Kind::Normal:
        return p2_;
      case Kind::Uniform:
        return (p2_ - p1_) * (p2_ - p1_) / 12.0;
    }
    return 0.0;
  }

  double cdf(double x) const {
    if (std::isnan(x)) throw DomainError("cdf: NaN argument");
    switch (kind_) {
      case Kind::Beta:
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        return boost::math::cdf(boost::math::beta_distribution<double>(p1_, p2_), x);
      case Kind::Laplace:
        if (std::isinf(x)) return x < 0 ? 0.0 : 1.0;
        return boost::math::cdf(boost::math::laplace_distribution<double>(p1_, p2_), x);
      case Kind::Normal:
        if (std::isinf(x)) return x < 0 ? 0.0 : 1.0;
        return boost::math::cdf(boost::math::normal_distribution<double>(p1_, std::sqrt(p2_)), x);
      case Kind::Uniform:
        if (x <= p1_) return 0.0;
        if (x >= p2_) return 1.0;
        return (x - p1_) / (p2_ - p1_);
    }
    return 0.0;
  }

 private:
  ReferenceDistribution(Kind kind, double p1, double p2) : kind_(kind), p1_(p1), p2_(p2) {}

  Kind kind_;
  double p1_;
  double p2_;
};

inline constexpr double kKsCriticalCoefficient = 1.63;  // asymptotic 1% level

struct KsResult {
  double statistic = 0.0;
  double threshold = 0.0;
  std::size_t samples = 0;
  bool passed() const { return statistic < threshold; }
};

// D = sup |F_n - F|, threshold 1.63/√n. Input need not be sorted.
inline KsResult ks_statistic(std::vector<double> samples, const ReferenceDistribution& dist) {
  if (samples.size() < 100) throw DomainError("ks_statistic: at least 100 samples are required");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = dist.cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kKsCriticalCoefficient / std::sqrt(n), samples.size()};
}

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

inline SampleMoments sample_moments(const std::vector<double>& v) {
  SampleMoments m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    for (double x : v) m.variance += (x - m.mean) * (x - m.mean);
    m.variance /= static_cast<double>(v.size() - 1);
  }
  return m;
}

struct LawCheck {
  std::string coefficient;  // e.g. "alpha_1"
  ReferenceDistribution law;
  KsResult ks;
  SampleMoments moments;
};

// The a_i law is reported, not asserted: empirical moments beside three
// candidate normal laws.
struct DiagonalWeightReport {
  SampleMoments empirical;
  double limit_mean = 1.0;            // N(1, (d-1)/(d+1) Tr(H^2))
  double limit_variance = 0.0;
  double independent_terms_mean = 0.0;      // Tr(H)/d
  double independent_terms_variance = 0.0;  // (d-1) Tr(H^2) / (d^2 (d+1))
  double exact_mean = 0.0;                  // Tr(H)/d
  double exact_variance = 0.0;              // (d Tr(H^2) - Tr(H)^2) / (d^2 (d+1))
  KsResult ks_limit;
  KsResult ks_independent_terms;
  KsResult ks_exact;
};

struct CoefficientLawReport {
  Index d = 0;
  Index samples = 0;
  std::uint64_t seed = 0;
  std::vector<LawCheck> checks;
  DiagonalWeightReport diagonal_weight;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const LawCheck& c) { return c.ks.passed(); });
  }
};

namespace detail {
inline KsResult ks_or_degenerate(const std::vector<double>& v, double mean, double variance) {
  if (!(variance > 0.0)) return {1.0, kKsCriticalCoefficient / std::sqrt(static_cast<double>(v.size())), v.size()};
  return ks_statistic(v, ReferenceDistribution::normal(mean, variance));
}
}  // namespace detail

// Samples (U, W) Haar, extracts the coefficients of pair (1, 2) and the first
// diagonal entries, and checks
//   alpha_1 ~ Beta(1, d-1),   Re/Im β_12 ~ Laplace(0, 1/(2d)),
//   Re/Im b_12 ~ N(0, Tr(H^2)/(2 d^2)).
inline CoefficientLawReport verify_coefficient_laws(Index d, const Observable& h, Index samples, std::uint64_t seed) {
  if (d < 8) throw DimensionError("verify_coefficient_laws: d must be >= 8");
  if (samples < 10000) throw DomainError("verify_coefficient_laws: at least 10^4 samples are required");
  if (h.dim() != d) throw ShapeError("verify_coefficient_laws: observable dimension differs from d");
  if (!h.diagonal_entries()) throw UnsupportedRepresentation("verify_coefficient_laws: observable must be diagonal");
  const std::size_t n = static_cast<std::size_t>(samples);
  std::vector<double> alpha(n), re_beta(n), im_beta(n), re_b(n), im_b(n), a1(n);
  const Index pair = pair_index(0, 1, d);
  parallel_for(n, [&](std::size_t i) {
    Engine rng = make_stream(seed, i);
    const UnitaryMatrix u = sample_haar_unitary(d, rng);
    const UnitaryMatrix w = sample_haar_unitary(d, rng);
    const QnnParams p = params_from_unitaries(u, w, h);
    alpha[i] = p.alpha[0];
    re_beta[i] = p.gamma[pair];
    im_beta[i] = p.delta[pair];
    re_b[i] = p.c[pair];
    im_b[i] = p.dd[pair];
    a1[i] = p.a[0];
  });

  const double dd = static_cast<double>(d);
  const double tr = h.trace();
  const double tr2 = h.trace_sq();
  CoefficientLawReport report;
  report.d = d;
  report.samples = samples;
  report.seed = seed;
  auto add = [&](std::string name, const std::vector<double>& v, ReferenceDistribution law) {
    report.checks.push_back({std::move(name), law, ks_statistic(v, law), sample_moments(v)});
  };
  add("alpha_1", alpha, ReferenceDistribution::beta(1.0, dd - 1.0));
  add("re_beta_12", re_beta, ReferenceDistribution::laplace(0.0, 1.0 / (2.0 * dd)));
  add("im_beta_12", im_beta, ReferenceDistribution::laplace(0.0, 1.0 / (2.0 * dd)));
  add("re_b_12", re_b, ReferenceDistribution::normal(0.0, tr2 / (2.0 * dd * dd)));
  add("im_b_12", im_b, ReferenceDistribution::normal(0.0, tr2 / (2.0 * dd * dd)));

  DiagonalWeightReport& a = report.diagonal_weight;
  a.empirical = sample_moments(a1);
  a.limit_mean = 1.0;
  a.limit_variance = (dd - 1.0) / (dd + 1.0) * tr2;
  a.independent_terms_mean = tr / dd;
  a.independent_terms_variance = (dd - 1.0) * tr2 / (dd * dd * (dd + 1.0));
  a.exact_mean = tr / dd;
  a.exact_variance = (dd * tr2 - tr * tr) / (dd * dd * (dd + 1.0));
  a.ks_limit = detail::ks_or_degenerate(a1, a.limit_mean, a.limit_variance);
  a.ks_independent_terms = detail::ks_or_degenerate(a1, a.independent_terms_mean, a.independent_terms_variance);
  a.ks_exact = detail::ks_or_degenerate(a1, a.exact_mean, a.exact_variance);
  return report;
}

// ---------------------------------------------------------------------------
// Density of <psi|H|psi>.

// Eigenvalues h_0 >= h_1 >= ... >= h_{N-1}.
class SpectrumSpec {
 public:
  explicit SpectrumSpec(RealVector eigenvalues) : h_(std::move(eigenvalues)) {
    if (h_.size() < 1) throw DimensionError("SpectrumSpec: empty spectrum");
    if (!h_.allFinite()) throw DomainError("SpectrumSpec: non-finite eigenvalue");
    for (Index k = 1; k < h_.size(); ++k)
      if (h_[k] > h_[k - 1]) throw DomainError("SpectrumSpec: eigenvalues must be in descending order");
  }

  static SpectrumSpec from_unsorted(RealVector values) {
    std::sort(values.data(), values.data() + values.size(), std::greater<>());
    return SpectrumSpec(std::move(values));
  }

  Index size() const { return h_.size(); }
  const RealVector& eigenvalues() const { return h_; }
  double operator[](Index k) const { return h_[k]; }
  double largest() const { return h_[0]; }
  double smallest() const { return h_[h_.size() - 1]; }

  bool is_degenerate() const {
    for (Index k = 1; k < h_.size(); ++k)
      if (h_[k] == h_[k - 1]) return true;
    return false;
  }

 private:
  RealVector h_;
};

struct QuadratureOptions {
  double relative_tolerance = 1e-6;
  unsigned max_depth = 15;
};

inline constexpr Index kMaxQuadratureLevels = 4;

// p(y) for y = <psi|H|psi>, psi Haar, by nested adaptive Gauss-Kronrod.
//
// In affine coordinates z_k = |xi_k|^2 the density is
//   (N-1)! ∫ δ(g(z) - y) dz / (1 + Σz)^N,   g(z) = (h_0 + Σ h_k z_k)/(1 + Σ z_k).
// The delta is removed by solving g = y for z_{N-1} and dividing by |∂g/∂z_{N-1}|
// at the root. The remaining variables z_1..z_{N-2} are integrated over
// {h_0 - y + Σ (h_k - y) z_k >= 0}: unbounded for h_k > y (mapped through
// z = u/(1-u)) and bounded by the running remainder for h_k < y.
inline double observable_density(const SpectrumSpec& spec, double y, const QuadratureOptions& opt = {}) {
  const Index n = spec.size();
  if (n < 2) throw DimensionError("observable_density: need at least two eigenvalues");
  if (n > kMaxQuadratureLevels) throw DimensionError("observable_density: the quadrature path supports N <= 4");
  if (!std::isfinite(y)) throw DomainError("observable_density: y must be finite");
  const RealVector& h = spec.eigenvalues();
  if (y >= h[0] || y <= h[n - 1]) return 0.0;
  if (spec.is_degenerate()) throw UnsupportedRepresentation("observable_density: degenerate spectrum");
  for (Index k = 1; k + 1 < n; ++k)
    if (y == h[k]) throw DomainError("observable_density: y coincides with an eigenvalue");

  Index gap = 1;  // h_{gap-1} > y > h_gap
  while (h[gap] > y) ++gap;

  const double hl = h[n - 1];
  const double factorial = boost::math::factorial<double>(static_cast<unsigned>(n - 1));
  const Index vars = n - 2;
  std::vector<double> z(static_cast<std::size_t>(vars), 0.0);

  auto integrand = [&]() {
    double sum_z = 0.0;
    double weighted = h[0];
    double remainder = h[0] - y;
    for (Index k = 1; k <= vars; ++k) {
      const double zk = z[static_cast<std::size_t>(k - 1)];
      sum_z += zk;
      weighted += h[k] * zk;
      remainder += (h[k] - y) * zk;
    }
    if (remainder < 0.0) return 0.0;
    const double root = remainder / (y - hl);
    const double denom = 1.0 + sum_z + root;
    const double slope = std::abs(hl * (1.0 + sum_z) - weighted) / (denom * denom);
    if (slope == 0.0) return 0.0;
    return factorial / (std::pow(denom, static_cast<double>(n)) * slope);
  };

  using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
  std::function<double(Index)> level = [&](Index k) -> double {
    if (k > vars) return integrand();
    double& zk = z[static_cast<std::size_t>(k - 1)];
    if (k < gap) {
      auto f = [&](double u) {
        const double one_minus = 1.0 - u;
        zk = u / one_minus;
        return level(k + 1) / (one_minus * one_minus);
      };
      return Kronrod::integrate(f, 0.0, 1.0, opt.max_depth, opt.relative_tolerance);
    }
    double remainder = h[0] - y;
    for (Index j = 1; j < k; ++j) remainder += (h[j] - y) * z[static_cast<std::size_t>(j - 1)];
    const double upper = std::max(0.0, remainder) / (y - h[k]);
    if (upper == 0.0) return 0.0;
    auto f = [&](double t) {
      zk = t;
      return level(k + 1);
    };
    return Kronrod::integrate(f, 0.0, upper, opt.max_depth, opt.relative_tolerance);
  };
  return level(1);
}

// Mean of p over [lo, hi] with 7-point Gauss-Legendre on each sub-interval
// between eigenvalues.
inline double density_interval_average(const SpectrumSpec& spec, double lo, double hi,
                                       const QuadratureOptions& opt = {}) {
  if (!(lo < hi)) throw DomainError("density_interval_average: need lo < hi");
  std::vector<double> cuts{lo};
  for (Index k = spec.size() - 1; k >= 0; --k)
    if (spec[k] > lo && spec[k] < hi) cuts.push_back(spec[k]);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total += boost::math::quadrature::gauss<double, 7>::integrate(
        [&](double y) { return observable_density(spec, y, opt); }, cuts[i], cuts[i + 1]);
  }
  return total / (hi - lo);
}

// ∫ p(y) dy over (h_{N-1}, h_0), split at the interior eigenvalues.
inline double integrate_density(const SpectrumSpec& spec, const QuadratureOptions& opt = {}) {
  using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
  double total = 0.0;
  for (Index k = 0; k + 1 < spec.size(); ++k) {
    if (spec[k] == spec[k + 1]) continue;
    total += Kronrod::integrate([&](double y) { return observable_density(spec, y, opt); }, spec[k + 1], spec[k],
                                opt.max_depth, 1e-8);
  }
  return total;
}

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;
  std::vector<double> density;
  std::vector<double> standard_error;
  std::size_t samples = 0;

  std::size_t bins() const { return counts.size(); }
  double width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  double bin_lo(std::size_t b) const { return lo + width() * static_cast<double>(b); }
  double bin_hi(std::size_t b) const { return lo + width() * static_cast<double>(b + 1); }

  double integral() const {
    double s = 0.0;
    for (double p : density) s += p * width();
    return s;
  }
};

// Normalized histogram of <psi|H|psi> over Haar states on [h_{N-1}, h_0]
// (widened to unit length around a fully degenerate spectrum). Per-bin
// standard errors are binomial.
inline Histogram mc_observable_density(const SpectrumSpec& spec, Index samples, std::size_t bins, std::uint64_t seed) {
  if (samples < 10000) throw DomainError("mc_observable_density: at least 10^4 samples are required");
  if (bins < 1) throw DomainError("mc_observable_density: at least one bin is required");
  Histogram hist;
  hist.lo = spec.smallest();
  hist.hi = spec.largest();
  if (hist.hi == hist.lo) {
    hist.lo -= 0.5;
    hist.hi += 0.5;
  }
  const std::size_t n = static_cast<std::size_t>(samples);
  std::vector<double> values(n);
  const Observable h = Observable::diagonal(spec.eigenvalues());
  parallel_for(n, [&](std::size_t i) {
    Engine rng = make_stream(seed, i);
    values[i] = expectation(sample_haar_state(spec.size(), rng), h);
  });
  hist.counts.assign(bins, 0);
  const double w = (hist.hi - hist.lo) / static_cast<double>(bins);
  for (double v : values) {
    auto b = static_cast<long long>(std::floor((v - hist.lo) / w));
    b = std::clamp<long long>(b, 0, static_cast<long long>(bins) - 1);
    ++hist.counts[static_cast<std::size_t>(b)];
  }
  hist.samples = n;
  hist.density.resize(bins);
  hist.standard_error.resize(bins);
  const double nn = static_cast<double>(n);
  for (std::size_t b = 0; b < bins; ++b) {
    const double p = static_cast<double>(hist.counts[b]) / nn;
    hist.density[b] = p / w;
    hist.standard_error[b] = std::sqrt(p * (1.0 - p) / nn) / w;
  }
  return hist;
}

}  // namespace qntk
