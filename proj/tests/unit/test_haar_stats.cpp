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

#include "qntk/haar_stats.hpp"

namespace qntk {
namespace {

// Haar |psi_k|^2 are uniform on the simplex, so <psi|H|psi> has the
// B-spline density (N-1) Σ_k (h_k - y)_+^{N-2} / Π_{j≠k} (h_k - h_j).
double bspline_density(const std::vector<double>& h, double y) {
  const std::size_t n = h.size();
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double gap = h[k] - y;
    if (gap <= 0.0) continue;
    double denom = 1.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != k) denom *= h[k] - h[j];
    total += std::pow(gap, static_cast<double>(n - 2)) / denom;
  }
  return static_cast<double>(n - 1) * total;
}

SpectrumSpec spectrum(std::vector<double> v) {
  return SpectrumSpec::from_unsorted(Eigen::Map<RealVector>(v.data(), static_cast<Index>(v.size())));
}

TEST(Reference, CdfValues) {
  EXPECT_NEAR(ReferenceDistribution::beta(1.0, 3.0).cdf(0.5), 1.0 - 0.125, 1e-14);
  EXPECT_NEAR(ReferenceDistribution::laplace(0.0, 2.0).cdf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(ReferenceDistribution::laplace(0.0, 2.0).cdf(2.0), 1.0 - 0.5 * std::exp(-1.0), 1e-14);
  EXPECT_NEAR(ReferenceDistribution::normal(1.0, 4.0).cdf(3.0), 0.5 * std::erfc(-1.0 / std::sqrt(2.0)), 1e-14);
  EXPECT_EQ(ReferenceDistribution::uniform(0.0, 2.0).cdf(-1.0), 0.0);
  EXPECT_EQ(ReferenceDistribution::beta(1.0, 3.0).cdf(2.0), 1.0);
  EXPECT_NEAR(ReferenceDistribution::laplace(0.0, 0.5).variance(), 0.5, 1e-15);
  EXPECT_NEAR(ReferenceDistribution::beta(1.0, 63.0).mean(), 1.0 / 64.0, 1e-15);
}

TEST(Ks, AcceptsTrueLawAndRejectsWrongOne) {
  Engine rng(1);
  std::normal_distribution<double> n01;
  std::vector<double> v(5000);
  for (double& x : v) x = n01(rng);
  EXPECT_TRUE(ks_statistic(v, ReferenceDistribution::normal(0.0, 1.0)).passed());
  EXPECT_FALSE(ks_statistic(v, ReferenceDistribution::normal(0.3, 1.0)).passed());
  EXPECT_FALSE(ks_statistic(v, ReferenceDistribution::laplace(0.0, 1.0 / std::sqrt(2.0))).passed());
  EXPECT_NEAR(ks_statistic(v, ReferenceDistribution::normal(0.0, 1.0)).threshold, 1.63 / std::sqrt(5000.0), 1e-15);
  EXPECT_THROW(ks_statistic(std::vector<double>(10, 0.0), ReferenceDistribution::normal(0, 1)), DomainError);
}

TEST(Ks, StatisticOfPointMassAgainstUniform) {
  std::vector<double> v(100, 0.25);
  EXPECT_NEAR(ks_statistic(v, ReferenceDistribution::uniform(0.0, 1.0)).statistic, 0.75, 1e-15);
}

TEST(CoefficientLaws, PassAtModerateDimension) {
  const CoefficientLawReport r = verify_coefficient_laws(16, Observable::pauli_z_string(4), 10000, 31);
  for (const LawCheck& c : r.checks) EXPECT_TRUE(c.ks.passed()) << c.coefficient << " D=" << c.ks.statistic;
  // Diagonal weight: exact moments for Pauli H are mean 0, variance 1/(d+1).
  const DiagonalWeightReport& a = r.diagonal_weight;
  EXPECT_NEAR(a.exact_variance, 1.0 / 17.0, 1e-15);
  EXPECT_NEAR(a.empirical.variance, a.exact_variance, 0.1 * a.exact_variance);
  EXPECT_FALSE(a.ks_limit.passed());
  EXPECT_THROW(verify_coefficient_laws(4, Observable::pauli_z_string(2), 10000, 1), DimensionError);
}

TEST(Density, TwoLevelIsUniform) {
  const SpectrumSpec s = spectrum({1.0, -1.0});
  for (double y : {-0.99, -0.5, 0.0, 0.3, 0.98}) EXPECT_NEAR(observable_density(s, y), 0.5, 1e-12);
  EXPECT_EQ(observable_density(s, 1.5), 0.0);
  EXPECT_EQ(observable_density(s, -1.0), 0.0);
}

TEST(Density, ThreeLevelTriangle) {
  const SpectrumSpec s = spectrum({-1.0, 1.0, 0.0});
  for (double y : {-0.9, -0.4, -0.01, 0.2, 0.75}) EXPECT_NEAR(observable_density(s, y), 1.0 - std::abs(y), 1e-6);
  EXPECT_THROW(observable_density(s, 0.0), DomainError);
  EXPECT_NEAR(integrate_density(s), 1.0, 1e-6);
}

TEST(Density, MatchesBsplineOracle) {
  for (const std::vector<double> h : {std::vector<double>{2.0, 0.3, -1.0}, std::vector<double>{1.5, 0.7, -0.2, -2.0},
                                      std::vector<double>{3.0, 2.9, 0.0, -0.5}}) {
    const SpectrumSpec s = spectrum(h);
    for (int i = 1; i < 20; ++i) {
      const double y = s.smallest() + (s.largest() - s.smallest()) * (i + 0.37) / 20.0;
      if (y >= s.largest()) continue;
      const double oracle = bspline_density(h, y);
      EXPECT_NEAR(observable_density(s, y), oracle, 1e-5 * std::max(1.0, oracle)) << "y=" << y;
    }
    EXPECT_NEAR(integrate_density(s), 1.0, 1e-5);
  }
}

TEST(Density, MeanEqualsNormalizedTrace) {
  const std::vector<double> h{1.5, 0.7, -0.2, -2.0};
  const SpectrumSpec s = spectrum(h);
  using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
  double mean = 0.0;
  for (Index k = 0; k + 1 < s.size(); ++k)
    mean += Kronrod::integrate([&](double y) { return y * observable_density(s, y); }, s[k + 1], s[k], 10, 1e-8);
  EXPECT_NEAR(mean, 0.0, 1e-5);
}

TEST(Density, RejectsUnsupportedSpectra) {
  EXPECT_THROW(observable_density(spectrum({1.0, 1.0, 0.0}), 0.5), UnsupportedRepresentation);
  EXPECT_THROW(observable_density(spectrum({1, 2, 3, 4, 5}), 2.5), DimensionError);
}

TEST(Density, HistogramAgreesWithQuadrature) {
  const SpectrumSpec s = spectrum({1.0, 0.0, -1.0});
  const Histogram hist = mc_observable_density(s, 100000, 20, 5);
  EXPECT_NEAR(hist.integral(), 1.0, 1e-12);
  double chi2 = 0.0;
  for (std::size_t b = 0; b < hist.bins(); ++b) {
    const double q = density_interval_average(s, hist.bin_lo(b), hist.bin_hi(b));
    const double z = (hist.density[b] - q) / hist.standard_error[b];
    chi2 += z * z;
    EXPECT_LE(std::abs(z), 4.5) << "bin " << b;
  }
  // 20 degrees of freedom; the 0.1% quantile is about 45.3.
  EXPECT_LE(chi2, 45.3);
}

TEST(Moments, UnbiasedVariance) {
  const SampleMoments m = sample_moments({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.variance, 5.0 / 3.0);
}

}  // namespace
}  // namespace qntk
