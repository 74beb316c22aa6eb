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

// Reproducible experiment runners behind the qntk command-line tool. Each
// experiment has a JSON config whose every key has an explicit default; user
// configs may only override known keys with values of the same type. Outputs
// are CSV/JSON files plus a manifest.json listing them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "qntk/encodings.hpp"
#include "qntk/ensemble.hpp"
#include "qntk/errors.hpp"
#include "qntk/haar_stats.hpp"
#include "qntk/io.hpp"
#include "qntk/linalg.hpp"
#include "qntk/ntk.hpp"
#include "qntk/qnn.hpp"
#include "qntk/rng.hpp"
#include "qntk/trace_estimator.hpp"

namespace qntk {

inline constexpr const char* kVersion = "0.1.0";

namespace experiments {

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> all{"fig1-regression",      "ensemble-kernel-mc", "qnn-kernel-mc",
                                            "verify-distributions", "observable-density", "trace-calibration",
                                            "ntk-flow"};
  return all;
}

inline bool is_known(const std::string& name) {
  return std::find(names().begin(), names().end(), name) != names().end();
}

inline json default_config(const std::string& experiment) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  json c = {{"experiment", experiment}, {"seed", 20240601}, {"output_dir", "out/" + experiment}};
  if (experiment == "fig1-regression") {
    c.update({{"qubits", 4},
              {"terms", 2000},
              {"train_points", 50},
              {"test_points", 200},
              {"x_min", 0.0},
              {"x_max", two_pi},
              {"convention", "half"},
              {"observable", "ZZZZ"},
              {"target", "trig3"},
              {"sv_tolerance", 1e-10},
              {"ridge", 0.0}});
  } else if (experiment == "ensemble-kernel-mc") {
    c.update({{"qubits", 2},
              {"convention", "half"},
              {"observable", "ZZ"},
              {"pairs", 10},
              {"samples", 100000},
              {"x_min", 0.0},
              {"x_max", two_pi}});
  } else if (experiment == "qnn-kernel-mc") {
    c.update({{"qubits", 3}, {"observable", "ZZZ"}, {"pairs", 3}, {"samples", 100000}, {"gram_points", 8},
              {"convention", "half"}});
  } else if (experiment == "verify-distributions") {
    c.update({{"qubits", 6}, {"observable", "ZZZZZZ"}, {"samples", 10000}});
  } else if (experiment == "observable-density") {
    c.update({{"spectrum", {1.0, 0.0, -1.0}}, {"samples", 1000000}, {"bins", 50}, {"relative_tolerance", 1e-6}});
  } else if (experiment == "trace-calibration") {
    c.update({{"qubits", 1},
              {"convention", "full"},
              {"x", 0.0},
              {"x_prime", std::numbers::pi / 2.0},
              {"epsilons", {0.1, 0.05, 0.025}},
              {"delta", 0.01},
              {"trials", 1000}});
  } else if (experiment == "ntk-flow") {
    c.update({{"qubits", 2},
              {"terms", 50},
              {"points", 8},
              {"convention", "half"},
              {"observable", "ZZ"},
              {"x_min", 0.0},
              {"x_max", two_pi},
              {"times", {0.0, 0.1, 1.0, 10.0}},
              {"total_time", 1.0},
              {"step_fraction", 0.01}});
  } else {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  return c;
}

namespace detail {

inline std::string type_name(const json& v) {
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  return v.type_name();
}

inline bool same_kind(const json& def, const json& v) {
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  if (def.is_array()) {
    if (!v.is_array()) return false;
    return std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
  }
  return def.type() == v.type();
}

}  // namespace detail

// Defaults overlaid with `user`. Unknown keys and type mismatches are
// ConfigErrors naming the field.
inline json resolve_config(const std::string& experiment, const json& user) {
  json resolved = default_config(experiment);
  if (user.is_null()) return resolved;
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string& key = it.key();
    if (!resolved.contains(key)) throw ConfigError("unknown key '" + key + "' for experiment " + experiment);
    if (!detail::same_kind(resolved[key], it.value()))
      throw ConfigError("field '" + key + "': expected " + detail::type_name(resolved[key]) + ", got " +
                        detail::type_name(it.value()));
    if (key == "experiment" && it.value().get<std::string>() != experiment)
      throw ConfigError("field 'experiment': config is for '" + it.value().get<std::string>() + "', not '" +
                        experiment + "'");
    if (key == "seed" && it.value().is_number_integer() && it.value().get<std::int64_t>() < 0 &&
        !it.value().is_number_unsigned())
      throw ConfigError("field 'seed': must be non-negative");
    resolved[key] = it.value();
  }
  return resolved;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 computation failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return hex.str();
}

// Hash of the resolved config; output_dir does not take part.
inline std::string config_hash(const json& resolved) {
  json copy = resolved;
  copy.erase("output_dir");
  return sha256_hex(copy.dump());
}

struct RunResult {
  json summary;
  std::vector<std::string> files;  // relative to the output directory, manifest excluded
};

class RunContext {
 public:
  explicit RunContext(const json& config)
      : config_(config),
        experiment_(config.at("experiment").get<std::string>()),
        seed_(config.at("seed").get<std::uint64_t>()),
        hash_(config_hash(config)),
        dir_(config.at("output_dir").get<std::string>()) {
    std::filesystem::create_directories(dir_);
  }

  const json& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& hash() const { return hash_; }
  const std::string& experiment() const { return experiment_; }

  std::string provenance() const {
    return "qntk " + std::string(kVersion) + " experiment=" + experiment_ + " seed=" + std::to_string(seed_) +
           " config_hash=" + hash_;
  }

  // Register and open a CSV output.
  CsvWriter csv(const std::string& name) {
    files_.push_back(name);
    return CsvWriter(dir_ / name, provenance());
  }

  // Register and write a JSON output; seed and config hash are embedded.
  void write(const std::string& name, json body) {
    files_.push_back(name);
    body["seed"] = seed_;
    body["config_hash"] = hash_;
    body["experiment"] = experiment_;
    write_json(dir_ / name, body);
  }

  // Register a file written by other means and return its path.
  std::filesystem::path output(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }

  const std::vector<std::string>& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }

  template <class T>
  T get(const char* key) const {
    return config_.at(key).get<T>();
  }

 private:
  json config_;
  std::string experiment_;
  std::uint64_t seed_;
  std::string hash_;
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

// ---------------------------------------------------------------------------
// Shared helpers.

inline double demo_target(double x) { return std::cos(x) + 3.0 * std::sin(2.0 * x) - 2.0 * std::cos(3.0 * x); }

inline std::function<double(double)> target_function(const std::string& name) {
  if (name == "trig3") return demo_target;
  if (name == "zero") return [](double) { return 0.0; };
  throw ConfigError("field 'target': expected 'trig3' or 'zero', got '" + name + "'");
}

inline Observable observable_for(const RunContext& ctx, int qubits) {
  const std::string letters = ctx.get<std::string>("observable");
  if (static_cast<int>(letters.size()) != qubits)
    throw ConfigError("field 'observable': Pauli string length must equal 'qubits'");
  try {
    return Observable::pauli(letters);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("field 'observable': ") + e.what());
  }
}

inline AngleConvention convention_for(const RunContext& ctx) {
  try {
    return angle_convention_from_string(ctx.get<std::string>("convention"));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("field 'convention': ") + e.what());
  }
}

inline void require_positive(const RunContext& ctx, const char* key, std::int64_t min = 1) {
  if (ctx.get<std::int64_t>(key) < min)
    throw ConfigError(std::string("field '") + key + "': must be >= " + std::to_string(min));
}

// `count` points on [lo, hi), or [lo, hi] with `closed`.
inline RealVector uniform_grid(double lo, double hi, Index count, bool closed) {
  RealVector x(count);
  const double denom = closed ? static_cast<double>(std::max<Index>(count - 1, 1)) : static_cast<double>(count);
  for (Index i = 0; i < count; ++i) x[i] = lo + (hi - lo) * static_cast<double>(i) / denom;
  return x;
}

inline double mse(const RealVector& a, const RealVector& b) {
  return a.size() ? (a - b).squaredNorm() / static_cast<double>(a.size()) : 0.0;
}

// Substreams of the master seed reserved per role, so that adding samples to
// one role never shifts another.
enum StreamRole : std::uint64_t { kEnsembleStream = 1, kInputStream = 2, kMonteCarloStream = 3, kExtraStream = 4 };

inline std::uint64_t role_seed(const RunContext& ctx, StreamRole role, std::uint64_t sub = 0) {
  return derive_seed(derive_seed(ctx.seed(), role), sub);
}

// ---------------------------------------------------------------------------
// Experiments.

inline json run_fig1_regression(RunContext& ctx) {
  const int qubits = ctx.get<int>("qubits");
  require_positive(ctx, "qubits");
  require_positive(ctx, "terms");
  require_positive(ctx, "train_points");
  require_positive(ctx, "test_points");
  const double lo = ctx.get<double>("x_min");
  const double hi = ctx.get<double>("x_max");
  if (!(lo < hi)) throw ConfigError("fields 'x_min'/'x_max': need x_min < x_max");
  const double ridge = ctx.get<double>("ridge");
  if (!(ridge >= 0.0)) throw ConfigError("field 'ridge': must be >= 0");
  const auto target = target_function(ctx.get<std::string>("target"));

  const EncodingSpec encoding = EncodingSpec::pauli_z_product(qubits, convention_for(ctx));
  const EnsembleSpec ensemble = EnsembleSpec::sample_haar(ctx.get<Index>("terms"), encoding,
                                                          observable_for(ctx, qubits), role_seed(ctx, kEnsembleStream));
  const RealVector x_train = uniform_grid(lo, hi, ctx.get<Index>("train_points"), false);
  const RealVector x_test = uniform_grid(lo, hi, ctx.get<Index>("test_points"), true);
  const RealVector y_train = x_train.unaryExpr(target);
  const RealVector y_test = x_test.unaryExpr(target);

  const RealMatrix f_train = feature_matrix(ensemble, x_train);
  const RealMatrix f_test = feature_matrix(ensemble, x_test);
  const LeastSquaresFit fit = fit_least_squares(f_train, y_train, ctx.get<double>("sv_tolerance"));
  const KernelMatrix k = empirical_kernel(f_train);
  const RealMatrix cross_train = f_train * f_train.transpose();
  const RealMatrix cross_test = f_test * f_train.transpose();

  const RealVector ols_train = f_train * fit.coefficients;
  const RealVector ols_test = f_test * fit.coefficients;
  const RealVector ker_train = kernel_regression(k, y_train, cross_train, ridge);
  const RealVector ker_test = kernel_regression(k, y_train, cross_test, ridge);

  auto dump = [&](const std::string& name, const RealVector& x, const RealVector& y, const RealVector& ols,
                  const RealVector& ker) {
    CsvWriter w = ctx.csv(name);
    w.header({"x", "target", "ols", "kernel", "gap"});
    for (Index i = 0; i < x.size(); ++i) w.row({x[i], y[i], ols[i], ker[i], std::abs(ols[i] - ker[i])});
  };
  dump("predictions_train.csv", x_train, y_train, ols_train, ker_train);
  dump("predictions_test.csv", x_test, y_test, ols_test, ker_test);
  ctx.write("ensemble_weights.json", {{"weights", vector_to_json(fit.coefficients)}});
  write_matrix_csv(ctx.output("kernel_train.csv"), k.matrix(), ctx.provenance(), "k");
  const double gap = std::max((ols_train - ker_train).cwiseAbs().maxCoeff(), (ols_test - ker_test).cwiseAbs().maxCoeff());
  json summary = {{"dim", ensemble.dim()},
                  {"terms", ensemble.size()},
                  {"rank", fit.rank},
                  {"residual_norm", fit.residual_norm},
                  {"train_mse_ols", mse(ols_train, y_train)},
                  {"train_mse_kernel", mse(ker_train, y_train)},
                  {"test_mse_ols", mse(ols_test, y_test)},
                  {"test_mse_kernel", mse(ker_test, y_test)},
                  {"max_prediction_gap", gap},
                  {"kernel_min_eigenvalue", k.min_eigenvalue()},
                  {"kernel_max_eigenvalue", k.max_eigenvalue()}};
  ctx.write("summary.json", summary);
  return summary;
}

inline json run_ensemble_kernel_mc(RunContext& ctx) {
  const int qubits = ctx.get<int>("qubits");
  require_positive(ctx, "qubits");
  require_positive(ctx, "pairs");
  require_positive(ctx, "samples", 100);
  const Observable h = observable_for(ctx, qubits);
  const EncodingSpec encoding = EncodingSpec::pauli_z_product(qubits, convention_for(ctx));
  const Index d = encoding.dim();
  if (d < 2) throw ConfigError("field 'qubits': need d >= 2");
  const double lo = ctx.get<double>("x_min");
  const double hi = ctx.get<double>("x_max");
  if (!(lo < hi)) throw ConfigError("fields 'x_min'/'x_max': need x_min < x_max");
  Engine input_rng(role_seed(ctx, kInputStream));
  std::uniform_real_distribution<double> ux(lo, hi);
  const Index pairs = ctx.get<Index>("pairs");
  const Index samples = ctx.get<Index>("samples");

  CsvWriter w = ctx.csv("ensemble_kernel_mc.csv");
  w.header({"x", "x_prime", "s", "formula", "mc_mean", "mc_se", "z"});
  double max_abs_z = 0.0;
  json rows = json::array();
  for (Index p = 0; p < pairs; ++p) {
    const double x = ux(input_rng);
    const double xp = (p == 0) ? x : ux(input_rng);
    const double s = overlap_s(encoding, x, xp);
    const double formula = expected_kernel(d, h, std::min(s, static_cast<double>(d * d)));
    const McEstimate mc = mc_expected_kernel(d, h, encoding, x, xp, samples,
                                             role_seed(ctx, kMonteCarloStream, static_cast<std::uint64_t>(p)));
    const double z = mc.z_score(formula);
    max_abs_z = std::max(max_abs_z, std::abs(z));
    w.row({x, xp, s, formula, mc.mean, mc.standard_error, z});
    rows.push_back({{"x", x}, {"x_prime", xp}, {"s", s}, {"formula", formula}, {"mc", mc}, {"z", z}});
  }
  json summary = {{"dim", d}, {"pairs", rows}, {"max_abs_z", max_abs_z}, {"all_within_4_se", max_abs_z <= 4.0}};
  ctx.write("summary.json", summary);
  return summary;
}

inline json run_qnn_kernel_mc(RunContext& ctx) {
  const int qubits = ctx.get<int>("qubits");
  require_positive(ctx, "qubits");
  require_positive(ctx, "pairs");
  require_positive(ctx, "samples", 100);
  require_positive(ctx, "gram_points", 2);
  const Observable h = observable_for(ctx, qubits);
  const Index d = h.dim();
  if (d < 2) throw ConfigError("field 'qubits': need d >= 2");
  Engine input_rng(role_seed(ctx, kInputStream));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  auto random_phases = [&] {
    RealVector l(d);
    for (Index k = 0; k < d; ++k) l[k] = phase(input_rng);
    return l;
  };

  CsvWriter w = ctx.csv("qnn_kernel_mc.csv");
  w.header({"pair", "closed_form", "exact", "mc_mean", "mc_se", "closed_form_z", "exact_z"});
  json comparisons = json::array();
  bool exact_all = true;
  bool closed_all = true;
  for (Index p = 0; p < ctx.get<Index>("pairs"); ++p) {
    const RealVector l = random_phases();
    const RealVector lp = random_phases();
    const QnnKernelComparison c = compare_expected_tangent_kernel(
        d, h, l, lp, ctx.get<Index>("samples"), role_seed(ctx, kMonteCarloStream, static_cast<std::uint64_t>(p)));
    exact_all = exact_all && c.exact_agrees;
    closed_all = closed_all && c.closed_form_agrees;
    w.row({static_cast<double>(p), c.closed_form, c.exact, c.mc.mean, c.mc.standard_error, c.closed_form_z,
           c.exact_z});
    json entry = c;
    entry["lambda"] = vector_to_json(l);
    entry["lambda_prime"] = vector_to_json(lp);
    comparisons.push_back(std::move(entry));
  }

  // Gram matrix of the tangent kernel for one Haar draw over an input grid.
  Engine draw(role_seed(ctx, kExtraStream));
  const UnitaryMatrix u = sample_haar_unitary(d, draw);
  const UnitaryMatrix wm = sample_haar_unitary(d, draw);
  const QnnParams params = params_from_unitaries(u, wm, h);
  const EncodingSpec encoding = EncodingSpec::pauli_z_product(qubits, convention_for(ctx));
  const Index g = ctx.get<Index>("gram_points");
  const RealVector xs = uniform_grid(0.0, 2.0 * std::numbers::pi, g, false);
  RealMatrix jac(params.parameter_count(), g);
  for (Index i = 0; i < g; ++i) jac.col(i) = gradient(params, encoding.phases(xs[i]));
  const KernelMatrix gram = gram_from_jacobian(jac, KernelSource::Qnn);
  double separable_gap = 0.0;
  double reduced_gap = 0.0;
  for (Index i = 0; i < g; ++i)
    for (Index j = 0; j < g; ++j) {
      const RealVector li = encoding.phases(xs[i]);
      const RealVector lj = encoding.phases(xs[j]);
      separable_gap = std::max(separable_gap, std::abs(tangent_kernel_separable_form(params, li, lj) - gram(i, j)));
      reduced_gap = std::max(reduced_gap, std::abs(tangent_kernel_reduced(params, li, lj) - gram(i, j)));
    }
  write_matrix_csv(ctx.output("gram.csv"), gram.matrix(), ctx.provenance(), "k");
  json summary = {{"dim", d},
                  {"comparisons", comparisons},
                  {"closed_form_agrees_all", closed_all},
                  {"exact_agrees_all", exact_all},
                  {"gram_min_eigenvalue", gram.min_eigenvalue()},
                  {"separable_form_max_abs_gap", separable_gap},
                  {"reduced_form_max_abs_gap", reduced_gap}};
  ctx.write("report.json", summary);
  return summary;
}

inline json run_verify_distributions(RunContext& ctx) {
  const int qubits = ctx.get<int>("qubits");
  require_positive(ctx, "qubits");
  const Observable h = observable_for(ctx, qubits);
  const CoefficientLawReport report =
      verify_coefficient_laws(h.dim(), h, ctx.get<Index>("samples"), role_seed(ctx, kMonteCarloStream));
  CsvWriter w = ctx.csv("ks.csv");
  w.header({"law_index", "statistic", "threshold", "pass", "sample_mean", "sample_variance", "law_mean",
            "law_variance"});
  for (std::size_t i = 0; i < report.checks.size(); ++i) {
    const LawCheck& c = report.checks[i];
    w.row({static_cast<double>(i), c.ks.statistic, c.ks.threshold, c.ks.passed() ? 1.0 : 0.0, c.moments.mean,
           c.moments.variance, c.law.mean(), c.law.variance()});
  }
  json body = report;
  ctx.write("report.json", body);
  return body;
}

inline json run_observable_density(RunContext& ctx) {
  require_positive(ctx, "samples", 10000);
  require_positive(ctx, "bins");
  const SpectrumSpec spec = SpectrumSpec::from_unsorted(vector_from_json(ctx.config().at("spectrum")));
  QuadratureOptions opt;
  opt.relative_tolerance = ctx.get<double>("relative_tolerance");
  const Histogram hist = mc_observable_density(spec, ctx.get<Index>("samples"), ctx.get<std::size_t>("bins"),
                                               role_seed(ctx, kMonteCarloStream));
  const bool quadrature = spec.size() >= 2 && spec.size() <= kMaxQuadratureLevels && !spec.is_degenerate();
  CsvWriter w = ctx.csv("density.csv");
  w.header({"bin_lo", "bin_hi", "mc_density", "mc_se", "quadrature_density", "z"});
  std::size_t within = 0;
  double max_abs_z = 0.0;
  for (std::size_t b = 0; b < hist.bins(); ++b) {
    double q = std::nan("");
    double z = std::nan("");
    if (quadrature) {
      q = density_interval_average(spec, hist.bin_lo(b), hist.bin_hi(b), opt);
      const double se = hist.standard_error[b];
      z = se > 0 ? (hist.density[b] - q) / se : (hist.density[b] == q ? 0.0 : INFINITY);
      within += std::abs(z) <= 3.0;
      max_abs_z = std::max(max_abs_z, std::abs(z));
    }
    w.row({hist.bin_lo(b), hist.bin_hi(b), hist.density[b], hist.standard_error[b], q, z});
  }
  json summary = {{"histogram_integral", hist.integral()}, {"bins", hist.bins()}, {"quadrature", quadrature}};
  if (quadrature) {
    summary["quadrature_integral"] = integrate_density(spec, opt);
    summary["bins_within_3_se"] = within;
    summary["max_abs_z"] = max_abs_z;
  }
  ctx.write("summary.json", summary);
  return summary;
}

inline json run_trace_calibration(RunContext& ctx) {
  const int qubits = ctx.get<int>("qubits");
  require_positive(ctx, "qubits");
  require_positive(ctx, "trials");
  const EncodingSpec encoding = EncodingSpec::pauli_z_product(qubits, convention_for(ctx));
  const double x = ctx.get<double>("x");
  const double xp = ctx.get<double>("x_prime");
  const UnitaryMatrix u = matmul(encode(encoding, xp), adjoint(encode(encoding, x)));
  const std::vector<double> eps = ctx.get<std::vector<double>>("epsilons");
  const double delta = ctx.get<double>("delta");
  if (eps.empty()) throw ConfigError("field 'epsilons': must not be empty");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("field 'delta': must lie in (0, 1)");

  CsvWriter w = ctx.csv("trace_calibration.csv");
  w.header({"epsilon", "delta", "shots", "shots_ratio", "failure_rate_real", "failure_rate_imag", "error_q50",
            "error_q90", "error_q99"});
  json rows = json::array();
  std::optional<ShotPlan> prev;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw ConfigError("field 'epsilons': entries must be > 0");
    const ShotPlan plan = (prev && eps[i] == prev->epsilon() / 2.0) ? prev->halved() : ShotPlan::for_accuracy(eps[i], delta);
    const double ratio = prev ? static_cast<double>(plan.shots_per_basis()) / static_cast<double>(prev->shots_per_basis())
                              : std::nan("");
    const CalibrationResult r = calibrate_trace_estimator(u, plan, ctx.get<std::size_t>("trials"),
                                                          role_seed(ctx, kMonteCarloStream, i));
    w.row({r.epsilon, r.delta, static_cast<double>(r.shots_per_basis), ratio, r.failure_rate_real, r.failure_rate_imag,
           r.error_q50, r.error_q90, r.error_q99});
    json entry = r;
    entry["shots_ratio"] = prev ? json(ratio) : json(nullptr);
    rows.push_back(std::move(entry));
    prev = plan;
  }
  json summary = {{"dim", u.dim()},
                  {"true_trace", {u.trace().real(), u.trace().imag()}},
                  {"calibration", rows}};
  ctx.write("summary.json", summary);
  return summary;
}

inline json run_ntk_flow(RunContext& ctx) {
  const int qubits = ctx.get<int>("qubits");
  require_positive(ctx, "qubits");
  require_positive(ctx, "terms");
  require_positive(ctx, "points");
  const double frac = ctx.get<double>("step_fraction");
  const double total = ctx.get<double>("total_time");
  if (!(frac > 0.0)) throw ConfigError("field 'step_fraction': must be > 0");
  if (!(total >= 0.0)) throw ConfigError("field 'total_time': must be >= 0");
  const EncodingSpec encoding = EncodingSpec::pauli_z_product(qubits, convention_for(ctx));
  const EnsembleSpec ensemble = EnsembleSpec::sample_haar(ctx.get<Index>("terms"), encoding,
                                                          observable_for(ctx, qubits), role_seed(ctx, kEnsembleStream));
  const RealVector xs = uniform_grid(ctx.get<double>("x_min"), ctx.get<double>("x_max"), ctx.get<Index>("points"), false);
  const RealVector y = xs.unaryExpr(&demo_target);
  const RealMatrix f = feature_matrix(ensemble, xs);
  const KernelMatrix k = empirical_kernel(f);
  const LinearizedModel model(RealVector::Zero(y.size()), k, y);

  std::vector<std::string> cols{"t"};
  for (Index p = 0; p < y.size(); ++p) cols.push_back("f" + std::to_string(p));
  cols.push_back("loss");
  {
    CsvWriter w = ctx.csv("flow.csv");
    w.header(cols);
    for (double t : ctx.get<std::vector<double>>("times")) {
      if (!(t >= 0.0)) throw ConfigError("field 'times': entries must be >= 0");
      const RealVector ft = flow_solution(model, t);
      std::vector<double> row{t};
      for (Index p = 0; p < ft.size(); ++p) row.push_back(ft[p]);
      row.push_back(0.5 * (ft - y).squaredNorm());
      w.row(row);
    }
  }
  const double eta = frac / std::max(k.max_eigenvalue(), 1e-300);
  const auto steps = static_cast<std::size_t>(std::llround(total / eta));
  const GradientDescentTrajectory traj = simulate_gradient_descent(f, y, RealVector::Zero(f.cols()), eta, steps);
  {
    cols[0] = "step";
    cols.insert(cols.begin() + 1, "t");
    CsvWriter w = ctx.csv("gradient_descent.csv");
    w.header(cols);
    for (std::size_t s = 0; s < traj.outputs.size(); ++s) {
      std::vector<double> row{static_cast<double>(s), eta * static_cast<double>(s)};
      for (Index p = 0; p < traj.outputs[s].size(); ++p) row.push_back(traj.outputs[s][p]);
      row.push_back(traj.losses[s]);
      w.row(row);
    }
  }
  const RealVector exact = flow_solution(model, eta * static_cast<double>(steps));
  const double rel = (traj.outputs.back() - exact).norm() / std::max(exact.norm(), 1e-300);
  json summary = {{"learning_rate", eta},
                  {"steps", steps},
                  {"eta_lambda_max", eta * k.max_eigenvalue()},
                  {"kernel_min_eigenvalue", k.min_eigenvalue()},
                  {"kernel_max_eigenvalue", k.max_eigenvalue()},
                  {"final_relative_gap_to_flow", rel}};
  ctx.write("summary.json", summary);
  return summary;
}

inline std::string compiler_version() {
#if defined(__VERSION__)
  return __VERSION__;
#else
  return "unknown";
#endif
}

// Runs a resolved config and writes manifest.json next to the outputs.
inline RunResult run(const json& resolved) {
  const auto start = std::chrono::steady_clock::now();
  RunContext ctx(resolved);
  const std::string& name = ctx.experiment();
  json summary;
  if (name == "fig1-regression") summary = run_fig1_regression(ctx);
  else if (name == "ensemble-kernel-mc") summary = run_ensemble_kernel_mc(ctx);
  else if (name == "qnn-kernel-mc") summary = run_qnn_kernel_mc(ctx);
  else if (name == "verify-distributions") summary = run_verify_distributions(ctx);
  else if (name == "observable-density") summary = run_observable_density(ctx);
  else if (name == "trace-calibration") summary = run_trace_calibration(ctx);
  else if (name == "ntk-flow") summary = run_ntk_flow(ctx);
  else throw ConfigError("unknown experiment '" + name + "'");
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = {{"experiment", name},
                   {"seed", ctx.seed()},
                   {"config_hash", ctx.hash()},
                   {"config", resolved},
                   {"versions",
                    {{"qntk", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"boost", BOOST_LIB_VERSION},
                     {"compiler", compiler_version()}}},
                   {"wall_time_seconds", wall},
                   {"files", ctx.files()}};
  write_json(ctx.dir() / "manifest.json", manifest);
  return {std::move(summary), ctx.files()};
}

}  // namespace experiments
}  // namespace qntk
