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

// CSV and JSON encodings. CSV files start with one '#' provenance line,
// followed by a header row; doubles use the shortest round-trip decimal form.
// JSON encodes complex entries as [re, im] pairs.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "qntk/encodings.hpp"
#include "qntk/ensemble.hpp"
#include "qntk/errors.hpp"
#include "qntk/haar_stats.hpp"
#include "qntk/linalg.hpp"
#include "qntk/qnn.hpp"
#include "qntk/trace_estimator.hpp"

namespace qntk {

using json = nlohmann::json;

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& provenance) : out_(path), path_(path) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    out_ << "# " << provenance << '\n';
  }

  void header(const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << '\n';
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

// Columns c0..c{n-1}, one row per matrix row.
inline void write_matrix_csv(const std::filesystem::path& path, const RealMatrix& m, const std::string& provenance,
                             const std::string& prefix = "c") {
  CsvWriter w(path, provenance);
  std::vector<std::string> cols;
  for (Index j = 0; j < m.cols(); ++j) cols.push_back(prefix + std::to_string(j));
  w.header(cols);
  std::vector<double> row(static_cast<std::size_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    w.row(row);
  }
}

// ---------------------------------------------------------------------------
// JSON.

inline json vector_to_json(const RealVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline RealVector vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const RealVector>(v.data(), static_cast<Index>(v.size()));
}

inline json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ShapeError("complex matrix JSON must be a non-empty array of rows");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.at(0).size());
  ComplexMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Index>(row.size()) != cols) throw ShapeError("complex matrix JSON rows differ in length");
    for (Index k = 0; k < cols; ++k) {
      const json& e = row.at(static_cast<std::size_t>(k));
      if (!e.is_array() || e.size() != 2) throw ShapeError("complex entries must be [re, im] pairs");
      m(i, k) = Complex{e[0].get<double>(), e[1].get<double>()};
    }
  }
  return m;
}

inline void to_json(json& j, const UnitaryMatrix& u) { j = matrix_to_json(u.matrix()); }
inline UnitaryMatrix unitary_from_json(const json& j) { return UnitaryMatrix(matrix_from_json(j)); }

inline void to_json(json& j, const Observable& h) {
  switch (h.kind()) {
    case Observable::Kind::Diagonal:
      j = {{"kind", "diagonal"}, {"entries", vector_to_json(*h.diagonal_entries())}};
      break;
    case Observable::Kind::PauliString:
      j = {{"kind", "pauli"}, {"letters", h.pauli_letters()}};
      break;
    case Observable::Kind::Dense:
      j = {{"kind", "dense"}, {"matrix", matrix_to_json(h.to_matrix())}};
      break;
  }
}

inline Observable observable_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "diagonal") return Observable::diagonal(vector_from_json(j.at("entries")));
  if (kind == "pauli") return Observable::pauli(j.at("letters").get<std::string>());
  if (kind == "dense") return Observable::dense(matrix_from_json(j.at("matrix")));
  throw DomainError("unknown observable kind '" + kind + "'");
}

inline void to_json(json& j, const EncodingSpec& e) {
  if (e.kind() != EncodingSpec::Kind::PauliZProduct)
    throw UnsupportedRepresentation("only PauliZProduct encodings serialize to JSON");
  j = {{"kind", "pauli_z_product"}, {"qubits", e.qubits()}, {"convention", to_string(e.convention())}};
}

inline EncodingSpec encoding_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "pauli_z_product") throw UnsupportedRepresentation("unknown encoding kind '" + kind + "'");
  return EncodingSpec::pauli_z_product(j.at("qubits").get<int>(),
                                       angle_convention_from_string(j.at("convention").get<std::string>()));
}

inline void to_json(json& j, const EnsembleSpec& spec) {
  json terms = json::array();
  for (const auto& t : spec.terms()) terms.push_back({{"weight", t.weight}, {"u", t.u}, {"w", t.w}});
  j = {{"dim", spec.dim()},
       {"scale", spec.scale()},
       {"observable", spec.observable()},
       {"encoding", spec.encoding()},
       {"terms", std::move(terms)}};
}

inline EnsembleSpec ensemble_from_json(const json& j) {
  std::vector<EnsembleTerm> terms;
  for (const json& t : j.at("terms"))
    terms.push_back({t.at("weight").get<double>(), unitary_from_json(t.at("u")), unitary_from_json(t.at("w"))});
  return {std::move(terms), observable_from_json(j.at("observable")), encoding_from_json(j.at("encoding"))};
}

inline void to_json(json& j, const Dataset& data) {
  j = {{"inputs", vector_to_json(data.inputs)}, {"targets", vector_to_json(data.targets)}};
}

inline Dataset dataset_from_json(const json& j) {
  return {vector_from_json(j.at("inputs")), vector_from_json(j.at("targets"))};
}

inline void to_json(json& j, const QnnParams& p) {
  j = {{"d", p.d},
       {"alpha", vector_to_json(p.alpha)},
       {"a", vector_to_json(p.a)},
       {"gamma", vector_to_json(p.gamma)},
       {"delta", vector_to_json(p.delta)},
       {"c", vector_to_json(p.c)},
       {"dd", vector_to_json(p.dd)}};
}

inline QnnParams qnn_params_from_json(const json& j) {
  return QnnParams::free(j.at("d").get<Index>(), vector_from_json(j.at("alpha")), vector_from_json(j.at("a")),
                         vector_from_json(j.at("gamma")), vector_from_json(j.at("delta")),
                         vector_from_json(j.at("c")), vector_from_json(j.at("dd")));
}

// Reports.

inline void to_json(json& j, const McEstimate& e) {
  j = {{"mean", e.mean}, {"standard_error", e.standard_error}, {"samples", e.samples}};
}

inline void to_json(json& j, const KsResult& r) {
  j = {{"statistic", r.statistic}, {"threshold", r.threshold}, {"samples", r.samples}, {"pass", r.passed()}};
}

inline void to_json(json& j, const ReferenceDistribution& d) {
  const char* second = d.kind() == ReferenceDistribution::Kind::Beta      ? "shape_b"
                       : d.kind() == ReferenceDistribution::Kind::Laplace ? "scale"
                       : d.kind() == ReferenceDistribution::Kind::Normal  ? "variance"
                                                                          : "hi";
  const char* first = d.kind() == ReferenceDistribution::Kind::Beta      ? "shape_a"
                      : d.kind() == ReferenceDistribution::Kind::Uniform ? "lo"
                      : d.kind() == ReferenceDistribution::Kind::Normal  ? "mean"
                                                                         : "location";
  j = {{"name", d.name()}, {first, d.first()}, {second, d.second()}};
}

inline void to_json(json& j, const SampleMoments& m) { j = {{"mean", m.mean}, {"variance", m.variance}}; }

inline void to_json(json& j, const LawCheck& c) {
  j = {{"coefficient", c.coefficient}, {"law", c.law}, {"ks", c.ks}, {"sample_moments", c.moments}};
}

inline void to_json(json& j, const CoefficientLawReport& r) {
  const DiagonalWeightReport& a = r.diagonal_weight;
  j = {{"d", r.d},
       {"samples", r.samples},
       {"seed", r.seed},
       {"laws", r.checks},
       {"all_pass", r.all_passed()},
       {"a_1",
        {{"empirical", a.empirical},
         {"limit_law", {{"mean", a.limit_mean}, {"variance", a.limit_variance}, {"ks", a.ks_limit}}},
         {"independent_terms_law",
          {{"mean", a.independent_terms_mean},
           {"variance", a.independent_terms_variance},
           {"ks", a.ks_independent_terms}}},
         {"exact_moments_law", {{"mean", a.exact_mean}, {"variance", a.exact_variance}, {"ks", a.ks_exact}}}}}};
}

inline void to_json(json& j, const QnnKernelComparison& c) {
  j = {{"d", c.d},
       {"closed_form", c.closed_form},
       {"exact", c.exact},
       {"mc", c.mc},
       {"closed_form_z", c.closed_form_z},
       {"exact_z", c.exact_z},
       {"closed_form_agrees", c.closed_form_agrees},
       {"exact_agrees", c.exact_agrees}};
}

inline void to_json(json& j, const CalibrationResult& r) {
  j = {{"epsilon", r.epsilon},
       {"delta", r.delta},
       {"shots_per_basis", r.shots_per_basis},
       {"trials", r.trials},
       {"failure_rate_real", r.failure_rate_real},
       {"failure_rate_imag", r.failure_rate_imag},
       {"error_q50", r.error_q50},
       {"error_q90", r.error_q90},
       {"error_q99", r.error_q99}};
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace qntk
