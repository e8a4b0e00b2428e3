// JSON instance files.
//
//   {
//     "schema_version": "1",
//     "n": 1, "N": 1,
//     "A": [-1.0],              row-major, n*n entries
//     "B": [[1.0]],             N row-major matrices
//     "gamma": [1.0], "c": [0.0], "f": [0.0],
//     "K": 1.0,                 scalar (lifted to K*I) or row-major n*n
//     "coercivity_override": false   optional
//   }
//
// Unknown keys are rejected. Numbers are written in the shortest form that
// round-trips to the same double.

#ifndef DCDUAL_IO_HPP
#define DCDUAL_IO_HPP

#include "dcdual/problem.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace dcdual {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

namespace detail {

inline std::vector<double> number_array(const json& j, const char* key) {
  if (!j.is_array()) throw Error(ErrorCode::parse_error, std::string(key) + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const json& e : j) {
    if (!e.is_number()) throw Error(ErrorCode::parse_error, std::string(key) + " must contain numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline Matrix row_major(const std::vector<double>& values, int n, const char* key) {
  if (static_cast<long>(values.size()) != static_cast<long>(n) * n) {
    throw Error(ErrorCode::dimension_mismatch, std::string(key) + " has " + std::to_string(values.size()) +
                                                   " entries, expected " + std::to_string(n * n));
  }
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) m(i, k) = values[static_cast<std::size_t>(i * n + k)];
  }
  return m;
}

inline Vector to_vector(const std::vector<double>& values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
  return v;
}

inline int positive_int(const json& j, const char* key) {
  if (!j.is_number_integer()) throw Error(ErrorCode::parse_error, std::string(key) + " must be an integer");
  return j.get<int>();
}

}  // namespace detail

inline json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json matrix_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) a.push_back(m(i, k));
  }
  return a;
}

/// Nested rows, for reports where shape matters more than compactness.
inline json matrix_rows_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline RawInstance parse_instance(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::parse_error, "instance must be a JSON object");
  static const std::set<std::string> known = {"schema_version", "n", "N", "A", "B", "gamma",
                                              "c", "f", "K", "coercivity_override"};
  for (const auto& item : doc.items()) {
    if (known.count(item.key()) == 0) throw Error(ErrorCode::parse_error, "unknown field '" + item.key() + "'");
  }
  for (const char* key : {"schema_version", "n", "N", "A", "B", "gamma", "c", "f", "K"}) {
    if (!doc.contains(key)) throw Error(ErrorCode::parse_error, std::string("missing field '") + key + "'");
  }
  if (!doc["schema_version"].is_string() || doc["schema_version"].get<std::string>() != kSchemaVersion) {
    throw Error(ErrorCode::parse_error, std::string("schema_version must be \"") + kSchemaVersion + "\"");
  }

  RawInstance raw;
  raw.n = detail::positive_int(doc["n"], "n");
  raw.N = detail::positive_int(doc["N"], "N");
  if (raw.n <= 0 || raw.N <= 0) throw Error(ErrorCode::dimension_mismatch, "n and N must be positive");
  raw.A = detail::row_major(detail::number_array(doc["A"], "A"), raw.n, "A");
  if (!doc["B"].is_array()) throw Error(ErrorCode::parse_error, "B must be an array of matrices");
  for (const json& bj : doc["B"]) raw.B.push_back(detail::row_major(detail::number_array(bj, "B_j"), raw.n, "B_j"));
  raw.gamma = detail::to_vector(detail::number_array(doc["gamma"], "gamma"));
  raw.c = detail::to_vector(detail::number_array(doc["c"], "c"));
  raw.f = detail::to_vector(detail::number_array(doc["f"], "f"));
  const json& k = doc["K"];
  if (k.is_number()) {
    raw.set_scalar_k(k.get<double>());
  } else {
    raw.K = detail::row_major(detail::number_array(k, "K"), raw.n, "K");
  }
  if (doc.contains("coercivity_override")) {
    if (!doc["coercivity_override"].is_boolean()) {
      throw Error(ErrorCode::parse_error, "coercivity_override must be a boolean");
    }
    raw.coercivity_override = doc["coercivity_override"].get<bool>();
  }
  return raw;
}

inline RawInstance parse_instance_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
  return parse_instance(doc);
}

inline RawInstance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_instance_text(buffer.str());
}

/// K is always written as a full matrix.
inline json instance_json(const RawInstance& raw) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["n"] = raw.n;
  doc["N"] = raw.N;
  doc["A"] = matrix_json(raw.A);
  json b = json::array();
  for (const Matrix& bj : raw.B) b.push_back(matrix_json(bj));
  doc["B"] = std::move(b);
  doc["gamma"] = vector_json(raw.gamma);
  doc["c"] = vector_json(raw.c);
  doc["f"] = vector_json(raw.f);
  doc["K"] = matrix_json(raw.K);
  doc["coercivity_override"] = raw.coercivity_override;
  return doc;
}

inline json instance_json(const ProblemInstance& p) { return instance_json(p.raw()); }

/// FNV-1a over the canonical serialization.
inline std::string instance_digest(const ProblemInstance& p) {
  const std::string text = instance_json(p).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dcdual

#endif  // DCDUAL_IO_HPP
