#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "isq/common.hpp"
#include "isq/quantum.hpp"
#include "isq/stochastic.hpp"

namespace isq::io {

using nlohmann::json;

// Shortest round-trip decimal formatting, used wherever floats land in CSV so
// reruns are byte-identical.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    // try shorter representations for readability
    for (int prec = 1; prec < 17; ++prec) {
      char trial[32];
      std::snprintf(trial, sizeof(trial), "%.*g", prec, v);
      std::sscanf(trial, "%lf", &back);
      if (back == v) return trial;
    }
  }
  return buf;
}

// Real matrices: {"dim": C, "entries": row-major, "time": t}.
inline json stochastic_to_json(const StochasticMatrix& g) {
  std::vector<double> entries;
  entries.reserve(static_cast<std::size_t>(g.dim()) * g.dim());
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j) entries.push_back(g.matrix()(i, j));
  return json{{"dim", g.dim()}, {"entries", entries}, {"time", g.time()}};
}

inline StochasticMatrix stochastic_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  const auto entries = j.at("entries").get<std::vector<double>>();
  if (static_cast<int>(entries.size()) != dim * dim)
    throw SchemaViolation("entries length " + std::to_string(entries.size()) +
                          " does not match dim " + std::to_string(dim));
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int jj = 0; jj < dim; ++jj) m(i, jj) = entries[static_cast<std::size_t>(i * dim + jj)];
  return validate_stochastic(m, j.value("time", 0.0));
}

// Complex matrices: {"dim": C, "re": row-major, "im": row-major} plus "time"
// for propagators.
inline json complex_matrix_to_json(const CMatrix& u) {
  std::vector<double> re, im;
  re.reserve(static_cast<std::size_t>(u.size()));
  im.reserve(static_cast<std::size_t>(u.size()));
  for (int i = 0; i < u.rows(); ++i) {
    for (int j = 0; j < u.cols(); ++j) {
      re.push_back(u(i, j).real());
      im.push_back(u(i, j).imag());
    }
  }
  return json{{"dim", u.rows()}, {"re", re}, {"im", im}};
}

inline CMatrix complex_matrix_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (static_cast<int>(re.size()) != dim * dim || static_cast<int>(im.size()) != dim * dim)
    throw SchemaViolation("re/im length does not match dim " + std::to_string(dim));
  CMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int jj = 0; jj < dim; ++jj)
      m(i, jj) = Complex(re[static_cast<std::size_t>(i * dim + jj)],
                         im[static_cast<std::size_t>(i * dim + jj)]);
  return m;
}

// Complex vectors use the same layout with "dim" as the length.
inline CVector complex_vector_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (static_cast<int>(re.size()) != dim || static_cast<int>(im.size()) != dim)
    throw SchemaViolation("re/im length does not match dim " + std::to_string(dim));
  CVector v(dim);
  for (int i = 0; i < dim; ++i)
    v[i] = Complex(re[static_cast<std::size_t>(i)], im[static_cast<std::size_t>(i)]);
  return v;
}

inline json propagator_to_json(const Propagator& u) {
  json j = complex_matrix_to_json(u.matrix());
  j["time"] = u.time();
  return j;
}

inline Propagator propagator_from_json(const json& j) {
  return Propagator(complex_matrix_from_json(j), j.value("time", 0.0));
}

inline json hermitian_to_json(const HermitianOperator& h) {
  return complex_matrix_to_json(h.matrix());
}

inline HermitianOperator hermitian_from_json(const json& j) {
  return HermitianOperator(complex_matrix_from_json(j));
}

// Probability vectors as CSV with a "config,probability" header.
inline std::string probability_to_csv(const ProbabilityVector& p,
                                      const ConfigurationSpace* space = nullptr) {
  std::string out = "config,probability\n";
  for (int i = 0; i < p.dim(); ++i) {
    out += (space ? space->label(i) : std::to_string(i)) + "," + format_double(p[i]) + "\n";
  }
  return out;
}

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw OutputDirUnwritable("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaViolation("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

// Atomic file write: temp file in the same directory, then rename.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputDirUnwritable("cannot write " + tmp.string());
    out << content;
    if (!out.good()) throw OutputDirUnwritable("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw OutputDirUnwritable("cannot rename into " + path.string() + ": " + ec.message());
}

// FNV-1a 64-bit content checksum, hex-encoded. Used by run manifests to make
// byte-identity checkable at a glance.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OutputDirUnwritable("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace isq::io
