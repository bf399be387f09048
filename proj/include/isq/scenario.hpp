#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "isq/classical.hpp"
#include "isq/common.hpp"
#include "isq/dilation.hpp"
#include "isq/division.hpp"
#include "isq/ehrenfest.hpp"
#include "isq/fock.hpp"
#include "isq/io.hpp"
#include "isq/parallel.hpp"
#include "isq/quantum.hpp"
#include "isq/rng.hpp"
#include "isq/stochastic.hpp"

namespace isq::run {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Scenario catalog
// ---------------------------------------------------------------------------

enum class ParamType { Number, Integer, String, IntList, NumberList };

struct ParamSpec {
  std::string key;
  ParamType type = ParamType::Number;
  bool required = false;
  json fallback;  // used when !required
  std::string description;
};

struct ScenarioInfo {
  std::string name;
  std::string topic;  // physics topic label
  std::string description;
  std::vector<ParamSpec> params;
};

inline const std::vector<ScenarioInfo>& catalog() {
  static const std::vector<ScenarioInfo> entries = {
      {"rabi-indivisibility",
       "indivisible two-level dynamics",
       "Right-factor divisibility test on the two-level cos^2/sin^2 family.",
       {{"t1", ParamType::Number, true, {}, "earlier checkpoint time, 0 < t1 < t2"},
        {"t2", ParamType::Number, true, {}, "later checkpoint time"}}},
      {"interference",
       "superposition statistics",
       "Per-component split of |psi1 + psi2|^2 into direct and cross terms on random pairs.",
       {{"dim", ParamType::Integer, false, 4, "amplitude vector dimension"},
        {"pairs", ParamType::Integer, false, 1000, "number of random pairs"}}},
      {"dilation",
       "unitary representability of transition matrices",
       "Searches for a unitary whose modulus-squares match the (possibly diluted) target.",
       {{"dim", ParamType::Integer, true, {}, "target matrix dimension"},
        {"entries", ParamType::NumberList, true, {}, "row-major target entries"},
        {"k_max", ParamType::Integer, false, 4, "largest dilution factor to try"},
        {"restarts", ParamType::Integer, false, 20, "optimizer restarts per factor"},
        {"tol", ParamType::Number, false, 1e-8, "acceptance residual"}}},
      {"division",
       "measurement records and marginal dynamics",
       "Exact system marginal vs the stochastic shortcut for a record map, random generators.",
       {{"n", ParamType::Integer, true, {}, "system dimension"},
        {"m", ParamType::Integer, true, {}, "environment dimension"},
        {"map", ParamType::IntList, true, {}, "record map e'(i') as a length-n list"},
        {"t0", ParamType::Number, false, 0.0, "record-formation time"},
        {"t", ParamType::Number, true, {}, "measurement time, t >= t0"}}},
      {"collision",
       "record-slot collisions",
       "Exact and approximate probability that n uniform record slots out of m stay distinct.",
       {{"n", ParamType::Integer, true, {}, "number of records"},
        {"m", ParamType::Integer, true, {}, "number of environment slots"}}},
      {"collapse",
       "conditioning on observed records",
       "Bayesian update of a correlated joint distribution on an observed environment outcome.",
       {{"n", ParamType::Integer, true, {}, "system dimension"},
        {"m", ParamType::Integer, true, {}, "environment dimension"},
        {"map", ParamType::IntList, true, {}, "record map e'(i) as a length-n list"},
        {"observed_e", ParamType::Integer, true, {}, "observed environment configuration"}}},
      {"classical-limit",
       "centre-of-mass narrowing and mean-trajectory dynamics",
       "Centre-of-mass statistics, relative-moment decay, or ensemble-vs-Newton comparison.",
       {{"task", ParamType::String, true, {}, "one of: cm, moments, ehrenfest"},
        {"n_list", ParamType::IntList, false, json::array({1, 10, 100, 1000}), "ensemble sizes"},
        {"sigma0", ParamType::Number, false, 1.0, "per-particle variance (gaussian)"},
        {"samples", ParamType::Integer, false, 100000, "Monte Carlo samples"},
        {"a0", ParamType::Number, false, 1.0, "radial width parameter (moments task)"},
        {"c", ParamType::Number, false, 1.0, "radial normalization constant"},
        {"m_exp", ParamType::Number, false, 2.0, "interaction exponent, a = a0 N^m"},
        {"orders", ParamType::IntList, false, json::array({2}), "moment orders (moments task)"},
        {"tuples", ParamType::Integer, false, 32, "index tuples per order (moments task)"},
        {"truncation", ParamType::Number, false, 6.0, "support cutoff in standard deviations"},
        {"potential", ParamType::String, false, "quartic", "harmonic or quartic (ehrenfest)"},
        {"k", ParamType::Number, false, 1.0, "spring constant (ehrenfest)"},
        {"lambda", ParamType::Number, false, 0.1, "quartic coefficient (ehrenfest)"},
        {"mass", ParamType::Number, false, 1.0, "total mass (ehrenfest)"},
        {"r0", ParamType::Number, false, 1.0, "initial displacement (ehrenfest)"},
        {"t_end", ParamType::Number, false, 10.0, "integration time (ehrenfest)"},
        {"dt", ParamType::Number, false, 1e-3, "integrator step (ehrenfest)"},
        {"ensemble", ParamType::Integer, false, 4000, "stochastic samples per N (ehrenfest)"}}},
      {"scattering",
       "perturbative transition amplitudes in a truncated mode basis",
       "Per-order time-ordered amplitudes between occupation states, with cross terms.",
       {{"L", ParamType::Number, false, 10.0, "box length"},
        {"n_max", ParamType::Integer, false, 3, "highest mode number"},
        {"max_particles", ParamType::Integer, false, 2, "occupation cap"},
        {"g", ParamType::Number, false, 0.1, "vacuum to pair coupling"},
        {"t", ParamType::Number, false, 1.0, "evolution time"},
        {"order", ParamType::Integer, false, 3, "expansion order, <= 4"},
        {"quad", ParamType::Integer, false, 32, "quadrature points per level, >= 8"},
        {"in", ParamType::String, false, "vacuum", "initial state: vacuum or mode list like 1,1"},
        {"out", ParamType::String, false, "1,1", "final state: vacuum or mode list"}}},
  };
  return entries;
}

inline const ScenarioInfo& find_scenario(const std::string& name) {
  for (const auto& s : catalog())
    if (s.name == name) return s;
  throw SchemaViolation("unknown scenario: " + name);
}

// ---------------------------------------------------------------------------
// Config parsing and validation
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string scenario;
  json params;  // fully resolved (defaults filled in)
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  std::string format = "csv";  // csv or json
};

namespace detail {

inline bool type_matches(const json& v, ParamType t) {
  switch (t) {
    case ParamType::Number:
      return v.is_number();
    case ParamType::Integer:
      return v.is_number_integer();
    case ParamType::String:
      return v.is_string();
    case ParamType::IntList:
      if (!v.is_array()) return false;
      for (const auto& e : v)
        if (!e.is_number_integer()) return false;
      return true;
    case ParamType::NumberList:
      if (!v.is_array()) return false;
      for (const auto& e : v)
        if (!e.is_number()) return false;
      return true;
  }
  return false;
}

inline const char* type_name(ParamType t) {
  switch (t) {
    case ParamType::Number: return "number";
    case ParamType::Integer: return "integer";
    case ParamType::String: return "string";
    case ParamType::IntList: return "integer list";
    case ParamType::NumberList: return "number list";
  }
  return "?";
}

}  // namespace detail

// Validates a raw config document: known scenario, declared parameter keys
// only, correct types, defaults resolved. Unknown keys are rejected at both
// the top level and inside params.
inline RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw SchemaViolation("config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "scenario" && key != "params" && key != "seed" && key != "output_dir" &&
        key != "format")
      throw SchemaViolation("unknown config key: " + key);
  }
  if (!doc.contains("scenario") || !doc["scenario"].is_string())
    throw SchemaViolation("config needs a string \"scenario\"");

  RunConfig cfg;
  cfg.scenario = doc["scenario"].get<std::string>();
  const ScenarioInfo& info = find_scenario(cfg.scenario);

  json params = doc.value("params", json::object());
  if (!params.is_object()) throw SchemaViolation("\"params\" must be an object");
  for (const auto& [key, _] : params.items()) {
    bool known = false;
    for (const auto& p : info.params) known = known || (p.key == key);
    if (!known) throw SchemaViolation("unknown parameter \"" + key + "\" for " + cfg.scenario);
  }
  json resolved = json::object();
  for (const auto& p : info.params) {
    if (params.contains(p.key)) {
      if (!detail::type_matches(params[p.key], p.type))
        throw SchemaViolation("parameter \"" + p.key + "\" must be a " +
                              detail::type_name(p.type));
      resolved[p.key] = params[p.key];
    } else if (p.required) {
      throw SchemaViolation("missing required parameter \"" + p.key + "\" for " + cfg.scenario);
    } else {
      resolved[p.key] = p.fallback;
    }
  }
  cfg.params = std::move(resolved);

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
      throw SchemaViolation("\"seed\" must be an integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) throw SchemaViolation("\"output_dir\" must be a string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }
  cfg.format = doc.value("format", std::string("csv"));
  if (cfg.format != "csv" && cfg.format != "json")
    throw SchemaViolation("\"format\" must be \"csv\" or \"json\"");
  return cfg;
}

// ---------------------------------------------------------------------------
// Tabular output
// ---------------------------------------------------------------------------

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  std::string to_csv() const {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ",";
      out += columns[c];
    }
    out += "\n";
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += ",";
        const json& v = row[c];
        if (v.is_string())
          out += v.get<std::string>();
        else if (v.is_number_integer())
          out += std::to_string(v.get<long long>());
        else if (v.is_number())
          out += io::format_double(v.get<double>());
        else
          out += v.dump();
      }
      out += "\n";
    }
    return out;
  }

  json to_json() const {
    json arr = json::array();
    for (const auto& row : rows) {
      json obj = json::object();
      for (std::size_t c = 0; c < columns.size() && c < row.size(); ++c)
        obj[columns[c]] = row[c];
      arr.push_back(obj);
    }
    return arr;
  }
};

struct ScenarioOutput {
  // (filename, content) pairs; filenames are relative to the output dir.
  std::vector<std::pair<std::string, std::string>> files;
  json summary = json::object();  // scalar results echoed into the manifest
};

// ---------------------------------------------------------------------------
// Scenario implementations
// ---------------------------------------------------------------------------

namespace detail {

inline std::string divisibility_name(Divisibility d) {
  switch (d) {
    case Divisibility::DivisibleAt: return "divisible-at";
    case Divisibility::IndivisibleWitness: return "indivisible-witness";
    case Divisibility::Inconclusive: return "inconclusive";
  }
  return "?";
}

inline std::string table_file(const RunConfig& cfg, const Table& t) {
  return cfg.format == "csv" ? t.to_csv() : t.to_json().dump(2) + "\n";
}

inline std::string table_name(const std::string& stem, const RunConfig& cfg) {
  return stem + (cfg.format == "csv" ? ".csv" : ".json");
}

// Random Hermitian with entries of unit scale from a seeded stream.
inline HermitianOperator random_hermitian(int dim, Rng& rng) {
  CMatrix h(dim, dim);
  for (int i = 0; i < dim; ++i) {
    h(i, i) = Complex(rng.gaussian(), 0.0);
    for (int j = i + 1; j < dim; ++j) {
      const Complex z(rng.gaussian() * M_SQRT1_2, rng.gaussian() * M_SQRT1_2);
      h(i, j) = z;
      h(j, i) = std::conj(z);
    }
  }
  return HermitianOperator(h);
}

inline StateVector random_state(int dim, Rng& rng) {
  CVector psi(dim);
  for (int i = 0; i < dim; ++i) psi[i] = Complex(rng.gaussian(), rng.gaussian());
  psi /= psi.norm();
  return StateVector(psi);
}

inline std::vector<int> parse_mode_list(const std::string& text) {
  if (text == "vacuum") return {};
  std::vector<int> modes;
  std::string cur;
  for (char ch : text + ",") {
    if (ch == ',') {
      if (cur.empty()) throw SchemaViolation("bad mode list: " + text);
      modes.push_back(std::stoi(cur));
      cur.clear();
    } else if (ch == ' ') {
      continue;
    } else {
      cur += ch;
    }
  }
  return modes;
}

inline ScenarioOutput run_rabi(const RunConfig& cfg) {
  const double t1 = cfg.params["t1"].get<double>();
  const double t2 = cfg.params["t2"].get<double>();
  if (!(t1 > 0.0) || !(t2 > t1)) throw SchemaViolation("need 0 < t1 < t2");
  const auto family = rabi_family({t1, t2});
  const auto verdict = divisibility_witness(family, t1, t2);

  Table t;
  t.columns = {"t1", "t2", "status", "violation", "condition_number"};
  std::vector<json> row = {t1, t2, divisibility_name(verdict.status), verdict.violation,
                           verdict.condition_number};
  if (verdict.witness) {
    const Matrix& r = *verdict.witness;
    for (int i = 0; i < r.rows(); ++i)
      for (int j = 0; j < r.cols(); ++j) {
        t.columns.push_back("r" + std::to_string(i) + std::to_string(j));
        row.push_back(r(i, j));
      }
  }
  t.rows.push_back(row);

  ScenarioOutput out;
  out.files.emplace_back(table_name("witness", cfg), table_file(cfg, t));
  out.summary = {{"status", divisibility_name(verdict.status)},
                 {"violation", verdict.violation},
                 {"condition_number", verdict.condition_number}};
  return out;
}

inline ScenarioOutput run_interference(const RunConfig& cfg) {
  const int dim = cfg.params["dim"].get<int>();
  const int pairs = cfg.params["pairs"].get<int>();
  if (dim < 1 || pairs < 1) throw SchemaViolation("dim and pairs must be >= 1");

  Rng rng = Rng::derive(cfg.seed, 0x696e74ULL);
  Table t;
  t.columns = {"pair", "component", "direct1", "direct2", "cross", "total", "reference",
               "abs_error"};
  double max_err = 0.0;
  for (int p = 0; p < pairs; ++p) {
    CVector a(dim), b(dim);
    for (int i = 0; i < dim; ++i) {
      a[i] = Complex(rng.gaussian(), rng.gaussian()) * 0.5;
      b[i] = Complex(rng.gaussian(), rng.gaussian()) * 0.5;
    }
    const auto terms = interference_decompose(a, b);
    for (int i = 0; i < dim; ++i) {
      const double ref = std::norm(a[i] + b[i]);
      const double err = std::abs(terms[static_cast<std::size_t>(i)].total() - ref);
      max_err = std::max(max_err, err);
      t.rows.push_back({p, i, terms[static_cast<std::size_t>(i)].direct1,
                        terms[static_cast<std::size_t>(i)].direct2,
                        terms[static_cast<std::size_t>(i)].cross,
                        terms[static_cast<std::size_t>(i)].total(), ref, err});
    }
  }
  ScenarioOutput out;
  out.files.emplace_back(table_name("interference", cfg), table_file(cfg, t));
  out.summary = {{"max_abs_error", max_err}, {"pairs", pairs}, {"dim", dim}};
  return out;
}

inline ScenarioOutput run_dilation(const RunConfig& cfg) {
  const int dim = cfg.params["dim"].get<int>();
  const auto entries = cfg.params["entries"].get<std::vector<double>>();
  if (dim < 1 || static_cast<int>(entries.size()) != dim * dim)
    throw SchemaViolation("entries must hold dim*dim numbers");
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = entries[static_cast<std::size_t>(i * dim + j)];

  dilation::DilationProblem problem{validate_stochastic(g), cfg.params["k_max"].get<int>(),
                                    cfg.params["tol"].get<double>(),
                                    cfg.params["restarts"].get<int>(), cfg.seed};
  const auto sol = dilation::solve_unitary(problem);

  json restarts = json::object();
  for (const auto& [k, residuals] : sol.restart_residuals)
    restarts[std::to_string(k)] = residuals;
  json doc = {{"dilation_factor", sol.dilation_factor},
              {"residual", sol.residual},
              {"converged", sol.converged},
              {"structurally_infeasible_k1", sol.structurally_infeasible_k1},
              {"gauge_canonical", sol.gauge_canonical},
              {"unitary", io::complex_matrix_to_json(sol.unitary)},
              {"restart_residuals", restarts}};

  ScenarioOutput out;
  out.files.emplace_back("solution.json", doc.dump(2) + "\n");
  out.summary = {{"dilation_factor", sol.dilation_factor},
                 {"residual", sol.residual},
                 {"converged", sol.converged}};
  return out;
}

inline division::JointSystem make_joint(const RunConfig& cfg, int n, int m,
                                        const std::vector<int>& map_vals, double t0) {
  Rng hs_rng = Rng::derive(cfg.seed, 0x737973ULL);
  Rng he_rng = Rng::derive(cfg.seed, 0x656e76ULL);
  Rng psi_rng = Rng::derive(cfg.seed, 0x707369ULL);
  return division::JointSystem(random_hermitian(n, hs_rng), random_hermitian(m, he_rng),
                               division::CorrelationMap(n, m, map_vals),
                               random_state(n, psi_rng), t0);
}

inline ScenarioOutput run_division(const RunConfig& cfg) {
  const int n = cfg.params["n"].get<int>();
  const int m = cfg.params["m"].get<int>();
  const auto map_vals = cfg.params["map"].get<std::vector<int>>();
  const double t0 = cfg.params["t0"].get<double>();
  const double t = cfg.params["t"].get<double>();

  const auto js = make_joint(cfg, n, m, map_vals, t0);
  const auto rep = division::division_report(js, t);

  Table tab;
  tab.columns = {"config", "exact", "formula", "abs_error"};
  for (int i = 0; i < n; ++i)
    tab.rows.push_back(
        {i, rep.exact[i], rep.formula[i], std::abs(rep.exact[i] - rep.formula[i])});

  ScenarioOutput out;
  out.files.emplace_back(table_name("report", cfg), table_file(cfg, tab));
  out.summary = {{"max_error", rep.max_error}, {"injective", rep.injective}, {"t", rep.t}};
  return out;
}

inline ScenarioOutput run_collision(const RunConfig& cfg) {
  const int n = cfg.params["n"].get<int>();
  const int m = cfg.params["m"].get<int>();
  const double exact = division::collision_probability_exact(n, m);
  const double approx = division::collision_probability_approx(n, m);
  const double rel = exact > 0.0 ? std::abs(approx - exact) / exact : approx;

  Table t;
  t.columns = {"n", "m", "exact", "approx", "rel_error"};
  t.rows.push_back({n, m, exact, approx, rel});

  ScenarioOutput out;
  out.files.emplace_back(table_name("collision", cfg), table_file(cfg, t));
  out.summary = {{"exact", exact}, {"approx", approx}, {"rel_error", rel}};
  return out;
}

inline ScenarioOutput run_collapse(const RunConfig& cfg) {
  const int n = cfg.params["n"].get<int>();
  const int m = cfg.params["m"].get<int>();
  const auto map_vals = cfg.params["map"].get<std::vector<int>>();
  const int observed = cfg.params["observed_e"].get<int>();

  const division::CorrelationMap corr(n, m, map_vals);
  Rng psi_rng = Rng::derive(cfg.seed, 0x707369ULL);
  const StateVector psi = random_state(n, psi_rng);
  const ProbabilityVector prior = born_probabilities(psi);

  // Joint distribution right after record formation: p(i, e) = p_i delta_{e, e'(i)}.
  Matrix joint = Matrix::Zero(n, m);
  for (int i = 0; i < n; ++i) joint(i, corr.map[static_cast<std::size_t>(i)]) += prior[i];

  const ProbabilityVector posterior = division::collapse_condition(joint, observed);

  Table t;
  t.columns = {"config", "prior", "posterior"};
  for (int i = 0; i < n; ++i) t.rows.push_back({i, prior[i], posterior[i]});

  ScenarioOutput out;
  out.files.emplace_back(table_name("posterior", cfg), table_file(cfg, t));
  out.summary = {{"observed_e", observed}, {"injective", corr.injective()}};
  return out;
}

inline ScenarioOutput run_classical(const RunConfig& cfg, int workers) {
  const std::string task = cfg.params["task"].get<std::string>();
  const auto n_list = cfg.params["n_list"].get<std::vector<int>>();
  const double sigma0 = cfg.params["sigma0"].get<double>();

  ScenarioOutput out;
  if (task == "cm") {
    Table t;
    t.columns = {"n", "variance", "target", "stderr", "mean_axis0"};
    for (int n : n_list) {
      classical::EnsembleSpec spec;
      spec.n_particles = n;
      spec.dimension = 1;
      spec.dist = classical::Gaussian{sigma0};
      spec.seed = cfg.seed;
      const auto stats =
          classical::cm_statistics(spec, cfg.params["samples"].get<std::int64_t>(), workers);
      t.rows.push_back({n, stats.variance, sigma0 / n, stats.stderr_variance, stats.mean[0]});
    }
    out.files.emplace_back(table_name("cm", cfg), table_file(cfg, t));
    out.summary = {{"task", task}, {"sigma0", sigma0}};
  } else if (task == "moments") {
    classical::EnsembleSpec spec;
    spec.dimension = 1;
    spec.dist = classical::RadialGaussOverR{cfg.params["a0"].get<double>(),
                                            cfg.params["c"].get<double>()};
    spec.interaction_exponent = cfg.params["m_exp"].get<double>();
    spec.seed = cfg.seed;
    spec.truncation_sigmas = cfg.params["truncation"].get<double>();
    classical::MomentDecayOptions opt;
    opt.samples = cfg.params["samples"].get<std::int64_t>();
    opt.tuples = cfg.params["tuples"].get<int>();
    opt.workers = workers;
    const auto rows =
        classical::central_moment_decay(spec, cfg.params["orders"].get<std::vector<int>>(),
                                        n_list, opt);
    Table t;
    t.columns = {"n", "order", "estimate", "stderr"};
    for (const auto& r : rows) t.rows.push_back({r.n, r.order, r.estimate, r.stderr_estimate});
    out.files.emplace_back(table_name("moments", cfg), table_file(cfg, t));
    out.summary = {{"task", task}, {"truncation", *spec.truncation_sigmas}};
  } else if (task == "ehrenfest") {
    classical::PotentialSpec pot;
    const std::string kind = cfg.params["potential"].get<std::string>();
    if (kind == "harmonic")
      pot.kind = classical::PotentialKind::Harmonic;
    else if (kind == "quartic")
      pot.kind = classical::PotentialKind::Quartic;
    else
      throw SchemaViolation("potential must be harmonic or quartic");
    pot.k = cfg.params["k"].get<double>();
    pot.lambda = cfg.params["lambda"].get<double>();

    classical::EnsembleSpec spec;
    spec.dimension = 1;
    spec.dist = classical::Gaussian{sigma0};
    spec.seed = cfg.seed;

    classical::EhrenfestOptions opt;
    opt.r0 = Vector::Constant(1, cfg.params["r0"].get<double>());
    opt.t_end = cfg.params["t_end"].get<double>();
    opt.dt = cfg.params["dt"].get<double>();
    opt.n_list = n_list;
    opt.ensemble = cfg.params["ensemble"].get<int>();
    opt.workers = workers;

    const auto rep =
        classical::ehrenfest_compare(pot, spec, cfg.params["mass"].get<double>(), opt);
    Table t;
    t.columns = {"n", "deviation"};
    for (const auto& [n, dev] : rep.deviations) t.rows.push_back({n, dev});
    out.files.emplace_back(table_name("ehrenfest", cfg), table_file(cfg, t));
    out.summary = {{"task", task},
                   {"slope", rep.fit.slope},
                   {"slope_stderr", rep.fit.slope_stderr},
                   {"energy_drift", rep.energy_drift},
                   {"ensemble", rep.ensemble}};
  } else {
    throw SchemaViolation("task must be cm, moments, or ehrenfest");
  }
  return out;
}

inline ScenarioOutput run_scattering(const RunConfig& cfg) {
  const fock::FockBasis basis(cfg.params["L"].get<double>(), cfg.params["n_max"].get<int>(),
                              cfg.params["max_particles"].get<int>());
  const auto h = fock::toy_pair_interaction(basis, cfg.params["g"].get<double>());
  const int order = cfg.params["order"].get<int>();
  const auto dy = fock::dyson_propagator(h, 0.0, cfg.params["t"].get<double>(), order,
                                         cfg.params["quad"].get<int>());

  const int in = basis.index_of(parse_mode_list(cfg.params["in"].get<std::string>()));
  const int outst = basis.index_of(parse_mode_list(cfg.params["out"].get<std::string>()));
  const auto br = fock::term_interference(dy, in, outst);

  Table t;
  t.columns = {"order", "re_amplitude", "im_amplitude", "mod2", "cumulative_probability"};
  Complex running(0.0, 0.0);
  for (int k = 0; k <= order; ++k) {
    running += br.amplitudes[static_cast<std::size_t>(k)];
    t.rows.push_back({k, br.amplitudes[static_cast<std::size_t>(k)].real(),
                      br.amplitudes[static_cast<std::size_t>(k)].imag(),
                      std::norm(br.amplitudes[static_cast<std::size_t>(k)]),
                      std::norm(running)});
  }

  const double defect =
      unitarity_deviation(dy.partial_sum);
  ScenarioOutput out;
  out.files.emplace_back(table_name("scattering", cfg), table_file(cfg, t));
  out.summary = {{"in", basis.label(in)},
                 {"out", basis.label(outst)},
                 {"probability", br.total},
                 {"total_out_probability", fock::total_out_probability(dy.partial_sum, in)},
                 {"unitarity_defect", defect},
                 {"states", basis.size()}};
  return out;
}

inline std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

struct RunResult {
  std::filesystem::path output_dir;
  std::vector<std::filesystem::path> data_files;
  std::filesystem::path manifest_path;
  json manifest;
};

// Executes a validated config: runs the scenario, writes its data files and a
// manifest.json (scenario, resolved params, seed, version, worker count,
// timestamps, output list with sizes and checksums). All writes are atomic.
// Given the same config, seed, and worker count, data files are byte-identical
// across reruns; only the manifest timestamps differ.
inline RunResult run_scenario(const RunConfig& cfg_in,
                              const std::filesystem::path& output_dir_override = {}) {
  RunConfig cfg = cfg_in;
  if (!output_dir_override.empty()) cfg.output_dir = output_dir_override;
  if (cfg.output_dir.empty()) throw SchemaViolation("config needs \"output_dir\"");

  const int workers = worker_count_from_env();
  const std::string started = detail::iso8601_now();

  ScenarioOutput result;
  if (cfg.scenario == "rabi-indivisibility")
    result = detail::run_rabi(cfg);
  else if (cfg.scenario == "interference")
    result = detail::run_interference(cfg);
  else if (cfg.scenario == "dilation")
    result = detail::run_dilation(cfg);
  else if (cfg.scenario == "division")
    result = detail::run_division(cfg);
  else if (cfg.scenario == "collision")
    result = detail::run_collision(cfg);
  else if (cfg.scenario == "collapse")
    result = detail::run_collapse(cfg);
  else if (cfg.scenario == "classical-limit")
    result = detail::run_classical(cfg, workers);
  else if (cfg.scenario == "scattering")
    result = detail::run_scattering(cfg);
  else
    throw SchemaViolation("unknown scenario: " + cfg.scenario);  // unreachable after parse

  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw OutputDirUnwritable("cannot create " + cfg.output_dir.string());

  RunResult rr;
  rr.output_dir = cfg.output_dir;
  json outputs = json::array();
  for (const auto& [name, content] : result.files) {
    const auto path = cfg.output_dir / name;
    io::write_text_atomic(path, content);
    rr.data_files.push_back(path);
    outputs.push_back({{"path", name},
                       {"bytes", content.size()},
                       {"fnv1a", io::fnv1a_hex(content)}});
  }

  json manifest = {{"version", kVersion},
                   {"scenario", cfg.scenario},
                   {"params", cfg.params},
                   {"seed", cfg.seed},
                   {"format", cfg.format},
                   {"worker_count", workers},
                   {"started", started},
                   {"finished", detail::iso8601_now()},
                   {"outputs", outputs},
                   {"summary", result.summary}};
  rr.manifest = manifest;
  rr.manifest_path = cfg.output_dir / "manifest.json";
  io::write_text_atomic(rr.manifest_path, manifest.dump(2) + "\n");
  return rr;
}

inline RunResult run_config_file(const std::filesystem::path& config_path,
                                 const std::filesystem::path& output_dir_override = {}) {
  return run_scenario(parse_config(io::load_json_file(config_path)), output_dir_override);
}

}  // namespace isq::run
