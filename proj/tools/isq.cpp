// Command line front end: scenario runner plus direct subcommands for the
// dilation, division, collision, classical-limit, and scattering modules.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isq/io.hpp"
#include "isq/scenario.hpp"

namespace {

using isq::run::json;

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitModule = 3;
constexpr int kExitIo = 4;

void print_run_result(const isq::run::RunResult& rr) {
  std::cout << "scenario: " << rr.manifest["scenario"].get<std::string>() << "\n";
  for (const auto& out : rr.manifest["outputs"])
    std::cout << "  wrote " << (rr.output_dir / out["path"].get<std::string>()).string() << " ("
              << out["bytes"].get<std::size_t>() << " bytes, fnv1a "
              << out["fnv1a"].get<std::string>() << ")\n";
  std::cout << "  wrote " << rr.manifest_path.string() << "\n";
  if (!rr.manifest["summary"].empty())
    std::cout << "summary: " << rr.manifest["summary"].dump() << "\n";
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  std::string cur;
  for (char ch : text + ",") {
    if (ch == ',') {
      if (cur.empty()) throw isq::SchemaViolation("bad integer list: " + text);
      values.push_back(std::stoi(cur));
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  return values;
}

isq::StochasticMatrix load_stochastic(const std::filesystem::path& path) {
  return isq::io::stochastic_from_json(isq::io::load_json_file(path));
}

isq::HermitianOperator load_hermitian(const std::filesystem::path& path) {
  return isq::io::hermitian_from_json(isq::io::load_json_file(path));
}

isq::division::CorrelationMap load_map(const std::filesystem::path& path) {
  const json j = isq::io::load_json_file(path);
  if (!j.is_object() || !j.contains("system_dim") || !j.contains("env_dim") ||
      !j.contains("map") || !j["map"].is_array())
    throw isq::SchemaViolation("record map file needs system_dim, env_dim, map");
  return isq::division::CorrelationMap(j["system_dim"].get<int>(), j["env_dim"].get<int>(),
                                       j["map"].get<std::vector<int>>());
}

void write_or_print(const std::optional<std::string>& out_path, const std::string& content) {
  if (out_path) {
    isq::io::write_text_atomic(*out_path, content);
    std::cout << "wrote " << *out_path << "\n";
  } else {
    std::cout << content;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"indivisible stochastic process toolkit"};
  app.require_subcommand(1);

  // --- run ---------------------------------------------------------------
  std::string run_config;
  std::string run_output_dir;
  auto* cmd_run = app.add_subcommand("run", "execute a scenario config file");
  cmd_run->add_option("config", run_config, "path to a scenario config JSON")->required();
  cmd_run->add_option("--output-dir", run_output_dir, "override the config's output_dir");

  // --- list --------------------------------------------------------------
  auto* cmd_list = app.add_subcommand("list", "list scenarios and their parameters");

  // --- dilate ------------------------------------------------------------
  std::string dil_input, dil_out = "solution.json";
  int dil_kmax = 4, dil_restarts = 20;
  std::uint64_t dil_seed = 0;
  double dil_tol = 1e-8;
  auto* cmd_dilate = app.add_subcommand("dilate", "search for a unitary dilation of a matrix");
  cmd_dilate->add_option("--input", dil_input, "stochastic matrix JSON (dim, entries)")
      ->required();
  cmd_dilate->add_option("--k-max", dil_kmax, "largest dilution factor");
  cmd_dilate->add_option("--restarts", dil_restarts, "optimizer restarts per factor");
  cmd_dilate->add_option("--seed", dil_seed, "restart seed");
  cmd_dilate->add_option("--tol", dil_tol, "acceptance residual");
  cmd_dilate->add_option("--out", dil_out, "output JSON path");

  // --- division ----------------------------------------------------------
  std::string div_sys, div_env, div_map, div_psi, div_out = "report.json";
  double div_t0 = 0.0, div_t = 1.0;
  auto* cmd_division =
      app.add_subcommand("division", "exact marginal vs the stochastic shortcut");
  cmd_division->add_option("--sys", div_sys, "system generator JSON")->required();
  cmd_division->add_option("--env", div_env, "environment generator JSON")->required();
  cmd_division->add_option("--map", div_map, "record map JSON")->required();
  cmd_division->add_option("--psi", div_psi,
                           "initial state JSON (defaults to the uniform superposition)");
  cmd_division->add_option("--t0", div_t0, "record-formation time");
  cmd_division->add_option("--t", div_t, "measurement time");
  cmd_division->add_option("--out", div_out, "output JSON path");

  // --- collide -----------------------------------------------------------
  int col_n = 0, col_m = 0;
  std::string col_out;
  auto* cmd_collide = app.add_subcommand("collide", "record-slot collision probability");
  cmd_collide->add_option("--n", col_n, "number of records")->required();
  cmd_collide->add_option("--m", col_m, "number of slots")->required();
  cmd_collide->add_option("--out", col_out, "output CSV path (default: stdout)");

  // --- climit ------------------------------------------------------------
  auto* cmd_climit = app.add_subcommand("climit", "classical-limit diagnostics");
  cmd_climit->require_subcommand(1);

  std::string cl_nlist = "1,10,100,1000";
  double cl_sigma0 = 1.0;
  std::int64_t cl_samples = 100000;
  std::uint64_t cl_seed = 0;
  std::string cl_out;
  auto* cmd_cm = cmd_climit->add_subcommand("cm", "centre-of-mass statistics");
  cmd_cm->add_option("--n", cl_nlist, "comma separated ensemble sizes");
  cmd_cm->add_option("--sigma0", cl_sigma0, "per-particle variance");
  cmd_cm->add_option("--samples", cl_samples, "Monte Carlo samples");
  cmd_cm->add_option("--seed", cl_seed, "sampling seed");
  cmd_cm->add_option("--out", cl_out, "output CSV path (default: stdout)");

  std::string eh_potential = "quartic", eh_nlist = "10,100,1000", eh_out;
  double eh_k = 1.0, eh_lambda = 0.1, eh_sigma0 = 1.0, eh_r0 = 1.0, eh_tend = 10.0, eh_dt = 1e-3;
  int eh_ensemble = 4000;
  std::uint64_t eh_seed = 0;
  auto* cmd_eh = cmd_climit->add_subcommand("ehrenfest", "ensemble mean vs Newtonian motion");
  cmd_eh->add_option("--potential", eh_potential, "harmonic or quartic");
  cmd_eh->add_option("--k", eh_k, "spring constant");
  cmd_eh->add_option("--lambda", eh_lambda, "quartic coefficient");
  cmd_eh->add_option("--n-list", eh_nlist, "comma separated ensemble sizes");
  cmd_eh->add_option("--sigma0", eh_sigma0, "per-particle variance");
  cmd_eh->add_option("--r0", eh_r0, "initial displacement");
  cmd_eh->add_option("--t-end", eh_tend, "integration time");
  cmd_eh->add_option("--dt", eh_dt, "integrator step");
  cmd_eh->add_option("--ensemble", eh_ensemble, "stochastic samples per N");
  cmd_eh->add_option("--seed", eh_seed, "sampling seed");
  cmd_eh->add_option("--out", eh_out, "output CSV path (default: stdout)");

  std::string mo_nlist = "2,4,8,16", mo_orders = "2,3", mo_out;
  double mo_a0 = 1.0, mo_c = 1.0, mo_mexp = 2.0, mo_trunc = 6.0;
  std::int64_t mo_samples = 20000;
  int mo_tuples = 32;
  std::uint64_t mo_seed = 0;
  auto* cmd_mo = cmd_climit->add_subcommand("moments", "relative-coordinate moment decay");
  cmd_mo->add_option("--n-list", mo_nlist, "comma separated ensemble sizes");
  cmd_mo->add_option("--orders", mo_orders, "comma separated moment orders");
  cmd_mo->add_option("--a0", mo_a0, "radial width parameter");
  cmd_mo->add_option("--c", mo_c, "radial normalization constant");
  cmd_mo->add_option("--m-exp", mo_mexp, "interaction exponent");
  cmd_mo->add_option("--truncation", mo_trunc, "support cutoff in standard deviations");
  cmd_mo->add_option("--samples", mo_samples, "Monte Carlo samples");
  cmd_mo->add_option("--tuples", mo_tuples, "index tuples per order");
  cmd_mo->add_option("--seed", mo_seed, "sampling seed");
  cmd_mo->add_option("--out", mo_out, "output CSV path (default: stdout)");

  // --- scatter -------------------------------------------------------------
  double sc_L = 10.0, sc_g = 0.1, sc_t = 1.0;
  int sc_nmax = 3, sc_maxp = 2, sc_order = 3, sc_quad = 32;
  std::string sc_in = "vacuum", sc_out_state = "1,1", sc_csv;
  auto* cmd_scatter = app.add_subcommand("scatter", "perturbative transition amplitudes");
  cmd_scatter->add_option("--L", sc_L, "box length");
  cmd_scatter->add_option("--n-max", sc_nmax, "highest mode number");
  cmd_scatter->add_option("--max-particles", sc_maxp, "occupation cap");
  cmd_scatter->add_option("--g", sc_g, "vacuum to pair coupling");
  cmd_scatter->add_option("--t", sc_t, "evolution time");
  cmd_scatter->add_option("--order", sc_order, "expansion order, <= 4");
  cmd_scatter->add_option("--quad", sc_quad, "quadrature points per level");
  cmd_scatter->add_option("--in", sc_in, "initial state (vacuum or mode list)");
  cmd_scatter->add_option("--out", sc_out_state, "final state (vacuum or mode list)");
  cmd_scatter->add_option("--csv", sc_csv, "output CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitSchema;
  }

  try {
    if (*cmd_run) {
      print_run_result(isq::run::run_config_file(run_config, run_output_dir));
    } else if (*cmd_list) {
      for (const auto& s : isq::run::catalog()) {
        std::cout << s.name << "  [" << s.topic << "]\n    " << s.description << "\n";
        for (const auto& p : s.params)
          std::cout << "    - " << p.key << (p.required ? " (required): " : ": ")
                    << p.description << "\n";
      }
    } else if (*cmd_dilate) {
      isq::dilation::DilationProblem problem{load_stochastic(dil_input), dil_kmax, dil_tol,
                                             dil_restarts, dil_seed};
      const auto sol = isq::dilation::solve_unitary(problem);
      json restarts = json::object();
      for (const auto& [k, residuals] : sol.restart_residuals)
        restarts[std::to_string(k)] = residuals;
      const json doc = {{"dilation_factor", sol.dilation_factor},
                        {"residual", sol.residual},
                        {"converged", sol.converged},
                        {"structurally_infeasible_k1", sol.structurally_infeasible_k1},
                        {"gauge_canonical", sol.gauge_canonical},
                        {"unitary", isq::io::complex_matrix_to_json(sol.unitary)},
                        {"restart_residuals", restarts}};
      isq::io::write_text_atomic(dil_out, doc.dump(2) + "\n");
      std::cout << "k=" << sol.dilation_factor << " residual=" << sol.residual << " converged="
                << (sol.converged ? "true" : "false") << "\nwrote " << dil_out << "\n";
    } else if (*cmd_division) {
      const auto hs = load_hermitian(div_sys);
      const auto he = load_hermitian(div_env);
      const auto corr = load_map(div_map);
      isq::CVector psi0;
      if (div_psi.empty()) {
        psi0 = isq::CVector::Constant(corr.system_dim,
                                      isq::Complex(1.0 / std::sqrt(corr.system_dim), 0.0));
      } else {
        psi0 = isq::io::complex_vector_from_json(isq::io::load_json_file(div_psi));
      }
      const isq::division::JointSystem js(hs, he, corr, isq::StateVector(psi0), div_t0);
      const auto rep = isq::division::division_report(js, div_t);
      json exact = json::array(), formula = json::array();
      for (int i = 0; i < corr.system_dim; ++i) {
        exact.push_back(rep.exact[i]);
        formula.push_back(rep.formula[i]);
      }
      const json doc = {{"t0", div_t0},          {"t", rep.t},
                        {"exact", exact},        {"formula", formula},
                        {"max_error", rep.max_error}, {"injective", rep.injective}};
      isq::io::write_text_atomic(div_out, doc.dump(2) + "\n");
      std::cout << "max_error=" << rep.max_error << " injective="
                << (rep.injective ? "true" : "false") << "\nwrote " << div_out << "\n";
    } else if (*cmd_collide) {
      const double exact = isq::division::collision_probability_exact(col_n, col_m);
      const double approx = isq::division::collision_probability_approx(col_n, col_m);
      std::string csv = "n,m,exact,approx\n";
      csv += std::to_string(col_n) + "," + std::to_string(col_m) + "," +
             isq::io::format_double(exact) + "," + isq::io::format_double(approx) + "\n";
      write_or_print(col_out.empty() ? std::nullopt : std::optional<std::string>(col_out), csv);
    } else if (*cmd_cm) {
      std::string csv = "n,variance,target,stderr\n";
      for (int n : parse_int_list(cl_nlist)) {
        isq::classical::EnsembleSpec spec;
        spec.n_particles = n;
        spec.dimension = 1;
        spec.dist = isq::classical::Gaussian{cl_sigma0};
        spec.seed = cl_seed;
        const auto stats =
            isq::classical::cm_statistics(spec, cl_samples, isq::worker_count_from_env());
        csv += std::to_string(n) + "," + isq::io::format_double(stats.variance) + "," +
               isq::io::format_double(cl_sigma0 / n) + "," +
               isq::io::format_double(stats.stderr_variance) + "\n";
      }
      write_or_print(cl_out.empty() ? std::nullopt : std::optional<std::string>(cl_out), csv);
    } else if (*cmd_eh) {
      isq::classical::PotentialSpec pot;
      if (eh_potential == "harmonic")
        pot.kind = isq::classical::PotentialKind::Harmonic;
      else if (eh_potential == "quartic")
        pot.kind = isq::classical::PotentialKind::Quartic;
      else
        throw isq::SchemaViolation("potential must be harmonic or quartic");
      pot.k = eh_k;
      pot.lambda = eh_lambda;
      isq::classical::EnsembleSpec spec;
      spec.dimension = 1;
      spec.dist = isq::classical::Gaussian{eh_sigma0};
      spec.seed = eh_seed;
      isq::classical::EhrenfestOptions opt;
      opt.r0 = isq::Vector::Constant(1, eh_r0);
      opt.t_end = eh_tend;
      opt.dt = eh_dt;
      opt.n_list = parse_int_list(eh_nlist);
      opt.ensemble = eh_ensemble;
      opt.workers = isq::worker_count_from_env();
      const auto rep = isq::classical::ehrenfest_compare(pot, spec, 1.0, opt);
      std::string csv = "n,deviation\n";
      for (const auto& [n, dev] : rep.deviations)
        csv += std::to_string(n) + "," + isq::io::format_double(dev) + "\n";
      write_or_print(eh_out.empty() ? std::nullopt : std::optional<std::string>(eh_out), csv);
      std::cout << "slope=" << rep.fit.slope << " (stderr " << rep.fit.slope_stderr
                << "), energy_drift=" << rep.energy_drift << "\n";
    } else if (*cmd_mo) {
      isq::classical::EnsembleSpec spec;
      spec.dimension = 1;
      spec.dist = isq::classical::RadialGaussOverR{mo_a0, mo_c};
      spec.interaction_exponent = mo_mexp;
      spec.seed = mo_seed;
      spec.truncation_sigmas = mo_trunc;
      isq::classical::MomentDecayOptions opt;
      opt.samples = mo_samples;
      opt.tuples = mo_tuples;
      opt.workers = isq::worker_count_from_env();
      const auto rows = isq::classical::central_moment_decay(spec, parse_int_list(mo_orders),
                                                             parse_int_list(mo_nlist), opt);
      std::string csv = "n,order,estimate,stderr\n";
      for (const auto& r : rows)
        csv += std::to_string(r.n) + "," + std::to_string(r.order) + "," +
               isq::io::format_double(r.estimate) + "," +
               isq::io::format_double(r.stderr_estimate) + "\n";
      write_or_print(mo_out.empty() ? std::nullopt : std::optional<std::string>(mo_out), csv);
    } else if (*cmd_scatter) {
      const isq::fock::FockBasis basis(sc_L, sc_nmax, sc_maxp);
      const auto h = isq::fock::toy_pair_interaction(basis, sc_g);
      const auto dy = isq::fock::dyson_propagator(h, 0.0, sc_t, sc_order, sc_quad);
      const int in = basis.index_of(isq::run::detail::parse_mode_list(sc_in));
      const int out = basis.index_of(isq::run::detail::parse_mode_list(sc_out_state));
      const auto br = isq::fock::term_interference(dy, in, out);
      std::string csv = "order,re_amplitude,im_amplitude,mod2,cumulative_probability\n";
      isq::Complex running(0.0, 0.0);
      for (int k = 0; k <= sc_order; ++k) {
        const isq::Complex a = br.amplitudes[static_cast<std::size_t>(k)];
        running += a;
        csv += std::to_string(k) + "," + isq::io::format_double(a.real()) + "," +
               isq::io::format_double(a.imag()) + "," + isq::io::format_double(std::norm(a)) +
               "," + isq::io::format_double(std::norm(running)) + "\n";
      }
      write_or_print(sc_csv.empty() ? std::nullopt : std::optional<std::string>(sc_csv), csv);
      std::cout << "probability=" << br.total << " unitarity_defect="
                << isq::unitarity_deviation(dy.partial_sum) << "\n";
    }
  } catch (const isq::SchemaViolation& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const nlohmann::json::exception& e) {
    // Shape errors in input files (missing keys, wrong value types).
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const isq::OutputDirUnwritable& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const isq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitModule;
  }
  return kExitOk;
}
