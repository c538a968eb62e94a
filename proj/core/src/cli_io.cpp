#include "rdest/cli_io.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rdest {

namespace {

using nlohmann::json;

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write output file: " + path.string());
  out << std::setprecision(17);
  return out;
}

void write_json(const std::filesystem::path& path, const json& j) { open_output(path) << j.dump(2) << '\n'; }

template <class T>
void write_optional(std::ostream& out, const std::optional<T>& v) {
  if (v) out << *v;
}

json to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

Mesh input_mesh(const RunConfig& c) {
  if (c.mesh) return load_mesh(*c.mesh);
  return rectangle_mesh(c.grid, Diagonal::kCrissCross);
}

AdaptOptions adapt_options(const RunConfig& c) {
  AdaptOptions o;
  o.theta_mark = c.theta_mark;
  o.max_dof = c.max_dof;
  o.quad_degree = c.quad_degree;
  o.dual_depth = c.dual_depth;
  o.oscillation_every = c.oscillation_every;
  o.solver_tol = c.tol;
  return o;
}

DiscreteFunction solve(const Mesh& mesh, const Problem& p, const RunConfig& c, SolveStats* stats) {
  return solve_galerkin(assemble_operator(mesh, p.kappa), assemble_load(mesh, p.rhs, c.quad_degree), c.tol, stats);
}

int run_solve(const RunConfig& c, std::ostream& log) {
  const Mesh mesh = input_mesh(c);
  const Problem p = make_problem(c.preset, c.kappas.front());
  SolveStats stats;
  const DiscreteFunction u = solve(mesh, p, c, &stats);
  write_solution_csv(c.out / "solution.csv", mesh, u);
  json j{{"command", "solve"},     {"preset", p.name},           {"kappa", p.kappa},
         {"vertices", mesh.num_vertices()}, {"elements", mesh.num_elements()}, {"dofs", mesh.num_free_vertices()},
         {"cg_iterations", stats.iterations}, {"relative_residual", stats.relative_residual},
         {"energy_norm", energy_norm(mesh, p.kappa, u)}};
  j["true_error"] = p.exact ? json(energy_error(mesh, p.kappa, *p.exact, u, {}, c.quad_degree)) : json(nullptr);
  write_json(c.out / "summary.json", j);
  log << "solve: " << mesh.num_free_vertices() << " dofs, " << stats.iterations << " CG iterations\n";
  return kExitOk;
}

int run_estimate(const RunConfig& c, std::ostream& log) {
  const Mesh mesh = input_mesh(c);
  const Problem p = make_problem(c.preset, c.kappas.front());
  const DiscreteFunction u = solve(mesh, p, c, nullptr);
  EstimatorOptions o;
  o.quad_degree = c.quad_degree;
  o.dual_depth = c.dual_depth;
  const IndicatorReport r = estimate(mesh, p, u, o);
  write_indicator_csv(c.out / "indicators.csv", mesh, r);
  json j{{"command", "estimate"},
         {"preset", p.name},
         {"kappa", p.kappa},
         {"dofs", mesh.num_free_vertices()},
         {"estimator", r.estimator},
         {"oscillation", r.global_oscillation},
         {"classic_estimator", r.classic_estimator},
         {"true_error", to_json(r.true_error)},
         {"effectivity", to_json(r.effectivity)},
         {"quad_degree", c.quad_degree},
         {"dual_depth", c.dual_depth},
         {"theta_histogram", r.theta_histogram}};
  write_json(c.out / "summary.json", j);
  log << "estimate: estimator " << r.estimator << ", oscillation " << r.global_oscillation << '\n';
  return kExitOk;
}

int run_adapt(const RunConfig& c, std::ostream& log, std::ostream& err) {
  const Mesh mesh = input_mesh(c);
  const Problem p = make_problem(c.preset, c.kappas.front());
  const RunReport r = adaptive_loop(mesh, p, adapt_options(c), [&](const Mesh&, const DiscreteFunction&,
                                                                   const IndicatorReport&, const IterationRecord& rec) {
    log << "iteration " << rec.iteration << ": " << rec.dofs << " dofs, estimator " << rec.estimator << '\n';
  });
  write_run_report_csv(c.out / "run_report.csv", r);
  save_mesh(r.final_mesh, c.out / "final.mesh");
  if (r.aborted) {
    err << "adaptive loop aborted: " << r.abort_reason << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

int run_study(const RunConfig& c, std::ostream& log) {
  const Mesh mesh = input_mesh(c);
  const StudyReport s = robustness_study(mesh, c.preset, c.kappas, adapt_options(c));
  write_study_csv(c.out / "study.csv", s);
  json j{{"command", "study"},
         {"preset", s.problem},
         {"kappas", c.kappas},
         {"effectivity_spread", s.effectivity_spread},
         {"classic_spread", s.classic_spread},
         {"reference_proxy", s.reference_proxy}};
  write_json(c.out / "study_summary.json", j);
  log << "study: effectivity spread " << s.effectivity_spread << '\n';
  return kExitOk;
}

int run_verify(const RunConfig& c, std::ostream& log) {
  const Mesh mesh = input_mesh(c);
  VerifyOptions o;
  o.dual_depth = c.dual_depth;
  o.quad_degree = c.quad_degree;
  o.preset = c.preset;
  const VerifyReport r = run_verification(mesh, c.kappas, c.seed, o);
  json checks = json::array();
  for (const CheckResult& check : r.checks) {
    checks.push_back({{"name", check.name},
                      {"kappa", check.kappa},
                      {"measured", check.measured},
                      {"lower", check.lower},
                      {"upper", check.upper},
                      {"pass", check.pass}});
    log << (check.pass ? "PASS " : "FAIL ") << check.name << " kappa=" << check.kappa
        << " measured=" << check.measured << '\n';
  }
  write_json(c.out / "verify.json", {{"command", "verify"}, {"seed", c.seed}, {"pass", r.all_pass()}, {"checks", checks}});
  return r.all_pass() ? kExitOk : kExitNumerical;
}

}  // namespace

void validate(const RunConfig& c) {
  static const std::vector<std::string> commands{"solve", "estimate", "adapt", "study", "verify"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end()) {
    throw ConfigError("unknown command: " + c.command);
  }
  const auto& presets = problem_presets();
  if (std::find(presets.begin(), presets.end(), c.preset) == presets.end()) {
    throw ConfigError("unknown preset: " + c.preset);
  }
  if (c.kappas.empty()) throw ConfigError("at least one kappa is required");
  for (double k : c.kappas) {
    if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("kappa must be positive and finite");
  }
  if (!(c.theta_mark > 0.0 && c.theta_mark < 1.0)) throw ConfigError("theta-mark must lie in (0, 1)");
  if (c.max_dof < 0) throw ConfigError("max-dof must be nonnegative");
  if (c.quad_degree < 1 || c.quad_degree > kMaxQuadratureDegree) {
    throw ConfigError("quad-degree must lie in [1, " + std::to_string(kMaxQuadratureDegree) + "]");
  }
  if (c.dual_depth < 0 || c.dual_depth > 6) throw ConfigError("dual-depth must lie in [0, 6]");
  if (c.oscillation_every < 0) throw ConfigError("osc-every must be nonnegative");
  if (!(c.tol > 0.0 && c.tol < 1.0)) throw ConfigError("tol must lie in (0, 1)");
  if (c.grid < 1) throw ConfigError("grid must be positive");
  if (c.threads < 0) throw ConfigError("threads must be nonnegative");
  if (c.mesh && !std::filesystem::exists(*c.mesh)) throw ConfigError("mesh file not found: " + c.mesh->string());
}

ParseResult parse_command_line(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust residual error estimation for reaction-diffusion problems"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file; command line flags take precedence");
  RunConfig c;
  std::string mesh;
  std::vector<double> kappas;
  double kappa = 0.0;
  app.add_option("--mesh", mesh, "mesh file (nv ne header, coordinates, 0-based triangles)");
  app.add_option("--grid", c.grid, "cells per side of the default unit square grid");
  app.add_option("--preset,--rhs", c.preset, "problem preset: sinsin, const1, layer1d");
  app.add_option("--kappa", kappa, "reaction parameter");
  app.add_option("--kappas", kappas, "comma separated kappa list")->delimiter(',');
  app.add_option("--theta-mark", c.theta_mark, "Doerfler fraction in (0, 1)");
  app.add_option("--max-dof", c.max_dof, "stop refining once the dof count exceeds this");
  app.add_option("--quad-degree", c.quad_degree, "quadrature degree for data integrals");
  app.add_option("--dual-depth", c.dual_depth, "uniform refinements in local dual norms");
  app.add_option("--osc-every", c.oscillation_every, "oscillation every k-th iteration (0 = never)");
  app.add_option("--tol", c.tol, "relative CG residual");
  app.add_option("--out", c.out, "output directory");
  app.add_option("--seed", c.seed, "seed for random samples in verify");
  app.add_option("--threads", c.threads, "worker threads (0 = auto)");
  const std::pair<const char*, const char*> commands[] = {
      {"solve", "Galerkin solution on the mesh"},
      {"estimate", "solution plus per-vertex indicators"},
      {"adapt", "adaptive loop for one kappa"},
      {"study", "adaptive runs and effectivities over a kappa list"},
      {"verify", "property checks of the dual system on the mesh"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return {std::nullopt, app.exit(e, out, err)};
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return {std::nullopt, kExitUsage};
  }
  c.command = app.get_subcommands().front()->get_name();
  if (!mesh.empty()) c.mesh = mesh;
  if (!kappas.empty()) {
    c.kappas = kappas;
  } else if (app.count("--kappa") > 0) {
    c.kappas = {kappa};
  }
  return {c, kExitOk};
}

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    validate(config);
    std::filesystem::create_directories(config.out);
#ifdef _OPENMP
    if (config.threads > 0) omp_set_num_threads(config.threads);
#endif
    if (config.command == "solve") return run_solve(config, log);
    if (config.command == "estimate") return run_estimate(config, log);
    if (config.command == "adapt") return run_adapt(config, log, err);
    if (config.command == "study") return run_study(config, log);
    return run_verify(config, log);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const MeshError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const ParseResult parsed = parse_command_line(argc, argv, out, err);
  if (!parsed.config) return parsed.exit_code;
  return run(*parsed.config, out, err);
}

void write_solution_csv(const std::filesystem::path& path, const Mesh& mesh, const DiscreteFunction& u) {
  std::ofstream out = open_output(path);
  out << "vertex_id,x,y,u\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Point& x = mesh.vertex(v);
    out << v << ',' << x.x() << ',' << x.y() << ',' << u.at_vertex(mesh, v) << '\n';
  }
}

void write_indicator_csv(const std::filesystem::path& path, const Mesh& mesh, const IndicatorReport& report) {
  std::ofstream out = open_output(path);
  out << "vertex_id,x,y,E,osc,n_elements_in_star\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Point& x = mesh.vertex(v);
    out << v << ',' << x.x() << ',' << x.y() << ',' << report.indicator[v] << ',';
    if (!report.oscillation.empty()) out << report.oscillation[v];
    out << ',' << mesh.vertex_elements(v).size() << '\n';
  }
}

void write_run_report_csv(const std::filesystem::path& path, const RunReport& report) {
  std::ofstream out = open_output(path);
  out << "iteration,dofs,elements,estimator,oscillation,error,effectivity,classic_estimator,kappa,theta_mark,"
         "marked_elements,seconds\n";
  for (const IterationRecord& r : report.iterations) {
    out << r.iteration << ',' << r.dofs << ',' << r.elements << ',' << r.estimator << ',';
    write_optional(out, r.oscillation);
    out << ',';
    write_optional(out, r.error);
    out << ',';
    write_optional(out, r.effectivity);
    out << ',' << r.classic_estimator << ',' << report.kappa << ',' << report.theta_mark << ','
        << r.marked_elements << ',' << r.seconds << '\n';
  }
}

void write_study_csv(const std::filesystem::path& path, const StudyReport& report) {
  std::ofstream out = open_output(path);
  out << "kappa,iteration,dofs,estimator,oscillation,error,effectivity\n";
  for (const StudyRow& r : report.rows) {
    out << r.kappa << ',' << r.iteration << ',' << r.dofs << ',' << r.estimator << ',' << r.oscillation << ','
        << r.error << ',' << r.effectivity << '\n';
  }
}

}  // namespace rdest
