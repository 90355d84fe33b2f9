// Command-line driver: model validation, the three direct solvers, the
// perturbation experiments and the Monte Carlo verification, with
// machine-readable reports for CI.
//
// Exit codes: 0 pass, 1 check failed, 2 usage or parse error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctmc/exec.hpp"
#include "ctmc/ibp.hpp"
#include "ctmc/model_io.hpp"
#include "ctmc/montecarlo.hpp"
#include "ctmc/perturbation.hpp"
#include "ctmc/qmatrix.hpp"
#include "ctmc/semigroup.hpp"
#include "ctmc/tf_io.hpp"

namespace {

using nlohmann::json;

constexpr int kPass = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct CommonOpts {
  double horizon = 1.0;
  double step = 0.0;  // 0 = horizon/512
  ctmc::State window = 60;
  int threads = 0;
};

ctmc::TimeGrid make_grid(const CommonOpts& c) {
  const double h = c.step > 0.0 ? c.step : c.horizon / 512.0;
  return ctmc::TimeGrid(c.horizon, h);
}

void print_header(const json& settings) {
  std::cout << "# settings " << settings.dump() << "\n";
}

void write_report(const std::string& path, const json& report) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw ctmc::ConfigError("cannot write " + path);
  out << report.dump(2) << "\n";
}

std::vector<ctmc::State> parse_schedule(const std::string& s) {
  std::vector<ctmc::State> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(static_cast<ctmc::State>(std::stoul(item)));
  return out;
}

int run_validate(const std::string& model_path, ctmc::State window,
                 double tol) {
  ctmc::LoadedModel model = ctmc::load_model_file(model_path);
  if (window == 0) {  // auto: clamp to the declared support
    auto bound = ctmc::generator_of(model).support_bound();
    window = bound ? std::min<ctmc::State>(50, *bound) : 50;
    if (window == 0) window = 1;
  }
  ctmc::ValidationReport rep =
      ctmc::validate(ctmc::generator_of(model), ctmc::Window(window), tol);
  json j{{"model", model_path},
         {"window", window},
         {"tol", tol},
         {"passed", rep.passed},
         {"max_residual", rep.max_residual},
         {"window_tail_mass", rep.window_tail_mass}};
  if (const auto* p = std::get_if<ctmc::BoundedPerturbation>(&model))
    j["gamma"] = p->gamma();
  json issues = json::array();
  for (const auto& is : rep.issues)
    issues.push_back({{"row", is.row}, {"what", is.what}});
  j["issues"] = issues;
  print_header(j);
  std::cout << "validate: " << rep.summary() << "\n";
  return rep.passed ? kPass : kCheckFailed;
}

int run_solve(const std::string& model_path, const std::string& method,
              const CommonOpts& common, int n_max, double tail_tol, double eps,
              const std::string& out_path) {
  ctmc::LoadedModel model = ctmc::load_model_file(model_path);
  const ctmc::RateMatrix& m = ctmc::generator_of(model);
  ctmc::Window window(common.window);
  ctmc::TimeGrid grid = make_grid(common);
  print_header({{"model", model_path},
                {"method", method},
                {"T", grid.horizon},
                {"h", grid.step},
                {"window", common.window},
                {"n_max", n_max},
                {"tail_tol", tail_tol},
                {"eps", eps}});

  ctmc::TransitionFunction fn;
  if (method == "series") {
    ctmc::SeriesResult r = ctmc::series_solve(m, window, grid, n_max, tail_tol);
    if (!r.converged)
      std::cout << "warning: series not converged, tail mass " << r.tail_mass
                << " after " << r.terms_used << " terms\n";
    else
      std::cout << "series converged with " << r.terms_used
                << " terms, tail mass " << r.tail_mass << "\n";
    fn = std::move(r.fn);
  } else if (method == "ode") {
    ctmc::OdeResult r = ctmc::ode_solve(m, window, grid);
    std::cout << "ode: " << r.substeps_per_step
              << " substeps/grid step, step-halving error "
              << r.step_check_error << "\n";
    fn = std::move(r.fn);
  } else if (method == "uniform") {
    fn = ctmc::uniformization_solve(m, window, grid, eps);
  } else {
    std::cerr << "unknown method " << method
              << " (want series, ode or uniform)\n";
    return kUsage;
  }

  const std::size_t last = grid.points - 1;
  double mass0 = fn.row_sum(last, 0);
  std::cout << "P(T) row 0: sum " << mass0 << ", defect "
            << ctmc::honesty_defect(fn, last, 0) << "\n";
  if (!out_path.empty()) {
    ctmc::save_transition_function(fn, out_path);
    std::cout << "wrote " << out_path << "\n";
  }
  return kPass;
}

int run_equivalence(const std::string& r_path, const std::string& a_path,
                    const std::string& schedule_str, ctmc::State origin,
                    double horizon, ctmc::ProbeConfig cfg,
                    const std::string& out_path) {
  ctmc::LoadedModel rm = ctmc::load_model_file(r_path);
  ctmc::BoundedPerturbation a =
      ctmc::as_perturbation(ctmc::load_model_file(a_path));
  std::vector<ctmc::State> schedule = parse_schedule(schedule_str);
  print_header({{"modelR", r_path},
                {"modelA", a_path},
                {"schedule", schedule_str},
                {"origin", origin},
                {"T", horizon},
                {"theta_reg", cfg.theta_reg},
                {"theta_exp", cfg.theta_exp},
                {"plateau_ratio", cfg.plateau_ratio}});
  ctmc::EquivalenceReport rep = ctmc::regularity_equivalence_experiment(
      ctmc::generator_of(rm), a, origin, horizon, schedule, cfg);

  auto trace_json = [](const ctmc::ProbeResult& p) {
    json t = json::array();
    for (const auto& d : p.trace)
      t.push_back({{"window", d.window}, {"defect", d.defect}});
    return json{{"verdict", ctmc::to_string(p.verdict)}, {"trace", t}};
  };
  json j{{"base", trace_json(rep.base)},
         {"perturbed", trace_json(rep.perturbed)},
         {"consistent", rep.consistent}};
  write_report(out_path, j);

  std::cout << "base:      " << ctmc::to_string(rep.base.verdict) << "\n";
  std::cout << "perturbed: " << ctmc::to_string(rep.perturbed.verdict) << "\n";
  for (std::size_t k = 0; k < rep.base.trace.size(); ++k)
    std::cout << "  N=" << rep.base.trace[k].window << " defect base "
              << rep.base.trace[k].defect << " perturbed "
              << rep.perturbed.trace[k].defect << "\n";
  if (!rep.consistent) {
    std::cout << "FINDING: decisive verdicts disagree\n";
    return kCheckFailed;
  }
  std::cout << "verdicts consistent\n";
  return kPass;
}

int run_ibp(const std::string& r_path, const std::string& a_path,
            const CommonOpts& common, ctmc::State i, ctmc::State j,
            double bound, const std::string& table_path,
            const std::string& out_path) {
  ctmc::LoadedModel rm = ctmc::load_model_file(r_path);
  ctmc::BoundedPerturbation a =
      ctmc::as_perturbation(ctmc::load_model_file(a_path));
  const ctmc::RateMatrix& r = ctmc::generator_of(rm);
  ctmc::RateMatrix q = ctmc::perturb(r, a);
  ctmc::Window window(common.window);
  ctmc::TimeGrid grid = make_grid(common);
  print_header({{"modelR", r_path},
                {"modelA", a_path},
                {"T", grid.horizon},
                {"h", grid.step},
                {"window", common.window},
                {"i", i},
                {"j", j},
                {"bound", bound}});

  auto residual_at = [&](const ctmc::TimeGrid& g) {
    ctmc::TransitionFunction rf =
        ctmc::uniformization_solve(r, window, g, 1e-12);
    ctmc::TransitionFunction qf =
        ctmc::uniformization_solve(q, window, g, 1e-12);
    return std::tuple(ctmc::matrix_identity_residual(rf, a, qf), std::move(rf),
                      std::move(qf));
  };

  auto [res_h, rf, qf] = residual_at(grid);
  ctmc::TimeGrid half = ctmc::TimeGrid(grid.horizon, grid.step / 2.0);
  auto [res_h2, rf2, qf2] = residual_at(half);

  ctmc::IbpValue lhs = ctmc::ibp_lhs(rf, a, qf, i, j, grid.points - 1);
  double rhs = ctmc::ibp_rhs(rf, a, qf, i, j, grid.points - 1);

  std::cout << "matrix identity residual: h=" << grid.step << " -> " << res_h
            << ", h/2 -> " << res_h2 << ", ratio "
            << (res_h2 > 0 ? res_h / res_h2 : 0.0) << "\n";
  std::cout << "pointwise sides at (i=" << i << ", j=" << j
            << ", t=" << grid.horizon << "): lhs " << lhs.value << " rhs "
            << rhs << " |diff| " << std::abs(lhs.value - rhs)
            << " (window tail est " << lhs.window_tail_estimate << ")\n";

  if (!table_path.empty()) {
    std::ofstream table(table_path);
    if (!table) throw ctmc::ConfigError("cannot write " + table_path);
    ctmc::matrix_identity_residual(rf, a, qf, ctmc::Exec::parallel, &table);
    std::cout << "wrote " << table_path << "\n";
  }
  json j_out{{"residual", res_h},
             {"residual_half_step", res_h2},
             {"ratio", res_h2 > 0 ? res_h / res_h2 : 0.0},
             {"lhs", lhs.value},
             {"rhs", rhs},
             {"lhs_window_tail_estimate", lhs.window_tail_estimate},
             {"bound", bound}};
  write_report(out_path, j_out);

  const bool ok = res_h <= bound;
  std::cout << (ok ? "residual within bound\n" : "residual above bound\n");
  return ok ? kPass : kCheckFailed;
}

int run_montecarlo(const std::string& r_path, const std::string& a_path,
                   const CommonOpts& common, ctmc::State i, ctmc::State j,
                   double t, std::size_t paths, std::uint64_t seed,
                   const std::string& out_path) {
  ctmc::LoadedModel rm = ctmc::load_model_file(r_path);
  ctmc::BoundedPerturbation a =
      ctmc::as_perturbation(ctmc::load_model_file(a_path));
  const ctmc::RateMatrix& r = ctmc::generator_of(rm);
  ctmc::RateMatrix q = ctmc::perturb(r, a);
  ctmc::Window window(common.window);

  const double h = common.step > 0.0 ? common.step : t / 512.0;
  ctmc::TimeGrid grid(t, h);
  print_header({{"modelR", r_path},
                {"modelA", a_path},
                {"i", i},
                {"j", j},
                {"t", t},
                {"h", h},
                {"window", common.window},
                {"paths", paths},
                {"seed", seed}});

  ctmc::TransitionFunction qf =
      ctmc::uniformization_solve(q, window, grid, 1e-12);
  ctmc::RepresentationReport rep = ctmc::verify_representation(
      r, a, qf, i, j, grid.points - 1, paths, seed);

  std::cout << "monte carlo " << rep.estimate << " +- " << rep.std_error
            << ", deterministic " << rep.deterministic << ", residual "
            << rep.residual << " ("
            << (rep.std_error > 0 ? rep.residual / rep.std_error : 0.0)
            << " sigma), exploded fraction " << rep.exploded_fraction << "\n";
  write_report(out_path, json{{"estimate", rep.estimate},
                              {"std_error", rep.std_error},
                              {"deterministic", rep.deterministic},
                              {"residual", rep.residual},
                              {"within_3sigma", rep.within_3sigma},
                              {"exploded_fraction", rep.exploded_fraction},
                              {"n_paths", rep.n_paths}});
  std::cout << (rep.within_3sigma ? "within 3 sigma\n" : "outside 3 sigma\n");
  return rep.within_3sigma ? kPass : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimal transition functions of countable-state chains and "
               "their bounded perturbations"};
  // --h is a grid flag below, so help lives on --help only
  app.set_help_flag("--help", "print help");
  app.set_config("--config", "", "read flags from a config file");
  app.require_subcommand(1);

  CommonOpts common;
  if (const char* env = std::getenv("CTMC_THREADS"))
    common.threads = std::atoi(env);
  app.add_option("--threads", common.threads, "worker thread cap");

  // validate
  auto* validate = app.add_subcommand("validate", "check a model file");
  std::string v_model;
  ctmc::State v_window = 0;  // 0 = clamp to the model support
  double v_tol = 1e-10;
  validate->add_option("model", v_model)->required();
  validate->add_option("--window", v_window, "validation window (0 = auto)");
  validate->add_option("--tol", v_tol, "conservativeness tolerance");

  // solve
  auto* solve = app.add_subcommand("solve", "compute a transition function");
  solve->set_help_flag("--help", "print help");
  std::string s_model, s_method = "uniform", s_out;
  int s_nmax = 80;
  double s_tail_tol = 1e-8, s_eps = 1e-10;
  solve->add_option("model", s_model)->required();
  solve->add_option("--method", s_method, "series | ode | uniform");
  solve->add_option("--T", common.horizon, "horizon");
  solve->add_option("--h", common.step, "grid step (default T/512)");
  solve->add_option("--window", common.window, "state window");
  solve->add_option("--n-max", s_nmax, "series term budget");
  solve->add_option("--tail-tol", s_tail_tol, "series tail tolerance");
  solve->add_option("--eps", s_eps, "uniformization tolerance");
  solve->add_option("--out", s_out, "output file (.csv or .bin)");

  // equivalence
  auto* equiv = app.add_subcommand(
      "equivalence", "probe regularity of a generator and its perturbation");
  std::string e_model_r, e_model_a, e_schedule = "100,200,400", e_out;
  ctmc::State e_origin = 1;
  double e_horizon = 1.0;
  ctmc::ProbeConfig e_cfg;
  equiv->add_option("modelR", e_model_r)->required();
  equiv->add_option("modelA", e_model_a)->required();
  equiv->add_option("--schedule", e_schedule, "window schedule, e.g. 100,200,400");
  equiv->add_option("--origin", e_origin, "start state");
  equiv->add_option("--T", e_horizon, "horizon");
  equiv->add_option("--theta-reg", e_cfg.theta_reg, "regular threshold");
  equiv->add_option("--theta-exp", e_cfg.theta_exp, "explosive threshold");
  equiv->add_option("--out", e_out, "JSON report path");

  // ibp
  auto* ibp = app.add_subcommand(
      "ibp", "integration-by-parts residuals of the two semigroups");
  ibp->set_help_flag("--help", "print help");
  std::string i_model_r, i_model_a, i_table, i_out;
  ctmc::State i_i = 1, i_j = 0;
  double i_bound = 1e-3;
  ibp->add_option("modelR", i_model_r)->required();
  ibp->add_option("modelA", i_model_a)->required();
  ibp->add_option("--T", common.horizon, "horizon");
  ibp->add_option("--h", common.step, "grid step (default T/512)");
  ibp->add_option("--window", common.window, "state window");
  ibp->add_option("--i", i_i, "row state");
  ibp->add_option("--j", i_j, "column state");
  ibp->add_option("--bound", i_bound, "pass bound on the matrix residual");
  ibp->add_option("--table", i_table, "CSV residual table path");
  ibp->add_option("--out", i_out, "JSON report path");

  // montecarlo
  auto* mc = app.add_subcommand(
      "montecarlo", "verify the probabilistic renewal form by simulation");
  mc->set_help_flag("--help", "print help");
  std::string m_model_r, m_model_a, m_out;
  ctmc::State m_i = 1, m_j = 1;
  double m_t = 0.5;
  std::size_t m_paths = 100000;
  std::uint64_t m_seed = 0;
  mc->add_option("modelR", m_model_r)->required();
  mc->add_option("modelA", m_model_a)->required();
  mc->add_option("--i", m_i, "start state");
  mc->add_option("--j", m_j, "target state");
  mc->add_option("--t", m_t, "time");
  mc->add_option("--h", common.step, "grid step (default t/512)");
  mc->add_option("--window", common.window, "state window");
  mc->add_option("--paths", m_paths, "path count");
  mc->add_option("--seed", m_seed, "master seed")->required();
  mc->add_option("--out", m_out, "JSON report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  ctmc::set_thread_cap(common.threads);
  try {
    if (*validate) return run_validate(v_model, v_window, v_tol);
    if (*solve)
      return run_solve(s_model, s_method, common, s_nmax, s_tail_tol, s_eps,
                       s_out);
    if (*equiv)
      return run_equivalence(e_model_r, e_model_a, e_schedule, e_origin,
                             e_horizon, e_cfg, e_out);
    if (*ibp)
      return run_ibp(i_model_r, i_model_a, common, i_i, i_j, i_bound, i_table,
                     i_out);
    if (*mc)
      return run_montecarlo(m_model_r, m_model_a, common, m_i, m_j, m_t,
                            m_paths, m_seed, m_out);
  } catch (const ctmc::ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kUsage;
  } catch (const ctmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kUsage;
}
