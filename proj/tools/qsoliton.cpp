// qsoliton: command-line front end for ensemble runs, figure presets,
// parameter sweeps and the invariant suite.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsol/figures.hpp"
#include "qsol/validation.hpp"

namespace {

enum Exit { kOk = 0, kConfigError = 2, kCheckFailed = 3, kDivergence = 4 };

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trajectories;
  std::optional<std::size_t> grid;
  std::optional<std::size_t> steps;
  std::optional<unsigned> threads;
  std::string out;
  std::string tier = "quick";

  void add_to(CLI::App* app, bool with_tier) {
    app->add_option("--seed", seed, "Master seed of the counter-based noise streams");
    app->add_option("--trajectories", trajectories, "Ensemble size");
    app->add_option("--grid", grid, "Number of tau grid points (power of two)");
    app->add_option("--steps", steps, "Integration steps up to xi_max (sets d_zeta)");
    app->add_option("--threads", threads, "Worker threads (0: all cores)");
    app->add_option("--out", out, "Output directory")->required();
    if (with_tier)
      app->add_option("--tier", tier, "quick | full")->check(CLI::IsMember({"quick", "full"}));
  }

  qsol::RunOverrides overrides() const {
    qsol::RunOverrides o;
    o.seed = seed;
    o.trajectories = trajectories;
    o.grid_points = grid;
    o.steps = steps;
    o.threads = threads;
    return o;
  }
};

void progress(const std::string& line) { std::cerr << line << "\n"; }

int finish(const qsol::OutputSummary& s, const std::string& out) {
  std::printf("%zu trajectories, %zu diverged; output in %s\n", s.trajectories, s.diverged,
              out.c_str());
  if (s.divergence_budget_exceeded) {
    std::fprintf(stderr, "error: diverged trajectories exceed the configured budget\n");
    return kDivergence;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive-P Monte Carlo simulator of quantum soliton noise"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(QSOL_VERSION));

  Common sim_opts, fig_opts, sweep_opts;

  auto* simulate = app.add_subcommand("simulate", "Run one configuration");
  std::string config_path;
  std::vector<std::string> sets;
  bool no_noise = false;
  std::size_t dump = 0;
  simulate->add_option("config", config_path, "JSON config file (comments allowed)");
  simulate->add_option("--set", sets, "Override a config field: key.path=value");
  simulate->add_flag("--no-noise", no_noise, "Deterministic run (n_bar -> infinity)");
  simulate->add_option("--dump", dump, "Write snapshots of the first k trajectories");
  sim_opts.add_to(simulate, false);

  auto* figure = app.add_subcommand("figure", "Run a figure preset (fig1..fig5)");
  std::string figure_id;
  figure->add_option("id", figure_id, "fig1 | fig2 | fig3 | fig4 | fig5")->required();
  fig_opts.add_to(figure, true);

  auto* validate = app.add_subcommand("validate", "Run the invariant suite");
  double noise_scale = 1.0;
  bool skip_convergence = false;
  std::uint64_t validate_seed = 20240917;
  validate->add_option("--inject-noise-scale", noise_scale,
                       "Test hook: scale the noise variance seen by the noise check");
  validate->add_flag("--no-convergence", skip_convergence, "Skip order-of-accuracy estimates");
  validate->add_option("--seed", validate_seed, "Seed for the statistical checks");

  auto* sweep = app.add_subcommand("sweep", "Transition sweep over soliton orders");
  std::string sweep_path, variant = "ideal";
  std::vector<double> n_values;
  double xi_max = 4.0;
  sweep->add_option("spec", sweep_path, "JSON sweep spec (otherwise built from flags)");
  sweep->add_option("--variant", variant, "ideal | lossy | raman | normal-dispersion");
  sweep->add_option("--n-values", n_values, "Soliton orders");
  sweep->add_option("--xi-max", xi_max, "Largest propagation distance [soliton periods]");
  sweep_opts.add_to(sweep, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*simulate) {
      qsol::json j = config_path.empty() ? qsol::json::object() : qsol::load_json_file(config_path);
      for (const auto& s : sets) qsol::apply_override(j, s);
      qsol::SimConfig cfg = qsol::config_from_json(j);
      auto ov = sim_opts.overrides();
      ov.no_noise = no_noise;
      ov.apply(cfg);
      cfg.validate();
      qsol::SimulateOptions opt;
      opt.dump_trajectories = dump;
      return finish(qsol::run_simulate(cfg, sim_opts.out, opt), sim_opts.out);
    }
    if (*figure) {
      const auto tier = qsol::parse_tier(fig_opts.tier);
      auto s = qsol::run_figure(figure_id, tier, fig_opts.out, fig_opts.overrides(), progress);
      return finish(s, fig_opts.out);
    }
    if (*sweep) {
      qsol::SweepSpec spec;
      if (!sweep_path.empty()) {
        spec = qsol::sweep_from_json(qsol::load_json_file(sweep_path));
      } else {
        spec = qsol::fig2_curve(qsol::parse_variant(variant), xi_max, qsol::parse_tier(sweep_opts.tier));
        if (!n_values.empty()) spec.n_values = n_values;
      }
      sweep_opts.overrides().apply(spec);
      return finish(qsol::run_sweep(spec, sweep_opts.out, progress), sweep_opts.out);
    }
    if (*validate) {
      qsol::ValidationOptions o;
      o.noise_variance_scale = noise_scale;
      o.convergence = !skip_convergence;
      o.seed = validate_seed;
      const auto results = qsol::run_validation(o);
      bool ok = true;
      std::printf("%-44s %-6s %12s %12s  %s\n", "check", "result", "value", "tolerance", "detail");
      for (const auto& r : results) {
        ok = ok && r.passed;
        std::printf("%-44s %-6s %12.4g %12.4g  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL",
                    r.value, r.tolerance, r.detail.c_str());
      }
      return ok ? kOk : kCheckFailed;
    }
  } catch (const qsol::DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kDivergence;
  } catch (const qsol::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kOk;
}
