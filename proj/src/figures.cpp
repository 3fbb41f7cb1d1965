#include "qsol/figures.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace qsol {

namespace {

std::string number_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void tally(OutputSummary& s, const EnsembleResult& ens, double max_fraction) {
  s.trajectories += ens.trajectories;
  s.diverged += ens.diverged;
  if (ens.divergence_budget_exceeded(max_fraction)) s.divergence_budget_exceeded = true;
}

json features_json(const SpectrumFeatures& f) {
  json peaks = json::array();
  for (const auto& p : f.peaks)
    peaks.push_back({{"nu", p.nu}, {"value", p.value}, {"prominence", p.prominence}});
  return {{"peaks", peaks},
          {"center_value", f.center_value},
          {"center_stderr", f.center_stderr},
          {"peak_value", f.peak_value},
          {"min_z", f.min_z},
          {"min_z_nu", f.min_z_nu},
          {"inner_min_z", f.inner_min_z}};
}

// Gridded V(nu, xi) and <n(nu)> as raw arrays plus CSV slices at whole periods.
std::vector<std::string> write_map(const fs::path& dir, const std::string& stem, const NoiseMap& m,
                                   std::span<const NoiseReport> reps, const json& meta) {
  std::vector<std::string> files;
  json d = meta;
  d["axes"] = {{{"name", "xi"}, {"units", "soliton periods"}, {"values", m.xi}},
               {{"name", "nu"}, {"units", "1/t0"}, {"values", m.nu}}};
  d["N"] = m.n;
  const std::size_t shape[] = {m.xi.size(), m.nu.size()};
  d["quantity"] = "normal-ordered variance n_bar Var[n(nu)] (shot noise = 0)";
  write_array(dir / (stem + "_variance.f64"), m.values, shape, d);
  d["quantity"] = "standard error of the variance (batch means)";
  write_array(dir / (stem + "_variance_stderr.f64"), m.stderr, shape, d);
  d["quantity"] = "mean spectrum <n(nu)> (dimensionless)";
  write_array(dir / (stem + "_mean.f64"), m.mean, shape, d);
  for (const char* s : {"_variance.f64", "_variance_stderr.f64", "_mean.f64"}) {
    files.push_back(stem + s);
    files.push_back(stem + s + std::string(".json"));
  }
  for (std::size_t p = 0; p < m.xi.size(); ++p) {
    const double xi = m.xi[p];
    if (std::abs(xi - std::round(xi)) > 1e-9) continue;
    auto f = write_report(dir, stem + "_xi" + number_tag(xi), reps[p], meta);
    files.insert(files.end(), f.begin(), f.end());
  }
  return files;
}

void finish(const fs::path& dir, const SimConfig& cfg, OutputSummary& s, RunManifest m,
            double wall) {
  m.wall_seconds = wall;
  m.trajectories = s.trajectories;
  m.diverged = s.diverged;
  m.extra["divergence_budget_exceeded"] = s.divergence_budget_exceeded;
  // The worker count does not affect results; leaving it out keeps the snapshot
  // identical across thread counts.
  auto snapshot = config_to_json(cfg);
  snapshot.erase("threads");
  write_json(dir / "config.json", snapshot);
  m.files.push_back("config.json");
  write_json(dir / "summary.json", s.summary);
  m.files.push_back("summary.json");
  write_manifest(dir, std::move(m));
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

OptimumResult optimum_from_json(const json& j) {
  OptimumResult r;
  auto num = [&](const char* k) { return j.at(k).is_null() ? std::nan("") : j.at(k).get<double>(); };
  r.n = num("N");
  r.xi = num("xi");
  r.cutoff = num("cutoff");
  r.fano_db = num("fano_db");
  r.fano_db_stderr = num("fano_db_stderr");
  r.fano_db_raw = num("fano_db_raw");
  r.mean_photons = num("mean_photons");
  r.worst_stderr_db = num("worst_stderr_db");
  r.trajectories = j.at("trajectories").get<std::size_t>();
  r.diverged = j.at("diverged").get<std::size_t>();
  r.stderr_target_met = j.at("stderr_target_met").get<bool>();
  r.degenerate = j.at("degenerate").get<bool>();
  return r;
}

}  // namespace

Tier parse_tier(const std::string& s) {
  if (s == "quick") return Tier::quick;
  if (s == "full") return Tier::full;
  throw ConfigError("tier: expected quick|full, got '" + s + "'");
}

std::string to_string(Tier t) { return t == Tier::quick ? "quick" : "full"; }

bool is_figure_id(const std::string& id) {
  for (const char* f : kFigureIds)
    if (id == f) return true;
  return false;
}

void RunOverrides::apply(SimConfig& c) const {
  if (seed) c.seed = *seed;
  if (trajectories) c.trajectories = *trajectories;
  if (grid_points) c.grid.n_points = *grid_points;
  if (d_zeta) c.stepper.d_zeta = *d_zeta;
  if (steps) {
    if (*steps == 0) throw ConfigError("steps: must be >= 1");
    c.stepper.d_zeta = c.zeta_max() / double(*steps);
  }
  if (threads) c.threads = *threads;
  if (no_noise) c.noise = false;
}

void RunOverrides::apply(SweepSpec& s) const {
  s.base.xi_max = s.xi_max;
  apply(s.base);
  if (trajectories) s.trajectories = *trajectories;
}

SimConfig tier_base(Tier tier) {
  SimConfig c;
  // Steps divide a twentieth of a soliton period exactly, so planes on a 0.05
  // grid in xi land on whole steps.
  if (tier == Tier::quick) {
    c.grid = {256, 20.0};
    c.stepper.d_zeta = std::numbers::pi / 320.0;
    c.trajectories = 500;
  } else {
    c.grid = {512, 20.0};
    c.stepper.d_zeta = std::numbers::pi / 640.0;
    c.trajectories = 10000;
  }
  c.batches = 16;
  return c;
}

SweepSpec fig2_curve(Variant variant, double xi_max, Tier tier) {
  SweepSpec s;
  s.base = tier_base(tier);
  s.variant = variant;
  s.xi_max = xi_max;
  s.trajectories = s.base.trajectories;
  if (tier == Tier::quick) s.n_values = {0.3, 0.5, 0.7, 0.9, 1.1, 1.3};
  return s;
}

OutputSummary run_simulate(const SimConfig& cfg, const fs::path& out, const SimulateOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  fs::create_directories(out);
  OutputSummary s;
  RunManifest m = make_manifest(cfg);
  const json meta = run_metadata(cfg);
  const auto ens = run_ensemble(cfg);
  tally(s, ens, cfg.max_divergence_fraction);
  const auto reps = reports(ens);
  json planes = json::array();
  for (std::size_t p = 0; p < reps.size(); ++p) {
    const std::string stem = "report_xi" + number_tag(ens.xi_planes[p]);
    auto f = write_report(out, stem, reps[p], meta);
    m.files.insert(m.files.end(), f.begin(), f.end());
    json fl = json::array();
    for (const auto& st : reps[p].filtered) fl.push_back(to_json(st));
    planes.push_back({{"xi", ens.xi_planes[p]}, {"zeta", reps[p].zeta},
                      {"degenerate", reps[p].degenerate}, {"filtered", fl}});
  }
  if (opt.write_map && reps.size() > 1) {
    const auto map = noise_map_from_reports(cfg.soliton_order, ens.xi_planes, reps);
    auto f = write_map(out, "map", map, reps, meta);
    m.files.insert(m.files.end(), f.begin(), f.end());
  }
  if (opt.dump_trajectories > 0) {
    const auto steps = ens.steps;
    std::vector<double> zeta;
    for (double xi : ens.xi_planes) zeta.push_back(xi_to_zeta(xi));
    for (std::size_t t = 0; t < std::min(opt.dump_trajectories, cfg.trajectories); ++t) {
      auto rec = propagate(initial_field(cfg, ens.grid), cfg, cfg.stepper, zeta, t);
      std::vector<FieldPair> snaps;
      for (auto& sn : rec.snapshots) snaps.push_back(std::move(sn.field));
      json d = meta;
      d["trajectory"] = t;
      d["diverged"] = rec.diverged;
      const std::string name = "trajectory_" + std::to_string(t) + ".f64";
      write_field_dump(out / name, snaps, d);
      m.files.push_back(name);
      m.files.push_back(name + ".json");
    }
  }
  s.summary = {{"command", "simulate"},
               {"metadata", meta},
               {"trajectories", ens.trajectories},
               {"diverged", ens.diverged},
               {"divergence_budget_exceeded", s.divergence_budget_exceeded},
               {"planes", planes}};
  finish(out, cfg, s, m, seconds_since(start));
  return s;
}

SweepSpec sweep_from_json(const json& j) {
  SweepSpec s;
  if (!j.is_object()) throw ConfigError("sweep: expected an object");
  for (const auto& [k, v] : j.items()) {
    try {
      if (k == "variant") s.variant = parse_variant(v.get<std::string>());
      else if (k == "xi_max") s.xi_max = v.get<double>();
      else if (k == "n_values") s.n_values = v.get<std::vector<double>>();
      else if (k == "xi") s.xi = v.get<std::vector<double>>();
      else if (k == "cutoffs") s.cutoffs = v.get<std::vector<double>>();
      else if (k == "trajectories") s.trajectories = v.get<std::size_t>();
      else if (k == "stderr_target_db") s.stderr_target_db = v.get<double>();
      else if (k == "config") s.base = config_from_json(v);
      else throw ConfigError("sweep." + k + ": unknown key");
    } catch (const json::exception&) {
      throw ConfigError("sweep." + k + ": wrong type (" + v.dump() + ")");
    }
  }
  s.base.xi_max = s.xi_max;
  s.validate();
  return s;
}

OutputSummary run_sweep(const SweepSpec& spec, const fs::path& out, const Progress& progress) {
  const auto start = std::chrono::steady_clock::now();
  spec.validate();
  fs::create_directories(out / "points");
  OutputSummary s;
  const SimConfig first = spec.config_for(spec.n_values.front());
  RunManifest m = make_manifest(first);
  TransitionCurve curve;
  curve.variant = spec.variant;
  curve.xi_max = spec.xi_max;
  curve.gamma = first.gamma;
  curve.temperature = first.raman.enabled ? first.raman.temperature : 0.0;
  for (double n : spec.n_values) {
    const SimConfig cfg = spec.config_for(n);
    const std::string name = "points/N" + number_tag(n) + ".json";
    const std::string hash = config_hash(cfg);
    const fs::path file = out / name;
    OptimumResult opt;
    bool reused = false;
    if (fs::exists(file)) {
      try {
        const json old = load_json_file(file);
        if (old.at("config_hash") == hash) {
          opt = optimum_from_json(old.at("optimum"));
          reused = true;
        }
      } catch (const std::exception&) {
        reused = false;
      }
    }
    if (!reused) {
      const auto ens = run_ensemble(cfg);
      const auto reps = reports(ens);
      const auto land = landscape_from_reports(n, ens.xi_planes, reps, spec.stderr_target_db);
      opt = land.optimum;
      json j = run_metadata(cfg);
      j["variant"] = to_string(spec.variant);
      j["optimum"] = to_json(opt);
      j["landscape"] = {{"xi", land.xi}, {"cutoffs", land.cutoffs}, {"fano_db", land.fano_db},
                        {"fano_db_stderr", land.stderr_db}};
      write_json(file, j);
    }
    s.trajectories += opt.trajectories;
    s.diverged += opt.diverged;
    if (double(opt.diverged) > first.max_divergence_fraction * double(opt.trajectories))
      s.divergence_budget_exceeded = true;
    m.files.push_back(name);
    curve.points.push_back(opt);
    if (progress) {
      char line[200];
      std::snprintf(line, sizeof line, "%s xi_max=%g N=%g: %+.2f +- %.2f dB at xi=%g cutoff=%g%s%s",
                    to_string(spec.variant).c_str(), spec.xi_max, n, opt.fano_db,
                    opt.fano_db_stderr, opt.xi, opt.cutoff, opt.flagged() ? " [flagged]" : "",
                    reused ? " (reused)" : "");
      progress(line);
    }
  }
  json meta = run_metadata(first);
  meta.erase("config_hash");
  meta["variant"] = to_string(spec.variant);
  meta["xi_max"] = spec.xi_max;
  std::vector<double> cn, cxi, cc, cf, cse, craw, cflag;
  for (const auto& p : curve.points) {
    cn.push_back(p.n);
    cxi.push_back(p.xi);
    cc.push_back(p.cutoff);
    cf.push_back(p.fano_db);
    cse.push_back(p.fano_db_stderr);
    craw.push_back(p.fano_db_raw);
    cflag.push_back(p.flagged() ? 1.0 : 0.0);
  }
  const std::vector<std::string> cols{"N", "xi_opt", "cutoff_opt", "fano_db", "fano_db_stderr",
                                      "fano_db_raw", "flagged"};
  const std::vector<std::vector<double>> data{cn, cxi, cc, cf, cse, craw, cflag};
  write_csv(out / "curve.csv", meta, cols, data);
  m.files.push_back("curve.csv");
  json cj = meta;
  cj["curve"] = to_json(curve);
  write_json(out / "curve.json", cj);
  m.files.push_back("curve.json");
  s.summary = {{"command", "sweep"}, {"curve", to_json(curve)}};
  m.extra["sweep"] = {{"variant", to_string(spec.variant)}, {"xi_max", spec.xi_max},
                      {"n_values", spec.n_values}, {"trajectories", spec.trajectories}};
  finish(out, first, s, m, seconds_since(start));
  return s;
}

OutputSummary run_figure(const std::string& id, Tier tier, const fs::path& out,
                         const RunOverrides& ov, const Progress& progress) {
  if (!is_figure_id(id)) throw ConfigError("figure: unknown id '" + id + "' (fig1..fig5)");
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(out);
  OutputSummary s;
  SimConfig base = tier_base(tier);
  base.trajectories = tier == Tier::quick ? 1000 : 10000;
  auto say = [&](const std::string& msg) {
    if (progress) progress(id + ": " + msg);
  };

  auto single = [&](double n, std::vector<double> planes, std::vector<double> cutoffs, bool raman) {
    SimConfig c = base;
    c.soliton_order = n;
    c.xi_max = planes.back();
    c.xi_planes = std::move(planes);
    if (!cutoffs.empty()) c.cutoffs = std::move(cutoffs);
    c.raman.enabled = raman;
    ov.apply(c);
    return c;
  };

  RunManifest m = make_manifest(base);
  SimConfig snapshot = base;
  json summary = {{"figure", id}, {"tier", to_string(tier)}};

  if (id == "fig1") {
    json spectra = json::array();
    for (double n : {0.7, 0.9, 1.0}) {
      const SimConfig c = single(n, {4.0}, {}, false);
      snapshot = c;
      say("N=" + number_tag(n));
      const auto ens = run_ensemble(c);
      tally(s, ens, c.max_divergence_fraction);
      auto rep = reports(ens).front();
      json meta = run_metadata(c);
      meta["N"] = n;
      auto f = write_report(out, "fig1_N" + number_tag(n), rep, meta);
      m.files.insert(m.files.end(), f.begin(), f.end());
      spectra.push_back({{"N", n}, {"zeta", rep.zeta}, {"features", features_json(spectrum_features(rep))}});
    }
    summary["spectra"] = spectra;
  } else if (id == "fig3" || id == "fig5") {
    const std::vector<double> orders = id == "fig3" ? std::vector<double>{1.0}
                                                    : std::vector<double>{1.1, 1.0};
    json maps = json::array();
    for (double n : orders) {
      const SimConfig c = single(n, xi_grid(4.0, 0.1), {}, false);
      snapshot = c;
      say("noise map N=" + number_tag(n));
      const auto ens = run_ensemble(c);
      tally(s, ens, c.max_divergence_fraction);
      const auto reps = reports(ens);
      const auto map = noise_map_from_reports(n, ens.xi_planes, reps);
      json meta = run_metadata(c);
      meta["N"] = n;
      auto f = write_map(out, id + "_N" + number_tag(n), map, reps, meta);
      m.files.insert(m.files.end(), f.begin(), f.end());
      // Centre-bin variance per plane: the contrast read-out of the two maps.
      std::size_t center = 0;
      for (std::size_t k = 0; k < map.nu.size(); ++k)
        if (std::abs(map.nu[k]) < std::abs(map.nu[center])) center = k;
      json centre = json::array();
      for (std::size_t p = 0; p < map.xi.size(); ++p)
        centre.push_back({{"xi", map.xi[p]}, {"value", map.at(p, center)}, {"stderr", map.err(p, center)}});
      maps.push_back({{"N", n}, {"center_variance", centre}});
    }
    summary["maps"] = maps;
  } else if (id == "fig4") {
    const SimConfig c = single(1.0, xi_grid(4.0, 0.05), cutoff_grid(0.025, 0.5, 0.025), true);
    snapshot = c;
    say("Raman landscape N=1, T=" + number_tag(c.raman.temperature) + " K");
    const auto ens = run_ensemble(c);
    tally(s, ens, c.max_divergence_fraction);
    const auto reps = reports(ens);
    const auto land = landscape_from_reports(1.0, ens.xi_planes, reps, 0.2);
    json meta = run_metadata(c);
    meta["axes"] = {{{"name", "xi"}, {"units", "soliton periods"}, {"values", land.xi}},
                    {{"name", "cutoff"}, {"units", "1/t0"}, {"values", land.cutoffs}}};
    meta["temperature_K"] = c.raman.temperature;
    const std::size_t shape[] = {land.xi.size(), land.cutoffs.size()};
    meta["quantity"] = "filtered Fano factor [dB re shot noise]";
    write_array(out / "fig4_fano_db.f64", land.fano_db, shape, meta);
    meta["quantity"] = "standard error of the Fano factor [dB]";
    write_array(out / "fig4_fano_db_stderr.f64", land.stderr_db, shape, meta);
    for (const char* f : {"fig4_fano_db.f64", "fig4_fano_db_stderr.f64"}) {
      m.files.push_back(f);
      m.files.push_back(std::string(f) + ".json");
    }
    // Long-format CSV: one row per (xi, cutoff).
    std::vector<double> cx, cc, cf, cs;
    for (std::size_t p = 0; p < land.xi.size(); ++p)
      for (std::size_t k = 0; k < land.cutoffs.size(); ++k) {
        cx.push_back(land.xi[p]);
        cc.push_back(land.cutoffs[k]);
        cf.push_back(land.fano_db[p * land.cutoffs.size() + k]);
        cs.push_back(land.stderr_db[p * land.cutoffs.size() + k]);
      }
    json cmeta = run_metadata(c);
    const std::vector<std::string> cols{"xi", "cutoff", "fano_db", "fano_db_stderr"};
    const std::vector<std::vector<double>> data{cx, cc, cf, cs};
    write_csv(out / "fig4_landscape.csv", cmeta, cols, data);
    m.files.push_back("fig4_landscape.csv");
    summary["optimum"] = to_json(land.optimum);
    summary["optimum_cutoff_GHz"] = to_physical(c.units, land.optimum.cutoff, QuantityKind::frequency) / 1e9;
  } else if (id == "fig2") {
    std::vector<std::pair<Variant, double>> curves{{Variant::ideal, 4.0},
                                                   {Variant::normal_dispersion, 4.0}};
    if (tier == Tier::full) {
      curves.insert(curves.begin() + 1, {{Variant::ideal, 8.0}, {Variant::lossy, 4.0}, {Variant::raman, 4.0}});
    }
    json cj = json::array();
    for (auto [variant, xi_max] : curves) {
      SweepSpec spec = fig2_curve(variant, xi_max, tier);
      ov.apply(spec);
      snapshot = spec.base;
      const std::string sub = to_string(variant) + "_xi" + number_tag(xi_max);
      auto r = run_sweep(spec, out / sub, [&](const std::string& line) { say(line); });
      s.trajectories += r.trajectories;
      s.diverged += r.diverged;
      s.divergence_budget_exceeded = s.divergence_budget_exceeded || r.divergence_budget_exceeded;
      cj.push_back({{"directory", sub}, {"curve", r.summary.at("curve")}});
      m.files.push_back(sub + "/manifest.json");
    }
    summary["curves"] = cj;
  }
  summary["trajectories"] = s.trajectories;
  summary["diverged"] = s.diverged;
  summary["divergence_budget_exceeded"] = s.divergence_budget_exceeded;
  s.summary = summary;
  m.config_hash = config_hash(snapshot);
  m.seed = snapshot.seed;
  m.grid = {{"n_points", snapshot.grid.n_points}, {"tau_window", snapshot.grid.tau_window}};
  m.extra["figure"] = id;
  m.extra["tier"] = to_string(tier);
  finish(out, snapshot, s, m, seconds_since(start));
  return s;
}

}  // namespace qsol
