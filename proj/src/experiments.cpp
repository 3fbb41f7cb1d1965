#include "qsol/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qsol {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_increasing(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw ConfigError(std::string(name) + ": must not be empty");
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) throw ConfigError(std::string(name) + ": must be strictly increasing");
}
}  // namespace

Variant parse_variant(const std::string& s) {
  if (s == "ideal") return Variant::ideal;
  if (s == "lossy") return Variant::lossy;
  if (s == "raman") return Variant::raman;
  if (s == "normal-dispersion" || s == "normal") return Variant::normal_dispersion;
  throw ConfigError("variant: expected ideal|lossy|raman|normal-dispersion, got '" + s + "'");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::ideal: return "ideal";
    case Variant::lossy: return "lossy";
    case Variant::raman: return "raman";
    case Variant::normal_dispersion: return "normal-dispersion";
  }
  return "?";
}

std::vector<double> xi_grid(double xi_max, double step) {
  if (!(step > 0.0) || !(xi_max >= step)) throw ConfigError("xi grid: need 0 < step <= xi_max");
  std::vector<double> out;
  const auto n = std::size_t(std::floor(xi_max / step + 1e-9));
  for (std::size_t i = 1; i <= n; ++i) out.push_back(double(i) * step);
  if (xi_max - out.back() > 1e-9 * xi_max) out.push_back(xi_max);
  return out;
}

std::vector<double> cutoff_grid(double first, double last, double step) {
  if (!(step > 0.0) || !(last >= first)) throw ConfigError("cutoff grid: need step > 0, last >= first");
  std::vector<double> out;
  const auto n = std::size_t(std::floor((last - first) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(first + double(i) * step);
  return out;
}

std::vector<double> SweepSpec::planes() const { return xi.empty() ? xi_grid(xi_max, 0.25) : xi; }

std::vector<double> SweepSpec::cutoff_values() const {
  return cutoffs.empty() ? cutoff_grid(0.05, 0.5, 0.025) : cutoffs;
}

void SweepSpec::validate() const {
  require_increasing(n_values, "n_values");
  require_increasing(planes(), "xi");
  require_increasing(cutoff_values(), "cutoffs");
  if (planes().back() > xi_max * (1 + 1e-12)) throw ConfigError("xi: planes beyond xi_max");
  if (trajectories < 2) throw ConfigError("trajectories: need at least 2");
  if (!(stderr_target_db > 0.0)) throw ConfigError("stderr_target_db: must be > 0");
}

SimConfig SweepSpec::config_for(double n) const {
  SimConfig c = base;
  c.soliton_order = n;
  c.xi_max = xi_max;
  c.xi_planes = planes();
  c.cutoffs = cutoff_values();
  c.trajectories = trajectories;
  switch (variant) {
    case Variant::ideal: break;
    case Variant::lossy:
      if (c.gamma == 0.0) c.gamma = gamma_from_db_per_period(kFig2LossDbPerPeriod);
      break;
    case Variant::raman: c.raman.enabled = true; break;
    case Variant::normal_dispersion: c.dispersion = Dispersion::normal; break;
  }
  return c;
}

OptimumResult optimum_from_reports(double n, std::span<const double> xi,
                                   std::span<const NoiseReport> reports, double stderr_target_db) {
  if (xi.size() != reports.size()) throw std::invalid_argument("optimum: planes/reports mismatch");
  OptimumResult best;
  best.n = n;
  best.fano_db = std::numeric_limits<double>::infinity();
  bool all_degenerate = true;
  for (std::size_t p = 0; p < reports.size(); ++p) {
    const auto& r = reports[p];
    best.trajectories = std::size_t(r.samples) + r.diverged;
    best.diverged = r.diverged;
    for (const auto& f : r.filtered) {
      if (!f.degenerate) all_degenerate = false;
      const double se = f.fano_db_stderr;
      if (!(se <= stderr_target_db)) best.stderr_target_met = false;
      if (std::isfinite(se)) best.worst_stderr_db = std::max(best.worst_stderr_db, se);
      // Strict comparison in ascending (xi, cutoff) order keeps the first minimum.
      if (f.fano_db < best.fano_db) {
        best.fano_db = f.fano_db;
        best.fano_db_stderr = se;
        best.fano_db_raw = f.fano_db_raw;
        best.xi = xi[p];
        best.cutoff = f.cutoff;
        best.mean_photons = f.mean_photons;
      }
    }
  }
  best.degenerate = all_degenerate;
  if (all_degenerate) best.stderr_target_met = true;
  return best;
}

PointRun optimize_filter_distance(double n, const SweepSpec& spec, const EnsembleOptions& options) {
  spec.validate();
  PointRun run;
  run.config = spec.config_for(n);
  run.ensemble = run_ensemble(run.config, options);
  run.reports = reports(run.ensemble);
  run.optimum = optimum_from_reports(n, run.ensemble.xi_planes, run.reports, spec.stderr_target_db);
  return run;
}

TransitionCurve transition_sweep(const SweepSpec& spec, const Progress& progress) {
  spec.validate();
  TransitionCurve curve;
  curve.variant = spec.variant;
  curve.xi_max = spec.xi_max;
  const SimConfig probe = spec.config_for(spec.n_values.front());
  curve.gamma = probe.gamma;
  curve.temperature = probe.raman.enabled ? probe.raman.temperature : 0.0;
  for (double n : spec.n_values) {
    auto run = optimize_filter_distance(n, spec);
    if (progress) {
      std::ostringstream os;
      os << to_string(spec.variant) << " N=" << n << " fano*=" << run.optimum.fano_db << " dB at xi="
         << run.optimum.xi << " cutoff=" << run.optimum.cutoff;
      progress(os.str());
    }
    curve.points.push_back(run.optimum);
  }
  return curve;
}

double knee_location(const TransitionCurve& curve, double threshold_db) {
  const auto& p = curve.points;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].fano_db < threshold_db) {
      if (i == 0) return p[0].n;
      const double f0 = p[i - 1].fano_db, f1 = p[i].fano_db;
      return p[i - 1].n + (threshold_db - f0) / (f1 - f0) * (p[i].n - p[i - 1].n);
    }
  }
  return kNaN;
}

NoiseMap noise_map_from_reports(double n, std::span<const double> xi,
                                std::span<const NoiseReport> reports) {
  NoiseMap m;
  m.n = n;
  m.xi.assign(xi.begin(), xi.end());
  if (!reports.empty()) m.nu = reports.front().nu;
  for (const auto& r : reports) {
    m.values.insert(m.values.end(), r.var_spectrum.begin(), r.var_spectrum.end());
    m.stderr.insert(m.stderr.end(), r.var_stderr.begin(), r.var_stderr.end());
    m.mean.insert(m.mean.end(), r.mean_spectrum.begin(), r.mean_spectrum.end());
  }
  return m;
}

NoiseMap noise_map(double n, const SweepSpec& spec) {
  spec.validate();
  const auto cfg = spec.config_for(n);
  const auto ens = run_ensemble(cfg);
  const auto reps = reports(ens);
  return noise_map_from_reports(n, ens.xi_planes, reps);
}

std::vector<NoiseReport> snapshot_spectra(std::span<const double> n_values, double xi,
                                          const SweepSpec& spec) {
  SweepSpec s = spec;
  s.xi_max = xi;
  s.xi = {xi};
  std::vector<NoiseReport> out;
  for (double n : n_values) {
    const auto ens = run_ensemble(s.config_for(n));
    out.push_back(reports(ens).front());
  }
  return out;
}

Landscape landscape_from_reports(double n, std::span<const double> xi,
                                 std::span<const NoiseReport> reports, double stderr_target_db) {
  Landscape l;
  l.xi.assign(xi.begin(), xi.end());
  if (!reports.empty())
    for (const auto& f : reports.front().filtered) l.cutoffs.push_back(f.cutoff);
  for (const auto& r : reports)
    for (const auto& f : r.filtered) {
      l.fano_db.push_back(f.fano_db);
      l.stderr_db.push_back(f.fano_db_stderr);
    }
  l.optimum = optimum_from_reports(n, xi, reports, stderr_target_db);
  return l;
}

Landscape filter_landscape(const SweepSpec& spec, double n) {
  if (spec.variant != Variant::raman && !spec.base.raman.enabled)
    throw ConfigError("filter_landscape: requires the raman variant");
  auto run = optimize_filter_distance(n, spec);
  return landscape_from_reports(n, run.ensemble.xi_planes, run.reports, spec.stderr_target_db);
}

std::vector<Peak> find_peaks(std::span<const double> nu, std::span<const double> v,
                             std::span<const double> se, double z_min) {
  std::vector<Peak> peaks;
  const std::size_t n = v.size();
  for (std::size_t k = 0; k < n; ++k) {
    const bool left_ok = k == 0 || v[k] > v[k - 1];
    const bool right_ok = k + 1 == n || v[k] >= v[k + 1];
    if (!left_ok || !right_ok) continue;
    // Prominence: drop to the higher of the two lowest points reached before
    // climbing above v[k] on either side.
    double left_min = v[k], right_min = v[k];
    bool left_bounded = false, right_bounded = false;
    for (std::size_t j = k; j-- > 0;) {
      if (v[j] > v[k]) { left_bounded = true; break; }
      left_min = std::min(left_min, v[j]);
    }
    for (std::size_t j = k + 1; j < n; ++j) {
      if (v[j] > v[k]) { right_bounded = true; break; }
      right_min = std::min(right_min, v[j]);
    }
    double base;
    if (left_bounded && right_bounded) base = std::max(left_min, right_min);
    else if (left_bounded) base = left_min;
    else if (right_bounded) base = right_min;
    else base = std::min(left_min, right_min);
    const double prom = v[k] - base;
    const double err = se.empty() ? 0.0 : se[k];
    if (prom > z_min * err && prom > 0.0) {
      const double half = 0.5 * v[k];
      double lo = nu[k], hi = nu[k];
      bool lo_found = false, hi_found = false;
      for (std::size_t j = k; j-- > 0;)
        if (v[j] < half) {
          lo = nu[j] + (nu[j + 1] - nu[j]) * (half - v[j]) / (v[j + 1] - v[j]);
          lo_found = true;
          break;
        }
      for (std::size_t j = k + 1; j < n; ++j)
        if (v[j] < half) {
          hi = nu[j - 1] + (nu[j] - nu[j - 1]) * (v[j - 1] - half) / (v[j - 1] - v[j]);
          hi_found = true;
          break;
        }
      const double centre = lo_found && hi_found ? 0.5 * (lo + hi) : nu[k];
      peaks.push_back({k, nu[k], v[k], prom, centre});
    }
  }
  return peaks;
}

SpectrumFeatures spectrum_features(const NoiseReport& r, double z_min, double min_relative) {
  SpectrumFeatures f;
  const auto& nu = r.nu;
  double scale = 0.0;
  for (double v : r.var_spectrum) scale = std::max(scale, std::abs(v));
  f.peaks = find_peaks(nu, r.var_spectrum, r.var_stderr, z_min);
  std::erase_if(f.peaks, [&](const Peak& p) { return p.prominence < min_relative * scale; });
  std::size_t center = 0;
  for (std::size_t k = 0; k < nu.size(); ++k)
    if (std::abs(nu[k]) < std::abs(nu[center])) center = k;
  f.center_value = r.var_spectrum[center];
  f.center_stderr = r.var_stderr[center];
  double outer = 0.0;
  for (const auto& p : f.peaks) {
    f.peak_value = std::max(f.peak_value, p.value);
    outer = std::max(outer, std::abs(p.nu));
  }
  for (std::size_t k = 0; k < nu.size(); ++k) {
    const double se = r.var_stderr[k];
    if (!(se > 0.0)) continue;
    const double z = r.var_spectrum[k] / se;
    if (z < f.min_z) {
      f.min_z = z;
      f.min_z_nu = nu[k];
    }
    if (std::abs(nu[k]) > 0.0 && std::abs(nu[k]) < outer) f.inner_min_z = std::min(f.inner_min_z, z);
  }
  return f;
}

double asymmetry_z(const NoiseReport& r) {
  const std::size_t n = r.nu.size();
  double worst = 0.0;
  // Ascending order: bin 0 is the self-paired Nyquist bin, k pairs with n - k.
  for (std::size_t k = 1; k < n / 2; ++k) {
    const std::size_t m = n - k;
    const double d = r.var_spectrum[k] - r.var_spectrum[m];
    const double se = std::hypot(r.var_stderr[k], r.var_stderr[m]);
    if (se > 0.0) worst = std::max(worst, std::abs(d) / se);
  }
  return worst;
}

}  // namespace qsol
