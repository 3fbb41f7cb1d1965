#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "qsol/ensemble.hpp"

namespace qsol {

enum class Variant { ideal, lossy, raman, normal_dispersion };

Variant parse_variant(const std::string& s);
std::string to_string(Variant v);

/// Planes step, 2 step, ..., up to xi_max (inclusive within round-off).
std::vector<double> xi_grid(double xi_max, double step);
/// Cutoffs first, first + step, ..., last.
std::vector<double> cutoff_grid(double first, double last, double step);

struct SweepSpec {
  std::vector<double> n_values{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3};
  double xi_max = 4.0;
  std::vector<double> xi;       ///< empty: xi_grid(xi_max, 0.25)
  std::vector<double> cutoffs;  ///< empty: cutoff_grid(0.05, 0.5, 0.025)
  std::size_t trajectories = 1000;
  Variant variant = Variant::ideal;
  double stderr_target_db = 0.2;
  SimConfig base;  ///< grid, stepper, seed, units, raman constants, threads

  std::vector<double> planes() const;
  std::vector<double> cutoff_values() const;
  /// Throws ConfigError for empty or non-increasing grids.
  void validate() const;
  /// Full ensemble configuration for one soliton order.
  SimConfig config_for(double n) const;
};

struct OptimumResult {
  double n = 0.0;
  double xi = 0.0;
  double cutoff = 0.0;
  double fano_db = 0.0;
  double fano_db_stderr = 0.0;
  double fano_db_raw = 0.0;
  double mean_photons = 0.0;
  double worst_stderr_db = 0.0;  ///< largest error bar over the scanned grid
  std::size_t trajectories = 0;
  std::size_t diverged = 0;
  bool stderr_target_met = true;
  bool degenerate = false;
  bool flagged() const { return degenerate || !stderr_target_met; }
};

/// Exhaustive minimum of the filtered Fano factor over every plane and cutoff.
/// Ties go to the smaller xi, then the smaller cutoff.
OptimumResult optimum_from_reports(double n, std::span<const double> xi,
                                   std::span<const NoiseReport> reports, double stderr_target_db);

struct PointRun {
  SimConfig config;
  EnsembleResult ensemble;
  std::vector<NoiseReport> reports;
  OptimumResult optimum;
};

using Progress = std::function<void(const std::string&)>;

/// One ensemble at soliton order n, read out at every (xi, cutoff).
PointRun optimize_filter_distance(double n, const SweepSpec& spec,
                                  const EnsembleOptions& options = {});

struct TransitionCurve {
  Variant variant = Variant::ideal;
  double xi_max = 4.0;
  double gamma = 0.0;
  double temperature = 0.0;
  std::vector<OptimumResult> points;
};

TransitionCurve transition_sweep(const SweepSpec& spec, const Progress& progress = {});

/// Soliton order at which the optimized noise first falls below threshold_db,
/// linearly interpolated; NaN if it never does.
double knee_location(const TransitionCurve& curve, double threshold_db = -1.0);

/// Normal-ordered variance spectrum V(nu, xi), row-major with one row per plane.
struct NoiseMap {
  double n = 0.0;
  std::vector<double> nu;
  std::vector<double> xi;
  std::vector<double> values;
  std::vector<double> stderr;
  std::vector<double> mean;
  double at(std::size_t plane, std::size_t bin) const { return values[plane * nu.size() + bin]; }
  double err(std::size_t plane, std::size_t bin) const { return stderr[plane * nu.size() + bin]; }
};

NoiseMap noise_map_from_reports(double n, std::span<const double> xi,
                                std::span<const NoiseReport> reports);
NoiseMap noise_map(double n, const SweepSpec& spec);

/// Variance spectra of several soliton orders at a single plane.
std::vector<NoiseReport> snapshot_spectra(std::span<const double> n_values, double xi,
                                          const SweepSpec& spec);

/// Filtered Fano factor over (xi, cutoff), row-major with one row per plane.
struct Landscape {
  std::vector<double> xi;
  std::vector<double> cutoffs;
  std::vector<double> fano_db;
  std::vector<double> stderr_db;
  OptimumResult optimum;
};

Landscape landscape_from_reports(double n, std::span<const double> xi,
                                 std::span<const NoiseReport> reports, double stderr_target_db);
/// Requires a Raman-enabled spec; throws ConfigError otherwise.
Landscape filter_landscape(const SweepSpec& spec, double n = 1.0);

struct Peak {
  std::size_t index = 0;
  double nu = 0.0;
  double value = 0.0;
  double prominence = 0.0;
  /// Midpoint of the half-maximum crossings on either side (linear
  /// interpolation); robust against noise on a flat top. Falls back to nu at
  /// an edge without a crossing.
  double center_nu = 0.0;
};

/// Local maxima whose topographic prominence exceeds z_min standard errors.
std::vector<Peak> find_peaks(std::span<const double> nu, std::span<const double> values,
                             std::span<const double> stderr, double z_min = 3.0);

/// Structural read-out of a variance spectrum.
struct SpectrumFeatures {
  std::vector<Peak> peaks;
  double center_value = 0.0;
  double center_stderr = 0.0;
  double peak_value = 0.0;
  /// Most significantly negative bin: value / stderr (very negative: sub-shot).
  double min_z = 0.0;
  double min_z_nu = 0.0;
  /// Most negative z restricted to 0 < |nu| < |outermost peak|.
  double inner_min_z = 0.0;
};

/// Peaks must be significant at z_min and carry a prominence of at least
/// min_relative times max |V|, so that far-tail ripples of negligible size do
/// not count as spectral structure.
SpectrumFeatures spectrum_features(const NoiseReport& report, double z_min = 3.0,
                                   double min_relative = 0.05);

/// Largest z-score of (V(nu) - V(-nu)) over the bins of one plane.
double asymmetry_z(const NoiseReport& report);

}  // namespace qsol
