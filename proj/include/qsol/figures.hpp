#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qsol/experiments.hpp"
#include "qsol/io.hpp"

namespace qsol {

enum class Tier { quick, full };

Tier parse_tier(const std::string& s);
std::string to_string(Tier t);

/// Command-line level overrides applied on top of a preset or config file.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trajectories;
  std::optional<std::size_t> grid_points;
  std::optional<double> d_zeta;  ///< from --steps: xi_max / steps
  std::optional<std::size_t> steps;
  std::optional<unsigned> threads;
  bool no_noise = false;

  void apply(SimConfig& cfg) const;
  void apply(SweepSpec& spec) const;
};

/// Base numerical settings of a tier: grid, step, trajectories.
SimConfig tier_base(Tier tier);

/// Sweep preset for one curve of the transition figure.
SweepSpec fig2_curve(Variant variant, double xi_max, Tier tier);

inline constexpr const char* kFigureIds[] = {"fig1", "fig2", "fig3", "fig4", "fig5"};
bool is_figure_id(const std::string& id);

struct OutputSummary {
  json summary = json::object();
  std::size_t trajectories = 0;
  std::size_t diverged = 0;
  bool divergence_budget_exceeded = false;
};

/// Runs one figure pipeline into `out`; throws ConfigError for unknown ids.
OutputSummary run_figure(const std::string& id, Tier tier, const fs::path& out,
                         const RunOverrides& overrides = {}, const Progress& progress = {});

/// Single-configuration ensemble: report per plane, optional noise map and
/// trajectory dumps.
struct SimulateOptions {
  bool write_map = true;
  std::size_t dump_trajectories = 0;  ///< dump the first k trajectories' snapshots
};

OutputSummary run_simulate(const SimConfig& cfg, const fs::path& out,
                           const SimulateOptions& options = {});

/// Transition sweep over spec.n_values. Each point is written as soon as it
/// finishes; points already present with a matching config hash are reused.
OutputSummary run_sweep(const SweepSpec& spec, const fs::path& out, const Progress& progress = {});

/// Sweep specification from JSON: {"variant", "xi_max", "n_values", "xi",
/// "cutoffs", "trajectories", "stderr_target_db", "config": {...}}.
SweepSpec sweep_from_json(const json& j);

}  // namespace qsol
