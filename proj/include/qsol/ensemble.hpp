#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsol/accumulator.hpp"
#include "qsol/config.hpp"
#include "qsol/integrator.hpp"

namespace qsol {

/// Moments of every output plane for one configuration, accumulated over an
/// ensemble of trajectories. Trajectory t belongs to batch floor(t B / M);
/// batches are the unit of parallel work, so results do not depend on the
/// number of threads.
struct EnsembleResult {
  TimeGrid grid{8, 1.0};
  std::vector<double> xi_planes;
  std::vector<double> zeta_planes;  ///< exact zeta = step * d_zeta
  std::vector<std::size_t> steps;
  std::vector<EnsembleAccumulator> planes;
  std::vector<EnsembleAccumulator::Reference> references;
  std::size_t trajectories = 0;
  std::size_t diverged = 0;
  double n_bar = 0.0;  ///< effective (infinite when noise is off)
  double wall_seconds = 0.0;
  /// Per-trajectory spectra [trajectory][plane], only when requested.
  std::vector<std::vector<CVec>> stored_spectra;
  std::vector<bool> stored_diverged;

  bool divergence_budget_exceeded(double max_fraction) const;
};

/// More trajectories diverged than max_divergence_fraction allows.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t diverged, std::size_t trajectories)
      : std::runtime_error(std::to_string(diverged) + " of " + std::to_string(trajectories) +
                           " trajectories diverged, above the configured budget"),
        diverged(diverged),
        trajectories(trajectories) {}
  std::size_t diverged;
  std::size_t trajectories;
};

struct EnsembleOptions {
  bool keep_spectra = false;
};

FieldPair initial_field(const SimConfig& cfg, const TimeGrid& grid);

/// Dimensionless total photon number sum n(w) dw of one spectrum.
cplx total_number(std::span<const cplx> n_omega, const TimeGrid& grid);

/// Control-variate references per plane: the exactly known mean total number
/// N0 exp(-2 gamma zeta) and the noiseless filtered numbers as centers.
std::vector<EnsembleAccumulator::Reference> plane_references(const SimConfig& cfg,
                                                             const TimeGrid& grid,
                                                             std::span<const std::size_t> steps);

/// Validates `cfg` and runs cfg.trajectories trajectories. Throws
/// DivergenceError when the divergence budget is exceeded.
EnsembleResult run_ensemble(const SimConfig& cfg, const EnsembleOptions& options = {});

/// Rebuilds the plane accumulators from stored spectra, in trajectory order.
std::vector<EnsembleAccumulator> accumulate_stored(const EnsembleResult& result,
                                                   const SimConfig& cfg);

/// One report per output plane.
std::vector<NoiseReport> reports(const EnsembleResult& result);

/// Batch index of trajectory t for M trajectories in B batches.
inline std::size_t batch_of(std::size_t t, std::size_t m, std::size_t b) { return t * b / m; }

/// Worker count actually used for a requested count (0: hardware concurrency).
unsigned resolve_threads(unsigned requested);

}  // namespace qsol
