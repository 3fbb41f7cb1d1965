#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "qsol/config.hpp"
#include "qsol/field.hpp"
#include "qsol/noise.hpp"
#include "qsol/raman.hpp"

namespace qsol {

/// Physical content of the stochastic QNLSE for one run.
struct ModelParams {
  double gamma = 0.0;
  Dispersion dispersion = Dispersion::anomalous;
  bool nonlinearity = true;
  double n_bar = 1e8;  ///< +infinity switches the noise off
  RamanSpec raman;

  static ModelParams from_config(const SimConfig& cfg);
};

struct Snapshot {
  double zeta = 0.0;
  std::size_t step = 0;
  FieldPair field;
};

struct TrajectoryRecord {
  std::vector<Snapshot> snapshots;
  bool diverged = false;
  double divergence_zeta = std::numeric_limits<double>::quiet_NaN();
};

/// Exact linear step in the frequency domain:
/// phi~ *= exp[(-gamma - (i/2)(1 + s w^2)) h], phi_dag~ with i -> -i, where
/// s = +1 (anomalous), -1 (normal), 0 (dispersion off). In the anomalous
/// branch sech(tau) is a stationary solution of the deterministic equation.
FieldPair linear_step(FieldPair field, const TimeGrid& grid, double gamma, Dispersion dispersion,
                      double h);

/// Settings of the stochastic nonlinear substep.
struct NonlinearOptions {
  Scheme scheme = Scheme::semi_implicit_midpoint;
  int iterations = 4;
  double kerr_weight = 1.0;  ///< weight of the instantaneous phi_dag phi term (1 - f_R)
  double noise_rate = 0.0;   ///< electronic noise variance per unit zeta, for the Ito correction
};

/// Ito positive-P Kerr substep on every grid point:
///   dphi     = ( i phi_dag phi) phi h + e^{+i pi/4} phi w1
///   dphi_dag = (-i phi_dag phi) phi_dag h + e^{-i pi/4} phi_dag w2
/// The midpoint scheme integrates the Stratonovich-equivalent drift, so
/// ensemble moments follow the Ito equation.
FieldPair nonlinear_step(FieldPair field, const NoiseDraw& draw, double h,
                         const NonlinearOptions& options);

/// Convenience overload: ideal QNLSE with noise scaled for (n_bar, grid).
FieldPair nonlinear_step(FieldPair field, const NoiseDraw& draw, double h, double n_bar,
                         const TimeGrid& grid);

/// Integer step indices for the requested planes; rejects planes that round
/// to zero or collide.
std::vector<std::size_t> plane_steps(std::span<const double> zeta_planes, double d_zeta);

/// Reusable Strang-split propagator. One instance can serve many threads;
/// each call owns its trajectory state.
class Propagator {
 public:
  using PlaneCallback = std::function<void(std::size_t plane, const FieldPair& field)>;

  Propagator(const TimeGrid& grid, const ModelParams& model, const StepperSpec& stepper);

  const TimeGrid& grid() const { return grid_; }
  const ModelParams& model() const { return model_; }
  const StepperSpec& stepper() const { return stepper_; }

  /// Advances `field` through steps 1..steps.back(); calls `on_plane` at each
  /// listed step. Returns false (and stops) if the trajectory diverged.
  bool run(FieldPair& field, std::uint64_t seed, std::uint64_t trajectory,
           std::span<const std::size_t> steps, const PlaneCallback& on_plane,
           double* divergence_zeta = nullptr) const;

 private:
  struct Workspace;
  void apply_linear(FieldPair& field, bool half, Workspace& ws) const;
  void apply_nonlinear(FieldPair& field, const StreamKey& key, Workspace& ws) const;

  TimeGrid grid_;
  ModelParams model_;
  StepperSpec stepper_;
  std::shared_ptr<const Transform> transform_;
  std::unique_ptr<RamanModel> raman_;
  CVec half_phi_, half_dag_, full_phi_, full_dag_;
  NonlinearOptions nl_;
};

/// Single trajectory with snapshots at `zeta_planes`.
TrajectoryRecord propagate(FieldPair initial, const SimConfig& config, const StepperSpec& stepper,
                           std::span<const double> zeta_planes, std::uint64_t trajectory = 0);

}  // namespace qsol
