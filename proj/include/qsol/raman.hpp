#pragma once

#include <string>
#include <vector>

#include "qsol/field.hpp"
#include "qsol/grid.hpp"
#include "qsol/noise.hpp"

namespace qsol {

/// Default delayed-response constants for fused silica (Blow & Wood single
/// damped oscillator). These are module defaults, not fitted values.
inline constexpr double kDefaultRamanFraction = 0.18;
inline constexpr double kDefaultRamanTau1 = 12.2e-15;  // [s]
inline constexpr double kDefaultRamanTau2 = 32.0e-15;  // [s]

struct DampedOscillatorKernel {
  double tau1 = kDefaultRamanTau1;  ///< oscillation period scale [s]
  double tau2 = kDefaultRamanTau2;  ///< damping time [s]
};

/// Causal kernel tabulated on tau >= 0 (seconds, 1/seconds).
struct TabulatedKernel {
  std::vector<double> tau;
  std::vector<double> h;
};

struct RamanSpec {
  bool enabled = false;
  double fraction = kDefaultRamanFraction;  ///< f_R, weight of the delayed response
  double temperature = 300.0;               ///< phonon bath temperature [K]
  double t0 = 1e-12;                        ///< time unit used to scale the kernel [s]
  bool tabulated = false;
  DampedOscillatorKernel oscillator;
  TabulatedKernel table;

  /// Throws if f_R is outside [0, 1), T < 0, or a table is not causal/normalized.
  void validate() const;
};

/// Reads a two-column text table "tau_fs h_per_fs" ('#' comments allowed).
TabulatedKernel load_kernel_table(const std::string& path);

/// Unit-area check of the kernel (integral of h over tau), in [0, 1e-6] tolerance.
double kernel_area(const RamanSpec& spec);

/// Frequency response h~(Omega) = int h(tau) exp(+i Omega tau) dtau, Omega in units of 1/t0.
cplx kernel_response(const RamanSpec& spec, double omega);

/// Signed Bose occupation 1/(exp(hbar Omega / k T) - 1), Omega in units of 1/t0.
double bose_occupation(double omega, double temperature, double t0);

/// Symmetrized thermal weight n_th(|Omega|) + 1/2; equals 1/2 at T = 0.
double thermal_factor(double omega, double temperature, double t0);

/// Two-sided spectral density of the Raman phase noise per unit zeta:
/// 2 f_R |Im h~(Omega)| (n_th(|Omega|) + 1/2) / n_bar. Finite limit at Omega = 0.
double raman_noise_density(const RamanSpec& spec, double omega, double n_bar);

/// Raman quantities precomputed on one grid.
class RamanModel {
 public:
  RamanModel(const RamanSpec& spec, const TimeGrid& grid, double n_bar);

  const RamanSpec& spec() const { return spec_; }
  bool enabled() const { return spec_.enabled; }
  double fraction() const { return spec_.enabled ? spec_.fraction : 0.0; }

  /// f_R (h ⊛ I), the delayed part of the nonlinear intensity. `scratch` is resized.
  void delayed_intensity(std::span<const cplx> intensity, CVec& out) const;
  /// Real Raman phase-noise increment over a step of d_zeta.
  void noise_into(const StreamKey& key, double d_zeta, RVec& out, CVec& scratch) const;
  /// Equal-point noise variance per unit zeta, sum_k S_k dw / 2pi.
  double equal_point_rate() const { return equal_point_rate_; }

 private:
  RamanSpec spec_;
  TimeGrid grid_;
  std::shared_ptr<const Transform> transform_;
  CVec response_;   // h~(w_k) / n for the convolution
  RVec amplitude_;  // sqrt(S_k dw / 2pi)
  double equal_point_rate_ = 0.0;
};

/// (1 - f_R) phi_dag phi + f_R (h ⊛ phi_dag phi); the ideal intensity when disabled.
CVec effective_intensity(const FieldPair& field, const RamanSpec& spec, const TimeGrid& grid);

/// Drift contribution i * effective_intensity * phi for the phi equation.
CVec raman_drift(const FieldPair& field, const RamanSpec& spec, const TimeGrid& grid);

/// Raman phase-noise increment; exactly zero when the spec is disabled.
RVec raman_noise(const StreamKey& key, const RamanSpec& spec, const TimeGrid& grid,
                 double d_zeta, double n_bar);

}  // namespace qsol
