#include "qsol/config.hpp"

#include <algorithm>
#include <cmath>

namespace qsol {

Dispersion parse_dispersion(const std::string& s) {
  if (s == "anomalous") return Dispersion::anomalous;
  if (s == "normal") return Dispersion::normal;
  if (s == "none") return Dispersion::none;
  throw ConfigError("dispersion: expected anomalous|normal|none, got '" + s + "'");
}

InputShape parse_input_shape(const std::string& s) {
  if (s == "sech") return InputShape::sech;
  if (s == "gaussian") return InputShape::gaussian;
  throw ConfigError("input: expected sech|gaussian, got '" + s + "'");
}

Scheme parse_scheme(const std::string& s) {
  if (s == "semi-implicit-midpoint" || s == "midpoint") return Scheme::semi_implicit_midpoint;
  if (s == "explicit-euler" || s == "euler") return Scheme::explicit_euler;
  throw ConfigError("stepper.scheme: expected semi-implicit-midpoint|explicit-euler, got '" + s +
                    "'");
}

std::string to_string(Dispersion d) {
  switch (d) {
    case Dispersion::anomalous: return "anomalous";
    case Dispersion::normal: return "normal";
    case Dispersion::none: return "none";
  }
  return "?";
}

std::string to_string(InputShape s) { return s == InputShape::sech ? "sech" : "gaussian"; }

std::string to_string(Scheme s) {
  return s == Scheme::semi_implicit_midpoint ? "semi-implicit-midpoint" : "explicit-euler";
}

RamanSpec RamanConfig::to_spec(const UnitMap& units) const {
  RamanSpec spec;
  spec.enabled = enabled;
  spec.fraction = fraction;
  spec.temperature = temperature;
  spec.t0 = units.t0;
  spec.oscillator = {tau1_fs * 1e-15, tau2_fs * 1e-15};
  if (!kernel_table.empty()) {
    spec.tabulated = true;
    spec.table = load_kernel_table(kernel_table);
  }
  return spec;
}

std::vector<double> SimConfig::planes() const {
  if (xi_planes.empty()) return {xi_max};
  return xi_planes;
}

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(soliton_order >= 0.0) || !std::isfinite(soliton_order))
    fail("soliton_order: must be >= 0");
  if (!(n_bar > 0.0)) fail("n_bar: must be > 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail("gamma: must be >= 0");
  if (!(stepper.d_zeta > 0.0)) fail("stepper.d_zeta: must be > 0");
  if (!(xi_max > 0.0)) fail("xi_max: must be > 0");
  if (grid.n_points < 8 || (grid.n_points & (grid.n_points - 1)) != 0)
    fail("grid.n_points: must be a power of two >= 8");
  if (!(grid.tau_window > 0.0)) fail("grid.tau_window: must be > 0");
  if (stepper.midpoint_iterations < 1) fail("stepper.midpoint_iterations: must be >= 1");
  const double peak = std::max(soliton_order, 1.0);
  if (!(stepper.divergence_threshold >= 1e3 * peak))
    fail("stepper.divergence_threshold: must exceed the input amplitude by >= 1e3x");
  const auto p = planes();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0) || p[i] > xi_max * (1 + 1e-12))
      fail("xi_planes: every plane must lie in (0, xi_max]");
    if (i > 0 && !(p[i] > p[i - 1])) fail("xi_planes: must be strictly increasing");
  }
  const double nyquist = 0.5 * double(grid.n_points) / (2.0 * grid.tau_window);
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (!(cutoffs[i] >= 0.0) || cutoffs[i] > nyquist)
      fail("cutoffs: every cutoff must lie in [0, Nyquist]");
    if (i > 0 && !(cutoffs[i] > cutoffs[i - 1])) fail("cutoffs: must be strictly increasing");
  }
  if (trajectories < 1) fail("trajectories: must be >= 1");
  if (batches < 1) fail("batches: must be >= 1");
  if (trajectories < 2 * batches) fail("trajectories: need at least two per batch");
  if (!(units.t0 > 0.0)) fail("units.t0: must be > 0");
  if (!(units.k2 != 0.0) || !std::isfinite(units.k2)) fail("units.k2: must be nonzero");
  if (!(max_divergence_fraction >= 0.0)) fail("max_divergence_fraction: must be >= 0");
  if (!(raman.fraction >= 0.0 && raman.fraction < 1.0))
    fail("raman.fraction: must satisfy 0 <= f_R < 1");
  if (!(raman.temperature >= 0.0)) fail("raman.temperature: must be >= 0");
  if (raman.enabled) {
    if (raman.kernel_table.empty() && !(raman.tau1_fs > 0.0 && raman.tau2_fs > 0.0))
      fail("raman.tau1_fs/tau2_fs: must be > 0");
  }
}

}  // namespace qsol
