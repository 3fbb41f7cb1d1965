#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qsol/raman.hpp"
#include "qsol/units.hpp"

namespace qsol {

enum class Dispersion { anomalous, normal, none };
enum class InputShape { sech, gaussian };
enum class Scheme { semi_implicit_midpoint, explicit_euler };

Dispersion parse_dispersion(const std::string& s);
InputShape parse_input_shape(const std::string& s);
Scheme parse_scheme(const std::string& s);
std::string to_string(Dispersion d);
std::string to_string(InputShape s);
std::string to_string(Scheme s);

/// Thrown for invalid configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GridSpec {
  std::size_t n_points = 512;
  double tau_window = 20.0;
};

struct StepperSpec {
  Scheme scheme = Scheme::semi_implicit_midpoint;
  double d_zeta = 0.005;
  double divergence_threshold = 1e4;  ///< |phi| ceiling for a trajectory
  int midpoint_iterations = 4;
};

struct RamanConfig {
  bool enabled = false;
  double fraction = kDefaultRamanFraction;
  double tau1_fs = kDefaultRamanTau1 * 1e15;
  double tau2_fs = kDefaultRamanTau2 * 1e15;
  double temperature = 300.0;
  std::string kernel_table;  ///< empty: builtin damped oscillator

  RamanSpec to_spec(const UnitMap& units) const;
};

/// Every physical and numerical parameter of one ensemble run.
struct SimConfig {
  double soliton_order = 1.0;
  double n_bar = 1e8;
  bool noise = true;          ///< false is the n_bar -> infinity limit
  bool nonlinearity = true;   ///< false propagates linearly (shot-noise baseline)
  double gamma = 0.0;         ///< amplitude loss per unit zeta
  Dispersion dispersion = Dispersion::anomalous;
  InputShape input = InputShape::sech;
  double xi_max = 4.0;
  std::vector<double> xi_planes;  ///< empty: single plane at xi_max
  std::vector<double> cutoffs{0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2, 0.25, 0.3, 0.375, 0.5};
  GridSpec grid;
  StepperSpec stepper;
  RamanConfig raman;
  UnitMap units;
  std::uint64_t seed = 20240917;
  std::size_t trajectories = 1000;
  std::size_t batches = 16;
  unsigned threads = 0;  ///< 0: hardware concurrency
  double max_divergence_fraction = 1e-4;

  double zeta_max() const { return xi_to_zeta(xi_max); }
  double effective_n_bar() const {
    return noise ? n_bar : std::numeric_limits<double>::infinity();
  }
  /// Output planes in xi, defaulting to {xi_max}.
  std::vector<double> planes() const;
  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

}  // namespace qsol
