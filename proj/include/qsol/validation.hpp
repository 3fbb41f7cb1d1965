#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsol/grid.hpp"

namespace qsol {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ValidationOptions {
  /// Test hook: multiplies the variance of the noise draws fed to the noise
  /// statistics check. Anything but 1 must make that check fail.
  double noise_variance_scale = 1.0;
  bool convergence = true;
  std::uint64_t seed = 20240917;
};

/// Soliton stationarity, loss law, breather period, noise statistics,
/// Parseval, shot-noise baseline and positive-P consistency; with
/// `convergence`, deterministic and strong order-of-accuracy estimates.
std::vector<CheckResult> run_validation(const ValidationOptions& options = {});

/// Order estimates from errors at steps h, h/2, h/4, ... : log2(e_i / e_{i+1}).
std::vector<double> observed_orders(const std::vector<double>& errors);

/// Relative L2 distance ||a - b|| / ||b||.
double relative_l2(const CVec& a, const CVec& b);

}  // namespace qsol
