#pragma once

#include <cstdint>

#include "qsol/grid.hpp"

namespace qsol {

/// Coordinates of one noise draw. Identical keys give identical draws.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t trajectory_index = 0;
  std::uint64_t step_index = 0;
};

/// Independent random channels addressed by the same key.
enum class NoiseChannel : std::uint32_t { phi = 0, phi_dag = 1, raman = 2 };

/// Real Gaussian increments of the positive-P noise over one step.
/// Each entry has variance d_zeta / (n_bar * d_tau).
struct NoiseDraw {
  RVec w1;  ///< increment driving phi
  RVec w2;  ///< independent increment driving phi_dag
};

/// Standard normals for one channel of a key; throws if the trajectory or step
/// index does not fit the 32-bit counter words.
void standard_normals(const StreamKey& key, NoiseChannel channel, std::span<double> out);

/// n_bar = +infinity is the noise-off switch and yields exact zeros.
/// `variance_scale` multiplies the variance (Raman runs keep (1 - f_R) of it).
NoiseDraw draw_noise(const StreamKey& key, const TimeGrid& grid, double d_zeta, double n_bar,
                     double variance_scale = 1.0);

/// In-place variant reusing the storage of `draw`.
void draw_noise_into(NoiseDraw& draw, const StreamKey& key, const TimeGrid& grid, double d_zeta,
                     double n_bar, double variance_scale = 1.0);

/// Per-entry variance of a draw: d_zeta / (n_bar d_tau).
inline double noise_variance(double d_zeta, double n_bar, double d_tau) {
  return d_zeta / (n_bar * d_tau);
}

}  // namespace qsol
