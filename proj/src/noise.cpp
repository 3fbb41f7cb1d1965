#include "qsol/noise.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qsol/rng.hpp"

namespace qsol {

void standard_normals(const StreamKey& key, NoiseChannel channel, std::span<double> out) {
  constexpr auto kMax = std::uint64_t(std::numeric_limits<std::uint32_t>::max());
  if (key.trajectory_index > kMax || key.step_index > kMax)
    throw std::out_of_range("stream key index exceeds 32-bit counter range");
  fill_standard_normal(key.master_seed, std::uint32_t(key.step_index),
                       std::uint32_t(key.trajectory_index), std::uint32_t(channel), out);
}

void draw_noise_into(NoiseDraw& draw, const StreamKey& key, const TimeGrid& grid, double d_zeta,
                     double n_bar, double variance_scale) {
  const auto n = grid.size();
  draw.w1.assign(n, 0.0);
  draw.w2.assign(n, 0.0);
  if (std::isinf(n_bar)) return;
  standard_normals(key, NoiseChannel::phi, draw.w1);
  standard_normals(key, NoiseChannel::phi_dag, draw.w2);
  const double sigma = std::sqrt(variance_scale * noise_variance(d_zeta, n_bar, grid.d_tau()));
  for (std::size_t j = 0; j < n; ++j) {
    draw.w1[j] *= sigma;
    draw.w2[j] *= sigma;
  }
}

NoiseDraw draw_noise(const StreamKey& key, const TimeGrid& grid, double d_zeta, double n_bar,
                     double variance_scale) {
  NoiseDraw d;
  draw_noise_into(d, key, grid, d_zeta, n_bar, variance_scale);
  return d;
}

}  // namespace qsol
