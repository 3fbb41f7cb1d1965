#include <doctest.h>

#include <cmath>
#include <vector>

#include "qsol/noise.hpp"
#include "qsol/rng.hpp"

using namespace qsol;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::generate(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                             K{0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::generate(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                             K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("open unit interval mapping") {
  CHECK(to_open_unit(0) > 0.0);
  CHECK(to_open_unit(~std::uint64_t(0)) < 1.0);
  CHECK(to_open_unit(std::uint64_t(1) << 63) == doctest::Approx(0.5));
}

TEST_CASE("stream addressing is deterministic and separates keys") {
  std::vector<double> a(64), b(64), c(64), d(64);
  standard_normals({7, 3, 11}, NoiseChannel::phi, a);
  standard_normals({7, 3, 11}, NoiseChannel::phi, b);
  CHECK(a == b);
  standard_normals({7, 3, 12}, NoiseChannel::phi, c);
  standard_normals({7, 3, 11}, NoiseChannel::phi_dag, d);
  CHECK(a != c);
  CHECK(a != d);
  standard_normals({8, 3, 11}, NoiseChannel::phi, c);
  CHECK(a != c);
  standard_normals({7, 4, 11}, NoiseChannel::phi, c);
  CHECK(a != c);
  // A shorter request is a prefix of a longer one.
  std::vector<double> e(17);
  standard_normals({7, 3, 11}, NoiseChannel::phi, e);
  for (std::size_t i = 0; i < e.size(); ++i) CHECK(e[i] == a[i]);
}

TEST_CASE("counter overflow is rejected") {
  std::vector<double> a(4);
  CHECK_THROWS_AS(standard_normals({1, std::uint64_t(1) << 32, 0}, NoiseChannel::phi, a),
                  std::out_of_range);
  CHECK_THROWS_AS(standard_normals({1, 0, std::uint64_t(1) << 32}, NoiseChannel::phi, a),
                  std::out_of_range);
}

TEST_CASE("standard normal moments") {
  constexpr std::size_t kDraws = 1 << 20;
  std::vector<double> x(kDraws);
  fill_standard_normal(99, 1, 2, 3, x);
  double s1 = 0, s2 = 0, s4 = 0, below = 0;
  for (double v : x) {
    s1 += v;
    s2 += v * v;
    s4 += v * v * v * v;
    below += v < 1.0;
  }
  const double n = double(kDraws);
  CHECK(std::abs(s1 / n) / std::sqrt(1.0 / n) < 4.0);
  CHECK(std::abs(s2 / n - 1.0) / std::sqrt(2.0 / n) < 4.0);
  CHECK(std::abs(s4 / n - 3.0) / std::sqrt(96.0 / n) < 4.0);
  // Phi(1) = 0.8413447460685429.
  const double p = 0.8413447460685429;
  CHECK(std::abs(below / n - p) / std::sqrt(p * (1 - p) / n) < 4.0);
}

TEST_CASE("noise increments have variance d_zeta / (n_bar d_tau)") {
  const TimeGrid g(512, 10.0);
  const double dz = 1e-3, n_bar = 1e8;
  const double var = noise_variance(dz, n_bar, g.d_tau());
  CHECK(var == doctest::Approx(1e-3 / (1e8 * 0.0390625)));

  double s11 = 0, s22 = 0, s12 = 0, lag = 0, count = 0;
  NoiseDraw prev, cur;
  for (std::size_t step = 0; step < 2048; ++step) {
    draw_noise_into(cur, {5, 0, step}, g, dz, n_bar);
    for (std::size_t j = 0; j < g.size(); ++j) {
      s11 += cur.w1[j] * cur.w1[j];
      s22 += cur.w2[j] * cur.w2[j];
      s12 += cur.w1[j] * cur.w2[j];
      if (step > 0) lag += cur.w1[j] * prev.w1[j];
    }
    count += g.size();
    std::swap(prev, cur);
  }
  const double se_var = var * std::sqrt(2.0 / count);
  CHECK(std::abs(s11 / count - var) / se_var < 3.0);
  CHECK(std::abs(s22 / count - var) / se_var < 3.0);
  const double se_cross = var / std::sqrt(count);
  CHECK(std::abs(s12 / count) / se_cross < 3.0);
  CHECK(std::abs(lag / (count - g.size())) / (var / std::sqrt(count - g.size())) < 3.0);
}

TEST_CASE("noise variance scale and the noise-off switch") {
  const TimeGrid g(64, 5.0);
  const auto a = draw_noise({1, 2, 3}, g, 0.01, 1e4);
  const auto b = draw_noise({1, 2, 3}, g, 0.01, 1e4, 0.25);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(b.w1[j] == doctest::Approx(0.5 * a.w1[j]));
  const auto off = draw_noise({1, 2, 3}, g, 0.01, std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < g.size(); ++j) {
    CHECK(off.w1[j] == 0.0);
    CHECK(off.w2[j] == 0.0);
  }
}
