#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qsol/field.hpp"
#include "qsol/grid.hpp"

using namespace qsol;

namespace {
constexpr double kPi = std::numbers::pi;

// Continuous transform of sech(tau) in the project convention:
// (1/sqrt(2pi)) int sech(tau) exp(i w tau) dtau = sqrt(pi/2) sech(pi w / 2).
double sech_spectrum(double w) { return std::sqrt(kPi / 2.0) / std::cosh(kPi * w / 2.0); }
}  // namespace

TEST_CASE("grid spacing and frequency ordering") {
  const auto g = make_grid(8, 4.0);
  CHECK(g.d_tau() == doctest::Approx(1.0));
  CHECK(g.d_omega() == doctest::Approx(kPi / 4.0));
  CHECK(g.tau(0) == doctest::Approx(-4.0));
  CHECK(g.tau(7) == doctest::Approx(3.0));
  CHECK(g.omega(0) == 0.0);
  CHECK(g.omega(3) == doctest::Approx(3 * kPi / 4.0));
  CHECK(g.omega(4) == doctest::Approx(-kPi));
  CHECK(g.omega(7) == doctest::Approx(-kPi / 4.0));
  CHECK(g.nu(1) == doctest::Approx(1.0 / 8.0));
  CHECK(g.d_nu() == doctest::Approx(1.0 / 8.0));

  const auto g2 = make_grid(512, 10.0);
  CHECK(g2.d_tau() == doctest::Approx(0.0390625));
}

TEST_CASE("mirror pairs and ascending order") {
  const auto g = make_grid(16, 5.0);
  CHECK(g.mirror(0) == 0);
  CHECK(g.mirror(8) == 8);
  for (std::size_t k = 1; k < 16; ++k) {
    if (k == 8) continue;
    CHECK(g.omega(g.mirror(k)) == doctest::Approx(-g.omega(k)));
  }
  const auto order = g.ascending_order();
  REQUIRE(order.size() == 16);
  for (std::size_t i = 1; i < order.size(); ++i) CHECK(g.omega(order[i]) > g.omega(order[i - 1]));
}

TEST_CASE("grid validation") {
  CHECK_THROWS(make_grid(100, 10.0));
  CHECK_THROWS(make_grid(4, 10.0));
  CHECK_THROWS(make_grid(64, 0.0));
  CHECK_THROWS(make_grid(64, -1.0));
}

TEST_CASE("transform round trip") {
  const auto g = make_grid(1024, 20.0);
  auto f = sech_input(1.0, g);
  for (std::size_t j = 0; j < g.size(); ++j) f.phi[j] *= std::polar(1.0, 0.3 * g.tau(j));
  const auto back = to_temporal(g, to_spectral(g, f.phi));
  double err = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) err = std::max(err, std::abs(back[j] - f.phi[j]));
  CHECK(err < 1e-13);
}

TEST_CASE("spectrum of sech matches the continuous transform") {
  const auto g = make_grid(1024, 20.0);
  const auto f = sech_input(1.0, g);
  const auto s = to_spectral(g, f.phi);
  double err = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    err = std::max(err, std::abs(s[k] - cplx(sech_spectrum(g.omega(k)), 0.0)));
  CHECK(err < 1e-7);
}

TEST_CASE("transform of a shifted pulse carries the linear phase") {
  const auto g = make_grid(1024, 20.0);
  const double t = 1.5;
  CVec f(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) f[j] = 1.0 / std::cosh(g.tau(j) - t);
  const auto s = to_spectral(g, f);
  double err = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const cplx expect = sech_spectrum(g.omega(k)) * std::polar(1.0, g.omega(k) * t);
    err = std::max(err, std::abs(s[k] - expect));
  }
  CHECK(err < 1e-7);
}

TEST_CASE("Parseval in the project normalization") {
  const auto g = make_grid(256, 10.0);
  CVec f(g.size());
  for (std::size_t j = 0; j < g.size(); ++j)
    f[j] = cplx(std::exp(-g.tau(j) * g.tau(j)), 0.2 * std::sin(g.tau(j)));
  const auto s = to_spectral(g, f);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) lhs += std::norm(s[k]) * g.d_omega();
  for (std::size_t j = 0; j < g.size(); ++j) rhs += std::norm(f[j]) * g.d_tau();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("sech input energy and amplitude") {
  const auto g = make_grid(2048, 20.0);
  const auto f = sech_input(1.0, g);
  // int sech^2 = 2.
  CHECK(pulse_energy(f, g).real() == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(pulse_energy(f, g).imag() == 0.0);
  CHECK(max_amplitude(f) == doctest::Approx(1.0));
  const auto f2 = sech_input(1.3, g);
  CHECK(pulse_energy(f2, g).real() == doctest::Approx(2.0 * 1.69).epsilon(1e-8));
  const auto z = sech_input(0.0, g);
  CHECK(pulse_energy(z, g) == cplx(0.0));
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(f.phi_dag[j] == std::conj(f.phi[j]));
}

TEST_CASE("gaussian input energy") {
  const auto g = make_grid(1024, 20.0);
  const auto f = gaussian_input(2.0, g);
  // int 4 exp(-tau^2) = 4 sqrt(pi).
  CHECK(pulse_energy(f, g).real() == doctest::Approx(4.0 * std::sqrt(kPi)).epsilon(1e-12));
}
