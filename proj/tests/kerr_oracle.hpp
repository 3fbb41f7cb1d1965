#pragma once

// Single-mode Kerr oscillator oracles for the dispersion-free limit, where
// every grid point is an independent mode with photon scale n_eff = n_bar d_tau.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "qsol/integrator.hpp"

namespace kerr {

using cplx = std::complex<double>;

struct Moments {
  cplx a;   ///< <a>
  cplx a2;  ///< <a^2>
  double norm = 0.0;
};

/// Coherent state |alpha> evolved under H = -(chi/2) a^dag^2 a^2 in a number
/// basis truncated at n_max: c_n(t) = c_n(0) exp(+i (chi/2) n (n-1) t).
inline Moments fock_moments(cplx alpha, double chi, double t, int n_max) {
  std::vector<cplx> c(n_max + 1);
  c[0] = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n < n_max; ++n) c[n + 1] = c[n] * alpha / std::sqrt(double(n + 1));
  for (int n = 0; n <= n_max; ++n) c[n] *= std::polar(1.0, 0.5 * chi * n * (n - 1.0) * t);
  Moments m;
  for (int n = 0; n <= n_max; ++n) m.norm += std::norm(c[n]);
  for (int n = 0; n < n_max; ++n) m.a += std::conj(c[n]) * c[n + 1] * std::sqrt(n + 1.0);
  for (int n = 0; n + 1 < n_max; ++n)
    m.a2 += std::conj(c[n]) * c[n + 2] * std::sqrt((n + 1.0) * (n + 2.0));
  return m;
}

/// Running sums of one real quantity.
struct Stat {
  double n = 0, s = 0, ss = 0;
  void add(double x) { n += 1; s += x; ss += x * x; }
  double mean() const { return s / n; }
  double stderr_() const { return std::sqrt((ss / n - mean() * mean()) / (n - 1)); }
};

struct Sampled {
  double zeta = 0.0;
  Stat a_re, a_im, a2_re, a2_im;
};

/// Ensemble of constant fields phi0 on `points` independent sites, dispersion
/// off. Returns <phi> e^{i zeta/2} and <phi^2> e^{i zeta} per plane, which
/// removes the global phase of the linear step.
inline std::vector<Sampled> simulate(double phi0, double n_bar, std::span<const double> zetas,
                                     double h, std::size_t trajectories, qsol::Scheme scheme,
                                     std::uint64_t seed, std::size_t points = 8) {
  const qsol::TimeGrid grid(points, 0.5 * double(points));  // d_tau = 1
  qsol::ModelParams model;
  model.dispersion = qsol::Dispersion::none;
  model.n_bar = n_bar;
  qsol::StepperSpec stepper;
  stepper.d_zeta = h;
  stepper.scheme = scheme;
  stepper.divergence_threshold = 1e12;
  const auto steps = qsol::plane_steps(zetas, h);
  qsol::Propagator prop(grid, model, stepper);
  std::vector<Sampled> out(zetas.size());
  for (std::size_t i = 0; i < zetas.size(); ++i) out[i].zeta = double(steps[i]) * h;
  for (std::size_t t = 0; t < trajectories; ++t) {
    qsol::FieldPair f;
    f.phi.assign(points, cplx(phi0));
    f.phi_dag.assign(points, cplx(phi0));
    prop.run(f, seed, t, steps, [&](std::size_t p, const qsol::FieldPair& s) {
      const cplx r1 = std::polar(1.0, 0.5 * out[p].zeta);
      const cplx r2 = r1 * r1;
      for (std::size_t j = 0; j < points; ++j) {
        const cplx a = s.phi[j] * r1;
        const cplx a2 = s.phi[j] * s.phi[j] * r2;
        out[p].a_re.add(a.real());
        out[p].a_im.add(a.imag());
        out[p].a2_re.add(a2.real());
        out[p].a2_im.add(a2.imag());
      }
    });
  }
  return out;
}

/// Largest |z| of the sampled moments against the number-basis oracle.
inline double max_z(const std::vector<Sampled>& sampled, double phi0, double n_bar) {
  const double chi = 1.0 / n_bar;  // n_eff = n_bar for d_tau = 1
  const double amp = std::sqrt(n_bar);
  double worst = 0.0;
  for (const auto& s : sampled) {
    const auto m = fock_moments(phi0 * amp, chi, s.zeta, 200);
    const cplx a = m.a / amp, a2 = m.a2 / (amp * amp);
    worst = std::max({worst, std::abs(s.a_re.mean() - a.real()) / s.a_re.stderr_(),
                      std::abs(s.a_im.mean() - a.imag()) / s.a_im.stderr_(),
                      std::abs(s.a2_re.mean() - a2.real()) / s.a2_re.stderr_(),
                      std::abs(s.a2_im.mean() - a2.imag()) / s.a2_im.stderr_()});
  }
  return worst;
}

}  // namespace kerr
