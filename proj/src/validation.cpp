#include "qsol/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "qsol/ensemble.hpp"
#include "qsol/integrator.hpp"
#include "qsol/spectrum.hpp"

namespace qsol {

namespace {

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

CheckResult below(std::string name, double value, double tol, std::string detail = {}) {
  return {std::move(name), value < tol, value, tol, std::move(detail)};
}

SimConfig deterministic(double n, std::size_t points, double h) {
  SimConfig c;
  c.soliton_order = n;
  c.noise = false;
  c.grid = {points, 20.0};
  c.stepper.d_zeta = h;
  return c;
}

FieldPair run_to(const SimConfig& c, double zeta) {
  c.validate();
  const auto grid = make_grid(c.grid.n_points, c.grid.tau_window);
  const std::vector<double> planes{zeta};
  auto rec = propagate(sech_input(c.soliton_order, grid), c, c.stepper, planes);
  return rec.snapshots.front().field;
}

CheckResult soliton_stationarity() {
  const auto c = deterministic(1.0, 2048, 1e-3);
  auto cfg = c;
  cfg.xi_max = 4.0;
  const auto f = run_to(cfg, xi_to_zeta(4.0));
  const auto ref = sech_input(1.0, make_grid(2048, 20.0));
  return below("soliton stationarity (N=1, xi=4)", relative_l2(f.phi, ref.phi), 1e-5,
               "relative L2 vs sech");
}

CheckResult loss_law() {
  auto c = deterministic(1.0, 512, 0.005);
  c.gamma = 0.02;
  c.xi_max = 4.0;
  const auto grid = make_grid(512, 20.0);
  const auto in = sech_input(1.0, grid);
  const double e0 = pulse_energy(in, grid).real();
  std::vector<double> planes;
  for (double xi : {1.0, 2.0, 3.0, 4.0}) planes.push_back(xi_to_zeta(xi));
  auto rec = propagate(in, c, c.stepper, planes);
  double worst = 0.0;
  for (const auto& s : rec.snapshots) {
    const double e = pulse_energy(s.field, grid).real();
    const double expect = e0 * std::exp(-2.0 * c.gamma * s.zeta);
    worst = std::max(worst, std::abs(e / expect - 1.0));
  }
  return below("loss law exp(-2 gamma zeta)", worst, 1e-9, "max relative error over 4 planes");
}

std::vector<CheckResult> breather() {
  const double zeta = std::numbers::pi / 2.0;
  auto c = deterministic(2.0, 1024, zeta / 1600.0);
  c.xi_max = 1.0;
  const auto f = run_to(c, zeta);
  c.stepper.d_zeta = zeta / 6400.0;
  const auto fine = run_to(c, zeta);
  const auto in = sech_input(2.0, make_grid(1024, 20.0));
  return {below("N=2 breather returns at xi=1", relative_l2(f.phi, in.phi), 1e-3,
                "relative L2 vs 2 sech"),
          below("N=2 breather vs fine-step reference", relative_l2(f.phi, fine.phi), 1e-3,
                "relative L2, step ratio 4")};
}

std::vector<CheckResult> noise_statistics(double scale, std::uint64_t seed) {
  const auto grid = make_grid(512, 10.0);
  const double h = 1e-3, n_bar = 1e8;
  const double expect = noise_variance(h, n_bar, grid.d_tau());
  const std::size_t steps = 2000;
  double s1 = 0, s2 = 0, cross = 0, lag = 0;
  std::size_t n = 0, n_lag = 0;
  NoiseDraw prev, cur;
  for (std::size_t k = 0; k < steps; ++k) {
    draw_noise_into(cur, StreamKey{seed, 7, k}, grid, h, n_bar, scale);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      s1 += cur.w1[j];
      s2 += cur.w1[j] * cur.w1[j];
      cross += cur.w1[j] * cur.w2[j];
      if (k > 0) lag += cur.w1[j] * prev.w1[j];
    }
    n += grid.size();
    if (k > 0) n_lag += grid.size();
    std::swap(prev, cur);
  }
  const double mean = s1 / double(n);
  const double var = (s2 - double(n) * mean * mean) / double(n - 1);
  const double se_var = expect * std::sqrt(2.0 / double(n - 1));
  const double se_prod = expect / std::sqrt(double(n));
  const double z_var = (var - expect) / se_var;
  const double z_cross = cross / double(n) / se_prod;
  const double z_lag = lag / double(n_lag) / se_prod;
  return {
      below("noise variance d_zeta/(n_bar d_tau)", std::abs(z_var), 3.0,
            fmt("sample %.6g vs %.6g (|z| < 3)", var, expect)),
      below("noise w1-w2 cross-correlation", std::abs(z_cross), 3.0, "|z| < 3 over 1e6 draws"),
      below("noise step-to-step correlation", std::abs(z_lag), 3.0, "|z| < 3 over 1e6 draws"),
  };
}

CheckResult parseval(std::uint64_t seed) {
  SimConfig c;
  c.grid = {256, 20.0};
  c.stepper.d_zeta = 0.01;
  c.xi_max = 1.0;
  c.seed = seed;
  const auto grid = make_grid(256, 20.0);
  const std::vector<double> planes{0.5, 1.0};
  auto rec = propagate(sech_input(1.0, grid), c, c.stepper, planes, 3);
  double worst = 0.0;
  for (const auto& s : rec.snapshots) {
    const auto spec = intensity_spectrum(s.field, grid);
    const cplx total = total_number(spec, grid);
    const cplx direct = pulse_energy(s.field, grid);
    worst = std::max(worst, std::abs(total - direct) / std::abs(direct));
  }
  return below("Parseval sum n(w) dw = int phi_dag phi", worst, 1e-10, "noisy trajectory");
}

CheckResult shot_noise_baseline(std::uint64_t seed) {
  SimConfig c;
  c.nonlinearity = false;
  c.gamma = 0.02;
  c.grid = {128, 20.0};
  c.stepper.d_zeta = std::numbers::pi / 320.0;
  c.xi_max = 2.0;
  c.xi_planes = {0.5, 1.0, 2.0};
  c.trajectories = 64;
  c.seed = seed;
  c.threads = 1;
  const auto res = run_ensemble(c);
  double worst = 0.0;
  for (const auto& r : reports(res))
    for (const auto& f : r.filtered) {
      const double dev = f.degenerate ? std::abs(f.fano_db)
                                      : std::abs(f.fano_db) / std::max(f.fano_db_stderr, 1e-300) / 3.0;
      worst = std::max(worst, dev);
    }
  return {"shot-noise baseline (linear, lossy)", worst <= 1e-12 || worst < 1.0, worst, 1.0,
          "|Fano dB| within 3 stderr at every plane and cutoff"};
}

std::vector<CheckResult> positive_p_consistency(std::uint64_t seed) {
  // One nonlinear step from a coherent state: <phi_dag phi> per point equals |phi|^2.
  const auto grid = make_grid(128, 20.0);
  const double h = 0.01, n_bar = 1e4;
  const auto in = sech_input(1.0, grid);
  const std::size_t m = 4000;
  std::vector<double> s1(grid.size()), s2(grid.size());
  for (std::size_t t = 0; t < m; ++t) {
    const auto draw = draw_noise(StreamKey{seed, t, 0}, grid, h, n_bar);
    const auto out = nonlinear_step(in, draw, h, n_bar, grid);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double v = (out.phi_dag[j] * out.phi[j]).real();
      s1[j] += v;
      s2[j] += v * v;
    }
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double mean = s1[j] / double(m);
    const double var = std::max(s2[j] / double(m) - mean * mean, 0.0);
    const double expect = std::norm(in.phi[j]);
    const double se = std::sqrt(var / double(m));
    if (se > 0.0) worst = std::max(worst, std::abs(mean - expect) / se);
  }

  SimConfig c;
  c.grid = {128, 20.0};
  c.stepper.d_zeta = std::numbers::pi / 320.0;
  c.xi_max = 1.0;
  c.trajectories = 320;
  c.seed = seed;
  c.threads = 1;
  const auto res = run_ensemble(c);
  const auto rep = reports(res).front();
  double worst_imag = 0.0;
  for (const auto& f : rep.filtered)
    worst_imag = std::max(worst_imag, std::abs(f.imag_mean) / f.imag_mean_stderr);
  // 128 points: a family-wise 1% level is |z| < 4.
  return {below("one-step <phi_dag phi> = |phi|^2", worst, 4.0, "max |z| over 128 points"),
          below("Im <n_filtered> = 0", worst_imag, 3.0, "max |z| over cutoffs, N=1, xi=1")};
}

// Strang steps driven by a fixed Brownian path: each coarse increment is the
// sum of `m` fine increments, so paths at different steps are comparable.
FieldPair strang_path(FieldPair f, const TimeGrid& grid, double n_bar, double h_fine,
                      std::size_t m, std::size_t n_coarse, std::uint64_t seed, std::uint64_t traj) {
  const double h = h_fine * double(m);
  NoiseDraw sum{RVec(grid.size()), RVec(grid.size())}, piece;
  for (std::size_t c = 0; c < n_coarse; ++c) {
    std::fill(sum.w1.begin(), sum.w1.end(), 0.0);
    std::fill(sum.w2.begin(), sum.w2.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      draw_noise_into(piece, StreamKey{seed, traj, c * m + i}, grid, h_fine, n_bar);
      for (std::size_t j = 0; j < grid.size(); ++j) {
        sum.w1[j] += piece.w1[j];
        sum.w2[j] += piece.w2[j];
      }
    }
    f = linear_step(std::move(f), grid, 0.0, Dispersion::anomalous, 0.5 * h);
    f = nonlinear_step(std::move(f), sum, h, n_bar, grid);
    f = linear_step(std::move(f), grid, 0.0, Dispersion::anomalous, 0.5 * h);
  }
  return f;
}

std::vector<CheckResult> convergence(std::uint64_t seed) {
  std::vector<CheckResult> out;
  {
    const double zeta = std::numbers::pi / 2.0;
    auto c = deterministic(2.0, 512, 0.0);
    c.xi_max = 1.0;
    std::vector<double> errors;
    c.stepper.d_zeta = zeta / 3200.0;
    const auto ref = run_to(c, zeta);
    for (double steps : {100.0, 200.0, 400.0}) {
      c.stepper.d_zeta = zeta / steps;
      errors.push_back(relative_l2(run_to(c, zeta).phi, ref.phi));
    }
    const auto orders = observed_orders(errors);
    const double worst = *std::min_element(orders.begin(), orders.end());
    out.push_back({"deterministic order (N=2 breather)", worst > 1.8, worst, 1.8,
                   fmt("orders %.3f, %.3f (Strang: 2)", orders[0], orders[1])});
  }
  {
    const auto grid = make_grid(128, 20.0);
    const double n_bar = 1e3, zeta = 0.5;
    const std::size_t base = 25, fine_factor = 16, trajectories = 16;
    const double h_fine = zeta / double(base * fine_factor);
    std::vector<double> errors(3, 0.0);
    for (std::size_t t = 0; t < trajectories; ++t) {
      const auto in = sech_input(1.0, grid);
      const auto ref = strang_path(in, grid, n_bar, h_fine, 1, base * fine_factor, seed, t);
      for (std::size_t l = 0; l < 3; ++l) {
        const std::size_t m = fine_factor >> l;  // 16, 8, 4 fine steps per step
        const auto f = strang_path(in, grid, n_bar, h_fine, m, base * fine_factor / m, seed, t);
        errors[l] += relative_l2(f.phi, ref.phi) / double(trajectories);
      }
    }
    const auto orders = observed_orders(errors);
    const double mean_order = 0.5 * (orders[0] + orders[1]);
    out.push_back({"strong order (fixed noise path)", mean_order >= 0.4, mean_order, 0.4,
                   fmt("orders %.3f, %.3f (expected >= 1/2)", orders[0], orders[1])});
  }
  return out;
}

}  // namespace

double relative_l2(const CVec& a, const CVec& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num += std::norm(a[j] - b[j]);
    den += std::norm(b[j]);
  }
  return std::sqrt(num / den);
}

std::vector<double> observed_orders(const std::vector<double>& e) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < e.size(); ++i) out.push_back(std::log2(e[i] / e[i + 1]));
  return out;
}

std::vector<CheckResult> run_validation(const ValidationOptions& o) {
  std::vector<CheckResult> out;
  out.push_back(soliton_stationarity());
  out.push_back(loss_law());
  for (auto& r : breather()) out.push_back(std::move(r));
  for (auto& r : noise_statistics(o.noise_variance_scale, o.seed)) out.push_back(std::move(r));
  out.push_back(parseval(o.seed));
  out.push_back(shot_noise_baseline(o.seed));
  for (auto& r : positive_p_consistency(o.seed)) out.push_back(std::move(r));
  if (o.convergence)
    for (auto& r : convergence(o.seed)) out.push_back(std::move(r));
  return out;
}

}  // namespace qsol
