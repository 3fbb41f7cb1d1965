#include "qsol/ensemble.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace qsol {

bool EnsembleResult::divergence_budget_exceeded(double max_fraction) const {
  return trajectories > 0 && double(diverged) > max_fraction * double(trajectories);
}

FieldPair initial_field(const SimConfig& cfg, const TimeGrid& grid) {
  return cfg.input == InputShape::sech ? sech_input(cfg.soliton_order, grid)
                                       : gaussian_input(cfg.soliton_order, grid);
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

cplx total_number(std::span<const cplx> n_omega, const TimeGrid& grid) {
  cplx sum{};
  for (auto v : n_omega) sum += v;
  return sum * grid.d_omega();
}

std::vector<EnsembleAccumulator::Reference> plane_references(const SimConfig& cfg,
                                                             const TimeGrid& grid,
                                                             std::span<const std::size_t> steps) {
  auto model = ModelParams::from_config(cfg);
  model.n_bar = std::numeric_limits<double>::infinity();
  const Propagator prop(grid, model, cfg.stepper);
  FieldPair field = initial_field(cfg, grid);
  const double n0 = pulse_energy(field, grid).real();
  std::vector<EnsembleAccumulator::Reference> refs(steps.size());
  const bool ok = prop.run(field, cfg.seed, 0, steps, [&](std::size_t p, const FieldPair& f) {
    const auto spec = intensity_spectrum(f, grid);
    for (auto v : filtered_numbers(spec, grid, cfg.cutoffs)) refs[p].centers.push_back(v.real());
  });
  for (std::size_t p = 0; p < steps.size(); ++p) {
    if (!ok) refs[p].centers.assign(cfg.cutoffs.size(), 0.0);
    refs[p].total_mean = n0 * std::exp(-2.0 * cfg.gamma * double(steps[p]) * cfg.stepper.d_zeta);
  }
  return refs;
}

EnsembleResult run_ensemble(const SimConfig& cfg, const EnsembleOptions& options) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  EnsembleResult res;
  res.grid = make_grid(cfg.grid.n_points, cfg.grid.tau_window);
  res.xi_planes = cfg.planes();
  std::vector<double> zeta;
  for (double xi : res.xi_planes) zeta.push_back(xi_to_zeta(xi));
  res.steps = plane_steps(zeta, cfg.stepper.d_zeta);
  for (auto k : res.steps) res.zeta_planes.push_back(double(k) * cfg.stepper.d_zeta);
  res.trajectories = cfg.trajectories;
  res.n_bar = cfg.effective_n_bar();

  const std::size_t m = cfg.trajectories;
  const std::size_t nb = std::min(cfg.batches, m);
  res.references = plane_references(cfg, res.grid, res.steps);
  for (const auto& ref : res.references)
    res.planes.emplace_back(res.grid.size(), cfg.cutoffs, nb, ref);
  if (options.keep_spectra) {
    res.stored_spectra.assign(m, {});
    res.stored_diverged.assign(m, false);
  }

  const Propagator prop(res.grid, ModelParams::from_config(cfg), cfg.stepper);
  const FieldPair input = initial_field(cfg, res.grid);
  std::vector<std::size_t> diverged_per_batch(nb, 0);
  std::atomic<std::size_t> next_batch{0};

  auto worker = [&] {
    for (std::size_t b = next_batch++; b < nb; b = next_batch++) {
      const std::size_t first = (b * m + nb - 1) / nb;
      for (std::size_t t = first; t < m && batch_of(t, m, nb) == b; ++t) {
        FieldPair field = input;
        std::vector<CVec> spectra(res.steps.size());
        const bool ok = prop.run(field, cfg.seed, t, res.steps,
                                 [&](std::size_t p, const FieldPair& f) {
                                   spectra[p] = intensity_spectrum(f, res.grid);
                                 });
        if (!ok) {
          ++diverged_per_batch[b];
          if (options.keep_spectra) res.stored_diverged[t] = true;
          continue;
        }
        for (std::size_t p = 0; p < spectra.size(); ++p) {
          const auto filtered = filtered_numbers(spectra[p], res.grid, cfg.cutoffs);
          res.planes[p].add(b, spectra[p], filtered, total_number(spectra[p], res.grid));
        }
        if (options.keep_spectra) res.stored_spectra[t] = std::move(spectra);
      }
    }
  };

  const unsigned n_threads = std::min<unsigned>(resolve_threads(cfg.threads), unsigned(nb));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  for (auto d : diverged_per_batch) res.diverged += d;
  if (res.divergence_budget_exceeded(cfg.max_divergence_fraction))
    throw DivergenceError(res.diverged, res.trajectories);
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::vector<EnsembleAccumulator> accumulate_stored(const EnsembleResult& result,
                                                   const SimConfig& cfg) {
  const std::size_t m = result.trajectories;
  const std::size_t nb = result.planes.empty() ? 1 : result.planes.front().n_batches();
  std::vector<EnsembleAccumulator> acc;
  for (const auto& ref : result.references) acc.emplace_back(result.grid.size(), cfg.cutoffs, nb, ref);
  for (std::size_t t = 0; t < result.stored_spectra.size(); ++t) {
    if (result.stored_diverged[t]) continue;
    for (std::size_t p = 0; p < acc.size(); ++p) {
      const auto& s = result.stored_spectra[t][p];
      acc[p].add(batch_of(t, m, nb), s, filtered_numbers(s, result.grid, cfg.cutoffs),
                 total_number(s, result.grid));
    }
  }
  return acc;
}

std::vector<NoiseReport> reports(const EnsembleResult& result) {
  std::vector<NoiseReport> out;
  for (std::size_t p = 0; p < result.planes.size(); ++p) {
    auto r = finalize(result.planes[p], result.grid, result.n_bar, result.diverged);
    r.zeta = result.zeta_planes[p];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace qsol
