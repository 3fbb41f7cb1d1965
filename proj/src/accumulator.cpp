#include "qsol/accumulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qsol {

void ComplexMoments::add(cplx x) {
  count += 1.0;
  const cplx delta = x - mean;
  mean += delta / count;
  const cplx delta2 = x - mean;
  m2 += delta * delta2;
  abs_m2 += std::real(delta * std::conj(delta2));
}

void ComplexMoments::merge(const ComplexMoments& o) {
  if (o.count == 0.0) return;
  if (count == 0.0) {
    *this = o;
    return;
  }
  const double n = count + o.count;
  const cplx delta = o.mean - mean;
  const double w = count * o.count / n;
  m2 += o.m2 + delta * delta * w;
  abs_m2 += o.abs_m2 + std::norm(delta) * w;
  mean += delta * (o.count / n);
  count = n;
}

cplx ComplexMoments::variance() const {
  if (!has_variance()) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  return m2 / (count - 1.0);
}

ControlSums::Vec ControlSums::controls(cplx dt) {
  const cplx sq = dt * dt;
  return {sq.real(), sq.imag(), dt.real(), dt.imag()};
}

void ControlSums::add(cplx d, const Vec& y) {
  const double x = std::real(d * d);
  n += 1.0;
  sa += d.real();
  sb += d.imag();
  sx += x;
  for (std::size_t j = 0; j < kControls; ++j) {
    sy[j] += y[j];
    sxy[j] += x * y[j];
    say[j] += d.real() * y[j];
    sby[j] += d.imag() * y[j];
    for (std::size_t k = 0; k < kControls; ++k) syy[j * kControls + k] += y[j] * y[k];
  }
}

void ControlSums::merge(const ControlSums& o) {
  n += o.n;
  sa += o.sa;
  sb += o.sb;
  sx += o.sx;
  for (std::size_t j = 0; j < kControls; ++j) {
    sy[j] += o.sy[j];
    sxy[j] += o.sxy[j];
    say[j] += o.say[j];
    sby[j] += o.sby[j];
  }
  for (std::size_t i = 0; i < syy.size(); ++i) syy[i] += o.syy[i];
}

namespace {

// Regression coefficients of Re (d - <d>)^2 on the controls. Controls without
// spread are dropped; the system is solved in correlation form.
ControlSums::Vec control_coefficients(const ControlSums& c) {
  constexpr std::size_t K = ControlSums::kControls;
  ControlSums::Vec beta{};
  if (c.n < double(K) + 2.0) return beta;
  const double n = c.n;
  const double a = c.sa / n, b = c.sb / n;
  std::array<double, K> ybar{}, cxy{}, scale{};
  std::array<double, K * K> cyy{};
  for (std::size_t j = 0; j < K; ++j) ybar[j] = c.sy[j] / n;
  for (std::size_t j = 0; j < K; ++j) {
    for (std::size_t k = 0; k < K; ++k)
      cyy[j * K + k] = c.syy[j * K + k] / n - ybar[j] * ybar[k];
    cxy[j] = (c.sxy[j] / n - c.sx / n * ybar[j]) - 2.0 * a * (c.say[j] / n - a * ybar[j]) +
             2.0 * b * (c.sby[j] / n - b * ybar[j]);
  }
  std::vector<std::size_t> used;
  double largest = 0.0;
  for (std::size_t j = 0; j < K; ++j) largest = std::max(largest, cyy[j * K + j]);
  for (std::size_t j = 0; j < K; ++j)
    if (cyy[j * K + j] > 1e-24 * largest && cyy[j * K + j] > 0.0) used.push_back(j);
  const std::size_t m = used.size();
  if (m == 0) return beta;
  for (auto j : used) scale[j] = 1.0 / std::sqrt(cyy[j * K + j]);
  // Gaussian elimination with partial pivoting on the normalized system.
  std::vector<double> A(m * (m + 1));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t q = 0; q < m; ++q)
      A[r * (m + 1) + q] = cyy[used[r] * K + used[q]] * scale[used[r]] * scale[used[q]];
    A[r * (m + 1) + m] = cxy[used[r]] * scale[used[r]];
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(A[r * (m + 1) + col]) > std::abs(A[piv * (m + 1) + col])) piv = r;
    if (std::abs(A[piv * (m + 1) + col]) < 1e-10) return ControlSums::Vec{};
    for (std::size_t q = 0; q <= m; ++q) std::swap(A[col * (m + 1) + q], A[piv * (m + 1) + q]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = A[r * (m + 1) + col] / A[col * (m + 1) + col];
      for (std::size_t q = col; q <= m; ++q) A[r * (m + 1) + q] -= f * A[col * (m + 1) + q];
    }
  }
  for (std::size_t r = 0; r < m; ++r)
    beta[used[r]] = A[r * (m + 1) + m] / A[r * (m + 1) + r] * scale[used[r]];
  return beta;
}

// Real part of the unbiased variance of d, minus the fitted control fluctuation.
double controlled_variance(const ControlSums& c, const ControlSums::Vec& beta) {
  const double n = c.n;
  if (n < 2.0) return std::numeric_limits<double>::quiet_NaN();
  const double a = c.sa / n, b = c.sb / n;
  double v = (c.sx / n - (a * a - b * b)) * n / (n - 1.0);
  for (std::size_t j = 0; j < ControlSums::kControls; ++j) v -= beta[j] * c.sy[j] / n;
  return v;
}

}  // namespace

EnsembleAccumulator::EnsembleAccumulator(std::size_t n_bins, std::vector<double> cutoffs,
                                         std::size_t n_batches, Reference reference)
    : n_bins_(n_bins), cutoffs_(std::move(cutoffs)), reference_(std::move(reference)) {
  if (n_batches == 0) throw std::invalid_argument("accumulator needs at least one batch");
  if (reference_.centers.empty()) reference_.centers.assign(cutoffs_.size(), 0.0);
  if (reference_.centers.size() != cutoffs_.size())
    throw std::invalid_argument("accumulator reference needs one center per cutoff");
  batches_.assign(n_batches, Batch{std::vector<ComplexMoments>(n_bins),
                                   std::vector<ComplexMoments>(cutoffs_.size()),
                                   std::vector<ControlSums>(cutoffs_.size())});
}

bool EnsembleAccumulator::has_control() const {
  return std::isfinite(reference_.total_mean) && control_complete_ && count() > 0.0;
}

void EnsembleAccumulator::add(std::size_t b, std::span<const cplx> n_omega,
                              std::span<const cplx> filtered) {
  if (n_omega.size() != n_bins_ || filtered.size() != cutoffs_.size())
    throw std::invalid_argument("sample does not match the accumulator grid/filters");
  auto& batch = batches_.at(b);
  for (std::size_t k = 0; k < n_bins_; ++k) batch.bins[k].add(n_omega[k]);
  for (std::size_t c = 0; c < filtered.size(); ++c) batch.filtered[c].add(filtered[c]);
  control_complete_ = false;
}

void EnsembleAccumulator::add(std::size_t b, std::span<const cplx> n_omega,
                              std::span<const cplx> filtered, cplx total) {
  const bool complete = control_complete_;
  add(b, n_omega, filtered);
  control_complete_ = complete;
  if (!std::isfinite(reference_.total_mean)) return;
  const auto y = ControlSums::controls(total - reference_.total_mean);
  auto& batch = batches_[b];
  for (std::size_t c = 0; c < filtered.size(); ++c)
    batch.control[c].add(filtered[c] - reference_.centers[c], y);
}

void EnsembleAccumulator::add(std::size_t b, const SpectralSample& s) {
  add(b, s.n_omega, std::span<const cplx>(&s.n_filtered, 1));
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& o) {
  if (o.n_bins_ != n_bins_ || o.cutoffs_ != cutoffs_ || o.batches_.size() != batches_.size())
    throw std::invalid_argument("cannot merge accumulators on different grids/filters");
  const bool same_ref =
      (std::isnan(o.reference_.total_mean) && std::isnan(reference_.total_mean)) ||
      (o.reference_.total_mean == reference_.total_mean && o.reference_.centers == reference_.centers);
  if (!same_ref) throw std::invalid_argument("cannot merge accumulators with different references");
  control_complete_ = control_complete_ && o.control_complete_;
  for (std::size_t b = 0; b < batches_.size(); ++b) {
    for (std::size_t k = 0; k < n_bins_; ++k) batches_[b].bins[k].merge(o.batches_[b].bins[k]);
    for (std::size_t c = 0; c < cutoffs_.size(); ++c) {
      batches_[b].filtered[c].merge(o.batches_[b].filtered[c]);
      batches_[b].control[c].merge(o.batches_[b].control[c]);
    }
  }
}

double EnsembleAccumulator::count() const {
  double n = 0.0;
  for (const auto& b : batches_) n += b.bins.empty() ? (b.filtered.empty() ? 0.0 : b.filtered[0].count) : b.bins[0].count;
  return n;
}

EnsembleAccumulator::Batch EnsembleAccumulator::pooled() const {
  Batch out{std::vector<ComplexMoments>(n_bins_), std::vector<ComplexMoments>(cutoffs_.size()),
            std::vector<ControlSums>(cutoffs_.size())};
  for (const auto& b : batches_) {
    for (std::size_t k = 0; k < n_bins_; ++k) out.bins[k].merge(b.bins[k]);
    for (std::size_t c = 0; c < cutoffs_.size(); ++c) {
      out.filtered[c].merge(b.filtered[c]);
      out.control[c].merge(b.control[c]);
    }
  }
  return out;
}

FanoValue fano_from_moments(double normal_variance, double mean, double n_bar) {
  FanoValue f;
  if (std::isinf(n_bar)) return f;
  f.linear = 1.0 + n_bar * normal_variance / mean;
  if (!(mean > 0.0) || !(f.linear > 0.0)) {
    f.clamped = true;
    f.db = kFanoFloorDb;
    return f;
  }
  f.db = 10.0 * std::log10(f.linear);
  return f;
}

std::pair<double, double> batch_mean_stderr(std::span<const double> v) {
  const double n = double(v.size());
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  if (v.size() < 2) return {mean, std::numeric_limits<double>::quiet_NaN()};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

NoiseReport finalize(const EnsembleAccumulator& acc, const TimeGrid& grid, double n_bar,
                     std::size_t diverged) {
  if (acc.n_bins() != grid.size())
    throw std::invalid_argument("finalize: accumulator does not match the grid");
  const auto pooled = acc.pooled();
  const double total = acc.count();
  if (total < 2.0) throw std::invalid_argument("finalize: need at least two samples");
  if (total < double(acc.n_batches()))
    throw std::invalid_argument("finalize: fewer samples than batches");
  const std::size_t nb = acc.n_batches();
  const bool batched = nb >= 2;
  for (std::size_t b = 0; batched && b < nb; ++b)
    if (acc.batch(b).bins.empty() ? false : !acc.batch(b).bins[0].has_variance())
      throw std::invalid_argument("finalize: every batch needs at least two samples");
  const double nbar_eff = std::isinf(n_bar) ? 1.0 : n_bar;

  NoiseReport r;
  r.samples = total;
  r.diverged = diverged;
  const auto order = grid.ascending_order();
  std::vector<double> per_batch(nb);
  auto stderr_of = [&](auto&& value_of_batch) {
    if (!batched) return std::numeric_limits<double>::quiet_NaN();
    for (std::size_t b = 0; b < nb; ++b) per_batch[b] = value_of_batch(acc.batch(b));
    return batch_mean_stderr(per_batch).second;
  };

  bool any_fluctuation = false;
  double peak = 0.0;
  for (auto k : order) {
    const auto& m = pooled.bins[k];
    r.nu.push_back(grid.nu(k));
    r.mean_spectrum.push_back(m.mean.real());
    r.imag_mean.push_back(m.mean.imag());
    r.var_spectrum.push_back(nbar_eff * m.variance().real());
    r.mean_stderr.push_back(stderr_of([k](const auto& b) { return b.bins[k].mean.real(); }));
    r.imag_stderr.push_back(stderr_of([k](const auto& b) { return b.bins[k].mean.imag(); }));
    r.var_stderr.push_back(
        stderr_of([k, nbar_eff](const auto& b) { return nbar_eff * b.bins[k].variance().real(); }));
    peak = std::max(peak, std::abs(r.var_spectrum.back()));
    if (m.abs_m2 > 0.0) any_fluctuation = true;
  }
  for (double v : r.var_spectrum) r.var_normalized.push_back(peak > 0.0 ? v / peak : 0.0);

  const auto cutoffs = acc.cutoffs();
  const bool use_control = acc.has_control();
  for (std::size_t c = 0; c < cutoffs.size(); ++c) {
    const auto& m = pooled.filtered[c];
    FilteredStats s;
    s.cutoff = cutoffs[c];
    s.mean = m.mean.real();
    s.mean_photons = nbar_eff * s.mean;
    s.variance = m.variance().real();
    s.degenerate = m.abs_m2 == 0.0;
    if (!s.degenerate) any_fluctuation = true;
    const auto f = fano_from_moments(s.degenerate ? 0.0 : s.variance, s.mean, n_bar);
    s.fano_linear = f.linear;
    s.fano_db = f.db;
    s.clamped = f.clamped;
    s.imag_mean = m.mean.imag();
    s.imag_mean_stderr = stderr_of([c](const auto& b) { return b.filtered[c].mean.imag(); });
    const double se_lin = stderr_of([c, n_bar](const auto& b) {
      const auto& bm = b.filtered[c];
      return fano_from_moments(bm.variance().real(), bm.mean.real(), n_bar).linear;
    });
    auto db_stderr = [&](double se, double lin) {
      return s.degenerate ? 0.0
             : lin > 0.0  ? 10.0 / std::numbers::ln10 * se / lin
                          : std::numeric_limits<double>::quiet_NaN();
    };
    s.fano_db_stderr = db_stderr(se_lin, f.linear);
    s.variance_raw = s.variance;
    s.fano_db_raw = s.fano_db;
    s.fano_db_raw_stderr = s.fano_db_stderr;
    if (use_control && !s.degenerate && !std::isinf(n_bar)) {
      const auto beta = control_coefficients(pooled.control[c]);
      s.variance = controlled_variance(pooled.control[c], beta);
      const auto fc = fano_from_moments(s.variance, s.mean, n_bar);
      s.fano_linear = fc.linear;
      s.fano_db = fc.db;
      s.clamped = fc.clamped;
      const double se_c = stderr_of([c, n_bar, &beta](const auto& b) {
        return fano_from_moments(controlled_variance(b.control[c], beta), b.filtered[c].mean.real(),
                                 n_bar)
            .linear;
      });
      s.fano_db_stderr = db_stderr(se_c, fc.linear);
      s.control_variate = true;
    }
    r.filtered.push_back(s);
  }
  r.degenerate = !any_fluctuation;
  return r;
}

}  // namespace qsol
