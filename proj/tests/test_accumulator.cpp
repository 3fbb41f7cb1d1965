#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qsol/accumulator.hpp"
#include "qsol/ensemble.hpp"

using namespace qsol;

namespace {

// Two-pass reference moments.
struct Direct {
  cplx mean, m2;
  double abs_m2 = 0.0;
};
Direct direct(const std::vector<cplx>& xs) {
  Direct d;
  for (auto x : xs) d.mean += x;
  d.mean /= double(xs.size());
  for (auto x : xs) {
    d.m2 += (x - d.mean) * (x - d.mean);
    d.abs_m2 += std::norm(x - d.mean);
  }
  return d;
}

std::vector<cplx> sample(std::size_t n, std::uint64_t seed, double shift) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> xs(n);
  for (auto& x : xs) x = cplx(shift + g(rng), 0.3 * g(rng) - 2.0);
  return xs;
}

}  // namespace

TEST_CASE("streaming moments agree with a two-pass computation") {
  const auto xs = sample(5000, 1, 1e6);  // large offset stresses cancellation
  ComplexMoments m;
  for (auto x : xs) m.add(x);
  const auto d = direct(xs);
  CHECK(std::abs(m.mean - d.mean) < 1e-8);
  CHECK(std::abs(m.m2 - d.m2) / std::abs(d.m2) < 1e-9);
  CHECK(m.abs_m2 == doctest::Approx(d.abs_m2).epsilon(1e-9));
  CHECK(std::abs(m.variance() - d.m2 / 4999.0) < 1e-9 * std::abs(d.m2));
}

TEST_CASE("merging partial moments equals accumulating the concatenation") {
  const auto xs = sample(3001, 2, 3.0);
  ComplexMoments all, a, b, c;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    all.add(xs[i]);
    (i < 1000 ? a : i < 1700 ? b : c).add(xs[i]);
  }
  ComplexMoments ab = a;
  ab.merge(b);
  ab.merge(c);
  ComplexMoments bc = b;
  bc.merge(c);
  ComplexMoments a_bc = a;
  a_bc.merge(bc);
  for (const auto* m : {&ab, &a_bc}) {
    CHECK(m->count == all.count);
    CHECK(std::abs(m->mean - all.mean) < 1e-13);
    CHECK(std::abs(m->m2 - all.m2) < 1e-10 * std::abs(all.m2));
    CHECK(m->abs_m2 == doctest::Approx(all.abs_m2).epsilon(1e-12));
  }
  ComplexMoments empty;
  empty.merge(all);
  CHECK(empty.mean == all.mean);
  all.merge(ComplexMoments{});
  CHECK(all.count == 3001.0);
  CHECK(std::isnan(ComplexMoments{}.variance().real()));
}

TEST_CASE("Fano factor from normal-ordered moments") {
  auto f = fano_from_moments(0.0, 2.0, 1e6);
  CHECK(f.linear == 1.0);
  CHECK(f.db == 0.0);
  // V = -0.5 <n> / n_bar halves the noise: -3.0103 dB.
  f = fano_from_moments(-0.5 * 2.0 / 1e6, 2.0, 1e6);
  CHECK(f.linear == doctest::Approx(0.5));
  CHECK(f.db == doctest::Approx(10.0 * std::log10(0.5)));
  f = fano_from_moments(2.0 / 1e6, 2.0, 1e6);
  CHECK(f.db == doctest::Approx(10.0 * std::log10(2.0)));
  f = fano_from_moments(-3.0 / 1e6, 2.0, 1e6);
  CHECK(f.clamped);
  CHECK(f.db == kFanoFloorDb);
  f = fano_from_moments(0.0, 0.0, 1e6);
  CHECK(f.clamped);
  f = fano_from_moments(5.0, 2.0, std::numeric_limits<double>::infinity());
  CHECK(f.db == 0.0);
  CHECK_FALSE(f.clamped);
}

TEST_CASE("batch means") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto [m, se] = batch_mean_stderr(v);
  CHECK(m == doctest::Approx(2.5));
  CHECK(se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  const std::vector<double> one{7.0};
  CHECK(std::isnan(batch_mean_stderr(one).second));
}

TEST_CASE("finalize recovers the moments of synthetic Gaussian spectra") {
  const TimeGrid g(8, 4.0);
  const std::vector<double> cutoffs{0.1};
  EnsembleAccumulator acc(g.size(), cutoffs, 16);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  const std::size_t m = 16000;
  const double n_bar = 100.0;
  // Bin k: mean 1 + k, normal-ordered variance sigma_k^2 - tau_k^2 realized as
  // x = mu + sigma u + i tau v with independent u, v.
  for (std::size_t t = 0; t < m; ++t) {
    CVec bins(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double sigma = 0.1 * double(k + 1), tau = 0.05;
      bins[k] = cplx(1.0 + double(k) + sigma * gauss(rng), tau * gauss(rng));
    }
    const cplx filtered = cplx(3.0 + 0.2 * gauss(rng), 0.1 * gauss(rng));
    acc.add(batch_of(t, m, 16), bins, std::span<const cplx>(&filtered, 1));
  }
  CHECK(acc.count() == double(m));
  CHECK_FALSE(acc.has_control());
  const auto r = finalize(acc, g, n_bar);
  const auto order = g.ascending_order();
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t k = order[i];
    const double sigma = 0.1 * double(k + 1), tau = 0.05;
    const double expect = n_bar * (sigma * sigma - tau * tau);
    CHECK(r.nu[i] == g.nu(k));
    CHECK(std::abs(r.mean_spectrum[i] - (1.0 + double(k))) < 4.0 * r.mean_stderr[i]);
    CHECK(std::abs(r.var_spectrum[i] - expect) < 4.0 * r.var_stderr[i]);
    CHECK(std::abs(r.imag_mean[i]) < 4.0 * r.imag_stderr[i]);
  }
  const auto& f = r.filtered[0];
  const double expect_lin = 1.0 + n_bar * (0.04 - 0.01) / 3.0;
  CHECK(std::abs(f.fano_linear - expect_lin) < 4.0 * (f.fano_db_stderr * f.fano_linear * std::log(10.0) / 10.0));
  CHECK(f.mean_photons == doctest::Approx(n_bar * f.mean));
  CHECK_FALSE(f.degenerate);
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("accumulator merge is batch-wise and checks shapes") {
  const TimeGrid g(8, 4.0);
  const std::vector<double> cutoffs{0.1, 0.2};
  EnsembleAccumulator a(8, cutoffs, 4), b(8, cutoffs, 4), all(8, cutoffs, 4);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (std::size_t t = 0; t < 400; ++t) {
    CVec bins(8);
    for (auto& x : bins) x = cplx(gauss(rng), gauss(rng));
    const std::vector<cplx> f{cplx(gauss(rng), 0.0), cplx(2.0 + gauss(rng), 0.0)};
    (t % 2 ? a : b).add(t % 4, bins, f);
    all.add(t % 4, bins, f);
  }
  a.merge(b);
  const auto ra = finalize(a, g, 10.0), rall = finalize(all, g, 10.0);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(ra.var_spectrum[i] == doctest::Approx(rall.var_spectrum[i]).epsilon(1e-12));
    CHECK(ra.var_stderr[i] == doctest::Approx(rall.var_stderr[i]).epsilon(1e-10));
  }
  EnsembleAccumulator other(8, std::vector<double>{0.1}, 4);
  CHECK_THROWS(a.merge(other));
  EnsembleAccumulator wrong_batches(8, cutoffs, 3);
  CHECK_THROWS(a.merge(wrong_batches));
}

TEST_CASE("noise-free samples are flagged degenerate") {
  const TimeGrid g(8, 4.0);
  const std::vector<double> cutoffs{0.1};
  EnsembleAccumulator acc(8, cutoffs, 2);
  CVec bins(8, cplx(1.0));
  const cplx f(2.0);
  for (std::size_t t = 0; t < 10; ++t) acc.add(t % 2, bins, std::span<const cplx>(&f, 1));
  const auto r = finalize(acc, g, 1e6);
  CHECK(r.degenerate);
  CHECK(r.filtered[0].degenerate);
  CHECK(r.filtered[0].fano_db == 0.0);
  CHECK(r.filtered[0].fano_db_stderr == 0.0);
}

TEST_CASE("finalize rejects too few samples") {
  const TimeGrid g(8, 4.0);
  EnsembleAccumulator acc(8, std::vector<double>{0.1}, 4);
  CVec bins(8, cplx(1.0));
  const cplx f(1.0);
  acc.add(0, bins, std::span<const cplx>(&f, 1));
  CHECK_THROWS(finalize(acc, g, 1.0));
  CHECK_THROWS(finalize(acc, TimeGrid(16, 4.0), 1.0));
}

TEST_CASE("control variate is unbiased and reduces the spread") {
  // Filtered value f = c + u + 0.5 e and total dN = s (u + i v): E[dN] = E[dN^2] = 0,
  // Re Var f = 1.25, and Re dN^2 = s^2 (u^2 - v^2) is correlated with (f - c)^2.
  const TimeGrid g(8, 4.0);
  const std::vector<double> cutoffs{0.1};
  const double c = 5.0, s = 0.7, total_mean = 40.0, truth = 1.25;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  const CVec bins(8, cplx(0.0));
  const std::size_t replicas = 300, m = 800;
  double cv_sum = 0, cv_ss = 0, raw_sum = 0, raw_ss = 0, se_sum = 0;
  for (std::size_t r = 0; r < replicas; ++r) {
    EnsembleAccumulator acc(8, cutoffs, 16, {total_mean, {c}});
    for (std::size_t t = 0; t < m; ++t) {
      const double u = gauss(rng), v = gauss(rng), e = gauss(rng);
      const cplx f(c + u + 0.5 * e, 0.0);
      acc.add(batch_of(t, m, 16), bins, std::span<const cplx>(&f, 1),
              cplx(total_mean + s * u, s * v));
    }
    REQUIRE(acc.has_control());
    const auto fs = finalize(acc, g, 1.0).filtered[0];
    REQUIRE(fs.control_variate);
    cv_sum += fs.variance;
    cv_ss += fs.variance * fs.variance;
    raw_sum += fs.variance_raw;
    raw_ss += fs.variance_raw * fs.variance_raw;
    se_sum += fs.fano_db_stderr / fs.fano_db_raw_stderr;
  }
  const double n = double(replicas);
  const double cv_mean = cv_sum / n, cv_sd = std::sqrt(cv_ss / n - cv_mean * cv_mean);
  const double raw_mean = raw_sum / n, raw_sd = std::sqrt(raw_ss / n - raw_mean * raw_mean);
  CHECK(std::abs(cv_mean - truth) < 3.0 * cv_sd / std::sqrt(n));
  CHECK(std::abs(raw_mean - truth) < 3.0 * raw_sd / std::sqrt(n));
  const double ratio = std::sqrt(1.0 - 0.32);
  CHECK(cv_sd / raw_sd == doctest::Approx(ratio).epsilon(0.06));
  // The reported error bars shrink accordingly.
  CHECK(se_sum / n == doctest::Approx(ratio).epsilon(0.06));
}

TEST_CASE("control variate needs a total for every sample") {
  const TimeGrid g(8, 4.0);
  const std::vector<double> cutoffs{0.1};
  EnsembleAccumulator acc(8, cutoffs, 2, {1.0, {0.0}});
  const CVec bins(8, cplx(0.0));
  const cplx f(1.0);
  acc.add(0, bins, std::span<const cplx>(&f, 1), cplx(1.0));
  acc.add(1, bins, std::span<const cplx>(&f, 1));
  CHECK_FALSE(acc.has_control());
  CHECK_THROWS(EnsembleAccumulator(8, cutoffs, 2, {1.0, {0.0, 1.0}}));
  CHECK_THROWS(EnsembleAccumulator(8, cutoffs, 0));
}
