#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "qsol/grid.hpp"
#include "qsol/spectrum.hpp"

namespace qsol {

/// Single-pass moments of a complex sample stream. The second moment is the
/// non-conjugated sum of (x - mean)^2, whose real part is the normal-ordered
/// variance for positive-P samples. Merging is associative (Chan et al.).
struct ComplexMoments {
  double count = 0.0;
  cplx mean{};
  cplx m2{};          ///< sum (x - mean)^2
  double abs_m2 = 0;  ///< sum |x - mean|^2, for sampling-error estimates

  void add(cplx x);
  void merge(const ComplexMoments& other);
  bool has_variance() const { return count >= 2.0; }
  /// Unbiased complex sample variance; NaN with fewer than two samples.
  cplx variance() const;
};

/// Power sums for regressing a filtered number's variance on the total photon
/// number. With a coherent input the total number N has <:(N - <N>)^2:> = 0 and
/// a known mean, so the controls y = (Re, Im of dN^2, Re, Im of dN) have zero
/// expectation and their sample fluctuations can be subtracted.
/// Filtered values enter as d = n_f - center.
struct ControlSums {
  static constexpr std::size_t kControls = 4;
  using Vec = std::array<double, kControls>;

  double n = 0.0;
  double sa = 0.0, sb = 0.0, sx = 0.0;  ///< sums of Re d, Im d, Re d^2
  Vec sy{}, sxy{}, say{}, sby{};
  std::array<double, kControls * kControls> syy{};

  static Vec controls(cplx d_total);
  void add(cplx d, const Vec& y);
  void merge(const ControlSums& o);
};

/// Known ensemble mean of the total photon number (NaN: no control variate)
/// and per-cutoff centers subtracted before the control sums are formed.
struct AccumulatorReference {
  double total_mean = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> centers;
};

/// Moments of the spectrum and the filtered numbers at one output plane,
/// split into batches for batch-means error bars.
class EnsembleAccumulator {
 public:
  using Reference = AccumulatorReference;

  EnsembleAccumulator() = default;
  EnsembleAccumulator(std::size_t n_bins, std::vector<double> cutoffs, std::size_t n_batches,
                      Reference reference = {});

  std::size_t n_bins() const { return n_bins_; }
  std::size_t n_batches() const { return batches_.size(); }
  std::span<const double> cutoffs() const { return cutoffs_; }

  /// Adds one trajectory's spectrum; filtered values are given per cutoff.
  void add(std::size_t batch, std::span<const cplx> n_omega, std::span<const cplx> filtered);
  /// As above, with the trajectory's total number for the control variate.
  void add(std::size_t batch, std::span<const cplx> n_omega, std::span<const cplx> filtered,
           cplx total);
  const Reference& reference() const { return reference_; }
  bool has_control() const;
  /// Adds a SpectralSample for the single-cutoff case.
  void add(std::size_t batch, const SpectralSample& sample);
  /// Batch-wise associative merge; throws on shape mismatch.
  void merge(const EnsembleAccumulator& other);

  double count() const;
  struct Batch {
    std::vector<ComplexMoments> bins;
    std::vector<ComplexMoments> filtered;
    std::vector<ControlSums> control;
  };
  const Batch& batch(std::size_t b) const { return batches_.at(b); }
  /// All batches pooled.
  Batch pooled() const;

 private:
  std::size_t n_bins_ = 0;
  std::vector<double> cutoffs_;
  std::vector<Batch> batches_;
  Reference reference_;
  bool control_complete_ = true;  ///< every sample carried a total
};

/// Lower clamp applied when the Fano factor is non-positive.
inline constexpr double kFanoFloorDb = -100.0;

struct FanoValue {
  double linear = 1.0;  ///< 1 + n_bar V / <n>
  double db = 0.0;
  bool clamped = false;  ///< linear <= 0 or <n> <= 0: db set to kFanoFloorDb
};

/// Fano factor of the measured (symmetrically ordered) photon number relative
/// to shot noise, from the dimensionless normal-ordered variance and mean.
FanoValue fano_from_moments(double normal_variance, double mean, double n_bar);

struct FilteredStats {
  double cutoff = 0.0;
  double mean = 0.0;          ///< dimensionless <n>_s
  double mean_photons = 0.0;  ///< n_bar <n>_s
  double variance = 0.0;      ///< dimensionless Re Var_s (control-variate corrected if used)
  double fano_linear = 1.0;
  double fano_db = 0.0;
  double fano_db_stderr = 0.0;
  bool control_variate = false;
  double variance_raw = 0.0;  ///< plain sample estimate
  double fano_db_raw = 0.0;
  double fano_db_raw_stderr = 0.0;
  double imag_mean = 0.0;
  double imag_mean_stderr = 0.0;
  bool clamped = false;
  bool degenerate = false;  ///< no fluctuations at all (e.g. noise off)
};

struct NoiseReport {
  double zeta = 0.0;
  double samples = 0.0;
  std::size_t diverged = 0;
  std::vector<double> nu;             ///< ascending, units of 1/t0
  std::vector<double> mean_spectrum;  ///< Re <n(w)>
  std::vector<double> mean_stderr;
  std::vector<double> var_spectrum;   ///< n_bar Re Var_s[n(w)]; shot noise is zero
  std::vector<double> var_stderr;
  std::vector<double> var_normalized; ///< var_spectrum / max |var_spectrum|
  std::vector<double> imag_mean;      ///< Im <n(w)>, expected zero
  std::vector<double> imag_stderr;
  std::vector<FilteredStats> filtered;
  bool degenerate = false;
};

/// Converts pooled and per-batch moments into a report. Throws if there are
/// fewer than two samples or fewer samples than batches.
NoiseReport finalize(const EnsembleAccumulator& acc, const TimeGrid& grid, double n_bar,
                     std::size_t diverged = 0);

/// Mean and standard error of per-batch values (NaN error for < 2 values).
std::pair<double, double> batch_mean_stderr(std::span<const double> values);

}  // namespace qsol
