#pragma once

#include <span>
#include <vector>

#include "qsol/field.hpp"
#include "qsol/grid.hpp"

namespace qsol {

/// Ideal pass-band: unit transmission for |nu - center| <= cutoff, zero elsewhere.
/// Frequencies are ordinary frequencies in units of 1/t0.
struct FilterSpec {
  double cutoff = 0.125;
  double center = 0.0;

  /// |f(nu)|^2, the weight f*(nu) f(nu) of a bin at frequency nu.
  double weight(double nu) const;
};

/// Per-trajectory spectral observables.
struct SpectralSample {
  CVec n_omega;        ///< phi~_dag(-w) phi~(w) per bin, FFT order; sum n dw = int phi_dag phi dtau
  cplx n_filtered{};   ///< pass-band sum of n_omega dw
};

/// n(w_k) = phi~_dag(-w_k) phi~(w_k) for every bin.
CVec intensity_spectrum(const FieldPair& field, const TimeGrid& grid);

/// Filtered photon number (dimensionless) from a precomputed spectrum.
cplx filtered_number(std::span<const cplx> n_omega, const TimeGrid& grid, const FilterSpec& filter);

SpectralSample spectral_sample(const FieldPair& field, const TimeGrid& grid,
                               const FilterSpec& filter);

/// Filtered numbers for several symmetric cutoffs (center 0) in one pass.
std::vector<cplx> filtered_numbers(std::span<const cplx> n_omega, const TimeGrid& grid,
                                   std::span<const double> cutoffs);

}  // namespace qsol
