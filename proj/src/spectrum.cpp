#include "qsol/spectrum.hpp"

#include <cmath>
#include <numbers>

namespace qsol {

namespace {
// Bins whose frequency sits on the cutoff are inside the band.
constexpr double kEdgeSlack = 1e-9;
}  // namespace

double FilterSpec::weight(double nu) const {
  return std::abs(nu - center) <= cutoff + kEdgeSlack ? 1.0 : 0.0;
}

CVec intensity_spectrum(const FieldPair& field, const TimeGrid& grid) {
  const auto n = grid.size();
  const auto t = transform_for(n);
  CVec p(field.phi.begin(), field.phi.end());
  CVec q(field.phi_dag.begin(), field.phi_dag.end());
  // p_k ~ phi~(w_k), q_k ~ phi~_dag(-w_k); the (-1)^k phases cancel in the product.
  t->forward(p);
  t->inverse(q);
  const double scale = grid.d_tau() * grid.d_tau() / (2.0 * std::numbers::pi);
  for (std::size_t k = 0; k < n; ++k) p[k] = scale * q[k] * p[k];
  return p;
}

cplx filtered_number(std::span<const cplx> n_omega, const TimeGrid& grid,
                     const FilterSpec& filter) {
  cplx sum = 0.0;
  for (std::size_t k = 0; k < n_omega.size(); ++k) {
    const double w = filter.weight(grid.nu(k));
    if (w != 0.0) sum += w * n_omega[k];
  }
  return sum * grid.d_omega();
}

SpectralSample spectral_sample(const FieldPair& field, const TimeGrid& grid,
                               const FilterSpec& filter) {
  SpectralSample s;
  s.n_omega = intensity_spectrum(field, grid);
  s.n_filtered = filtered_number(s.n_omega, grid, filter);
  return s;
}

std::vector<cplx> filtered_numbers(std::span<const cplx> n_omega, const TimeGrid& grid,
                                   std::span<const double> cutoffs) {
  std::vector<cplx> out;
  out.reserve(cutoffs.size());
  for (double c : cutoffs) out.push_back(filtered_number(n_omega, grid, FilterSpec{c, 0.0}));
  return out;
}

}  // namespace qsol
