#include "qsol/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qsol {

namespace {
void check_amplitude(double a) {
  if (!(a >= 0.0) || !std::isfinite(a))
    throw std::invalid_argument("soliton_order: must be >= 0, got " + std::to_string(a));
}

FieldPair coherent(const TimeGrid& grid, auto&& profile) {
  FieldPair f{CVec(grid.size()), CVec(grid.size()), 0.0};
  for (std::size_t j = 0; j < grid.size(); ++j) {
    f.phi[j] = profile(grid.tau(j));
    f.phi_dag[j] = std::conj(f.phi[j]);
  }
  return f;
}
}  // namespace

FieldPair sech_input(double soliton_order, const TimeGrid& grid) {
  check_amplitude(soliton_order);
  return coherent(grid, [&](double t) { return cplx(soliton_order / std::cosh(t), 0.0); });
}

FieldPair gaussian_input(double amplitude, const TimeGrid& grid) {
  check_amplitude(amplitude);
  return coherent(grid, [&](double t) { return cplx(amplitude * std::exp(-0.5 * t * t), 0.0); });
}

cplx pulse_energy(const FieldPair& field, const TimeGrid& grid) {
  cplx sum = 0.0;
  for (std::size_t j = 0; j < field.size(); ++j) sum += field.phi_dag[j] * field.phi[j];
  return sum * grid.d_tau();
}

double max_amplitude(const FieldPair& field) {
  double m2 = 0.0;
  for (std::size_t j = 0; j < field.size(); ++j) {
    const double a = std::norm(field.phi[j]), b = std::norm(field.phi_dag[j]);
    if (!std::isfinite(a) || !std::isfinite(b)) return std::numeric_limits<double>::infinity();
    m2 = std::max({m2, a, b});
  }
  return std::sqrt(m2);
}

}  // namespace qsol
