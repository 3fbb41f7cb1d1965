#pragma once

#include "qsol/grid.hpp"

namespace qsol {

/// One positive-P trajectory: two independent complex fields on the tau grid.
/// phi_dag is only the complex conjugate of phi for deterministic states.
struct FieldPair {
  CVec phi;
  CVec phi_dag;
  double zeta = 0.0;

  std::size_t size() const { return phi.size(); }
};

/// Coherent input phi(0, tau) = N sech(tau).
FieldPair sech_input(double soliton_order, const TimeGrid& grid);
/// Coherent Gaussian input phi(0, tau) = N exp(-tau^2 / 2), for contrast runs.
FieldPair gaussian_input(double amplitude, const TimeGrid& grid);

/// Integral of phi_dag * phi over tau (dimensionless pulse energy; photons / n_bar).
cplx pulse_energy(const FieldPair& field, const TimeGrid& grid);

/// Largest |phi| or |phi_dag| over the grid.
double max_amplitude(const FieldPair& field);

}  // namespace qsol
