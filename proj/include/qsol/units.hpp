#pragma once

#include <string_view>

namespace qsol {

/// Dimensionless <-> SI conversions. Lengths scale with t0^2/|k2|, times with
/// t0, ordinary frequencies with 1/t0.
struct UnitMap {
  double t0 = 1e-12;   ///< pulse width [s]
  double k2 = -2e-26;  ///< group-velocity dispersion [s^2/m]

  double length_scale() const;     ///< [m]
  double soliton_period() const;   ///< z0 = (pi/2) length_scale [m]
  double frequency_scale() const;  ///< 1/t0 [Hz]
};

enum class QuantityKind { length, frequency, time, loss_rate };

QuantityKind parse_quantity_kind(std::string_view name);
std::string_view to_string(QuantityKind kind);

/// length: zeta -> m; frequency: nu (units 1/t0) -> Hz; time: tau -> s;
/// loss_rate: amplitude loss per unit zeta -> dB/km of power.
double to_physical(const UnitMap& units, double value, QuantityKind kind);
double from_physical(const UnitMap& units, double value, QuantityKind kind);

inline constexpr double kHalfPi = 1.5707963267948966;

inline double xi_to_zeta(double xi) { return kHalfPi * xi; }
inline double zeta_to_xi(double zeta) { return zeta / kHalfPi; }

/// Amplitude loss per unit zeta for a power loss given in dB per soliton period.
double gamma_from_db_per_period(double db_per_period);
/// Power loss in dB accumulated over one soliton period.
double db_per_period_from_gamma(double gamma);

/// Loss preset reproducing 0.0236 dB per soliton period.
inline constexpr double kFig2LossDbPerPeriod = 0.0236;

}  // namespace qsol
