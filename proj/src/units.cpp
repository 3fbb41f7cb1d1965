#include "qsol/units.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qsol {

namespace {
// Power loss in dB for amplitude decay exp(-gamma * zeta): 20 log10(e) * gamma * zeta.
constexpr double kDbPerNeper = 20.0 / std::numbers::ln10;
}  // namespace

double UnitMap::length_scale() const { return t0 * t0 / std::abs(k2); }
double UnitMap::soliton_period() const { return kHalfPi * length_scale(); }
double UnitMap::frequency_scale() const { return 1.0 / t0; }

QuantityKind parse_quantity_kind(std::string_view name) {
  if (name == "length") return QuantityKind::length;
  if (name == "frequency") return QuantityKind::frequency;
  if (name == "time") return QuantityKind::time;
  if (name == "loss-rate" || name == "loss_rate") return QuantityKind::loss_rate;
  throw std::invalid_argument("unknown quantity kind '" + std::string(name) + "'");
}

std::string_view to_string(QuantityKind kind) {
  switch (kind) {
    case QuantityKind::length: return "length";
    case QuantityKind::frequency: return "frequency";
    case QuantityKind::time: return "time";
    case QuantityKind::loss_rate: return "loss-rate";
  }
  return "?";
}

double to_physical(const UnitMap& u, double value, QuantityKind kind) {
  switch (kind) {
    case QuantityKind::length: return value * u.length_scale();
    case QuantityKind::frequency: return value * u.frequency_scale();
    case QuantityKind::time: return value * u.t0;
    case QuantityKind::loss_rate: return value * kDbPerNeper / (u.length_scale() / 1000.0);
  }
  throw std::invalid_argument("unknown quantity kind");
}

double from_physical(const UnitMap& u, double value, QuantityKind kind) {
  switch (kind) {
    case QuantityKind::length: return value / u.length_scale();
    case QuantityKind::frequency: return value / u.frequency_scale();
    case QuantityKind::time: return value / u.t0;
    case QuantityKind::loss_rate: return value * (u.length_scale() / 1000.0) / kDbPerNeper;
  }
  throw std::invalid_argument("unknown quantity kind");
}

double gamma_from_db_per_period(double db_per_period) {
  return db_per_period / (kDbPerNeper * kHalfPi);
}

double db_per_period_from_gamma(double gamma) { return gamma * kDbPerNeper * kHalfPi; }

}  // namespace qsol
