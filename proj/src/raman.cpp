#include "qsol/raman.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qsol {

namespace {
constexpr double kHbar = 1.054571817e-34;     // [J s]
constexpr double kBoltzmann = 1.380649e-23;   // [J/K]
constexpr double kAreaTolerance = 1e-6;
// Below this |Omega| the density is evaluated at the cutoff; Im h~ is linear there.
constexpr double kSmallOmega = 1e-6;
}  // namespace

void RamanSpec::validate() const {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw std::invalid_argument("raman.fraction: must satisfy 0 <= f_R < 1");
  if (!(temperature >= 0.0)) throw std::invalid_argument("raman.temperature: must be >= 0 K");
  if (!(t0 > 0.0)) throw std::invalid_argument("units.t0: must be positive");
  if (tabulated) {
    if (table.tau.size() < 2 || table.tau.size() != table.h.size())
      throw std::invalid_argument("raman.kernel_table: need at least two (tau, h) rows");
    for (std::size_t i = 0; i < table.tau.size(); ++i) {
      if (table.tau[i] < 0.0 && table.h[i] != 0.0)
        throw std::invalid_argument("raman.kernel_table: kernel must vanish for tau < 0");
      if (i > 0 && !(table.tau[i] > table.tau[i - 1]))
        throw std::invalid_argument("raman.kernel_table: tau must be strictly increasing");
    }
  } else if (!(oscillator.tau1 > 0.0 && oscillator.tau2 > 0.0)) {
    throw std::invalid_argument("raman.tau1/tau2: must be positive");
  }
  if (std::abs(kernel_area(*this) - 1.0) > kAreaTolerance)
    throw std::invalid_argument("raman kernel not normalized: area = " +
                                std::to_string(kernel_area(*this)));
}

TabulatedKernel load_kernel_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open kernel table '" + path + "'");
  TabulatedKernel k;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double t, h;
    if (!(row >> t)) continue;
    if (!(row >> h)) throw std::runtime_error("kernel table '" + path + "': malformed row");
    k.tau.push_back(t * 1e-15);
    k.h.push_back(h * 1e15);
  }
  return k;
}

double kernel_area(const RamanSpec& spec) {
  if (!spec.tabulated) return kernel_response(spec, 0.0).real();
  const auto& t = spec.table.tau;
  const auto& h = spec.table.h;
  double area = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) area += 0.5 * (h[i] + h[i - 1]) * (t[i] - t[i - 1]);
  return area;
}

cplx kernel_response(const RamanSpec& spec, double omega) {
  if (!spec.tabulated) {
    const double t1 = spec.oscillator.tau1 / spec.t0;
    const double t2 = spec.oscillator.tau2 / spec.t0;
    const double amp = (t1 * t1 + t2 * t2) / (t1 * t2 * t2);
    const cplx a(1.0 / t2, -omega);
    return amp * (1.0 / t1) / (a * a + 1.0 / (t1 * t1));
  }
  // Trapezoidal quadrature in physical time.
  const double w = omega / spec.t0;
  const auto& t = spec.table.tau;
  const auto& h = spec.table.h;
  cplx sum = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const cplx a = h[i - 1] * std::polar(1.0, w * t[i - 1]);
    const cplx b = h[i] * std::polar(1.0, w * t[i]);
    sum += 0.5 * (a + b) * (t[i] - t[i - 1]);
  }
  return sum;
}

double bose_occupation(double omega, double temperature, double t0) {
  if (temperature <= 0.0) return omega > 0.0 ? 0.0 : -1.0;
  const double x = kHbar * omega / (kBoltzmann * temperature * t0);
  return 1.0 / std::expm1(x);
}

double thermal_factor(double omega, double temperature, double t0) {
  return bose_occupation(std::abs(omega), temperature, t0) + 0.5;
}

double raman_noise_density(const RamanSpec& spec, double omega, double n_bar) {
  if (!spec.enabled || spec.fraction == 0.0) return 0.0;
  const double w = std::max(std::abs(omega), kSmallOmega);
  const double im = std::abs(kernel_response(spec, w).imag());
  return 2.0 * spec.fraction * im * thermal_factor(w, spec.temperature, spec.t0) / n_bar;
}

RamanModel::RamanModel(const RamanSpec& spec, const TimeGrid& grid, double n_bar)
    : spec_(spec), grid_(grid), transform_(transform_for(grid.size())) {
  if (!spec_.enabled) return;
  spec_.validate();
  const auto n = grid.size();
  response_.resize(n);
  amplitude_.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    response_[k] = spec_.fraction * kernel_response(spec_, grid.omega(k)) / double(n);
    if (!std::isinf(n_bar)) {
      const double v = raman_noise_density(spec_, grid.omega(k), n_bar) * grid.d_omega() /
                       (2.0 * std::numbers::pi);
      amplitude_[k] = std::sqrt(v);
      equal_point_rate_ += v;
    }
  }
}

void RamanModel::delayed_intensity(std::span<const cplx> intensity, CVec& out) const {
  out.assign(intensity.begin(), intensity.end());
  transform_->forward(out);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= response_[k];
  transform_->inverse(out);
}

void RamanModel::noise_into(const StreamKey& key, double d_zeta, RVec& out, CVec& scratch) const {
  const auto n = grid_.size();
  out.assign(n, 0.0);
  if (!spec_.enabled || equal_point_rate_ == 0.0) return;
  standard_normals(key, NoiseChannel::raman, out);
  // Hermitian spectrum: real DC and Nyquist bins, complex pairs (k, n-k) otherwise.
  scratch.assign(n, cplx(0.0));
  const double sdz = std::sqrt(d_zeta);
  const std::size_t half = n / 2;
  scratch[0] = sdz * amplitude_[0] * out[0];
  scratch[half] = sdz * amplitude_[half] * out[1];
  for (std::size_t k = 1; k < half; ++k) {
    const double s = sdz * amplitude_[k] * std::numbers::sqrt2 / 2.0;
    const cplx a(s * out[2 * k], s * out[2 * k + 1]);
    scratch[k] = a;
    scratch[n - k] = std::conj(a);
  }
  for (std::size_t k = 1; k < n; k += 2) scratch[k] = -scratch[k];
  transform_->inverse(scratch);
  for (std::size_t j = 0; j < n; ++j) out[j] = scratch[j].real();
}

CVec effective_intensity(const FieldPair& field, const RamanSpec& spec, const TimeGrid& grid) {
  const auto n = grid.size();
  CVec intensity(n);
  for (std::size_t j = 0; j < n; ++j) intensity[j] = field.phi_dag[j] * field.phi[j];
  if (!spec.enabled || spec.fraction == 0.0) return intensity;
  RamanModel model(spec, grid, std::numeric_limits<double>::infinity());
  CVec delayed;
  model.delayed_intensity(intensity, delayed);
  for (std::size_t j = 0; j < n; ++j)
    intensity[j] = (1.0 - spec.fraction) * intensity[j] + delayed[j];
  return intensity;
}

CVec raman_drift(const FieldPair& field, const RamanSpec& spec, const TimeGrid& grid) {
  auto drift = effective_intensity(field, spec, grid);
  for (std::size_t j = 0; j < drift.size(); ++j) drift[j] *= cplx(0.0, 1.0) * field.phi[j];
  return drift;
}

RVec raman_noise(const StreamKey& key, const RamanSpec& spec, const TimeGrid& grid,
                 double d_zeta, double n_bar) {
  RVec out(grid.size(), 0.0);
  if (!spec.enabled) return out;
  RamanModel model(spec, grid, n_bar);
  CVec scratch;
  model.noise_into(key, d_zeta, out, scratch);
  return out;
}

}  // namespace qsol
