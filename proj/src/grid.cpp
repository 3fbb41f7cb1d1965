#include "qsol/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qsol {

namespace {
// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

TimeGrid::TimeGrid(std::size_t n_points, double tau_window)
    : n_(n_points), window_(tau_window), d_tau_(2.0 * tau_window / double(n_points)),
      d_omega_(std::numbers::pi / tau_window), tau_(n_points), omega_(n_points) {
  for (std::size_t j = 0; j < n_; ++j) tau_[j] = -window_ + double(j) * d_tau_;
  for (std::size_t k = 0; k < n_; ++k) {
    const auto signed_k = k < n_ / 2 ? double(k) : double(k) - double(n_);
    omega_[k] = signed_k * d_omega_;
  }
}

double TimeGrid::d_nu() const { return d_omega_ / (2.0 * std::numbers::pi); }

double TimeGrid::nu(std::size_t k) const { return omega_[k] / (2.0 * std::numbers::pi); }

std::vector<std::size_t> TimeGrid::ascending_order() const {
  std::vector<std::size_t> idx(n_);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [this](std::size_t a, std::size_t b) { return omega_[a] < omega_[b]; });
  return idx;
}

TimeGrid make_grid(std::size_t n_points, double tau_window) {
  if (n_points < 8 || (n_points & (n_points - 1)) != 0)
    throw std::invalid_argument("grid.n_points: must be a power of two >= 8, got " +
                                std::to_string(n_points));
  if (!(tau_window > 0.0) || !std::isfinite(tau_window))
    throw std::invalid_argument("grid.tau_window: must be positive, got " +
                                std::to_string(tau_window));
  return TimeGrid(n_points, tau_window);
}

Transform::Transform(std::size_t n) : n_(n) {
  CVec scratch(n);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(planner_mutex());
  // FFTW_ESTIMATE keeps plan selection deterministic across runs.
  plan_fwd_ = fftw_plan_dft_1d(int(n), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_1d(int(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  if (!plan_fwd_ || !plan_inv_) throw std::runtime_error("FFTW plan creation failed");
}

Transform::~Transform() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

void Transform::forward(CVec& data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), buf, buf);
}

void Transform::inverse(CVec& data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(plan_inv_), buf, buf);
}

std::shared_ptr<const Transform> transform_for(std::size_t n) {
  static std::mutex m;
  static std::map<std::size_t, std::shared_ptr<const Transform>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const Transform>(n);
  return slot;
}

CVec to_spectral(const TimeGrid& grid, std::span<const cplx> field) {
  const auto n = grid.size();
  CVec out(field.begin(), field.end());
  transform_for(n)->forward(out);
  const double scale = grid.d_tau() / std::sqrt(2.0 * std::numbers::pi);
  // exp(+i w_k tau_0) with tau_0 = -T_w reduces to (-1)^k.
  for (std::size_t k = 0; k < n; ++k) out[k] *= (k % 2 == 0 ? scale : -scale);
  return out;
}

CVec to_temporal(const TimeGrid& grid, std::span<const cplx> spectrum) {
  const auto n = grid.size();
  CVec out(spectrum.begin(), spectrum.end());
  const double scale = std::sqrt(2.0 * std::numbers::pi) / (grid.d_tau() * double(n));
  for (std::size_t k = 0; k < n; ++k) out[k] *= (k % 2 == 0 ? scale : -scale);
  transform_for(n)->inverse(out);
  return out;
}

}  // namespace qsol
