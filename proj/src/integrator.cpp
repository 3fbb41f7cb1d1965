#include "qsol/integrator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qsol {

namespace {

const cplx kI(0.0, 1.0);
const cplx kSqrtI = std::polar(1.0, std::numbers::pi / 4.0);

double dispersion_sign(Dispersion d) {
  switch (d) {
    case Dispersion::anomalous: return 1.0;
    case Dispersion::normal: return -1.0;
    case Dispersion::none: return 0.0;
  }
  return 0.0;
}

// exp[(-gamma -/+ (i/2)(1 + s w^2)) h] / n, the 1/n absorbing the unnormalized inverse FFT.
void linear_factors(const TimeGrid& grid, double gamma, Dispersion d, double h, CVec& phi_f,
                    CVec& dag_f) {
  const auto n = grid.size();
  const double s = dispersion_sign(d);
  phi_f.resize(n);
  dag_f.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = grid.omega(k);
    const double phase = 0.5 * (1.0 + s * w * w) * h;
    const double decay = std::exp(-gamma * h) / double(n);
    phi_f[k] = decay * std::polar(1.0, -phase);
    dag_f[k] = decay * std::polar(1.0, phase);
  }
}

struct StepBuffers {
  CVec p0, q0, intensity, delayed;
};

// One nonlinear substep on all points. `g` is the Raman phase-noise increment
// (may be null) and `raman` provides the delayed response (may be null).
void nonlinear_kernel(CVec& p, CVec& q, const double* w1, const double* w2, const double* g,
                      const RamanModel* raman, double raman_rate, double h,
                      const NonlinearOptions& o, StepBuffers& buf) {
  const auto n = p.size();
  const double c = o.kerr_weight;
  const bool delayed = raman != nullptr && raman->enabled() && raman->fraction() > 0.0;
  auto noise_g = [g](std::size_t j) { return g ? g[j] : 0.0; };

  auto update_delayed = [&](const CVec& a, const CVec& b) {
    buf.intensity.resize(n);
    for (std::size_t j = 0; j < n; ++j) buf.intensity[j] = a[j] * b[j];
    raman->delayed_intensity(buf.intensity, buf.delayed);
  };
  auto delayed_at = [&](std::size_t j) { return delayed ? buf.delayed[j] : cplx(0.0); };

  if (o.scheme == Scheme::explicit_euler) {
    if (delayed) update_delayed(p, q);
    for (std::size_t j = 0; j < n; ++j) {
      const cplx nl = c * q[j] * p[j] + delayed_at(j);
      const double gj = noise_g(j);
      const cplx dp = (kI * nl * h + kSqrtI * w1[j] + kI * gj - 0.5 * raman_rate * h) * p[j];
      const cplx dq =
          (-kI * nl * h + std::conj(kSqrtI) * w2[j] - kI * gj - 0.5 * raman_rate * h) * q[j];
      p[j] += dp;
      q[j] += dq;
    }
    return;
  }

  // Semi-implicit midpoint on the Stratonovich form; the -/+ (i/2) rate h terms
  // are the Ito-to-Stratonovich drift correction of the electronic noise.
  // Each iteration solves m = m0 / (1 - x(m)) with x frozen at the previous
  // iterate, written out in real arithmetic to keep the loop vectorizable.
  buf.p0.assign(p.begin(), p.end());
  buf.q0.assign(q.begin(), q.end());
  const double ito = 0.5 * o.noise_rate * h;
  const double s = std::numbers::sqrt2 / 2.0;  // e^{+-i pi/4} = s (1 +- i)
  if (delayed) update_delayed(buf.p0, buf.q0);
  for (int it = 0; it < o.iterations; ++it) {
    if (delayed && it == 1) update_delayed(p, q);
    for (std::size_t j = 0; j < n; ++j) {
      const cplx pq = p[j] * q[j];
      double nr = c * pq.real(), ni = c * pq.imag();
      if (delayed) {
        nr += buf.delayed[j].real();
        ni += buf.delayed[j].imag();
      }
      const double gj = noise_g(j);
      // i (nl h - ito) = -ni h + i (nr h - ito)
      const double phase = nr * h - ito + gj;
      const double xr = 0.5 * (-ni * h + s * w1[j]);
      const double xi = 0.5 * (phase + s * w1[j]);
      const double yr = 0.5 * (ni * h + s * w2[j]);
      const double yi = 0.5 * (-phase - s * w2[j]);
      const double dxr = 1.0 - xr, dyr = 1.0 - yr;
      const double ix = 1.0 / (dxr * dxr + xi * xi);
      const double iy = 1.0 / (dyr * dyr + yi * yi);
      const cplx a = buf.p0[j], b = buf.q0[j];
      // m0 / (1 - x) = m0 conj(1 - x) / |1 - x|^2 with 1 - x = dxr - i xi
      p[j] = cplx((a.real() * dxr - a.imag() * xi) * ix, (a.imag() * dxr + a.real() * xi) * ix);
      q[j] = cplx((b.real() * dyr - b.imag() * yi) * iy, (b.imag() * dyr + b.real() * yi) * iy);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    p[j] = 2.0 * p[j] - buf.p0[j];
    q[j] = 2.0 * q[j] - buf.q0[j];
  }
}

}  // namespace

ModelParams ModelParams::from_config(const SimConfig& cfg) {
  ModelParams m;
  m.gamma = cfg.gamma;
  m.dispersion = cfg.dispersion;
  m.nonlinearity = cfg.nonlinearity;
  m.n_bar = cfg.effective_n_bar();
  m.raman = cfg.raman.to_spec(cfg.units);
  return m;
}

FieldPair linear_step(FieldPair field, const TimeGrid& grid, double gamma, Dispersion dispersion,
                      double h) {
  if (!(h > 0.0)) throw std::invalid_argument("linear_step: h must be > 0");
  CVec fp, fd;
  linear_factors(grid, gamma, dispersion, h, fp, fd);
  const auto t = transform_for(grid.size());
  t->forward(field.phi);
  t->forward(field.phi_dag);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    field.phi[k] *= fp[k];
    field.phi_dag[k] *= fd[k];
  }
  t->inverse(field.phi);
  t->inverse(field.phi_dag);
  field.zeta += h;
  return field;
}

FieldPair nonlinear_step(FieldPair field, const NoiseDraw& draw, double h,
                         const NonlinearOptions& options) {
  if (draw.w1.size() != field.size() || draw.w2.size() != field.size())
    throw std::invalid_argument("nonlinear_step: noise draw does not match the field size");
  StepBuffers buf;
  nonlinear_kernel(field.phi, field.phi_dag, draw.w1.data(), draw.w2.data(), nullptr, nullptr,
                   0.0, h, options, buf);
  field.zeta += h;
  return field;
}

FieldPair nonlinear_step(FieldPair field, const NoiseDraw& draw, double h, double n_bar,
                         const TimeGrid& grid) {
  NonlinearOptions o;
  o.noise_rate = std::isinf(n_bar) ? 0.0 : 1.0 / (n_bar * grid.d_tau());
  return nonlinear_step(std::move(field), draw, h, o);
}

std::vector<std::size_t> plane_steps(std::span<const double> zeta_planes, double d_zeta) {
  std::vector<std::size_t> steps;
  steps.reserve(zeta_planes.size());
  for (double z : zeta_planes) {
    const double k = std::round(z / d_zeta);
    if (!(k >= 1.0))
      throw std::invalid_argument("output plane zeta=" + std::to_string(z) +
                                  " rounds to zero steps");
    const auto ks = std::size_t(k);
    if (!steps.empty() && ks <= steps.back())
      throw std::invalid_argument("output planes must map to strictly increasing steps");
    steps.push_back(ks);
  }
  return steps;
}

struct Propagator::Workspace {
  NoiseDraw draw;
  RVec raman_noise;
  CVec raman_scratch;
  StepBuffers buf;
};

Propagator::Propagator(const TimeGrid& grid, const ModelParams& model, const StepperSpec& stepper)
    : grid_(grid), model_(model), stepper_(stepper), transform_(transform_for(grid.size())) {
  if (!(stepper.d_zeta > 0.0)) throw std::invalid_argument("stepper.d_zeta: must be > 0");
  linear_factors(grid_, model_.gamma, model_.dispersion, 0.5 * stepper_.d_zeta, half_phi_,
                 half_dag_);
  linear_factors(grid_, model_.gamma, model_.dispersion, stepper_.d_zeta, full_phi_, full_dag_);
  const bool noisy = model_.nonlinearity && !std::isinf(model_.n_bar);
  const bool raman_on = model_.nonlinearity && model_.raman.enabled;
  if (raman_on)
    raman_ = std::make_unique<RamanModel>(model_.raman, grid_,
                                          noisy ? model_.n_bar
                                                : std::numeric_limits<double>::infinity());
  nl_.scheme = stepper_.scheme;
  nl_.iterations = stepper_.midpoint_iterations;
  nl_.kerr_weight = model_.nonlinearity ? 1.0 - (raman_on ? model_.raman.fraction : 0.0) : 0.0;
  nl_.noise_rate = noisy ? nl_.kerr_weight / (model_.n_bar * grid_.d_tau()) : 0.0;
}

void Propagator::apply_linear(FieldPair& field, bool half, Workspace&) const {
  const auto& fp = half ? half_phi_ : full_phi_;
  const auto& fd = half ? half_dag_ : full_dag_;
  transform_->forward(field.phi);
  transform_->forward(field.phi_dag);
  for (std::size_t k = 0; k < field.size(); ++k) {
    field.phi[k] *= fp[k];
    field.phi_dag[k] *= fd[k];
  }
  transform_->inverse(field.phi);
  transform_->inverse(field.phi_dag);
}

void Propagator::apply_nonlinear(FieldPair& field, const StreamKey& key, Workspace& ws) const {
  if (!model_.nonlinearity) return;
  const double h = stepper_.d_zeta;
  const double n_bar = nl_.noise_rate > 0.0 ? model_.n_bar : std::numeric_limits<double>::infinity();
  draw_noise_into(ws.draw, key, grid_, h, n_bar, nl_.kerr_weight);
  const double* g = nullptr;
  double raman_rate = 0.0;
  if (raman_) {
    raman_->noise_into(key, h, ws.raman_noise, ws.raman_scratch);
    g = ws.raman_noise.data();
    raman_rate = raman_->equal_point_rate();
  }
  nonlinear_kernel(field.phi, field.phi_dag, ws.draw.w1.data(), ws.draw.w2.data(), g,
                   raman_.get(), raman_rate, h, nl_, ws.buf);
}

bool Propagator::run(FieldPair& field, std::uint64_t seed, std::uint64_t trajectory,
                     std::span<const std::size_t> steps, const PlaneCallback& on_plane,
                     double* divergence_zeta) const {
  if (field.size() != grid_.size())
    throw std::invalid_argument("field size does not match the propagator grid");
  if (steps.empty()) return true;
  Workspace ws;
  const double h = stepper_.d_zeta;
  const double zeta0 = field.zeta;
  const std::size_t last = steps.back();
  std::size_t next_plane = 0;
  apply_linear(field, true, ws);
  for (std::size_t k = 1; k <= last; ++k) {
    apply_nonlinear(field, StreamKey{seed, trajectory, k - 1}, ws);
    field.zeta = zeta0 + double(k) * h;
    if (!(max_amplitude(field) <= stepper_.divergence_threshold)) {
      if (divergence_zeta) *divergence_zeta = field.zeta;
      return false;
    }
    if (k == steps[next_plane]) {
      apply_linear(field, true, ws);
      if (on_plane) on_plane(next_plane, field);
      ++next_plane;
      if (k < last) apply_linear(field, true, ws);
    } else {
      apply_linear(field, false, ws);
    }
  }
  return true;
}

TrajectoryRecord propagate(FieldPair initial, const SimConfig& config, const StepperSpec& stepper,
                           std::span<const double> zeta_planes, std::uint64_t trajectory) {
  const auto grid = make_grid(config.grid.n_points, config.grid.tau_window);
  for (double z : zeta_planes)
    if (!(z > 0.0) || z > config.zeta_max() * (1.0 + 1e-12))
      throw std::invalid_argument("output planes must lie in (0, zeta_max]");
  const auto steps = plane_steps(zeta_planes, stepper.d_zeta);
  Propagator prop(grid, ModelParams::from_config(config), stepper);
  TrajectoryRecord rec;
  double dz = std::numeric_limits<double>::quiet_NaN();
  const bool ok = prop.run(initial, config.seed, trajectory, steps,
                           [&](std::size_t i, const FieldPair& f) {
                             rec.snapshots.push_back({f.zeta, steps[i], f});
                           },
                           &dz);
  rec.diverged = !ok;
  rec.divergence_zeta = dz;
  return rec;
}

}  // namespace qsol
