#pragma once

#include <complex>
#include <cstddef>
#include <cstdlib>
#include <memory>
#include <new>
#include <span>
#include <string_view>
#include <vector>

namespace qsol {

using cplx = std::complex<double>;

/// Allocator returning 64-byte aligned storage so every buffer matches the
/// alignment the FFT plans were created with.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t alignment = 64;

  AlignedAllocator() noexcept = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    std::size_t bytes = ((n * sizeof(T) + alignment - 1) / alignment) * alignment;
    void* p = std::aligned_alloc(alignment, bytes == 0 ? alignment : bytes);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using CVec = std::vector<cplx, AlignedAllocator<cplx>>;
using RVec = std::vector<double>;

/// Project-wide transform convention tag, written into every output file.
inline constexpr std::string_view kTransformConvention =
    "forward: phi~(w) = (1/sqrt(2pi)) sum_j phi(tau_j) exp(+i w tau_j) dtau; "
    "inverse uses exp(-i w tau); Parseval: sum_k |phi~_k|^2 dw = sum_j |phi_j|^2 dtau";

/// Uniform periodic grid on [-T_w, T_w) with the matching angular-frequency
/// grid in FFT order (non-negative bins first, Nyquist bin at n/2 negative).
class TimeGrid {
 public:
  TimeGrid(std::size_t n_points, double tau_window);

  std::size_t size() const { return n_; }
  double tau_window() const { return window_; }
  double d_tau() const { return d_tau_; }
  double d_omega() const { return d_omega_; }
  /// Ordinary-frequency spacing in units of 1/t0.
  double d_nu() const;

  std::span<const double> tau() const { return tau_; }
  std::span<const double> omega() const { return omega_; }
  double tau(std::size_t j) const { return tau_[j]; }
  double omega(std::size_t k) const { return omega_[k]; }
  double nu(std::size_t k) const;
  /// Index of the -omega partner of bin k (Nyquist and DC are self-paired).
  std::size_t mirror(std::size_t k) const { return (n_ - k) % n_; }
  /// Bin indices sorted by ascending frequency.
  std::vector<std::size_t> ascending_order() const;

  bool operator==(const TimeGrid& o) const { return n_ == o.n_ && window_ == o.window_; }

 private:
  std::size_t n_;
  double window_;
  double d_tau_;
  double d_omega_;
  RVec tau_;
  RVec omega_;
};

/// Builds a grid, validating n_points (power of two, >= 8) and the window.
TimeGrid make_grid(std::size_t n_points, double tau_window);

/// Unnormalized complex DFT pair on a fixed size, backed by FFTW plans.
/// forward() applies sum_j x_j exp(+2 pi i jk/n); inverse() the opposite sign.
/// Execution is thread-safe; buffers must come from CVec.
class Transform {
 public:
  explicit Transform(std::size_t n);
  ~Transform();
  Transform(const Transform&) = delete;
  Transform& operator=(const Transform&) = delete;

  std::size_t size() const { return n_; }
  void forward(CVec& data) const;
  void inverse(CVec& data) const;

 private:
  std::size_t n_;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
};

/// Shared, lazily created transform for a given size.
std::shared_ptr<const Transform> transform_for(std::size_t n);

/// Spectral amplitude phi~(omega_k) in the project convention.
CVec to_spectral(const TimeGrid& grid, std::span<const cplx> field);
/// Inverse of to_spectral.
CVec to_temporal(const TimeGrid& grid, std::span<const cplx> spectrum);

}  // namespace qsol
