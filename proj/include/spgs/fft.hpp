#pragma once

// Thin RAII layer over FFTW3.
//
// Plans are built once per shape with FFTW_ESTIMATE (the planner's choice is
// then independent of timing, so results are repeatable run to run) and are
// executed through the new-array interface on fftw_malloc'd buffers, which is
// safe from several threads at once. Planning itself is serialized.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <span>
#include <tuple>

namespace spgs::fft {

namespace detail {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

struct PlanDestroy {
  void operator()(fftw_plan p) const noexcept {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};

using PlanHandle = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDestroy>;

}  // namespace detail

/// Aligned, zero-initialised buffer from fftw_malloc.
template <class T>
class Buffer {
 public:
  explicit Buffer(std::size_t count)
      : data_(static_cast<T*>(fftw_malloc(sizeof(T) * (count == 0 ? 1 : count)))), size_(count) {
    if (!data_) throw std::bad_alloc();
    std::memset(static_cast<void*>(data_.get()), 0, sizeof(T) * size_);
  }

  T* data() noexcept { return data_.get(); }
  const T* data() const noexcept { return data_.get(); }
  std::size_t size() const noexcept { return size_; }
  T& operator[](std::size_t i) noexcept { return data_.get()[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_.get()[i]; }
  std::span<T> span() noexcept { return {data(), size_}; }

 private:
  std::unique_ptr<T, detail::FftwFree> data_;
  std::size_t size_;
};

using RealBuffer = Buffer<double>;
using ComplexBuffer = Buffer<fftw_complex>;

/// Forward and backward real 3-D transforms on an m^3 cube. The complex side
/// has m * m * (m/2 + 1) entries. Neither direction is normalised.
class RealCubeTransform {
 public:
  explicit RealCubeTransform(std::size_t m) : m_(m) {
    RealBuffer r(real_size());
    ComplexBuffer c(complex_size());
    const int mi = static_cast<int>(m);
    std::lock_guard lock(detail::planner_mutex());
    forward_.reset(fftw_plan_dft_r2c_3d(mi, mi, mi, r.data(), c.data(), FFTW_ESTIMATE));
    backward_.reset(fftw_plan_dft_c2r_3d(mi, mi, mi, c.data(), r.data(), FFTW_ESTIMATE));
  }

  std::size_t extent() const noexcept { return m_; }
  std::size_t real_size() const noexcept { return m_ * m_ * m_; }
  std::size_t complex_size() const noexcept { return m_ * m_ * (m_ / 2 + 1); }

  void forward(RealBuffer& in, ComplexBuffer& out) const { fftw_execute_dft_r2c(forward_.get(), in.data(), out.data()); }
  /// Destroys the contents of `in`.
  void backward(ComplexBuffer& in, RealBuffer& out) const { fftw_execute_dft_c2r(backward_.get(), in.data(), out.data()); }

 private:
  std::size_t m_;
  detail::PlanHandle forward_;
  detail::PlanHandle backward_;
};

/// 3-D DST-I (FFTW RODFT00) on an n^3 cube. Applying it twice multiplies by
/// (2(n+1))^3.
class SineCubeTransform {
 public:
  explicit SineCubeTransform(std::size_t n) : n_(n) {
    RealBuffer a(n * n * n), b(n * n * n);
    const int ni = static_cast<int>(n);
    std::lock_guard lock(detail::planner_mutex());
    plan_.reset(fftw_plan_r2r_3d(ni, ni, ni, a.data(), b.data(), FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00,
                                 FFTW_ESTIMATE));
  }

  std::size_t extent() const noexcept { return n_; }
  void apply(RealBuffer& in, RealBuffer& out) const { fftw_execute_r2r(plan_.get(), in.data(), out.data()); }

 private:
  std::size_t n_;
  detail::PlanHandle plan_;
};

/// Process-wide cache of transforms keyed by extent.
template <class Transform>
const Transform& cached(std::size_t extent) {
  detail::planner_mutex();  // must outlive the cache below
  static std::mutex m;
  static std::map<std::size_t, std::unique_ptr<Transform>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[extent];
  if (!slot) slot = std::make_unique<Transform>(extent);
  return *slot;
}

}  // namespace spgs::fft
