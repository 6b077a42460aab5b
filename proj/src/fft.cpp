#include "greenwalk/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <numbers>

#include "greenwalk/errors.hpp"

namespace greenwalk {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <class T>
struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : ptr(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
    if (ptr == nullptr) fail(ErrorCode::kInvalidArgument, "FFT buffer allocation failed");
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  T* ptr;
};

}  // namespace

struct Spectral::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

Spectral::Spectral(const GridSpec& grid)
    : grid_(grid), half_(grid.points_per_axis() / 2 + 1), plans_(std::make_unique<Plans>()) {
  const int d = grid.dim();
  const std::size_t n = grid.points_per_axis();
  spectrum_size_ = grid.size() / n * half_;

  std::vector<int> dims(d, static_cast<int>(n));
  FftwBuffer<double> in(grid.size());
  FftwBuffer<fftw_complex> out(spectrum_size_);
  {
    std::lock_guard lock(planner_mutex());
    plans_->r2c = fftw_plan_dft_r2c(d, dims.data(), in.ptr, out.ptr, FFTW_ESTIMATE);
    plans_->c2r = fftw_plan_dft_c2r(d, dims.data(), out.ptr, in.ptr, FFTW_ESTIMATE);
  }
  if (plans_->r2c == nullptr || plans_->c2r == nullptr) {
    fail(ErrorCode::kInvalidArgument, "FFTW could not create a plan for this grid");
  }

  k2_.resize(spectrum_size_);
  std::vector<double> kv(d);
  for (std::size_t m = 0; m < spectrum_size_; ++m) {
    wavevector(m, kv);
    double s = 0.0;
    for (double k : kv) s += k * k;
    k2_[m] = s;
  }
}

Spectral::~Spectral() {
  std::lock_guard lock(planner_mutex());
  if (plans_->r2c != nullptr) fftw_destroy_plan(plans_->r2c);
  if (plans_->c2r != nullptr) fftw_destroy_plan(plans_->c2r);
}

void Spectral::wavevector(std::size_t m, std::span<double> out) const noexcept {
  const std::size_t n = grid_.points_per_axis();
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * grid_.spacing());
  const int d = grid_.dim();
  const std::size_t last = m % half_;
  out[d - 1] = static_cast<double>(last) * dk;
  m /= half_;
  for (int a = d - 2; a >= 0; --a) {
    const std::size_t i = m % n;
    m /= n;
    const double s = i < n / 2 ? static_cast<double>(i)
                               : static_cast<double>(i) - static_cast<double>(n);
    out[a] = s * dk;
  }
}

double Spectral::hermitian_weight(std::size_t m) const noexcept {
  const std::size_t last = m % half_;
  return (last == 0 || last == half_ - 1) ? 1.0 : 2.0;
}

std::vector<Complex> Spectral::forward(std::span<const double> values) const {
  require(values.size() == grid_.size(), ErrorCode::kGridMismatch,
          "forward transform input does not match grid");
  FftwBuffer<double> in(grid_.size());
  FftwBuffer<fftw_complex> out(spectrum_size_);
  std::copy(values.begin(), values.end(), in.ptr);
  fftw_execute_dft_r2c(plans_->r2c, in.ptr, out.ptr);
  std::vector<Complex> result(spectrum_size_);
  std::memcpy(static_cast<void*>(result.data()), out.ptr, sizeof(fftw_complex) * spectrum_size_);
  return result;
}

std::vector<double> Spectral::inverse(std::span<const Complex> spectrum) const {
  require(spectrum.size() == spectrum_size_, ErrorCode::kGridMismatch,
          "inverse transform input does not match grid");
  FftwBuffer<fftw_complex> in(spectrum_size_);
  FftwBuffer<double> out(grid_.size());
  std::memcpy(static_cast<void*>(in.ptr), spectrum.data(), sizeof(fftw_complex) * spectrum_size_);
  fftw_execute_dft_c2r(plans_->c2r, in.ptr, out.ptr);
  const double scale = 1.0 / static_cast<double>(grid_.size());
  std::vector<double> result(out.ptr, out.ptr + grid_.size());
  for (double& v : result) v *= scale;
  return result;
}

std::vector<double> roll_half(const GridSpec& grid, std::span<const double> values) {
  const std::size_t n = grid.points_per_axis();
  const int d = grid.dim();
  std::vector<double> out(values.size());
  std::vector<std::size_t> idx(d);
  for (std::size_t i = 0; i < values.size(); ++i) {
    grid.unflatten(i, idx);
    for (auto& j : idx) j = (j + n / 2) % n;
    out[grid.flatten(idx)] = values[i];
  }
  return out;
}

}  // namespace greenwalk
