#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "greenwalk/grid.hpp"

namespace greenwalk {

using Complex = std::complex<double>;

/// Real-to-complex transforms on a GridSpec (FFTW, estimate-mode plans).
///
/// The half spectrum has N^{d-1} * (N/2 + 1) entries, last axis halved.
/// Execution is reentrant; only plan creation is serialized.
class Spectral {
 public:
  explicit Spectral(const GridSpec& grid);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t spectrum_size() const noexcept { return spectrum_size_; }

  std::vector<Complex> forward(std::span<const double> values) const;
  /// Normalized inverse (divides by N^d).
  std::vector<double> inverse(std::span<const Complex> spectrum) const;

  /// Squared wavenumber |k|^2 of half-spectrum entry m.
  double wavenumber_sq(std::size_t m) const noexcept { return k2_[m]; }
  void wavevector(std::size_t m, std::span<double> out) const noexcept;
  /// 1 for modes whose conjugate is not stored, else 2 (Hermitian weight).
  double hermitian_weight(std::size_t m) const noexcept;

 private:
  GridSpec grid_;
  std::size_t half_;
  std::size_t spectrum_size_;
  std::vector<double> k2_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

/// Moves the origin between node N/2 (natural) and node 0 (wrapped).
/// The shift by N/2 is an involution, so one function serves both ways.
std::vector<double> roll_half(const GridSpec& grid, std::span<const double> values);

}  // namespace greenwalk
