#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "greenwalk/fft.hpp"
#include "greenwalk/grid.hpp"

namespace greenwalk {

using Rng = std::mt19937_64;

/// Small-frequency behaviour 1 - a^(k) ~ A |k|^alpha.
struct TailParams {
  double A;
  double alpha;
};

/// Symmetric probability density on R^d with its Fourier transform.
class JumpKernel {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;
  using RadialEvaluator = std::function<double(double)>;
  using Sampler = std::function<void(Rng&, std::span<double>)>;

  struct Definition {
    int dim = 1;
    std::string family = "custom";
    std::map<std::string, double> params;
    Evaluator density;
    Evaluator fourier;
    // 1 - a^(k), when a cancellation-free form exists.
    Evaluator complement;
    // Present only for isotropic kernels: a^ as a function of |k|.
    RadialEvaluator radial_fourier;
    RadialEvaluator radial_complement;
    std::optional<TailParams> tail;
    Sampler sampler;
    // |k| beyond which |a^(k)| < 1e-6.
    double fourier_cutoff = 0.0;
    // Upper |k| for inverse transforms; 0 means search for |a^| < 1e-18.
    double spectral_extent = 0.0;
  };

  static JumpKernel custom(Definition def);

  int dim() const noexcept { return def_->dim; }
  const std::string& family() const noexcept { return def_->family; }
  const std::map<std::string, double>& params() const noexcept { return def_->params; }

  double density(std::span<const double> x) const { return def_->density(x); }
  double fourier(std::span<const double> k) const { return def_->fourier(k); }
  double fourier_complement(std::span<const double> k) const;

  bool isotropic() const noexcept { return static_cast<bool>(def_->radial_fourier); }
  double radial_fourier(double r) const;
  double radial_complement(double r) const;

  const std::optional<TailParams>& tail_params() const noexcept { return def_->tail; }
  /// Copy of this kernel with explicitly supplied (A, alpha).
  JumpKernel with_tail_params(TailParams tail) const;

  bool can_sample() const noexcept { return static_cast<bool>(def_->sampler); }
  void sample_jump(Rng& rng, std::span<double> out) const;

  double fourier_cutoff() const noexcept { return def_->fourier_cutoff; }
  double spectral_extent() const;

 private:
  explicit JumpKernel(std::shared_ptr<const Definition> def) : def_(std::move(def)) {}
  std::shared_ptr<const Definition> def_;
};

JumpKernel make_gaussian_kernel(int dim);
JumpKernel make_cauchy_kernel();
JumpKernel make_tabulated_kernel(const FieldGrid& samples);

struct ExpansionFit {
  double A;
  double alpha;
  double residual;
};

ExpansionFit fit_small_k_expansion(const JumpKernel& kernel, double k_min = 1e-3,
                                   double k_max = 5e-2, int n_probe = 64);

struct KernelReport {
  double symmetry_error = 0.0;
  double min_density = 0.0;
  double normalization_error = 0.0;
  double max_fourier_modulus = 0.0;
  double decay_value = 0.0;
  double boundary_density = 0.0;
  bool symmetric = false;
  bool positive = false;
  bool normalized = false;
  bool bounded = false;
  bool decays = false;
  bool aliasing_ok = false;

  bool passed() const noexcept {
    return symmetric && positive && normalized && bounded && decays && aliasing_ok;
  }
};

KernelReport validate_kernel(const JumpKernel& kernel, const GridSpec& grid);

/// Largest density value on the boundary faces of the box.
double boundary_density(const JumpKernel& kernel, const GridSpec& grid);

/// A kernel discretized on a periodic grid: its FFT symbol and convolution.
class KernelOnGrid {
 public:
  static constexpr double kAliasingThreshold = 1e-12;

  /// Throws AliasingViolation when the density is not negligible at x = -L.
  KernelOnGrid(const JumpKernel& kernel, const GridSpec& grid);

  const GridSpec& grid() const noexcept { return spectral_->grid(); }
  const Spectral& spectral() const noexcept { return *spectral_; }
  const JumpKernel& kernel() const noexcept { return kernel_; }
  /// Real half-spectrum symbol h^d * FFT(a at wrapped nodes).
  std::span<const double> symbol() const noexcept { return symbol_; }

  FieldGrid convolve(const FieldGrid& f) const;
  /// a^{*n} sampled on the grid (natural layout), n >= 1.
  FieldGrid power(int n) const;

 private:
  JumpKernel kernel_;
  std::shared_ptr<const Spectral> spectral_;
  std::vector<double> symbol_;
};

FieldGrid convolve_power(const JumpKernel& kernel, int n, const GridSpec& grid);

}  // namespace greenwalk
