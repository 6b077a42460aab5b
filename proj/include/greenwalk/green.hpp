#pragma once

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "greenwalk/grid.hpp"
#include "greenwalk/kernels.hpp"

namespace greenwalk {

/// Regular part G_lambda of the resolvent kernel; the point mass carries
/// weight 1/(1+lambda).
struct ResolventKernel {
  double lambda;
  JumpKernel kernel;
  FieldGrid regular_part;
  double singular_weight;
  double tol;
  int n_terms;
  // Size of the extrapolated (lambda = 0) or bounded (lambda > 0) tail.
  double tail_estimate;
  bool extrapolated;
};

struct SeriesOptions {
  int max_terms = 20000;
  // Stop once the boundary value of a_n exceeds this fraction of a_n(0).
  double wrap_ratio = 0.05;
};

ResolventKernel green_regular_series(const JumpKernel& kernel, const GridSpec& grid,
                                     double lambda, double tol,
                                     const SeriesOptions& options = {});

double green_regular_fourier(const JumpKernel& kernel, std::span<const double> x,
                             double lambda);

enum class GreenExistence { kExists, kDivergent, kUnknown };
const char* existence_name(GreenExistence e) noexcept;
GreenExistence check_green_existence(const JumpKernel& kernel);
/// Throws DivergentGreenMeasure or UnknownTailParams unless the measure exists.
void require_green_existence(const JumpKernel& kernel);

FieldGrid apply_generator(const KernelOnGrid& op, const FieldGrid& f);
FieldGrid apply_generator(const JumpKernel& kernel, const FieldGrid& f);

FieldGrid evolve_semigroup(const KernelOnGrid& op, const FieldGrid& f, double t, double tol,
                           int max_terms = 1000000);
FieldGrid evolve_semigroup(const JumpKernel& kernel, const FieldGrid& f, double t, double tol,
                           int max_terms = 1000000);

/// Bounded integrable test function; norms may be declared or measured.
class CLFunction {
 public:
  using Radial = std::function<double(double)>;

  struct Definition {
    int dim = 1;
    std::string family = "custom";
    std::map<std::string, double> params;
    ScalarFunction eval;
    double sup_norm = std::numeric_limits<double>::quiet_NaN();
    double l1_norm = std::numeric_limits<double>::quiet_NaN();
    std::optional<FieldGrid> samples;
    // Fourier transform as a function of |k| (function radial about 0).
    Radial fourier;
  };

  static CLFunction custom(Definition def);
  static CLFunction zero(int dim);
  static CLFunction constant(int dim, double c);
  static CLFunction kernel_density(const JumpKernel& kernel);
  /// amplitude * exp(-|x|^2 / (2 width^2))
  static CLFunction gaussian_bump(int dim, double amplitude, double width);
  static CLFunction from_samples(const FieldGrid& samples);

  int dim() const noexcept { return def_->dim; }
  const std::string& family() const noexcept { return def_->family; }
  const std::map<std::string, double>& params() const noexcept { return def_->params; }
  double operator()(std::span<const double> x) const { return def_->eval(x); }
  double declared_sup_norm() const noexcept { return def_->sup_norm; }
  double declared_l1_norm() const noexcept { return def_->l1_norm; }
  const std::optional<FieldGrid>& samples() const noexcept { return def_->samples; }
  bool has_fourier() const noexcept { return static_cast<bool>(def_->fourier); }
  double fourier(double r) const;
  /// Finite sup and L1 norms.
  bool in_cl() const;
  bool is_constant() const noexcept { return def_->family == "constant" || def_->family == "zero"; }

  FieldGrid sample_on(const GridSpec& grid) const;
  CLFunction operator+(const CLFunction& other) const;
  CLFunction scaled(double c) const;

 private:
  explicit CLFunction(std::shared_ptr<const Definition> def) : def_(std::move(def)) {}
  std::shared_ptr<const Definition> def_;
};

double cl_norm(const CLFunction& f);

/// Grid used when a caller does not supply one.
GridSpec default_green_grid(int dim);

/// V(., f) = f + G_0 * f on the nodes of the G_0 grid.
class PotentialOperator {
 public:
  explicit PotentialOperator(ResolventKernel g0);
  const ResolventKernel& green() const noexcept { return g0_; }
  FieldGrid field(const CLFunction& f) const;
  double at(const CLFunction& f, std::span<const double> x) const;

 private:
  ResolventKernel g0_;
  std::shared_ptr<const Spectral> spectral_;
  std::vector<Complex> g_hat_;
};

double potential(const JumpKernel& kernel, const CLFunction& f, std::span<const double> x,
                 const GridSpec& grid);
double potential(const JumpKernel& kernel, const CLFunction& f, std::span<const double> x);

/// Radial Fourier evaluation of V(x, f); needs an isotropic kernel and f^.
double potential_spectral(const JumpKernel& kernel, const CLFunction& f,
                          std::span<const double> x);

/// u(t, x) by radial Fourier inversion of f^(k) exp(-t (1 - a^(k))).
double semigroup_pointwise(const JumpKernel& kernel, const CLFunction& f, double t,
                           std::span<const double> x);

/// Estimate of int_T^inf E^x[f(X(t))] dt from the small-k expansion.
double truncation_tail_estimate(const JumpKernel& kernel, const CLFunction& f, double T);

/// Integral of the trigonometric interpolant of `field` over the cube
/// centered at `center` with side `width`.
double box_integral(const FieldGrid& field, std::span<const double> center, double width);

}  // namespace greenwalk
