#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "greenwalk/kernels.hpp"

namespace greenwalk {

/// Driftless subordinator described by its Levy density and the derived
/// tail k(t), its Laplace transform K(lambda) and exponent Phi = lambda K.
class SubordinatorSpec {
 public:
  using Scalar = std::function<double(double)>;
  using ComplexMap = std::function<std::complex<double>(std::complex<double>)>;
  using IncrementSampler = std::function<double(double, Rng&)>;

  struct Definition {
    std::string family = "custom";
    std::map<std::string, double> params;
    Scalar levy_density;
    Scalar k;
    Scalar K;
    Scalar phi;
    // int_0^t k and int_0^t int_0^s k; quadrature of k when absent.
    Scalar k_primitive;
    Scalar k_primitive2;
    // Analytic continuation of Phi, needed for Laplace inversion.
    ComplexMap phi_complex;
    IncrementSampler increment;
  };

  static SubordinatorSpec custom(Definition def);

  const std::string& family() const noexcept { return def_->family; }
  const std::map<std::string, double>& params() const noexcept { return def_->params; }

  double levy_density(double tau) const;
  double k(double t) const { return def_->k(t); }
  double K(double lambda) const { return def_->K(lambda); }
  double phi(double lambda) const { return def_->phi(lambda); }
  /// N(t) = int_0^t k(s) ds.
  double k_primitive(double t) const;
  double k_primitive2(double t) const;

  bool has_complex_phi() const noexcept { return static_cast<bool>(def_->phi_complex); }
  std::complex<double> phi(std::complex<double> lambda) const;

  bool can_sample() const noexcept { return static_cast<bool>(def_->increment); }
  /// S(s + dt) - S(s).
  double sample_increment(double dt, Rng& rng) const;

  /// Stable family with Phi = lambda^alpha.
  bool is_stable() const noexcept { return def_->family == "stable"; }
  double stable_alpha() const;

 private:
  explicit SubordinatorSpec(std::shared_ptr<const Definition> def) : def_(std::move(def)) {}
  std::shared_ptr<const Definition> def_;
};

SubordinatorSpec make_stable_subordinator(double alpha);
SubordinatorSpec make_gamma_subordinator(double a, double b);

struct LimitCheck {
  std::string name;
  bool passed = false;
  bool monotone = false;
  double at_zero = 0.0;      // value at the smallest probe
  double at_infinity = 0.0;  // value at the largest probe
};

struct HReport {
  std::vector<LimitCheck> limits;
  bool completely_monotone = false;
  int cm_max_order = 4;
  bool passed = false;
};

/// Numeric probe of the complete Bernstein assumption and its four limits.
HReport check_H(const SubordinatorSpec& spec);

struct AdmissibleReport {
  double s0 = 0.0;
  std::vector<double> a1_lambdas;
  std::vector<double> a1_values;
  double a1_estimate = 0.0;
  bool a1_passed = false;
  double a2_horizon = 0.0;
  std::vector<double> a2_quotients;  // t / r
  std::vector<double> a2_ratios;
  bool a2_passed = false;
  bool passed = false;
};

AdmissibleReport check_admissible(const SubordinatorSpec& spec, double s0);

struct InverseSubSample {
  double t = 0.0;
  double value = 0.0;
  double path_resolution = 0.0;
};

inline constexpr std::uint64_t kDefaultStepCap = 100'000'000;

/// First passage of S over t with S simulated on the grid {0, ds, 2ds, ...}.
/// The returned grid time overshoots the true D(t) by at most ds.
InverseSubSample sample_inverse_subordinator(const SubordinatorSpec& spec, double t, double ds,
                                             Rng& rng,
                                             std::uint64_t max_steps = kDefaultStepCap);

/// D at increasing levels, all read off one S path.
std::vector<double> sample_inverse_subordinator_path(const SubordinatorSpec& spec,
                                                     std::span<const double> levels, double ds,
                                                     Rng& rng,
                                                     std::uint64_t max_steps = kDefaultStepCap);

enum class RhoMethod { kClosedForm, kLaplaceInversion };

/// Density of D(t). Closed form for the stable 1/2 family, fixed Talbot
/// inversion in t at two orders otherwise.
class RhoDensity {
 public:
  explicit RhoDensity(SubordinatorSpec spec);

  RhoMethod method() const noexcept { return method_; }
  const SubordinatorSpec& spec() const noexcept { return spec_; }
  double operator()(double t, double tau) const;

  static constexpr int kTalbotOrder = 20;
  static constexpr int kTalbotCheckOrder = 28;
  static constexpr double kInversionTolerance = 0.01;

 private:
  SubordinatorSpec spec_;
  RhoMethod method_;
};

double rho_density(const SubordinatorSpec& spec, double t, double tau);

/// Fixed Talbot inversion of F at time t with M nodes.
double talbot_inverse(const std::function<std::complex<double>(std::complex<double>)>& F, double t,
                      int M);

struct TimeAverages {
  double M_rho = 0.0;
  double M_k = 0.0;
  double ratio = 0.0;
};

/// (1/t) int_0^t rho_s(tau) ds against (1/t) int_0^t k(s) ds.
TimeAverages time_averaged_ratio(const SubordinatorSpec& spec, double tau, double t);

/// k together with its first two primitives on the grid t_j = j dt.
struct MemoryKernelSamples {
  double dt = 0.0;
  std::vector<double> k;
  std::vector<double> K1;
  std::vector<double> K2;

  std::size_t size() const noexcept { return K1.size(); }
};

MemoryKernelSamples sample_memory_kernel(const SubordinatorSpec& spec, double dt, std::size_t n);

/// Generalized fractional derivative d/dt (k * f) - k f(0) by product
/// integration against piecewise-linear f, then finite differences in t.
/// Entry 0 is set to 0.
std::vector<double> gfd_apply(const MemoryKernelSamples& k, std::span<const double> f);

}  // namespace greenwalk
