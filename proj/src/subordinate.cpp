#include "greenwalk/subordinate.hpp"

#include <algorithm>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "greenwalk/errors.hpp"
#include "greenwalk/numerics.hpp"

namespace greenwalk {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kGradedPanels = 60;

// int_0^t f over panels shrinking geometrically toward 0; f may have an
// integrable singularity at the origin.
template <class F>
double graded_integral(F&& f, double t) {
  if (t <= 0.0) return 0.0;
  std::vector<double> parts;
  parts.reserve(kGradedPanels);
  double hi = t;
  for (int i = 0; i < kGradedPanels; ++i) {
    const double lo = 0.5 * hi;
    parts.push_back(gauss_legendre<20>(f, lo, hi));
    hi = lo;
  }
  return pairwise_sum(parts);
}

using Definition = SubordinatorSpec::Definition;

// One-sided stable variable with E exp(-lambda X) = exp(-lambda^alpha).
double sample_positive_stable(double alpha, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, kPi);
  std::exponential_distribution<double> expo(1.0);
  double u;
  do u = unif(rng);
  while (u == 0.0);
  const double e = expo(rng);
  const double su = std::sin(u);
  return std::sin(alpha * u) / std::pow(su, 1.0 / alpha) *
         std::pow(std::sin((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
}

}  // namespace

SubordinatorSpec SubordinatorSpec::custom(Definition def) {
  require(static_cast<bool>(def.k) && static_cast<bool>(def.K) && static_cast<bool>(def.phi),
          ErrorCode::kInvalidArgument, "subordinator needs k, K and Phi evaluators");
  return SubordinatorSpec(std::make_shared<const Definition>(std::move(def)));
}

double SubordinatorSpec::levy_density(double tau) const {
  require(static_cast<bool>(def_->levy_density), ErrorCode::kNotSupported,
          "subordinator has no Levy density");
  return def_->levy_density(tau);
}

double SubordinatorSpec::k_primitive(double t) const {
  require(t >= 0.0, ErrorCode::kInvalidArgument, "N(t) needs t >= 0");
  if (t == 0.0) return 0.0;
  if (def_->k_primitive) return def_->k_primitive(t);
  return graded_integral([this](double s) { return def_->k(s); }, t);
}

double SubordinatorSpec::k_primitive2(double t) const {
  require(t >= 0.0, ErrorCode::kInvalidArgument, "second primitive needs t >= 0");
  if (t == 0.0) return 0.0;
  if (def_->k_primitive2) return def_->k_primitive2(t);
  return graded_integral([this](double s) { return k_primitive(s); }, t);
}

std::complex<double> SubordinatorSpec::phi(std::complex<double> lambda) const {
  require(has_complex_phi(), ErrorCode::kNotSupported,
          "subordinator has no complex Laplace exponent");
  return def_->phi_complex(lambda);
}

double SubordinatorSpec::sample_increment(double dt, Rng& rng) const {
  require(can_sample(), ErrorCode::kNotSupported, "subordinator has no increment sampler");
  const double v = def_->increment(dt, rng);
  require(v >= 0.0, ErrorCode::kNegativeSample, "subordinator increment is negative");
  return v;
}

double SubordinatorSpec::stable_alpha() const {
  require(is_stable(), ErrorCode::kInvalidArgument, "not a stable subordinator");
  return def_->params.at("alpha");
}

SubordinatorSpec make_stable_subordinator(double alpha) {
  require(alpha > 0.0 && alpha < 1.0, ErrorCode::kInvalidArgument,
          "stable index must lie in (0, 1)");
  const double g1 = boost::math::tgamma(1.0 - alpha);
  const double g2 = boost::math::tgamma(2.0 - alpha);
  const double g3 = boost::math::tgamma(3.0 - alpha);
  Definition def;
  def.family = "stable";
  def.params = {{"alpha", alpha}};
  def.levy_density = [=](double tau) {
    return tau > 0.0 ? alpha / g1 * std::pow(tau, -1.0 - alpha) : 0.0;
  };
  def.k = [=](double t) { return t > 0.0 ? std::pow(t, -alpha) / g1 : kInf; };
  def.K = [=](double l) { return std::pow(l, alpha - 1.0); };
  def.phi = [=](double l) { return std::pow(l, alpha); };
  def.k_primitive = [=](double t) { return std::pow(t, 1.0 - alpha) / g2; };
  def.k_primitive2 = [=](double t) { return std::pow(t, 2.0 - alpha) / g3; };
  def.phi_complex = [=](std::complex<double> z) { return std::pow(z, alpha); };
  if (alpha == 0.5) {
    // Levy distribution: dt^2 / (2 Z^2)
    def.increment = [](double dt, Rng& rng) {
      std::normal_distribution<double> normal;
      const double z = normal(rng);
      return 0.5 * dt * dt / (z * z);
    };
  } else {
    def.increment = [=](double dt, Rng& rng) {
      return std::pow(dt, 1.0 / alpha) * sample_positive_stable(alpha, rng);
    };
  }
  return SubordinatorSpec::custom(std::move(def));
}

SubordinatorSpec make_gamma_subordinator(double a, double b) {
  require(a > 0.0 && b > 0.0, ErrorCode::kInvalidArgument, "Gamma parameters must be positive");
  using boost::math::expint;
  Definition def;
  def.family = "gamma";
  def.params = {{"a", a}, {"b", b}};
  def.levy_density = [=](double tau) { return tau > 0.0 ? b * std::exp(-a * tau) / tau : 0.0; };
  def.k = [=](double t) { return t > 0.0 ? b * expint(1, a * t) : kInf; };
  def.phi = [=](double l) { return b * std::log1p(l / a); };
  def.K = [=](double l) { return l == 0.0 ? b / a : b * std::log1p(l / a) / l; };
  def.k_primitive = [=](double t) {
    return b * (t * expint(1, a * t) - std::expm1(-a * t) / a);
  };
  def.k_primitive2 = [=](double t) {
    const double e = std::exp(-a * t);
    return b * (0.5 * t * t * expint(1, a * t) + (1.0 - e * (1.0 + a * t)) / (2.0 * a * a) +
                t / a + std::expm1(-a * t) / (a * a));
  };
  def.phi_complex = [=](std::complex<double> z) { return b * std::log(1.0 + z / a); };
  def.increment = [=](double dt, Rng& rng) {
    std::gamma_distribution<double> gamma(b * dt, 1.0 / a);
    return gamma(rng);
  };
  return SubordinatorSpec::custom(std::move(def));
}

namespace {

constexpr int kProbeDecades = 30;

// v is ordered toward the limit point.
bool tends_to_infinity(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] >= v[i - 1] * (1.0 - 1e-12))) return false;
  }
  const std::size_t n = v.size();
  const double last = v[n - 1] - v[n - 2];
  const double earlier = v[n - 11] - v[n - 12];
  return std::isfinite(v[n - 1]) && last > 0.0 && last >= 0.5 * earlier;
}

bool tends_to_zero(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(std::abs(v[i]) <= std::abs(v[i - 1]) * (1.0 + 1e-12))) return false;
  }
  return std::abs(v.back()) <= 1e-6 * std::abs(v.front());
}

bool is_monotone(const std::vector<double>& v) {
  bool up = true, down = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    up = up && v[i] >= v[i - 1];
    down = down && v[i] <= v[i - 1];
  }
  return up || down;
}

LimitCheck limit_check(std::string name, const std::function<double(double)>& f, bool at_zero,
                       bool to_infinity) {
  std::vector<double> v;
  for (int j = 0; j <= kProbeDecades; ++j) {
    v.push_back(f(std::pow(10.0, at_zero ? -j : j)));
  }
  LimitCheck c;
  c.name = std::move(name);
  c.monotone = is_monotone(v);
  c.passed = to_infinity ? tends_to_infinity(v) : tends_to_zero(v);
  c.at_zero = f(std::pow(10.0, -kProbeDecades));
  c.at_infinity = f(std::pow(10.0, kProbeDecades));
  return c;
}

bool alternating_differences(const std::function<double(double)>& f, int max_order) {
  for (int e = -3; e <= 2; ++e) {
    const double t0 = std::pow(10.0, e);
    const double h = t0 / 8.0;
    for (int n = 1; n <= max_order; ++n) {
      double diff = 0.0, mag = 0.0, binom = 1.0;
      for (int j = 0; j <= n; ++j) {
        const double term = ((n - j) % 2 == 0 ? 1.0 : -1.0) * binom * f(t0 + j * h);
        diff += term;
        mag += std::abs(term);
        binom = binom * (n - j) / (j + 1);
      }
      const double signed_diff = (n % 2 == 0 ? 1.0 : -1.0) * diff;
      if (!std::isfinite(signed_diff) || signed_diff < -1e-9 * mag) return false;
    }
  }
  return true;
}

}  // namespace

HReport check_H(const SubordinatorSpec& spec) {
  HReport r;
  auto K = [&](double l) { return spec.K(l); };
  auto phi = [&](double l) { return spec.phi(l); };
  r.limits.push_back(limit_check("K -> inf as lambda -> 0", K, true, true));
  r.limits.push_back(limit_check("K -> 0 as lambda -> inf", K, false, false));
  r.limits.push_back(limit_check("Phi -> 0 as lambda -> 0", phi, true, false));
  r.limits.push_back(limit_check("Phi -> inf as lambda -> inf", phi, false, true));
  std::function<double(double)> density;
  try {
    spec.levy_density(1.0);
    density = [&](double t) { return spec.levy_density(t); };
  } catch (const Error&) {
    density = [&](double t) { return spec.k(t); };
  }
  r.completely_monotone = alternating_differences(density, r.cm_max_order);
  r.passed = r.completely_monotone;
  for (const auto& c : r.limits) r.passed = r.passed && c.passed;
  return r;
}

AdmissibleReport check_admissible(const SubordinatorSpec& spec, double s0) {
  require(s0 > 0.0, ErrorCode::kInvalidArgument, "s0 must be positive");
  AdmissibleReport r;
  r.s0 = s0;
  for (int j = 1; j <= 10; ++j) {
    const double l = std::pow(10.0, -j);
    r.a1_lambdas.push_back(l);
    r.a1_values.push_back(spec.k_primitive(s0 / l) / spec.K(l));
  }
  const auto tail = std::span<const double>(r.a1_values).last(4);
  const double lo = *std::min_element(tail.begin(), tail.end());
  const double hi = *std::max_element(tail.begin(), tail.end());
  r.a1_estimate = lo;
  r.a1_passed = std::isfinite(hi) && lo > 0.0 && hi <= 1.1 * lo;

  r.a2_horizon = 1e8;
  r.a2_quotients = {1.1, 0.9, 1.01, 0.99, 1.001, 0.999, 1.0};
  const double nt = spec.k_primitive(r.a2_horizon);
  bool ok = std::isfinite(nt) && nt > 0.0;
  double prev_dev = kInf;
  for (std::size_t i = 0; i < r.a2_quotients.size(); ++i) {
    const double q = r.a2_quotients[i];
    const double ratio = nt / spec.k_primitive(r.a2_horizon / q);
    r.a2_ratios.push_back(ratio);
    const double dev = std::abs(ratio - 1.0);
    ok = ok && std::isfinite(ratio) && dev <= 1.0001 * std::abs(q - 1.0) + 1e-12;
    if (i % 2 == 0) {
      ok = ok && dev <= prev_dev;
      prev_dev = dev;
    }
  }
  r.a2_passed = ok;
  r.passed = r.a1_passed && r.a2_passed;
  return r;
}

InverseSubSample sample_inverse_subordinator(const SubordinatorSpec& spec, double t, double ds,
                                             Rng& rng, std::uint64_t max_steps) {
  require(t > 0.0 && ds > 0.0, ErrorCode::kInvalidArgument, "D(t) needs t > 0 and ds > 0");
  const double levels[1] = {t};
  auto d = sample_inverse_subordinator_path(spec, levels, ds, rng, max_steps);
  return {t, d[0], ds};
}

std::vector<double> sample_inverse_subordinator_path(const SubordinatorSpec& spec,
                                                     std::span<const double> levels, double ds,
                                                     Rng& rng, std::uint64_t max_steps) {
  require(ds > 0.0, ErrorCode::kInvalidArgument, "ds must be positive");
  require(spec.can_sample(), ErrorCode::kNotSupported, "subordinator has no increment sampler");
  std::vector<double> out;
  out.reserve(levels.size());
  double s = 0.0;
  std::uint64_t n = 0;
  double prev = 0.0;
  for (double level : levels) {
    require(level >= prev, ErrorCode::kInvalidArgument, "levels must be nondecreasing and >= 0");
    prev = level;
    while (s < level) {
      if (++n > max_steps) {
        fail(ErrorCode::kStepCapExceeded,
             "subordinator did not pass level " + std::to_string(level) + " within " +
                 std::to_string(max_steps) + " steps");
      }
      s += spec.sample_increment(ds, rng);
    }
    out.push_back(static_cast<double>(n) * ds);
  }
  return out;
}

double talbot_inverse(const std::function<std::complex<double>(std::complex<double>)>& F, double t,
                      int M) {
  require(t > 0.0 && M >= 2, ErrorCode::kInvalidArgument, "Talbot inversion needs t > 0, M >= 2");
  const double r = 2.0 * M / (5.0 * t);
  double sum = 0.5 * std::exp(r * t) * F({r, 0.0}).real();
  for (int k = 1; k < M; ++k) {
    const double th = k * kPi / M;
    const double cot = std::cos(th) / std::sin(th);
    const std::complex<double> s(r * th * cot, r * th);
    const double sigma = th + (th * cot - 1.0) * cot;
    sum += (std::exp(t * s) * F(s) * std::complex<double>(1.0, sigma)).real();
  }
  return r / M * sum;
}

RhoDensity::RhoDensity(SubordinatorSpec spec) : spec_(std::move(spec)) {
  if (spec_.is_stable() && spec_.stable_alpha() == 0.5) {
    method_ = RhoMethod::kClosedForm;
  } else {
    require(spec_.has_complex_phi(), ErrorCode::kNotSupported,
            "density of D(t) needs a closed form or a complex Laplace exponent");
    method_ = RhoMethod::kLaplaceInversion;
  }
}

double RhoDensity::operator()(double t, double tau) const {
  require(t > 0.0 && tau >= 0.0, ErrorCode::kInvalidArgument, "rho needs t > 0 and tau >= 0");
  if (method_ == RhoMethod::kClosedForm) {
    return std::exp(-tau * tau / (4.0 * t)) / std::sqrt(kPi * t);
  }
  auto F = [&](std::complex<double> s) {
    const auto p = spec_.phi(s);
    return p / s * std::exp(-tau * p);
  };
  const double a = talbot_inverse(F, t, kTalbotOrder);
  const double b = talbot_inverse(F, t, kTalbotCheckOrder);
  const double scale = spec_.phi(1.0 / t);
  if (!std::isfinite(b) || std::abs(a - b) > kInversionTolerance * std::abs(b) + 1e-9 * scale) {
    fail(ErrorCode::kInversionInstability,
         "Talbot orders disagree for rho at t=" + std::to_string(t) +
             ", tau=" + std::to_string(tau));
  }
  return std::max(b, 0.0);
}

double rho_density(const SubordinatorSpec& spec, double t, double tau) {
  return RhoDensity(spec)(t, tau);
}

TimeAverages time_averaged_ratio(const SubordinatorSpec& spec, double tau, double t) {
  require(t > 0.0 && tau >= 0.0, ErrorCode::kInvalidArgument,
          "time averages need t > 0 and tau >= 0");
  RhoDensity rho(spec);
  TimeAverages out;
  out.M_rho = graded_integral([&](double s) { return rho(s, tau); }, t) / t;
  out.M_k = spec.k_primitive(t) / t;
  out.ratio = out.M_rho / out.M_k;
  return out;
}

MemoryKernelSamples sample_memory_kernel(const SubordinatorSpec& spec, double dt, std::size_t n) {
  require(dt > 0.0 && n >= 3, ErrorCode::kInvalidArgument,
          "memory kernel needs dt > 0 and at least 3 nodes");
  MemoryKernelSamples m;
  m.dt = dt;
  m.k.resize(n);
  m.K1.resize(n);
  m.K2.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * dt;
    m.k[j] = spec.k(t);
    m.K1[j] = spec.k_primitive(t);
    m.K2[j] = spec.k_primitive2(t);
  }
  return m;
}

std::vector<double> gfd_apply(const MemoryKernelSamples& k, std::span<const double> f) {
  const std::size_t n = k.size();
  require(f.size() == n && k.K2.size() == n, ErrorCode::kGridMismatch,
          "function and memory kernel must share the time grid");
  require(n >= 3, ErrorCode::kInvalidArgument, "time grid needs at least 3 nodes");
  const double dt = k.dt;
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) g[j] = f[j] - f[0];

  // I(t_m) = int_0^t_m k(t_m - s) g(s) ds, exact for piecewise-linear g
  std::vector<double> I(n, 0.0);
  for (std::size_t m = 1; m < n; ++m) {
    NeumaierSum acc;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t b = m - j, a = b - 1;
      const double slope = (g[j + 1] - g[j]) / dt;
      acc.add(g[j] * (k.K1[b] - k.K1[a]));
      acc.add(slope * (k.K2[b] - k.K2[a] - dt * k.K1[a]));
    }
    I[m] = acc.value();
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t m = 1; m + 1 < n; ++m) out[m] = (I[m + 1] - I[m - 1]) / (2.0 * dt);
  out[n - 1] = (3.0 * I[n - 1] - 4.0 * I[n - 2] + I[n - 3]) / (2.0 * dt);
  return out;
}

}  // namespace greenwalk
