#include "greenwalk/renorm.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "greenwalk/errors.hpp"
#include "greenwalk/numerics.hpp"
#include "greenwalk/parallel.hpp"

namespace greenwalk {

namespace {

constexpr double kPi = std::numbers::pi;

double sup_bound(const CLFunction& f) {
  if (f.samples()) return f.samples()->sup_norm();
  const double s = f.declared_sup_norm();
  require(std::isfinite(s), ErrorCode::kInvalidArgument, "function has no finite sup norm");
  return s;
}

void check_point(const JumpKernel& kernel, std::span<const double> x) {
  require(static_cast<int>(x.size()) == kernel.dim(), ErrorCode::kInvalidArgument,
          "point dimension differs from kernel dimension");
}

bool stable_half(const SubordinatorSpec& spec) {
  return spec.is_stable() && spec.stable_alpha() == 0.5;
}

// tau beyond which P(D(t) > tau) <= eps
double tau_upper(const SubordinatorSpec& spec, double t, double eps) {
  if (stable_half(spec)) return 2.0 * std::sqrt(t) * boost::math::erfc_inv(eps);
  // Chernoff: P(S(tau) < t) <= exp(lambda t - tau Phi(lambda))
  double best = std::numeric_limits<double>::infinity();
  for (int e = -4; e <= 6; ++e) {
    const double lambda = std::ldexp(1.0, e) / t;
    best = std::min(best, (lambda * t - std::log(eps)) / spec.phi(lambda));
  }
  return best;
}

// u(tau, x) and (L u)(tau, x) at one grid node from the discrete spectrum.
class GridTrace {
 public:
  GridTrace(const JumpKernel& kernel, const CLFunction& f, std::span<const double> x,
            const GridSpec& grid) {
    const KernelOnGrid op(kernel, grid);
    const std::size_t node = grid.node_index(x);
    require(node < grid.size(), ErrorCode::kInvalidArgument,
            "evaluation point must be a node of the spectral grid");
    const auto spectrum = op.spectral().forward(f.sample_on(grid).values());
    const int d = grid.dim();
    const std::size_t n = grid.points_per_axis();
    const std::size_t last = n / 2 + 1;
    std::vector<std::size_t> j(d);
    grid.unflatten(node, j);
    const double norm = std::pow(static_cast<double>(n), -d);
    coef_.resize(spectrum.size());
    rate_.resize(spectrum.size());
    for (std::size_t m = 0; m < spectrum.size(); ++m) {
      std::size_t rest = m;
      std::size_t phase = 0;
      for (int a = d - 1; a >= 0; --a) {
        const std::size_t extent = a == d - 1 ? last : n;
        const std::size_t ma = rest % extent;
        rest /= extent;
        phase = (phase + ma * j[a]) % n;
      }
      const double th = 2.0 * kPi * static_cast<double>(phase) / static_cast<double>(n);
      coef_[m] = op.spectral().hermitian_weight(m) * norm *
                 (spectrum[m] * std::polar(1.0, th)).real();
      rate_[m] = 1.0 - op.symbol()[m];
    }
  }

  double u(double tau) const { return sum(tau, false); }
  double Lu(double tau) const { return sum(tau, true); }

 private:
  double sum(double tau, bool generator) const {
    std::vector<double> terms(coef_.size());
    for (std::size_t m = 0; m < coef_.size(); ++m) {
      const double e = coef_[m] * std::exp(-tau * rate_[m]);
      terms[m] = generator ? -rate_[m] * e : e;
    }
    return pairwise_sum(terms);
  }

  std::vector<double> coef_;
  std::vector<double> rate_;
};

std::function<double(double)> semigroup_trace(const JumpKernel& kernel, const CLFunction& f,
                                              std::span<const double> x) {
  if (f.has_fourier() && kernel.isotropic()) {
    Point p(x.begin(), x.end());
    return [kernel, f, p](double tau) { return semigroup_pointwise(kernel, f, tau, p); };
  }
  auto trace = std::make_shared<GridTrace>(kernel, f, x, default_green_grid(kernel.dim()));
  return [trace](double tau) { return trace->u(tau); };
}

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

void append_gauss20(Rule& r, double a, double b) {
  using G = boost::math::quadrature::gauss<double, 20>;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.nodes.push_back(mid - half * x[i]);
    r.weights.push_back(half * w[i]);
    r.nodes.push_back(mid + half * x[i]);
    r.weights.push_back(half * w[i]);
  }
}

// [0, first] then panels growing by `ratio` up to tau_max.
Rule graded_rule(double first, double tau_max, double ratio) {
  Rule r;
  append_gauss20(r, 0.0, first);
  double a = first;
  while (a < tau_max) {
    const double b = std::min(tau_max, a * ratio);
    append_gauss20(r, a, b);
    a = b;
  }
  return r;
}

double integrate_rho(const RhoDensity& rho, double s, const Rule& rule,
                     std::span<const double> values) {
  std::vector<double> terms(rule.nodes.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    terms[i] = rule.weights[i] * rho(s, rule.nodes[i]) * values[i];
  }
  return pairwise_sum(terms);
}

}  // namespace

double subordinated_solution(const JumpKernel& kernel, const SubordinatorSpec& spec,
                             const CLFunction& f, std::span<const double> x, double t,
                             const SubordinationOptions& opts) {
  check_point(kernel, x);
  require(t >= 0.0 && std::isfinite(t), ErrorCode::kInvalidArgument, "t must be >= 0");
  require(opts.tol > 0.0, ErrorCode::kInvalidArgument, "tolerance must be positive");
  if (t == 0.0 || f.is_constant()) return f(x);
  const RhoDensity rho(spec);
  const double sup = sup_bound(f);
  const double tol = opts.tol * std::max(sup, 1e-300);
  const double tau_max = tau_upper(spec, t, 0.5 * opts.tol);
  const auto u = semigroup_trace(kernel, f, x);
  auto integrand = [&](double tau) { return u(tau) * rho(t, tau); };
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, tau_max, 15, 1e-12, &err);
  if (!std::isfinite(v) || err > std::max(0.5 * tol, 1e-12 * std::abs(v))) {
    fail(ErrorCode::kQuadratureFailure,
         "subordination integral did not converge (error " + std::to_string(err) + ")");
  }
  return v;
}

McEstimate mc_time_changed_expectation(const JumpKernel& kernel, const SubordinatorSpec& spec,
                                       const CLFunction& f, std::span<const double> x, double t,
                                       std::uint64_t n, std::uint64_t seed, double ds) {
  check_point(kernel, x);
  require(n >= 2, ErrorCode::kInvalidArgument, "Monte Carlo needs n >= 2");
  require(t >= 0.0 && std::isfinite(t), ErrorCode::kInvalidArgument, "t must be >= 0");
  require(ds >= 0.0, ErrorCode::kInvalidArgument, "ds must be >= 0");
  if (t == 0.0) return {f(x), 0.0, n, seed};
  require(kernel.can_sample(), ErrorCode::kNotSupported, "kernel has no jump sampler");
  const double step = ds > 0.0 ? ds : 1e-3 * t;
  Point start(x.begin(), x.end());
  auto est = block_monte_carlo(n, seed, [&](Rng& rng) {
    const double d = sample_inverse_subordinator(spec, t, step, rng).value;
    Point end;
    walk_intervals(kernel, start, d, rng, [&](std::span<const double> pos, double, double) {
      end.assign(pos.begin(), pos.end());
    });
    return f(end);
  });
  return est;
}

double normalization_N(const SubordinatorSpec& spec, double T) {
  require(T >= 0.0 && std::isfinite(T), ErrorCode::kInvalidArgument, "T must be >= 0");
  return spec.k_primitive(T);
}

double capped_subordinator_mean(const SubordinatorSpec& spec, double tau, double T) {
  require(tau >= 0.0 && T >= 0.0, ErrorCode::kInvalidArgument, "tau and T must be >= 0");
  if (tau == 0.0 || T == 0.0) return 0.0;
  if (stable_half(spec)) {
    // S(tau) = tau^2 / (2 Z^2)
    const double c = tau / std::sqrt(2.0 * T);
    const double pdf = std::exp(-0.5 * c * c) / std::sqrt(2.0 * kPi);
    const double upper = 0.5 * std::erfc(c / std::sqrt(2.0));
    return T * std::erf(c / std::sqrt(2.0)) + tau * std::sqrt(2.0 * T) * pdf - tau * tau * upper;
  }
  if (spec.family() == "gamma") {
    const double a = spec.params().at("a"), b = spec.params().at("b");
    const double shape = b * tau;
    return T * boost::math::gamma_q(shape, a * T) +
           shape / a * boost::math::gamma_p(shape + 1.0, a * T);
  }
  // int_0^T P(S(tau) <= s) ds has Laplace transform exp(-tau Phi) / lambda^2
  auto F = [&](std::complex<double> l) { return std::exp(-tau * spec.phi(l)) / (l * l); };
  const double lo = talbot_inverse(F, T, RhoDensity::kTalbotOrder);
  const double hi = talbot_inverse(F, T, RhoDensity::kTalbotCheckOrder);
  if (!std::isfinite(hi) || std::abs(lo - hi) > RhoDensity::kInversionTolerance * std::abs(hi) +
                                                    1e-12 * T) {
    fail(ErrorCode::kInversionInstability, "Talbot orders disagree for E[min(S, T)]");
  }
  return std::clamp(T - hi, 0.0, T);
}

void require_renormalization_hypotheses(const JumpKernel& kernel, const SubordinatorSpec& spec,
                                        double s0) {
  require_green_existence(kernel);
  const auto h = check_H(spec);
  if (!h.passed) {
    std::string failed;
    for (const auto& c : h.limits) {
      if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
    }
    if (!h.completely_monotone) failed += (failed.empty() ? "" : ", ") + std::string("CM");
    fail(ErrorCode::kAdmissibilityFailure,
         "subordinator '" + spec.family() + "' fails assumption H (" + failed + ")");
  }
  const auto ad = check_admissible(spec, s0);
  require(ad.passed, ErrorCode::kAdmissibilityFailure,
          "memory kernel of subordinator '" + spec.family() + "' is not admissible");
}

RenormCurve renormalized_potential_curve(const JumpKernel& kernel, const SubordinatorSpec& spec,
                                         const CLFunction& f, std::span<const double> x,
                                         std::span<const double> T_grid,
                                         const RenormOptions& opts) {
  check_point(kernel, x);
  require(!T_grid.empty(), ErrorCode::kInvalidArgument, "T grid is empty");
  for (std::size_t i = 0; i < T_grid.size(); ++i) {
    require(T_grid[i] > 0.0 && (i == 0 || T_grid[i] > T_grid[i - 1]),
            ErrorCode::kInvalidArgument, "T grid must be positive and increasing");
  }
  require_renormalization_hypotheses(kernel, spec, opts.s0);

  RenormCurve c;
  c.T_grid.assign(T_grid.begin(), T_grid.end());
  c.gap_threshold = opts.gap_threshold;
  c.target = potential(kernel, f, x);

  const RhoDensity rho(spec);
  const double tau_max = tau_upper(spec, T_grid.back(), 1e-14);
  const Rule tau_rule = graded_rule(1e-8, tau_max, 1.5);
  const auto u = semigroup_trace(kernel, f, x);
  std::vector<double> u_nodes(tau_rule.nodes.size());
  for (std::size_t i = 0; i < u_nodes.size(); ++i) u_nodes[i] = u(tau_rule.nodes[i]);
  const double u0 = f(x);

  for (double T : T_grid) {
    const Rule s_rule = graded_rule(std::ldexp(T, -50), T, 2.0);
    std::vector<double> terms(s_rule.nodes.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const double s = s_rule.nodes[i];
      // rho_s has all its mass below the first tau panel here
      const double v = s < 1e-20 ? u0 : integrate_rho(rho, s, tau_rule, u_nodes);
      terms[i] = s_rule.weights[i] * v;
    }
    const double integral = pairwise_sum(terms);
    const double N = normalization_N(spec, T);
    c.N_values.push_back(N);
    c.integrals.push_back(integral);
    c.values.push_back(integral / N);
    const double value = c.values.back();
    c.rel_gaps.push_back(value == c.target ? 0.0 : std::abs(value / c.target - 1.0));
  }
  c.gap_trend_decreasing = true;
  for (std::size_t i = 1; i < c.rel_gaps.size(); ++i) {
    c.gap_trend_decreasing = c.gap_trend_decreasing && c.rel_gaps[i] <= c.rel_gaps[i - 1];
  }
  c.final_below_threshold = c.rel_gaps.back() < c.gap_threshold;
  return c;
}

OccupationHistogram renormalized_green_histogram(const JumpKernel& kernel,
                                                 const SubordinatorSpec& spec,
                                                 std::span<const double> x, double T,
                                                 const BinSpec& bins, std::uint64_t n,
                                                 std::uint64_t seed, double s0) {
  check_point(kernel, x);
  require(T > 0.0 && std::isfinite(T), ErrorCode::kInvalidArgument, "horizon must be positive");
  require(kernel.can_sample(), ErrorCode::kNotSupported, "kernel has no jump sampler");
  require(bins.dim() == kernel.dim(), ErrorCode::kInvalidDimension,
          "bin dimension differs from kernel dimension");
  require(bins.index(x) < bins.size(), ErrorCode::kInvalidArgument,
          "start point lies outside the binned box");
  require_renormalization_hypotheses(kernel, spec, s0);

  const double N = normalization_N(spec, T);
  auto W = [&](double tau) { return capped_subordinator_mean(spec, tau, T); };
  // operational time after which less than 1e-9 T of real time remains
  const double slack = 1e-9 * T;
  double hi = 1.0;
  while (T - W(hi) > slack) hi *= 2.0;
  double lo = hi * 0.5;
  while (hi - lo > 0.01 * hi) {
    const double mid = 0.5 * (lo + hi);
    (T - W(mid) > slack ? lo : hi) = mid;
  }
  const double tau_end = hi;
  Point start(x.begin(), x.end());
  return block_histogram(bins, T, n, seed, [&](Rng& rng, std::vector<double>& m) {
    double w_prev = 0.0;
    walk_intervals(kernel, start, tau_end, rng,
                   [&](std::span<const double> pos, double, double t1) {
                     const double w = t1 >= tau_end ? T : W(t1);
                     m[bins.index(pos)] += (w - w_prev) / N;
                     w_prev = w;
                   });
  });
}

FkeResidual fke_residual(const JumpKernel& kernel, const SubordinatorSpec& spec,
                         const CLFunction& f, std::span<const double> x,
                         std::span<const double> t_grid, double window) {
  check_point(kernel, x);
  const std::size_t n = t_grid.size();
  require(n >= 3, ErrorCode::kInvalidArgument, "time grid needs at least 3 nodes");
  require(t_grid[0] == 0.0, ErrorCode::kInvalidArgument, "time grid must start at 0");
  const double t_max = t_grid.back();
  const double dt = t_max / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    require(std::abs(t_grid[j] - static_cast<double>(j) * dt) <= 1e-9 * t_max,
            ErrorCode::kGridMismatch, "time grid must be uniform");
  }
  require(window >= 0.0 && window < 1.0, ErrorCode::kInvalidArgument, "window must be in [0, 1)");

  const GridTrace trace(kernel, f, x, default_green_grid(kernel.dim()));
  const RhoDensity rho(spec);
  const Rule rule = graded_rule(1e-10, tau_upper(spec, t_max, 1e-16), 1.5);
  std::vector<double> u(rule.nodes.size()), lu(rule.nodes.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = trace.u(rule.nodes[i]);
    lu[i] = trace.Lu(rule.nodes[i]);
  }
  FkeResidual r;
  r.t_grid.assign(t_grid.begin(), t_grid.end());
  r.v.resize(n);
  r.rhs.resize(n);
  r.v[0] = trace.u(0.0);
  r.rhs[0] = trace.Lu(0.0);
  for (std::size_t j = 1; j < n; ++j) {
    r.v[j] = integrate_rho(rho, t_grid[j], rule, u);
    r.rhs[j] = integrate_rho(rho, t_grid[j], rule, lu);
  }
  r.lhs = gfd_apply(sample_memory_kernel(spec, dt, n), r.v);
  r.window_start = window * t_max;
  for (std::size_t j = 1; j < n; ++j) {
    if (t_grid[j] >= r.window_start) {
      r.max_residual = std::max(r.max_residual, std::abs(r.lhs[j] - r.rhs[j]));
    }
  }
  return r;
}

}  // namespace greenwalk
