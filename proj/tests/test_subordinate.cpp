#include "doctest.h"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "greenwalk/errors.hpp"
#include "greenwalk/numerics.hpp"
#include "greenwalk/subordinate.hpp"

using namespace greenwalk;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{0};
}

// int_lo^hi f over panels that grow geometrically away from lo (lo may be 0)
template <class F>
double oracle_integral(F&& f, double lo, double hi) {
  double acc = 0.0;
  if (lo == 0.0) {
    double b = std::min(hi, 1.0);
    for (int i = 0; i < 80; ++i) {
      acc += gauss_legendre<30>(f, 0.5 * b, b);
      b *= 0.5;
    }
    lo = std::min(hi, 1.0);
  }
  double a = lo;
  while (a < hi) {
    const double b = std::min(hi, std::max(2.0 * a, a + 0.25));
    acc += gauss_legendre<30>(f, a, b);
    a = b;
  }
  return acc;
}

double laplace_of_k(const SubordinatorSpec& s, double lambda) {
  return oracle_integral([&](double t) { return std::exp(-lambda * t) * s.k(t); }, 0.0,
                         80.0 / lambda);
}

SubordinatorSpec unit_k_spec() {
  SubordinatorSpec::Definition def;
  def.family = "flat";
  def.levy_density = [](double) { return 0.0; };
  def.k = [](double) { return 1.0; };
  def.K = [](double l) { return 1.0 / l; };
  def.phi = [](double) { return 1.0; };
  def.k_primitive = [](double t) { return t; };
  def.k_primitive2 = [](double t) { return 0.5 * t * t; };
  return SubordinatorSpec::custom(def);
}

}  // namespace

TEST_CASE("stable and Gamma subordinators") {
  auto st = make_stable_subordinator(0.5);
  CHECK(st.k(1.0) == doctest::Approx(1.0 / kSqrtPi).epsilon(1e-14));
  CHECK(st.phi(4.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(st.phi(2.0) == doctest::Approx(2.0 * st.K(2.0)).epsilon(1e-15));
  CHECK(code_of([] { make_stable_subordinator(1.0); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { make_stable_subordinator(0.0); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { make_gamma_subordinator(0.0, 1.0); }) == ErrorCode::kInvalidArgument);

  auto gm = make_gamma_subordinator(1.0, 1.0);
  CHECK(gm.phi(0.0) == 0.0);
  const double tail = oracle_integral([&](double s) { return gm.levy_density(s); }, 1.0, 60.0);
  CHECK(gm.k(1.0) == doctest::Approx(tail).epsilon(1e-8));

  for (const auto& s : {st, make_stable_subordinator(0.3), gm, make_gamma_subordinator(2.0, 0.5)}) {
    for (double l = 1e-3; l <= 1e3; l *= 10.0) {
      CHECK(std::abs(s.phi(l) - l * s.K(l)) <= 1e-8 * s.phi(l));
      CHECK(s.phi(2 * l) > s.phi(l));
      // concavity
      CHECK(s.phi(2 * l) - s.phi(l) <= s.phi(l) - s.phi(0.0) + 1e-15);
    }
    for (double t = 1e-3; t < 1e3; t *= 3.0) {
      CHECK(s.k(3.0 * t) <= s.k(t));
      if (t < 10.0) CHECK(s.k(3.0 * t) < s.k(t));
    }
    for (double l : {0.5, 1.0, 2.0}) {
      CHECK(laplace_of_k(s, l) == doctest::Approx(s.K(l)).epsilon(1e-6));
    }
    for (double t : {0.01, 1.0, 30.0}) {
      const double k1 = oracle_integral([&](double u) { return s.k(u); }, 0.0, t);
      CHECK(s.k_primitive(t) == doctest::Approx(k1).epsilon(1e-9));
      const double k2 = oracle_integral([&](double u) { return s.k_primitive(u); }, 0.0, t);
      CHECK(s.k_primitive2(t) == doctest::Approx(k2).epsilon(1e-9));
    }
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) CHECK(s.sample_increment(1e-2, rng) >= 0.0);
  }
}

TEST_CASE("increment laws") {
  // E exp(-lambda S(dt)) = exp(-dt Phi(lambda))
  for (const auto& s : {make_stable_subordinator(0.5), make_stable_subordinator(0.7),
                        make_gamma_subordinator(1.5, 2.0)}) {
    Rng rng(17);
    const double dt = 0.3, lambda = 1.3;
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double v = std::exp(-lambda * s.sample_increment(dt, rng));
      sum += v;
      sq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - std::exp(-dt * s.phi(lambda))) < 4.0 * se);
  }
}

TEST_CASE("assumption H and admissibility") {
  auto hs = check_H(make_stable_subordinator(0.5));
  CHECK(hs.passed);
  CHECK(hs.completely_monotone);
  for (const auto& c : hs.limits) CHECK(c.passed);

  auto hg = check_H(make_gamma_subordinator(1.0, 1.0));
  CHECK(hg.completely_monotone);
  // K(0+) = b / a is finite for the Gamma family
  CHECK_FALSE(hg.limits[0].passed);
  CHECK(hg.limits[0].at_zero == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hg.limits[1].passed);
  CHECK(hg.limits[2].passed);
  CHECK(hg.limits[3].passed);

  auto hf = check_H(unit_k_spec());
  CHECK_FALSE(hf.passed);
  CHECK(hf.limits[0].passed);
  CHECK(hf.limits[1].passed);
  CHECK_FALSE(hf.limits[2].passed);
  CHECK_FALSE(hf.limits[3].passed);

  auto ad = check_admissible(make_stable_subordinator(0.5), 1.0);
  CHECK(ad.passed);
  CHECK(ad.a1_estimate == doctest::Approx(2.0 / kSqrtPi).epsilon(1e-12));
  for (std::size_t i = 0; i < ad.a2_quotients.size(); ++i) {
    CHECK(ad.a2_ratios[i] == doctest::Approx(std::sqrt(ad.a2_quotients[i])).epsilon(1e-12));
  }
  CHECK(ad.a2_ratios.back() == 1.0);
  CHECK(check_admissible(make_gamma_subordinator(1.0, 1.0), 1.0).passed);
  CHECK(code_of([] { check_admissible(make_stable_subordinator(0.5), 0.0); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("inverse subordinator sampling") {
  auto st = make_stable_subordinator(0.5);
  Rng rng(11);
  const double levels[4] = {0.25, 0.5, 1.0, 2.0};
  for (int i = 0; i < 200; ++i) {
    auto d = sample_inverse_subordinator_path(st, levels, 1e-3, rng);
    for (std::size_t j = 1; j < d.size(); ++j) CHECK(d[j] >= d[j - 1]);
    CHECK(d[0] > 0.0);
  }

  const double ds = 1e-3;
  const int n = 20000;
  std::vector<double> draws;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    auto s = sample_inverse_subordinator(st, 1.0, ds, rng);
    CHECK(s.path_resolution == ds);
    draws.push_back(s.value);
    sum += s.value;
    sq += s.value * s.value;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - 2.0 / kSqrtPi) < 3.0 * se + ds);
  // P(D(1) <= tau) = erf(tau / 2)
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = std::erf(0.5 * draws[i]);
    ks = std::max({ks, std::abs(c - double(i) / n), std::abs(c - double(i + 1) / n)});
  }
  CHECK(ks < 0.02);

  auto gm = make_gamma_subordinator(1.0, 1.0);
  for (int i = 0; i < 500; ++i) CHECK(std::isfinite(sample_inverse_subordinator(gm, 1.0, 1e-2, rng).value));
  CHECK(code_of([&] { sample_inverse_subordinator(st, 1.0, 1e-3, rng, 5); }) ==
        ErrorCode::kStepCapExceeded);
  CHECK(code_of([&] { sample_inverse_subordinator(st, 0.0, 1e-3, rng); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("density of the inverse subordinator") {
  auto st = make_stable_subordinator(0.5);
  RhoDensity rho(st);
  CHECK(rho.method() == RhoMethod::kClosedForm);
  CHECK(rho(1.0, 0.0) == doctest::Approx(1.0 / kSqrtPi).epsilon(1e-14));
  const double mass = oracle_integral([&](double tau) { return rho(1.0, tau); }, 0.0, 40.0);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));

  // t-Laplace transform: K(lambda) exp(-tau Phi(lambda))
  for (double tau : {0.5, 1.0, 2.0}) {
    for (double lambda : {0.5, 1.0, 2.0}) {
      const double lt = oracle_integral(
          [&](double t) { return std::exp(-lambda * t) * rho(t, tau); }, 0.0, 100.0 / lambda);
      CHECK(lt == doctest::Approx(st.K(lambda) * std::exp(-tau * st.phi(lambda))).epsilon(1e-6));
    }
  }
  // double transform at p = lambda = 1
  const double dbl = oracle_integral(
      [&](double tau) {
        return std::exp(-tau) * oracle_integral(
                                    [&](double t) { return std::exp(-t) * rho(t, tau); }, 0.0,
                                    100.0);
      },
      0.0, 60.0);
  CHECK(dbl == doctest::Approx(0.5).epsilon(1e-6));

  // Talbot against the closed form
  for (double t : {0.1, 1.0, 10.0}) {
    for (double tau : {0.0, 0.3, 2.0}) {
      auto F = [&](std::complex<double> s) {
        return std::pow(s, -0.5) * std::exp(-tau * std::sqrt(s));
      };
      CHECK(talbot_inverse(F, t, 20) == doctest::Approx(rho(t, tau)).epsilon(1e-6));
    }
  }

  // Gamma: P(D(t) > tau) = P(S(tau) < t) = P(b tau, a t)
  const double a = 1.0, b = 1.0;
  auto gm = make_gamma_subordinator(a, b);
  RhoDensity rg(gm);
  CHECK(rg.method() == RhoMethod::kLaplaceInversion);
  for (double t : {0.5, 1.0, 3.0}) {
    for (double tau : {0.2, 1.0, 2.5}) {
      const double h = 1e-5;
      const double fd = -(boost::math::gamma_p(b * (tau + h), a * t) -
                          boost::math::gamma_p(b * (tau - h), a * t)) /
                        (2.0 * h);
      CHECK(rg(t, tau) == doctest::Approx(fd).epsilon(1e-2));
    }
  }
  for (double lambda : {0.5, 1.0, 2.0}) {
    const double tau = 1.0;
    const double lt = oracle_integral([&](double t) { return std::exp(-lambda * t) * rg(t, tau); },
                                      0.0, 60.0 / lambda);
    CHECK(lt == doctest::Approx(gm.K(lambda) * std::exp(-tau * gm.phi(lambda))).epsilon(3e-2));
  }

  auto s3 = make_stable_subordinator(0.3);
  const double m3 = oracle_integral([&](double tau) { return rho_density(s3, 1.0, tau); }, 0.0, 30.0);
  CHECK(m3 == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(code_of([&] { rho(0.0, 1.0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("time-averaged ratio") {
  auto st = make_stable_subordinator(0.5);
  CHECK(time_averaged_ratio(st, 1.0, 4.0).M_k == doctest::Approx(1.0 / kSqrtPi).epsilon(1e-14));
  double prev_gap = 1.0;
  for (double t : {1e2, 1e3, 1e4}) {
    auto r = time_averaged_ratio(st, 1.0, t);
    // int_0^t (pi s)^{-1/2} e^{-1/4s} ds = 2 sqrt(t/pi) - 1 + O(t^{-1/2})
    CHECK(r.M_rho * t == doctest::Approx(2.0 * std::sqrt(t) / kSqrtPi - 1.0).epsilon(0.01));
    const double gap = std::abs(r.ratio - 1.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
    if (t == 1e3) CHECK(gap < 0.1);
  }
  // boundedness in tau
  const double bound = time_averaged_ratio(st, 0.0, 50.0).M_rho;
  for (double tau : {0.5, 1.0, 2.0, 5.0}) {
    CHECK(time_averaged_ratio(st, tau, 50.0).M_rho <= bound);
  }
}

TEST_CASE("generalized fractional derivative") {
  auto st = make_stable_subordinator(0.5);
  auto caputo_error = [&](std::size_t n) {
    const double dt = 1.0 / double(n - 1);
    auto mk = sample_memory_kernel(st, dt, n);
    std::vector<double> f(n);
    for (std::size_t j = 0; j < n; ++j) f[j] = double(j) * dt;
    auto d = gfd_apply(mk, f);
    return std::abs(d.back() - 2.0 / kSqrtPi);
  };
  const double e1 = caputo_error(101), e2 = caputo_error(201), e3 = caputo_error(401);
  CHECK(e3 < 0.01 * 2.0 / kSqrtPi);
  CHECK(e1 / e2 >= 1.8);
  CHECK(e2 / e3 >= 1.8);

  auto mk = sample_memory_kernel(st, 0.01, 200);
  std::vector<double> c(200, 3.5);
  for (double v : gfd_apply(mk, c)) CHECK(v == 0.0);
  std::vector<double> short_f(50, 1.0);
  CHECK(code_of([&] { gfd_apply(mk, short_f); }) == ErrorCode::kGridMismatch);

  // exact arithmetic: k = 1, dt = 1/2, integer data
  auto flat = sample_memory_kernel(unit_k_spec(), 0.5, 32);
  std::vector<double> f(32), g(32), fg(32);
  for (int j = 0; j < 32; ++j) {
    f[j] = (j * 7) % 5;
    g[j] = (j * j) % 11 - 3;
    fg[j] = f[j] + g[j];
  }
  auto df = gfd_apply(flat, f), dg = gfd_apply(flat, g), dfg = gfd_apply(flat, fg);
  for (int j = 0; j < 32; ++j) CHECK(dfg[j] == df[j] + dg[j]);
  // and close to linear on inexact data
  auto sf = sample_memory_kernel(st, 0.013, 64);
  std::vector<double> u(64), w(64), uw(64);
  for (int j = 0; j < 64; ++j) {
    u[j] = std::sin(0.1 * j);
    w[j] = std::exp(-0.05 * j);
    uw[j] = u[j] + w[j];
  }
  auto du = gfd_apply(sf, u), dw = gfd_apply(sf, w), duw = gfd_apply(sf, uw);
  for (int j = 0; j < 64; ++j) CHECK(duw[j] == doctest::Approx(du[j] + dw[j]).epsilon(1e-12));
}
