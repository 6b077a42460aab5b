#include "doctest.h"

#include <cmath>
#include <numbers>

#include "greenwalk/errors.hpp"
#include "greenwalk/green.hpp"
#include "greenwalk/parallel.hpp"
#include "greenwalk/simulate.hpp"

using namespace greenwalk;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{0};
}

// f constant on each bin, zero outside the box
CLFunction bin_constant(const BinSpec& bins, std::vector<double> levels) {
  CLFunction::Definition def;
  def.dim = bins.dim();
  auto lv = std::make_shared<std::vector<double>>(std::move(levels));
  def.eval = [bins, lv](std::span<const double> x) {
    const auto i = bins.index(x);
    return i < bins.size() ? (*lv)[i] : 0.0;
  };
  double sup = 0.0, l1 = 0.0;
  for (double v : *lv) {
    sup = std::max(sup, std::abs(v));
    l1 += std::abs(v) * std::pow(bins.width(), bins.dim());
  }
  def.sup_norm = sup;
  def.l1_norm = l1;
  return CLFunction::custom(def);
}

}  // namespace

TEST_CASE("compound Poisson paths") {
  auto a = make_gaussian_kernel(1);
  const double x0[1] = {0.0};
  Rng rng(1);
  RunningStats counts, incr;
  for (int i = 0; i < 100000; ++i) {
    auto p = sample_cpp_path(a, x0, 10.0, rng);
    counts.add(static_cast<double>(p.jump_times.size()));
    for (std::size_t j = 1; j < p.jump_times.size(); ++j) {
      CHECK(p.jump_times[j] > p.jump_times[j - 1]);
    }
    if (i < 20000 && !p.positions.empty()) incr.add(p.positions[0][0]);
  }
  CHECK(std::abs(counts.mean() - 10.0) < 3.0 * counts.std_error());
  // second moment of (4 pi)^{-1/2} exp(-x^2/4) is 2
  CHECK(incr.variance() == doctest::Approx(2.0).epsilon(0.05));

  auto p = sample_cpp_path(a, x0, 1e-14, rng);
  CHECK(p.jump_times.empty());
  CHECK(p.at(0.5e-14)[0] == 0.0);
  CHECK(code_of([&] { sample_cpp_path(a, x0, 0.0, rng); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("Monte Carlo expectations") {
  auto a = make_gaussian_kernel(1);
  const double x0[1] = {0.0};
  auto f = CLFunction::kernel_density(a);
  auto e0 = mc_expectation(a, f, x0, 0.0, 100, 3);
  CHECK(e0.mean == a.density(x0));
  CHECK(e0.std_error == 0.0);
  auto one = mc_expectation(a, CLFunction::constant(1, 1.0), x0, 2.0, 5000, 3);
  CHECK(one.mean == 1.0);
  CHECK(one.std_error == 0.0);

  GridSpec g(1, 256, 40.0);
  auto u = evolve_semigroup(a, f.sample_on(g), 1.0, 1e-14);
  auto est = mc_expectation(a, f, x0, 1.0, 100000, 42);
  CHECK(std::abs(est.mean - u[g.center_index()]) < 3.0 * est.std_error);
  CHECK(code_of([&] { mc_expectation(a, f, x0, 1.0, 1, 42); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("truncated potentials and random potentials") {
  auto a3 = make_gaussian_kernel(3);
  const double o[3] = {0, 0, 0};
  auto zero = mc_truncated_potential(a3, CLFunction::zero(3), o, 50.0, 1000, 5);
  CHECK(zero.mean == 0.0);
  auto c = mc_truncated_potential(a3, CLFunction::constant(3, 0.7), o, 37.5, 3000, 5);
  CHECK(c.mean == 0.7 * 37.5);
  CHECK(c.std_error == 0.0);

  Rng rng(9);
  CHECK(sample_random_potential(a3, CLFunction::constant(3, 1.0), o, 12.0, rng) == 12.0);
  auto f = CLFunction::kernel_density(a3);
  CHECK(sample_random_potential(a3, f, o, 1e-13, rng) == doctest::Approx(f(o) * 1e-13).epsilon(1e-15));
  RunningStats draws;
  for (int i = 0; i < 10000; ++i) draws.add(sample_random_potential(a3, f, o, 200.0, rng));
  CHECK(draws.variance() > 0.0);

  // against the potential minus the analytic tail beyond T
  const double v = potential(a3, f, o);
  const double T = 200.0;
  auto est = mc_truncated_potential(a3, f, o, T, 20000, 77);
  const double target = v - truncation_tail_estimate(a3, f, T);
  CHECK(std::abs(est.mean - target) < std::max(3.0 * est.std_error, 0.02 * target));
}

TEST_CASE("random Green measure: exact identities") {
  auto a3 = make_gaussian_kernel(3);
  const double o[3] = {0, 0, 0};
  auto bins = BinSpec::centered(o, 1.25, 7);
  Rng rng(4);
  auto h0 = empirical_random_green_measure(a3, o, 1e-13, bins, rng);
  CHECK(h0.masses[bins.index(o)] == 1e-13);
  for (int i = 0; i < 200; ++i) {
    auto h = empirical_random_green_measure(a3, o, 300.0, bins, rng);
    CHECK(std::abs(h.total() + h.escaped - 300.0) <= 1e-12 * 300.0);
    for (double m : h.masses) CHECK(m >= 0.0);
  }
  const double far[3] = {9.0, 0.0, 0.0};
  CHECK(code_of([&] { empirical_random_green_measure(a3, far, 1.0, bins, rng); }) ==
        ErrorCode::kInvalidArgument);

  // expectation identity with a bin-constant f, same draws
  std::vector<double> levels(bins.size());
  for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = std::sin(0.37 * double(i)) + 1.1;
  auto f = bin_constant(bins, levels);
  auto hist = mc_random_green_measure(a3, o, 150.0, bins, 3000, 2024);
  auto pot = mc_truncated_potential(a3, f, o, 150.0, 3000, 2024);
  double integral = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) integral += levels[i] * hist.masses[i];
  CHECK(integral == doctest::Approx(pot.mean).epsilon(1e-10));
}

TEST_CASE("random Green measure against bin integrals of G_0") {
  auto a3 = make_gaussian_kernel(3);
  const double o[3] = {0, 0, 0};
  auto bins = BinSpec::centered(o, 1.25, 7);
  GridSpec g3(3, 64, 40.0);
  auto g0 = green_regular_series(a3, g3, 0.0, 1e-10);
  const double T = 4000.0;
  auto hist = mc_random_green_measure(a3, o, T, bins, 4000, 99);
  int ok = 0, total = 0;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (!bins.interior(b) || b == bins.index(o)) continue;
    const double target = box_integral(g0.regular_part, bins.center(b), bins.width());
    ++total;
    if (std::abs(hist.masses[b] - target) < std::max(3.0 * hist.std_errors[b], 0.1 * target)) ++ok;
  }
  CHECK(ok >= total * 9 / 10);
}

TEST_CASE("determinism across seeds and thread counts") {
  auto a3 = make_gaussian_kernel(3);
  const double o[3] = {0, 0, 0};
  auto f = CLFunction::kernel_density(a3);
  auto r1 = mc_truncated_potential(a3, f, o, 20.0, 5000, 11);
  auto r2 = mc_truncated_potential(a3, f, o, 20.0, 5000, 11);
  set_thread_count(3);
  auto r3 = mc_truncated_potential(a3, f, o, 20.0, 5000, 11);
  set_thread_count(1);
  CHECK(r1.mean == r2.mean);
  CHECK(r1.std_error == r2.std_error);
  CHECK(r1.mean == r3.mean);
  CHECK(r1.std_error == r3.std_error);
  auto r4 = mc_truncated_potential(a3, f, o, 20.0, 5000, 12);
  CHECK(r4.mean != r1.mean);

  Rng s1(5), s2(5);
  auto p1 = sample_cpp_path(a3, o, 30.0, s1);
  auto p2 = sample_cpp_path(a3, o, 30.0, s2);
  CHECK(p1.jump_times == p2.jump_times);
  CHECK(p1.positions == p2.positions);
}
