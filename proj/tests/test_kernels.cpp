#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "greenwalk/errors.hpp"
#include "greenwalk/kernels.hpp"

using namespace greenwalk;
using boost::math::quadrature::gauss_kronrod;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{0};
}

double gaussian_nd(std::span<const double> x, double variance) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return std::pow(2.0 * std::numbers::pi * variance, -0.5 * double(x.size())) *
         std::exp(-r2 / (2.0 * variance));
}

}  // namespace

TEST_CASE("gaussian kernel basics") {
  auto a = make_gaussian_kernel(1);
  const double zero[1] = {0.0};
  CHECK(a.fourier(zero) == doctest::Approx(1.0).epsilon(1e-15));
  REQUIRE(a.tail_params());
  CHECK(a.tail_params()->A == 1.0);
  CHECK(a.tail_params()->alpha == 2.0);
  // oracle: inverse transform of exp(-k^2) at x = 0
  const double inv = gauss_kronrod<double, 61>::integrate(
                         [](double k) { return std::exp(-k * k); }, -12.0, 12.0) /
                     (2.0 * std::numbers::pi);
  CHECK(a.density(zero) == doctest::Approx(inv).epsilon(1e-12));
  CHECK(a.density(zero) == doctest::Approx(0.28209479177387814).epsilon(1e-12));
  CHECK(code_of([] { make_gaussian_kernel(0); }) == ErrorCode::kInvalidDimension);
}

TEST_CASE("cauchy kernel basics") {
  auto a = make_cauchy_kernel();
  const double zero[1] = {0.0};
  const double one[1] = {1.0};
  CHECK(a.fourier(zero) == 1.0);
  CHECK(a.tail_params()->alpha == 1.0);
  CHECK(a.tail_params()->A == 1.0);
  // oracle: (1/pi) int_0^inf cos(k) e^{-k} dk
  const double inv = gauss_kronrod<double, 61>::integrate(
                         [](double k) { return std::cos(k) * std::exp(-k); }, 0.0, 60.0, 15,
                         1e-14) /
                     std::numbers::pi;
  CHECK(a.density(one) == doctest::Approx(inv).epsilon(1e-10));
  CHECK(a.density(one) == doctest::Approx(1.0 / (2.0 * std::numbers::pi)).epsilon(1e-14));
}

TEST_CASE("fourier symmetry: cosine quadrature of the density") {
  auto g = make_gaussian_kernel(1);
  auto c = make_cauchy_kernel();
  for (double k : {0.0, 0.3, 1.0, 2.5, 5.0}) {
    const double kk[1] = {k};
    const double qg = gauss_kronrod<double, 61>::integrate(
        [&](double y) {
          const double yy[1] = {y};
          return 2.0 * std::cos(k * y) * g.density(yy);
        },
        0.0, 40.0, 15, 1e-14);
    CHECK(std::abs(qg - g.fourier(kk)) <= 1e-6 * std::max(g.fourier(kk), 1e-9) + 1e-14);
  }
  // Cauchy: split the oscillatory tail by periods and add the analytic remainder bound.
  for (double k : {0.5, 1.0, 2.0}) {
    const double kk[1] = {k};
    double q = 0.0;
    const double period = 2.0 * std::numbers::pi / k;
    for (int p = 0; p < 4000; ++p) {
      q += gauss_kronrod<double, 31>::integrate(
          [&](double y) { return 2.0 * std::cos(k * y) / (std::numbers::pi * (1 + y * y)); },
          p * period, (p + 1) * period);
    }
    CHECK(q == doctest::Approx(c.fourier(kk)).epsilon(1e-6));
  }
}

TEST_CASE("tabulated kernel") {
  GridSpec grid(1, 256, 20.0);
  auto table = FieldGrid::sample(grid, [](std::span<const double> x) {
    return std::pow(4.0 * std::numbers::pi, -0.5) * std::exp(-0.25 * x[0] * x[0]);
  });
  auto k = make_tabulated_kernel(table);
  const double zero[1] = {0.0};
  CHECK(std::abs(k.fourier(zero) - 1.0) < 1e-9);
  CHECK_FALSE(k.tail_params());

  auto unnorm = FieldGrid::sample(grid, [](std::span<const double> x) {
    return std::exp(-0.25 * x[0] * x[0]);
  });
  auto k2 = make_tabulated_kernel(unnorm);
  for (double x : {0.0, 0.5, 1.25, -3.0}) {
    const double xx[1] = {x};
    CHECK(k2.density(xx) == doctest::Approx(k.density(xx)).epsilon(1e-12));
  }

  std::vector<double> bad(table.values().begin(), table.values().end());
  bad[3] = -1e-3;
  CHECK(code_of([&] { make_tabulated_kernel(FieldGrid(grid, bad)); }) ==
        ErrorCode::kNegativeSample);
  std::vector<double> asym(table.values().begin(), table.values().end());
  asym[140] *= 1.01;
  CHECK(code_of([&] { make_tabulated_kernel(FieldGrid(grid, asym)); }) ==
        ErrorCode::kAsymmetricTable);
  CHECK(code_of([&] { make_tabulated_kernel(FieldGrid::constant(grid, 0.0)); }) ==
        ErrorCode::kZeroMass);
}

TEST_CASE("small-k expansion fit") {
  auto g2 = fit_small_k_expansion(make_gaussian_kernel(2));
  CHECK(std::abs(g2.alpha / 2.0 - 1.0) <= 0.02);
  CHECK(std::abs(g2.A - 1.0) <= 0.02);
  auto c = fit_small_k_expansion(make_cauchy_kernel());
  CHECK(std::abs(c.alpha - 1.0) <= 0.02);
  CHECK(std::abs(c.A - 1.0) <= 0.02);

  JumpKernel::Definition def;
  def.dim = 1;
  def.density = [](std::span<const double>) { return 0.0; };
  def.fourier = [](std::span<const double>) { return 1.0; };
  auto flat = JumpKernel::custom(def);
  CHECK(code_of([&] { fit_small_k_expansion(flat); }) == ErrorCode::kDegenerateFit);
  CHECK(code_of([&] { fit_small_k_expansion(flat, 0.1, 0.01); }) ==
        ErrorCode::kInvalidArgument);

  // fit consistency on a tabulated gaussian
  GridSpec grid(1, 512, 40.0);
  auto tab = make_tabulated_kernel(FieldGrid::sample(grid, [](std::span<const double> x) {
    return std::exp(-0.25 * x[0] * x[0]);
  }));
  auto t = fit_small_k_expansion(tab);
  CHECK(t.alpha == doctest::Approx(2.0).epsilon(0.05));
  CHECK(t.A == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("convolution powers against gaussian oracles") {
  auto a = make_gaussian_kernel(1);
  GridSpec grid(1, 256, 40.0);
  auto a1 = convolve_power(a, 1, grid);
  auto a2 = convolve_power(a, 2, grid);
  Point x(1);
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    e1 = std::max(e1, std::abs(a1[i] - a.density(x)));
    e2 = std::max(e2, std::abs(a2[i] - gaussian_nd(x, 4.0)));
  }
  CHECK(e1 < 1e-10);
  CHECK(e2 < 1e-8);

  auto a3 = make_gaussian_kernel(3);
  GridSpec g3(3, 32, 16.0);
  auto p2 = convolve_power(a3, 2, g3);
  CHECK(p2[g3.center_index()] == doctest::Approx(std::pow(8.0 * std::numbers::pi, -1.5)).epsilon(1e-8));
  CHECK(p2[g3.center_index()] == doctest::Approx(7.927e-3).epsilon(1e-3));

  CHECK(code_of([&] { convolve_power(a, 0, grid); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { convolve_power(a, 1, GridSpec(1, 64, 4.0)); }) ==
        ErrorCode::kAliasingViolation);
}

TEST_CASE("property: semigroup of convolutions and mass conservation") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pick(1, 12);
  for (int d = 1; d <= 3; ++d) {
    auto a = make_gaussian_kernel(d);
    GridSpec grid(d, d == 3 ? 32 : 128, d == 3 ? 16.0 : 48.0);
    KernelOnGrid op(a, grid);
    for (int trial = 0; trial < 4; ++trial) {
      const int m = pick(rng), n = pick(rng);
      auto lhs = op.power(m + n);
      auto am = op.power(m);
      auto an = op.power(n);
      // FFT convolution of two grid fields
      auto conv = op.spectral().forward(roll_half(grid, am.values()));
      auto fn = op.spectral().forward(an.values());
      for (std::size_t k = 0; k < conv.size(); ++k) conv[k] *= fn[k] * grid.cell_volume();
      FieldGrid rhs(grid, op.spectral().inverse(conv));
      CHECK(max_abs_difference(lhs, rhs) < 1e-8);
    }
    for (int n : {1, 2, 8, 32, 64}) {
      CHECK(std::abs(op.power(n).integral() - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("validate_kernel reports") {
  GridSpec grid(1, 256, 40.0);
  CHECK(validate_kernel(make_gaussian_kernel(1), grid).passed());

  GridSpec tgrid(1, 256, 20.0);
  auto scaled = FieldGrid::sample(tgrid, [](std::span<const double> x) {
    return 2.0 * std::pow(4.0 * std::numbers::pi, -0.5) * std::exp(-0.25 * x[0] * x[0]);
  });
  CHECK(validate_kernel(make_tabulated_kernel(scaled), tgrid).passed());

  JumpKernel::Definition def;
  def.dim = 1;
  def.density = [](std::span<const double> x) { return x[0]; };
  def.fourier = [](std::span<const double>) { return 1.0; };
  auto odd = validate_kernel(JumpKernel::custom(def), grid);
  CHECK_FALSE(odd.symmetric);
  CHECK_FALSE(odd.passed());
}

TEST_CASE("samplers: tabulated draws match the table's variance") {
  GridSpec grid(1, 512, 40.0);
  auto tab = make_tabulated_kernel(FieldGrid::sample(grid, [](std::span<const double> x) {
    return std::exp(-0.25 * x[0] * x[0]);
  }));
  Rng rng(11);
  double s2 = 0.0;
  const int n = 200000;
  double x[1];
  for (int i = 0; i < n; ++i) {
    tab.sample_jump(rng, x);
    s2 += x[0] * x[0];
  }
  // variance 2 plus the jitter variance h^2/12
  const double h = grid.spacing();
  CHECK(s2 / n == doctest::Approx(2.0 + h * h / 12.0).epsilon(0.02));
}
