#include "radial.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "greenwalk/errors.hpp"
#include "greenwalk/numerics.hpp"

namespace greenwalk::detail {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kInnerPanels = 50;

}  // namespace

double radial_inverse_fourier(int d, double r, const std::function<double(double)>& F,
                              double extent, double coef, double power) {
  const double origin_factor = unit_sphere_area(d) * std::pow(2.0 * kPi, -d);
  const double nu = 0.5 * d - 1.0;
  const double bessel_factor = r > 0.0 ? std::pow(2.0 * kPi, -0.5 * d) * std::pow(r, -nu) : 0.0;

  auto integrand = [&](double k) {
    double w;
    if (r == 0.0) {
      w = origin_factor * std::pow(k, d - 1);
    } else if (d == 1) {
      w = std::cos(k * r) / kPi;
    } else if (d == 3) {
      w = k * std::sin(k * r) / (2.0 * kPi * kPi * r);
    } else {
      w = bessel_factor * std::pow(k, 0.5 * d) * boost::math::cyl_bessel_j(nu, k * r);
    }
    return w * F(k);
  };

  const double quarter = r > 0.0 ? 0.5 * kPi / r : 1.0;
  const double k_split = std::min({extent, 1.0, quarter});
  const double width = std::min(0.25, quarter);

  std::vector<double> br;
  double eps = k_split * std::ldexp(1.0, -kInnerPanels);
  for (int i = 0; i <= kInnerPanels; ++i) br.push_back(eps * std::ldexp(1.0, i));
  if (extent > k_split) {
    const auto n = static_cast<int>(std::ceil((extent - k_split) / width));
    for (int i = 1; i <= n; ++i) br.push_back(k_split + (extent - k_split) * i / n);
  }

  double inner;
  if (coef != 0.0) {
    require(power < d, ErrorCode::kQuadratureFailure, "radial integrand is not integrable");
    inner = origin_factor * coef * std::pow(eps, d - power) / (d - power);
  } else {
    inner = gauss_legendre<20>(integrand, 0.0, eps);
  }

  std::vector<double> coarse, fine;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    coarse.push_back(gauss_legendre<20>(integrand, br[i], br[i + 1]));
    fine.push_back(gauss_legendre<30>(integrand, br[i], br[i + 1]));
  }
  const double a = inner + pairwise_sum(coarse);
  const double b = inner + pairwise_sum(fine);
  double scale = 0.0;
  for (double v : fine) scale += std::abs(v);
  if (!std::isfinite(b) || std::abs(a - b) > 1e-7 * scale + 1e-300) {
    fail(ErrorCode::kQuadratureFailure,
         "radial Fourier quadrature did not converge (rules differ by " +
             std::to_string(std::abs(a - b)) + ")");
  }
  return b;
}

}  // namespace greenwalk::detail
