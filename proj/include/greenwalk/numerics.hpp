#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace greenwalk {

/// Pairwise (cascade) summation; deterministic for a fixed input order.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 32) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

/// Compensated running sum (Neumaier's variant of Kahan).
class NeumaierSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Fixed-order Gauss-Legendre rule on [a, b].
template <unsigned Points = 20, class F>
double gauss_legendre(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, Points>::integrate(f, a, b);
}

/// Breakpoints a = b0 < b1 < ... = b with geometric growth from `first`
/// (a must be 0 or positive; when a == 0 the first panel is [0, first]).
inline std::vector<double> geometric_breakpoints(double a, double b, double first,
                                                 double ratio = 2.0) {
  std::vector<double> out{a};
  double x = a == 0.0 ? first : a * ratio;
  while (x < b) {
    out.push_back(x);
    x *= ratio;
  }
  out.push_back(b);
  return out;
}

/// Surface area of the unit sphere in R^d.
inline double unit_sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / boost::math::tgamma(0.5 * d);
}

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace greenwalk
