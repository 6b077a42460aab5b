#pragma once

#include <functional>

namespace greenwalk::detail {

/// (2 pi)^{-d} int_{R^d} e^{i(k,x)} F(|k|) dk for |x| = r, with F integrable
/// on [0, extent] and negligible beyond it.
///
/// When F(k) ~ coef * k^{-power} near 0 the innermost panel is integrated
/// in closed form; pass coef = 0 for integrands bounded at the origin.
double radial_inverse_fourier(int d, double r, const std::function<double(double)>& F,
                              double extent, double coef = 0.0, double power = 0.0);

}  // namespace greenwalk::detail
