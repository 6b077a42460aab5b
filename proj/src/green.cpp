#include "greenwalk/green.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "greenwalk/errors.hpp"
#include "greenwalk/numerics.hpp"
#include "radial.hpp"

namespace greenwalk {

namespace {

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// a^ and 1 - a^ as functions of |k|; d = 1 kernels are even, so any
// one-dimensional kernel qualifies.
struct RadialSymbol {
  std::function<double(double)> ahat;
  std::function<double(double)> complement;
};

RadialSymbol radial_symbol(const JumpKernel& kernel) {
  if (kernel.isotropic()) {
    return {[kernel](double r) { return kernel.radial_fourier(r); },
            [kernel](double r) { return kernel.radial_complement(r); }};
  }
  require(kernel.dim() == 1, ErrorCode::kNotSupported,
          "radial Fourier evaluation needs an isotropic kernel when d >= 2");
  return {[kernel](double r) {
            const double k[1] = {r};
            return kernel.fourier(k);
          },
          [kernel](double r) {
            const double k[1] = {r};
            return kernel.fourier_complement(k);
          }};
}

// Flat wrapped-layout indices whose coordinate on some axis is -L.
std::vector<std::size_t> wrapped_boundary(const GridSpec& grid) {
  std::vector<std::size_t> out;
  std::vector<std::size_t> idx(grid.dim());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.unflatten(i, idx);
    if (std::find(idx.begin(), idx.end(), grid.points_per_axis() / 2) != idx.end()) {
      out.push_back(i);
    }
  }
  return out;
}

// Weights c with sum c = 1 cancelling M^{-e1} and M^{-e2} tails.
std::array<double, 3> richardson_weights(const std::array<double, 3>& m, double e1, double e2) {
  const double a[3][3] = {{1.0, 1.0, 1.0},
                          {std::pow(m[0], -e1), std::pow(m[1], -e1), std::pow(m[2], -e1)},
                          {std::pow(m[0], -e2), std::pow(m[1], -e2), std::pow(m[2], -e2)}};
  auto det3 = [](const double x[3][3]) {
    return x[0][0] * (x[1][1] * x[2][2] - x[1][2] * x[2][1]) -
           x[0][1] * (x[1][0] * x[2][2] - x[1][2] * x[2][0]) +
           x[0][2] * (x[1][0] * x[2][1] - x[1][1] * x[2][0]);
  };
  const double det = det3(a);
  std::array<double, 3> c{};
  for (int j = 0; j < 3; ++j) {
    double b[3][3];
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s) b[r][s] = (s == j) ? (r == 0 ? 1.0 : 0.0) : a[r][s];
    c[j] = det3(b) / det;
  }
  return c;
}

// Poisson(t) index window [lo, hi] holding all but `tol` of the mass.
std::pair<long, long> poisson_window(double t, double tol) {
  using boost::math::gamma_p;
  using boost::math::gamma_q;
  const long mode = static_cast<long>(std::floor(t));
  long hi = mode;
  while (gamma_p(static_cast<double>(hi + 1), t) >= 0.5 * tol) ++hi;
  long lo = mode;
  while (lo > 0 && gamma_q(static_cast<double>(lo), t) >= 0.5 * tol) --lo;
  return {lo, hi};
}

}  // namespace

const char* existence_name(GreenExistence e) noexcept {
  switch (e) {
    case GreenExistence::kExists: return "Exists";
    case GreenExistence::kDivergent: return "Divergent";
    case GreenExistence::kUnknown: return "Unknown";
  }
  return "Unknown";
}

GreenExistence check_green_existence(const JumpKernel& kernel) {
  const auto& tail = kernel.tail_params();
  if (!tail) return GreenExistence::kUnknown;
  return kernel.dim() > tail->alpha ? GreenExistence::kExists : GreenExistence::kDivergent;
}

void require_green_existence(const JumpKernel& kernel) {
  switch (check_green_existence(kernel)) {
    case GreenExistence::kExists: return;
    case GreenExistence::kDivergent:
      fail(ErrorCode::kDivergentGreenMeasure,
           "Green measure diverges: d = " + std::to_string(kernel.dim()) +
               " does not exceed alpha = " + std::to_string(kernel.tail_params()->alpha));
    case GreenExistence::kUnknown:
      fail(ErrorCode::kUnknownTailParams,
           "kernel has no (A, alpha); fit the small-k expansion and attach it first");
  }
}

ResolventKernel green_regular_series(const JumpKernel& kernel, const GridSpec& grid,
                                     double lambda, double tol, const SeriesOptions& options) {
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorCode::kInvalidArgument,
          "lambda must be >= 0");
  require(tol > 0.0, ErrorCode::kInvalidArgument, "tol must be positive");
  require(kernel.dim() == grid.dim(), ErrorCode::kGridMismatch,
          "kernel and grid dimensions differ");
  if (lambda == 0.0) require_green_existence(kernel);

  KernelOnGrid op(kernel, grid);
  const Spectral& sp = op.spectral();
  const auto sym = op.symbol();
  const auto boundary = wrapped_boundary(grid);
  const double q = 1.0 / (1.0 + lambda);
  const double inv_h = 1.0 / grid.cell_volume();

  std::vector<Complex> power(sym.size(), Complex(1.0)), acc(sym.size(), Complex(0.0));
  double weight = 1.0;
  double tail = 0.0;
  int n = 0;
  while (true) {
    if (n == options.max_terms) {
      require(lambda == 0.0, ErrorCode::kTruncationCap,
              "resolvent series hit the term cap of " + std::to_string(options.max_terms));
      break;
    }
    ++n;
    weight *= q;
    for (std::size_t m = 0; m < sym.size(); ++m) {
      power[m] *= sym[m];
      acc[m] += weight * power[m];
    }
    const auto an = sp.inverse(power);
    double sup = 0.0;
    for (double v : an) sup = std::max(sup, std::abs(v));
    double bmax = 0.0;
    for (std::size_t i : boundary) bmax = std::max(bmax, std::abs(an[i]));
    const double inc = weight * sup * inv_h;
    if (inc < tol) break;
    if (bmax > options.wrap_ratio * std::abs(an[0])) {
      if (lambda > 0.0) {
        tail = inc / lambda;
        require(tail <= tol, ErrorCode::kTruncationCap,
                "a_n reaches the box boundary before the series converges; enlarge L");
      }
      break;
    }
  }

  bool extrapolated = false;
  if (lambda == 0.0 && n >= 8) {
    const auto& tp = *kernel.tail_params();
    const double p = kernel.dim() / tp.alpha;
    const std::array<int, 3> levels{n / 4, n / 2, n};
    const auto c = richardson_weights({double(levels[0]), double(levels[1]), double(levels[2])},
                                      p - 1.0, p);
    std::vector<Complex> pw(sym.size(), Complex(1.0)), partial(sym.size(), Complex(0.0)),
        combined(sym.size(), Complex(0.0));
    int level = 0;
    for (int j = 1; j <= n; ++j) {
      for (std::size_t m = 0; m < sym.size(); ++m) {
        pw[m] *= sym[m];
        partial[m] += pw[m];
      }
      while (level < 3 && levels[level] == j) {
        for (std::size_t m = 0; m < sym.size(); ++m) combined[m] += c[level] * partial[m];
        ++level;
      }
    }
    const double raw0 = [&] {
      double s = 0.0;
      for (std::size_t m = 0; m < acc.size(); ++m) s += sp.hermitian_weight(m) * acc[m].real();
      return s / static_cast<double>(grid.size()) * inv_h;
    }();
    acc = std::move(combined);
    double ext0 = 0.0;
    for (std::size_t m = 0; m < acc.size(); ++m) ext0 += sp.hermitian_weight(m) * acc[m].real();
    ext0 = ext0 / static_cast<double>(grid.size()) * inv_h;
    tail = std::abs(ext0 - raw0);
    extrapolated = true;
  }

  auto wrapped = sp.inverse(acc);
  for (double& v : wrapped) v *= inv_h;
  return ResolventKernel{lambda,
                         kernel,
                         FieldGrid(grid, roll_half(grid, wrapped)),
                         1.0 / (1.0 + lambda),
                         tol,
                         n,
                         tail,
                         extrapolated};
}

double green_regular_fourier(const JumpKernel& kernel, std::span<const double> x,
                             double lambda) {
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorCode::kInvalidArgument,
          "lambda must be >= 0");
  require(static_cast<int>(x.size()) == kernel.dim(), ErrorCode::kInvalidArgument,
          "point dimension differs from kernel dimension");
  if (lambda == 0.0) require_green_existence(kernel);
  const auto sym = radial_symbol(kernel);
  std::function<double(double)> F;
  double coef = 0.0, power = 0.0;
  if (lambda == 0.0) {
    F = [&](double k) { return sym.ahat(k) / sym.complement(k); };
    coef = 1.0 / kernel.tail_params()->A;
    power = kernel.tail_params()->alpha;
  } else {
    F = [&](double k) { return sym.ahat(k) / (lambda + sym.complement(k)); };
  }
  return detail::radial_inverse_fourier(kernel.dim(), norm(x), F, kernel.spectral_extent(),
                                        coef, power);
}

FieldGrid apply_generator(const KernelOnGrid& op, const FieldGrid& f) {
  return op.convolve(f) - f;
}

FieldGrid apply_generator(const JumpKernel& kernel, const FieldGrid& f) {
  require(kernel.dim() == f.grid().dim(), ErrorCode::kGridMismatch,
          "kernel and field dimensions differ");
  return apply_generator(KernelOnGrid(kernel, f.grid()), f);
}

FieldGrid evolve_semigroup(const KernelOnGrid& op, const FieldGrid& f, double t, double tol,
                           int max_terms) {
  require(std::isfinite(t) && t >= 0.0, ErrorCode::kInvalidArgument, "t must be >= 0");
  require(tol > 0.0, ErrorCode::kInvalidArgument, "tol must be positive");
  require(f.grid() == op.grid(), ErrorCode::kGridMismatch, "field grid differs from kernel grid");
  if (t == 0.0) return f;

  const auto [lo, hi] = poisson_window(t, tol);
  require(hi - lo + 1 <= max_terms, ErrorCode::kTruncationCap,
          "semigroup series needs " + std::to_string(hi - lo + 1) + " terms, cap is " +
              std::to_string(max_terms));
  std::vector<double> w(hi - lo + 1);
  for (long n = lo; n <= hi; ++n) {
    w[n - lo] = std::exp(-t + static_cast<double>(n) * std::log(t) -
                         std::lgamma(static_cast<double>(n) + 1.0));
  }

  const auto sym = op.symbol();
  auto spec = op.spectral().forward(f.values());
  for (std::size_t m = 0; m < spec.size(); ++m) {
    const double s = sym[m];
    double pw = std::pow(s, static_cast<double>(lo));
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      acc += w[j] * pw;
      pw *= s;
    }
    spec[m] *= acc;
  }
  return FieldGrid(op.grid(), op.spectral().inverse(spec));
}

FieldGrid evolve_semigroup(const JumpKernel& kernel, const FieldGrid& f, double t, double tol,
                           int max_terms) {
  require(kernel.dim() == f.grid().dim(), ErrorCode::kGridMismatch,
          "kernel and field dimensions differ");
  if (t == 0.0) return f;
  return evolve_semigroup(KernelOnGrid(kernel, f.grid()), f, t, tol, max_terms);
}

// ---- CLFunction ----

CLFunction CLFunction::custom(Definition def) {
  require(def.dim >= 1, ErrorCode::kInvalidDimension, "function dimension must be >= 1");
  require(static_cast<bool>(def.eval), ErrorCode::kInvalidArgument, "function needs an evaluator");
  if (def.samples) {
    require(def.samples->grid().dim() == def.dim, ErrorCode::kGridMismatch,
            "samples have the wrong dimension");
  }
  return CLFunction(std::make_shared<const Definition>(std::move(def)));
}

CLFunction CLFunction::zero(int dim) {
  Definition def;
  def.dim = dim;
  def.family = "zero";
  def.eval = [](std::span<const double>) { return 0.0; };
  def.sup_norm = 0.0;
  def.l1_norm = 0.0;
  def.fourier = [](double) { return 0.0; };
  return custom(std::move(def));
}

CLFunction CLFunction::constant(int dim, double c) {
  Definition def;
  def.dim = dim;
  def.family = "constant";
  def.params = {{"value", c}};
  def.eval = [c](std::span<const double>) { return c; };
  def.sup_norm = std::abs(c);
  def.l1_norm = c == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return custom(std::move(def));
}

CLFunction CLFunction::kernel_density(const JumpKernel& kernel) {
  Definition def;
  def.dim = kernel.dim();
  def.family = "kernel_density";
  def.eval = [kernel](std::span<const double> x) { return kernel.density(x); };
  if (kernel.family() == "gaussian" || kernel.family() == "cauchy") {
    const Point zero(kernel.dim(), 0.0);
    def.sup_norm = kernel.density(zero);
  }
  def.l1_norm = 1.0;
  if (kernel.isotropic()) def.fourier = [kernel](double r) { return kernel.radial_fourier(r); };
  return custom(std::move(def));
}

CLFunction CLFunction::gaussian_bump(int dim, double amplitude, double width) {
  require(width > 0.0, ErrorCode::kInvalidArgument, "bump width must be positive");
  Definition def;
  def.dim = dim;
  def.family = "gaussian_bump";
  def.params = {{"amplitude", amplitude}, {"width", width}};
  const double s2 = width * width;
  def.eval = [amplitude, s2](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return amplitude * std::exp(-0.5 * r2 / s2);
  };
  const double mass = std::pow(2.0 * std::numbers::pi * s2, 0.5 * dim);
  def.sup_norm = std::abs(amplitude);
  def.l1_norm = std::abs(amplitude) * mass;
  def.fourier = [amplitude, mass, s2](double r) {
    return amplitude * mass * std::exp(-0.5 * s2 * r * r);
  };
  return custom(std::move(def));
}

CLFunction CLFunction::from_samples(const FieldGrid& samples) {
  Definition def;
  const GridSpec grid = samples.grid();
  def.dim = grid.dim();
  def.family = "samples";
  auto values = std::make_shared<const std::vector<double>>(samples.values().begin(),
                                                            samples.values().end());
  def.eval = [grid, values](std::span<const double> x) {
    const auto n = static_cast<long long>(grid.points_per_axis());
    std::size_t flat = 0;
    for (int a = 0; a < grid.dim(); ++a) {
      const long long j = n / 2 + std::llround(x[a] / grid.spacing());
      if (j < 0 || j >= n) return 0.0;
      flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
    }
    return (*values)[flat];
  };
  def.sup_norm = samples.sup_norm();
  def.l1_norm = samples.l1_norm();
  def.samples = samples;
  return custom(std::move(def));
}

double CLFunction::fourier(double r) const {
  require(has_fourier(), ErrorCode::kNotSupported, "function has no Fourier transform");
  return def_->fourier(r);
}

bool CLFunction::in_cl() const {
  if (def_->samples) return true;
  return std::isfinite(def_->sup_norm) && std::isfinite(def_->l1_norm);
}

FieldGrid CLFunction::sample_on(const GridSpec& grid) const {
  require(grid.dim() == dim(), ErrorCode::kGridMismatch, "function and grid dimensions differ");
  if (def_->samples && def_->samples->grid() == grid) return *def_->samples;
  return FieldGrid::sample(grid, def_->eval);
}

CLFunction CLFunction::operator+(const CLFunction& other) const {
  require(dim() == other.dim(), ErrorCode::kInvalidDimension, "function dimensions differ");
  Definition def;
  def.dim = dim();
  def.family = "sum";
  auto a = def_;
  auto b = other.def_;
  def.eval = [a, b](std::span<const double> x) { return a->eval(x) + b->eval(x); };
  def.sup_norm = a->sup_norm + b->sup_norm;
  def.l1_norm = a->l1_norm + b->l1_norm;
  if (a->samples && b->samples && a->samples->grid() == b->samples->grid()) {
    def.samples = *a->samples + *b->samples;
    def.sup_norm = def.samples->sup_norm();
    def.l1_norm = def.samples->l1_norm();
  }
  if (a->fourier && b->fourier) {
    def.fourier = [a, b](double r) { return a->fourier(r) + b->fourier(r); };
  }
  return custom(std::move(def));
}

CLFunction CLFunction::scaled(double c) const {
  Definition def = *def_;
  auto a = def_;
  def.family = def_->family == "constant" || def_->family == "zero" ? def_->family : "scaled";
  def.eval = [a, c](std::span<const double> x) { return c * a->eval(x); };
  def.sup_norm = std::abs(c) * a->sup_norm;
  def.l1_norm = c == 0.0 ? 0.0 : std::abs(c) * a->l1_norm;
  if (a->samples) def.samples = a->samples->scaled(c);
  if (a->fourier) def.fourier = [a, c](double r) { return c * a->fourier(r); };
  return custom(std::move(def));
}

double cl_norm(const CLFunction& f) {
  if (f.samples()) return f.samples()->sup_norm() + f.samples()->l1_norm();
  const double s = f.declared_sup_norm();
  const double l = f.declared_l1_norm();
  require(!std::isnan(s) && !std::isnan(l), ErrorCode::kInvalidArgument,
          "function has neither grid samples nor declared norms");
  return s + l;
}

GridSpec default_green_grid(int dim) {
  switch (dim) {
    case 1: return GridSpec(1, 4096, 400.0);
    case 2: return GridSpec(2, 256, 80.0);
    case 3: return GridSpec(3, 64, 40.0);
    default: return GridSpec(dim, 16, 20.0);
  }
}

// ---- potentials ----

PotentialOperator::PotentialOperator(ResolventKernel g0)
    : g0_(std::move(g0)), spectral_(std::make_shared<const Spectral>(g0_.regular_part.grid())) {
  require(g0_.lambda == 0.0, ErrorCode::kInvalidArgument,
          "potentials need the lambda = 0 Green kernel");
  const GridSpec& grid = g0_.regular_part.grid();
  g_hat_ = spectral_->forward(roll_half(grid, g0_.regular_part.values()));
  for (auto& v : g_hat_) v *= grid.cell_volume();
}

FieldGrid PotentialOperator::field(const CLFunction& f) const {
  require(f.in_cl(), ErrorCode::kInvalidArgument,
          "potential needs f in CL (finite sup and L1 norms)");
  const GridSpec& grid = g0_.regular_part.grid();
  const FieldGrid fs = f.sample_on(grid);
  auto spec = spectral_->forward(fs.values());
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= g_hat_[m];
  return fs + FieldGrid(grid, spectral_->inverse(spec));
}

double PotentialOperator::at(const CLFunction& f, std::span<const double> x) const {
  const GridSpec& grid = g0_.regular_part.grid();
  const std::size_t idx = grid.node_index(x);
  require(idx < grid.size(), ErrorCode::kInvalidArgument,
          "potential point must be a node of the Green grid");
  const FieldGrid v = field(f);
  // exact f(x) instead of the grid sample
  return f(x) + (v[idx] - f.sample_on(grid)[idx]);
}

double potential(const JumpKernel& kernel, const CLFunction& f, std::span<const double> x,
                 const GridSpec& grid) {
  require_green_existence(kernel);
  require(f.dim() == kernel.dim(), ErrorCode::kInvalidDimension,
          "function and kernel dimensions differ");
  require(f.in_cl(), ErrorCode::kInvalidArgument,
          "potential needs f in CL (finite sup and L1 norms)");
  return PotentialOperator(green_regular_series(kernel, grid, 0.0, 1e-10)).at(f, x);
}

double potential(const JumpKernel& kernel, const CLFunction& f, std::span<const double> x) {
  return potential(kernel, f, x, default_green_grid(kernel.dim()));
}

double potential_spectral(const JumpKernel& kernel, const CLFunction& f,
                          std::span<const double> x) {
  require_green_existence(kernel);
  require(f.in_cl(), ErrorCode::kInvalidArgument,
          "potential needs f in CL (finite sup and L1 norms)");
  require(f.has_fourier(), ErrorCode::kNotSupported,
          "spectral potential needs the Fourier transform of f");
  const auto sym = radial_symbol(kernel);
  const auto& tp = *kernel.tail_params();
  auto F = [&](double k) { return f.fourier(k) * sym.ahat(k) / sym.complement(k); };
  return f(x) + detail::radial_inverse_fourier(kernel.dim(), norm(x), F,
                                               kernel.spectral_extent(), f.fourier(0.0) / tp.A,
                                               tp.alpha);
}

double semigroup_pointwise(const JumpKernel& kernel, const CLFunction& f, double t,
                           std::span<const double> x) {
  require(std::isfinite(t) && t >= 0.0, ErrorCode::kInvalidArgument, "t must be >= 0");
  if (t == 0.0) return f(x);
  require(f.has_fourier(), ErrorCode::kNotSupported,
          "pointwise semigroup needs the Fourier transform of f");
  const auto sym = radial_symbol(kernel);
  auto F = [&](double k) { return f.fourier(k) * std::exp(-t * sym.complement(k)); };
  // f^ may decay slower than a^; extend the range until it is negligible
  double extent = kernel.spectral_extent();
  while (std::abs(f.fourier(extent)) * std::exp(-t * sym.complement(extent)) >
         1e-18 * std::max(1.0, std::abs(f.fourier(0.0)))) {
    extent *= 1.5;
    require(extent < 1e6, ErrorCode::kQuadratureFailure, "integrand does not decay in k");
  }
  return detail::radial_inverse_fourier(kernel.dim(), norm(x), F, extent);
}

double truncation_tail_estimate(const JumpKernel& kernel, const CLFunction& f, double T) {
  require(T > 0.0, ErrorCode::kInvalidArgument, "horizon must be positive");
  require_green_existence(kernel);
  const auto& tp = *kernel.tail_params();
  const int d = kernel.dim();
  const double p = d / tp.alpha;
  const double c = unit_sphere_area(d) * std::pow(2.0 * std::numbers::pi, -d) *
                   boost::math::tgamma(p) / (tp.alpha * std::pow(tp.A, p));
  const double l1 = f.samples() ? f.samples()->l1_norm() : f.declared_l1_norm();
  require(std::isfinite(l1), ErrorCode::kInvalidArgument, "tail estimate needs finite L1 norm");
  return l1 * c * std::pow(T, 1.0 - p) / (p - 1.0);
}

double box_integral(const FieldGrid& field, std::span<const double> center, double width) {
  const GridSpec& grid = field.grid();
  require(static_cast<int>(center.size()) == grid.dim(), ErrorCode::kInvalidArgument,
          "box center has the wrong dimension");
  require(width > 0.0, ErrorCode::kInvalidArgument, "box width must be positive");
  const Spectral sp(grid);
  const auto spec = sp.forward(field.values());
  const int d = grid.dim();
  std::vector<double> k(d);
  std::vector<double> terms(spec.size());
  for (std::size_t m = 0; m < spec.size(); ++m) {
    sp.wavevector(m, k);
    Complex e(1.0, 0.0);
    for (int a = 0; a < d; ++a) {
      const double z = 0.5 * k[a] * width;
      const double sinc = z == 0.0 ? 1.0 : std::sin(z) / z;
      e *= std::polar(width * sinc, k[a] * (center[a] + grid.half_width()));
    }
    terms[m] = sp.hermitian_weight(m) * (spec[m] * e).real();
  }
  return pairwise_sum(terms) / static_cast<double>(grid.size());
}

}  // namespace greenwalk
