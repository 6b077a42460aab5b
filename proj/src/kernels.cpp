#include "greenwalk/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "greenwalk/errors.hpp"
#include "greenwalk/numerics.hpp"

namespace greenwalk {

namespace {

using Definition = JumpKernel::Definition;

double norm_sq(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// Vose alias table over cell probabilities.
struct AliasTable {
  std::vector<double> prob;
  std::vector<std::size_t> alias;

  explicit AliasTable(std::span<const double> weights) {
    const std::size_t n = weights.size();
    prob.assign(n, 0.0);
    alias.assign(n, 0);
    const double total = pairwise_sum(weights);
    std::vector<double> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = weights[i] * static_cast<double>(n) / total;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back();
      small.pop_back();
      const std::size_t l = large.back();
      prob[s] = scaled[s];
      alias[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::size_t i : large) prob[i] = 1.0;
    for (std::size_t i : small) prob[i] = 1.0;
  }

  std::size_t draw(Rng& rng) const {
    std::uniform_int_distribution<std::size_t> pick(0, prob.size() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t i = pick(rng);
    return u(rng) < prob[i] ? i : alias[i];
  }
};

struct Table {
  GridSpec grid;
  std::vector<double> values;  // normalized density at nodes
  std::vector<std::size_t> support;
  AliasTable alias;

  Table(GridSpec g, std::vector<double> v)
      : grid(g), values(std::move(v)), alias(values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] != 0.0) support.push_back(i);
    }
  }

  // Nearest node, rounded symmetrically about the origin.
  double density(std::span<const double> x) const {
    const auto n = static_cast<long long>(grid.points_per_axis());
    std::size_t flat = 0;
    for (int a = 0; a < grid.dim(); ++a) {
      const long long j = n / 2 + std::llround(x[a] / grid.spacing());
      if (j < 0 || j >= n) return 0.0;
      flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
    }
    return values[flat];
  }

  template <class Term>
  double cosine_sum(std::span<const double> k, Term term) const {
    std::vector<double> terms;
    terms.reserve(support.size());
    Point x(grid.dim());
    for (std::size_t i : support) {
      grid.point(i, x);
      double phase = 0.0;
      for (int a = 0; a < grid.dim(); ++a) phase += k[a] * x[a];
      terms.push_back(values[i] * term(phase));
    }
    return grid.cell_volume() * pairwise_sum(terms);
  }
};

}  // namespace

JumpKernel JumpKernel::custom(Definition def) {
  require(def.dim >= 1, ErrorCode::kInvalidDimension, "kernel dimension must be >= 1");
  require(static_cast<bool>(def.density) && static_cast<bool>(def.fourier),
          ErrorCode::kInvalidKernel, "kernel needs density and fourier evaluators");
  if (def.tail) {
    require(def.tail->A > 0.0 && def.tail->alpha > 0.0 && def.tail->alpha <= 2.0,
            ErrorCode::kInvalidKernel, "tail parameters need A > 0 and alpha in (0, 2]");
  }
  return JumpKernel(std::make_shared<const Definition>(std::move(def)));
}

double JumpKernel::fourier_complement(std::span<const double> k) const {
  if (def_->complement) return def_->complement(k);
  return 1.0 - def_->fourier(k);
}

double JumpKernel::radial_fourier(double r) const {
  require(isotropic(), ErrorCode::kNotSupported, "kernel is not isotropic");
  return def_->radial_fourier(r);
}

double JumpKernel::radial_complement(double r) const {
  require(isotropic(), ErrorCode::kNotSupported, "kernel is not isotropic");
  if (def_->radial_complement) return def_->radial_complement(r);
  return 1.0 - def_->radial_fourier(r);
}

JumpKernel JumpKernel::with_tail_params(TailParams tail) const {
  Definition copy = *def_;
  copy.tail = tail;
  return custom(std::move(copy));
}

double JumpKernel::spectral_extent() const {
  if (def_->spectral_extent > 0.0) return def_->spectral_extent;
  double k = def_->fourier_cutoff > 0.0 ? def_->fourier_cutoff : 1.0;
  Point probe(dim(), 0.0);
  for (int i = 0; i < 200; ++i) {
    probe[0] = k;
    if (std::abs(fourier(probe)) < 1e-18) return k;
    k *= 1.25;
  }
  fail(ErrorCode::kQuadratureFailure, "kernel Fourier transform does not decay");
}

void JumpKernel::sample_jump(Rng& rng, std::span<double> out) const {
  require(can_sample(), ErrorCode::kNotSupported, "kernel has no jump sampler");
  def_->sampler(rng, out);
}

JumpKernel make_gaussian_kernel(int dim) {
  require(dim >= 1, ErrorCode::kInvalidDimension, "gaussian kernel needs d >= 1");
  Definition def;
  def.dim = dim;
  def.family = "gaussian";
  const double prefactor = std::pow(4.0 * std::numbers::pi, -0.5 * dim);
  def.density = [prefactor](std::span<const double> x) {
    return prefactor * std::exp(-0.25 * norm_sq(x));
  };
  def.fourier = [](std::span<const double> k) { return std::exp(-norm_sq(k)); };
  def.complement = [](std::span<const double> k) { return -std::expm1(-norm_sq(k)); };
  def.radial_fourier = [](double r) { return std::exp(-r * r); };
  def.radial_complement = [](double r) { return -std::expm1(-r * r); };
  def.tail = TailParams{1.0, 2.0};
  def.sampler = [](Rng& rng, std::span<double> out) {
    std::normal_distribution<double> g(0.0, std::numbers::sqrt2);
    for (double& v : out) v = g(rng);
  };
  def.fourier_cutoff = std::sqrt(-std::log(1e-6));
  def.spectral_extent = std::sqrt(-std::log(1e-18));
  return JumpKernel::custom(std::move(def));
}

JumpKernel make_cauchy_kernel() {
  Definition def;
  def.dim = 1;
  def.family = "cauchy";
  def.density = [](std::span<const double> x) {
    return 1.0 / (std::numbers::pi * (1.0 + x[0] * x[0]));
  };
  def.fourier = [](std::span<const double> k) { return std::exp(-std::abs(k[0])); };
  def.complement = [](std::span<const double> k) { return -std::expm1(-std::abs(k[0])); };
  def.radial_fourier = [](double r) { return std::exp(-r); };
  def.radial_complement = [](double r) { return -std::expm1(-r); };
  def.tail = TailParams{1.0, 1.0};
  def.sampler = [](Rng& rng, std::span<double> out) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    out[0] = std::tan(std::numbers::pi * (u(rng) - 0.5));
  };
  def.fourier_cutoff = -std::log(1e-6);
  def.spectral_extent = -std::log(1e-18);
  return JumpKernel::custom(std::move(def));
}

JumpKernel make_tabulated_kernel(const FieldGrid& samples) {
  const GridSpec& grid = samples.grid();
  std::vector<double> v(samples.values().begin(), samples.values().end());
  double vmax = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(v[i] >= 0.0, ErrorCode::kNegativeSample,
            "tabulated kernel has a negative sample at index " + std::to_string(i));
    vmax = std::max(vmax, v[i]);
  }
  require(vmax > 0.0, ErrorCode::kZeroMass, "tabulated kernel has zero total mass");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double m = v[grid.mirror_index(i)];
    require(std::abs(v[i] - m) <= 1e-9 * vmax, ErrorCode::kAsymmetricTable,
            "tabulated kernel is not even under x -> -x");
  }
  std::vector<double> sym(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sym[i] = 0.5 * (v[i] + v[grid.mirror_index(i)]);
  const double mass = grid.cell_volume() * pairwise_sum(sym);
  for (double& x : sym) x /= mass;
  auto table = std::make_shared<const Table>(grid, std::move(sym));

  Definition def;
  def.dim = grid.dim();
  def.family = "tabulated";
  def.params = {{"N", static_cast<double>(grid.points_per_axis())},
                {"L", grid.half_width()}};
  def.density = [table](std::span<const double> x) { return table->density(x); };
  def.fourier = [table](std::span<const double> k) {
    return table->cosine_sum(k, [](double p) { return std::cos(p); });
  };
  def.complement = [table](std::span<const double> k) {
    return table->cosine_sum(k, [](double p) {
      const double s = std::sin(0.5 * p);
      return 2.0 * s * s;
    });
  };
  if (grid.dim() == 1) {
    def.radial_fourier = [table](double r) {
      const double k[1] = {r};
      return table->cosine_sum(k, [](double p) { return std::cos(p); });
    };
    def.radial_complement = [table](double r) {
      const double k[1] = {r};
      return table->cosine_sum(k, [](double p) {
        const double s = std::sin(0.5 * p);
        return 2.0 * s * s;
      });
    };
  }
  def.sampler = [table](Rng& rng, std::span<double> out) {
    const std::size_t cell = table->alias.draw(rng);
    table->grid.point(cell, out);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    for (double& x : out) x += jitter(rng) * table->grid.spacing();
  };
  def.fourier_cutoff = std::numbers::pi / grid.spacing();
  def.spectral_extent = std::numbers::pi / grid.spacing();
  return JumpKernel::custom(std::move(def));
}

ExpansionFit fit_small_k_expansion(const JumpKernel& kernel, double k_min, double k_max,
                                   int n_probe) {
  require(k_min > 0.0 && k_max > k_min, ErrorCode::kInvalidArgument,
          "fit window needs 0 < k_min < k_max");
  require(n_probe >= 2, ErrorCode::kInvalidArgument, "fit needs at least two probes");
  std::vector<double> lx(n_probe), ly(n_probe);
  Point k(kernel.dim(), 0.0);
  const double step = std::log(k_max / k_min) / (n_probe - 1);
  for (int i = 0; i < n_probe; ++i) {
    const double r = k_min * std::exp(step * i);
    k[0] = r;
    const double c = kernel.fourier_complement(k);
    require(c > 0.0 && std::isfinite(c), ErrorCode::kDegenerateFit,
            "1 - a^(k) is not positive at probe |k| = " + std::to_string(r));
    lx[i] = std::log(r);
    ly[i] = std::log(c);
  }
  // log(1 - a^) = log A + alpha log k + c k; the k term absorbs the leading
  // correction so A and alpha are read off at k -> 0
  Eigen::MatrixXd M(n_probe, 3);
  Eigen::VectorXd y(n_probe);
  for (int i = 0; i < n_probe; ++i) {
    M(i, 0) = 1.0;
    M(i, 1) = lx[i];
    M(i, 2) = std::exp(lx[i]);
    y(i) = ly[i];
  }
  const Eigen::Vector3d coef = M.colPivHouseholderQr().solve(y);
  require(coef.allFinite(), ErrorCode::kDegenerateFit, "expansion fit is singular");
  const Eigen::VectorXd misfit = M * coef - y;
  double residual = 0.0;
  for (int i = 0; i < n_probe; ++i) residual = std::max(residual, std::abs(std::expm1(misfit(i))));
  return {std::exp(coef(0)), coef(1), residual};
}

double boundary_density(const JumpKernel& kernel, const GridSpec& grid) {
  require(kernel.dim() == grid.dim(), ErrorCode::kGridMismatch,
          "kernel and grid dimensions differ");
  double m = 0.0;
  Point x(grid.dim());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.on_boundary(i)) continue;
    grid.point(i, x);
    m = std::max(m, std::abs(kernel.density(x)));
  }
  return m;
}

KernelReport validate_kernel(const JumpKernel& kernel, const GridSpec& grid) {
  require(kernel.dim() == grid.dim(), ErrorCode::kGridMismatch,
          "kernel and grid dimensions differ");
  KernelReport r;
  const int d = grid.dim();
  Point x(d), mx(d);
  double sup = 0.0;
  r.min_density = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, x);
    for (int a = 0; a < d; ++a) mx[a] = -x[a];
    const double ax = kernel.density(x);
    r.symmetry_error = std::max(r.symmetry_error, std::abs(ax - kernel.density(mx)));
    r.min_density = std::min(r.min_density, ax);
    sup = std::max(sup, std::abs(ax));
  }
  r.symmetric = r.symmetry_error <= 1e-12 * std::max(1.0, sup);
  r.positive = r.min_density >= 0.0;

  Point k(d, 0.0);
  r.normalization_error = std::abs(kernel.fourier(k) - 1.0);
  r.normalized = r.normalization_error <= 1e-9;

  // Probes along the first axis and the main diagonal, up to the grid Nyquist.
  const std::size_t n = grid.points_per_axis();
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * grid.spacing());
  for (std::size_t j = 1; j <= n / 2; ++j) {
    std::fill(k.begin(), k.end(), 0.0);
    k[0] = dk * static_cast<double>(j);
    r.max_fourier_modulus = std::max(r.max_fourier_modulus, std::abs(kernel.fourier(k)));
    std::fill(k.begin(), k.end(), dk * static_cast<double>(j) / std::sqrt(double(d)));
    r.max_fourier_modulus = std::max(r.max_fourier_modulus, std::abs(kernel.fourier(k)));
  }
  r.bounded = r.max_fourier_modulus <= 1.0 + 1e-12;

  const double cutoff =
      kernel.fourier_cutoff() > 0.0 ? kernel.fourier_cutoff() : std::numbers::pi / grid.spacing();
  std::fill(k.begin(), k.end(), 0.0);
  k[0] = cutoff * 1.0001;
  r.decay_value = std::abs(kernel.fourier(k));
  r.decays = r.decay_value < 1e-6;

  r.boundary_density = boundary_density(kernel, grid);
  r.aliasing_ok = r.boundary_density < KernelOnGrid::kAliasingThreshold;
  return r;
}

KernelOnGrid::KernelOnGrid(const JumpKernel& kernel, const GridSpec& grid)
    : kernel_(kernel), spectral_(std::make_shared<const Spectral>(grid)) {
  const double b = boundary_density(kernel, grid);
  require(b < kAliasingThreshold, ErrorCode::kAliasingViolation,
          "kernel density at the box boundary is " + std::to_string(b) +
              " (needs < 1e-12); enlarge L");
  std::vector<double> wrapped(grid.size());
  Point x(grid.dim());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.wrapped_point(i, x);
    wrapped[i] = kernel.density(x);
  }
  const auto spec = spectral_->forward(wrapped);
  symbol_.resize(spec.size());
  for (std::size_t m = 0; m < spec.size(); ++m) symbol_[m] = grid.cell_volume() * spec[m].real();
}

FieldGrid KernelOnGrid::convolve(const FieldGrid& f) const {
  require(f.grid() == grid(), ErrorCode::kGridMismatch, "field grid differs from kernel grid");
  auto spec = spectral_->forward(f.values());
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] *= symbol_[m];
  return FieldGrid(grid(), spectral_->inverse(spec));
}

FieldGrid KernelOnGrid::power(int n) const {
  require(n >= 1, ErrorCode::kInvalidArgument, "convolution power needs n >= 1");
  std::vector<Complex> spec(symbol_.size());
  for (std::size_t m = 0; m < spec.size(); ++m) spec[m] = std::pow(symbol_[m], n);
  auto wrapped = spectral_->inverse(spec);
  const double inv_h = 1.0 / grid().cell_volume();
  for (double& v : wrapped) v *= inv_h;
  return FieldGrid(grid(), roll_half(grid(), wrapped));
}

FieldGrid convolve_power(const JumpKernel& kernel, int n, const GridSpec& grid) {
  require(n >= 1, ErrorCode::kInvalidArgument,
          "convolution power needs n >= 1 (n = 0 is a point mass)");
  return KernelOnGrid(kernel, grid).power(n);
}

}  // namespace greenwalk
