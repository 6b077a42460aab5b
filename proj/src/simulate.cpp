#include "greenwalk/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "greenwalk/errors.hpp"
#include "greenwalk/numerics.hpp"
#include "greenwalk/parallel.hpp"

namespace greenwalk {

namespace {

void check_start(const JumpKernel& kernel, std::span<const double> x) {
  require(static_cast<int>(x.size()) == kernel.dim(), ErrorCode::kInvalidArgument,
          "start point dimension differs from kernel dimension");
  require(kernel.can_sample(), ErrorCode::kNotSupported, "kernel has no jump sampler");
}

std::size_t block_count(std::uint64_t n) { return (n + kPathsPerBlock - 1) / kPathsPerBlock; }

}  // namespace

std::span<const double> CppPath::at(double t) const {
  const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  if (it == jump_times.begin()) return start;
  return positions[static_cast<std::size_t>(it - jump_times.begin()) - 1];
}

void RunningStats::add(double x) noexcept {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& o) noexcept {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
  const double n = na + nb;
  const double delta = o.mean_ - mean_;
  mean_ = o.mean_ == mean_ ? mean_ : mean_ + delta * nb / n;
  m2_ += o.m2_ + delta * delta * na * nb / n;
  n_ += o.n_;
}

double RunningStats::variance() const noexcept {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::std_error() const noexcept {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

McEstimate block_monte_carlo(std::uint64_t n, std::uint64_t seed,
                             const std::function<double(Rng&)>& sample) {
  require(n >= 2, ErrorCode::kInvalidArgument, "Monte Carlo needs n >= 2");
  const std::size_t blocks = block_count(n);
  std::vector<RunningStats> stats(blocks);
  parallel_blocks(blocks, [&](std::size_t b) {
    Rng rng = substream(seed, b);
    const std::uint64_t begin = b * kPathsPerBlock;
    const std::uint64_t end = std::min<std::uint64_t>(n, begin + kPathsPerBlock);
    for (std::uint64_t i = begin; i < end; ++i) stats[b].add(sample(rng));
  });
  RunningStats total;
  for (const auto& s : stats) total.merge(s);
  return {total.mean(), total.std_error(), n, seed};
}

CppPath sample_cpp_path(const JumpKernel& kernel, std::span<const double> x, double T, Rng& rng) {
  require(T > 0.0 && std::isfinite(T), ErrorCode::kInvalidArgument, "horizon must be positive");
  check_start(kernel, x);
  CppPath path{Point(x.begin(), x.end()), {}, {}, T};
  walk_intervals(kernel, x, T, rng, [&](std::span<const double> pos, double t0, double) {
    if (t0 > 0.0) {
      path.jump_times.push_back(t0);
      path.positions.emplace_back(pos.begin(), pos.end());
    }
  });
  return path;
}

McEstimate mc_expectation(const JumpKernel& kernel, const CLFunction& f,
                          std::span<const double> x, double t, std::uint64_t n,
                          std::uint64_t seed) {
  require(t >= 0.0 && std::isfinite(t), ErrorCode::kInvalidArgument, "t must be >= 0");
  require(n >= 2, ErrorCode::kInvalidArgument, "Monte Carlo needs n >= 2");
  check_start(kernel, x);
  if (t == 0.0) return {f(x), 0.0, n, seed};
  return block_monte_carlo(n, seed, [&](Rng& rng) {
    double value = 0.0;
    walk_intervals(kernel, x, t, rng, [&](std::span<const double> pos, double, double t1) {
      if (t1 == t) value = f(pos);
    });
    return value;
  });
}

double sample_random_potential(const JumpKernel& kernel, const CLFunction& f,
                               std::span<const double> x, double T, Rng& rng) {
  require(T > 0.0 && std::isfinite(T), ErrorCode::kInvalidArgument, "horizon must be positive");
  check_start(kernel, x);
  // f_m T - sum_i (f_i - f_{i-1}) t_i
  NeumaierSum sum;
  double prev = 0.0;
  bool first = true;
  walk_intervals(kernel, x, T, rng, [&](std::span<const double> pos, double t0, double) {
    const double v = f(pos);
    if (first) {
      first = false;
    } else if (v != prev) {
      sum.add(-(v - prev) * t0);
    }
    prev = v;
  });
  sum.add(prev * T);
  return sum.value();
}

McEstimate mc_truncated_potential(const JumpKernel& kernel, const CLFunction& f,
                                  std::span<const double> x, double T, std::uint64_t n,
                                  std::uint64_t seed) {
  require(T > 0.0 && std::isfinite(T), ErrorCode::kInvalidArgument, "horizon must be positive");
  require(n >= 2, ErrorCode::kInvalidArgument, "Monte Carlo needs n >= 2");
  check_start(kernel, x);
  return block_monte_carlo(n, seed,
                           [&](Rng& rng) { return sample_random_potential(kernel, f, x, T, rng); });
}

BinSpec::BinSpec(std::vector<double> lower, double width, int per_axis)
    : lower_(std::move(lower)), width_(width), per_axis_(per_axis) {
  require(!lower_.empty(), ErrorCode::kInvalidDimension, "bins need d >= 1");
  require(width > 0.0 && per_axis >= 1, ErrorCode::kInvalidArgument,
          "bins need positive width and at least one cell per axis");
  size_ = 1;
  for (std::size_t a = 0; a < lower_.size(); ++a) size_ *= static_cast<std::size_t>(per_axis);
}

BinSpec BinSpec::centered(std::span<const double> center, double width, int per_axis) {
  std::vector<double> lower(center.begin(), center.end());
  for (double& v : lower) v -= 0.5 * width * per_axis;
  return BinSpec(std::move(lower), width, per_axis);
}

std::size_t BinSpec::index(std::span<const double> x) const noexcept {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < lower_.size(); ++a) {
    const double u = std::floor((x[a] - lower_[a]) / width_);
    if (!(u >= 0.0 && u < per_axis_)) return size_;
    flat = flat * static_cast<std::size_t>(per_axis_) + static_cast<std::size_t>(u);
  }
  return flat;
}

Point BinSpec::center(std::size_t bin) const {
  Point c(lower_.size());
  for (int a = dim() - 1; a >= 0; --a) {
    const auto i = bin % static_cast<std::size_t>(per_axis_);
    bin /= static_cast<std::size_t>(per_axis_);
    c[a] = lower_[a] + (static_cast<double>(i) + 0.5) * width_;
  }
  return c;
}

bool BinSpec::interior(std::size_t bin) const noexcept {
  for (int a = 0; a < dim(); ++a) {
    const auto i = bin % static_cast<std::size_t>(per_axis_);
    bin /= static_cast<std::size_t>(per_axis_);
    if (i == 0 || i + 1 == static_cast<std::size_t>(per_axis_)) return false;
  }
  return true;
}

double OccupationHistogram::total() const {
  return pairwise_sum(masses);
}

namespace {

// Deposits one path's holding intervals into masses (last slot = escape).
void deposit_path(const JumpKernel& kernel, std::span<const double> x, double T,
                  const BinSpec& bins, Rng& rng, std::vector<double>& masses) {
  walk_intervals(kernel, x, T, rng, [&](std::span<const double> pos, double t0, double t1) {
    masses[bins.index(pos)] += t1 - t0;
  });
}

void check_bins(const JumpKernel& kernel, std::span<const double> x, double T,
                const BinSpec& bins) {
  require(T > 0.0 && std::isfinite(T), ErrorCode::kInvalidArgument, "horizon must be positive");
  check_start(kernel, x);
  require(bins.dim() == kernel.dim(), ErrorCode::kInvalidDimension,
          "bin dimension differs from kernel dimension");
  require(bins.index(x) < bins.size(), ErrorCode::kInvalidArgument,
          "start point lies outside the binned box");
}

}  // namespace

OccupationHistogram empirical_random_green_measure(const JumpKernel& kernel,
                                                   std::span<const double> x, double T,
                                                   const BinSpec& bins, Rng& rng) {
  check_bins(kernel, x, T, bins);
  std::vector<double> m(bins.size() + 1, 0.0);
  deposit_path(kernel, x, T, bins, rng, m);
  OccupationHistogram h{bins, {}, std::vector<double>(bins.size(), 0.0), m.back(), T, 1, 0};
  m.pop_back();
  h.masses = std::move(m);
  return h;
}

OccupationHistogram block_histogram(const BinSpec& bins, double horizon, std::uint64_t n,
                                    std::uint64_t seed, const PathDeposit& deposit) {
  require(n >= 2, ErrorCode::kInvalidArgument, "Monte Carlo needs n >= 2");
  const std::size_t blocks = block_count(n);
  const std::size_t slots = bins.size() + 1;
  std::vector<std::vector<RunningStats>> stats(blocks, std::vector<RunningStats>(slots));
  parallel_blocks(blocks, [&](std::size_t b) {
    Rng rng = substream(seed, b);
    std::vector<double> m(slots);
    const std::uint64_t begin = b * kPathsPerBlock;
    const std::uint64_t end = std::min<std::uint64_t>(n, begin + kPathsPerBlock);
    for (std::uint64_t i = begin; i < end; ++i) {
      std::fill(m.begin(), m.end(), 0.0);
      deposit(rng, m);
      for (std::size_t s = 0; s < slots; ++s) stats[b][s].add(m[s]);
    }
  });
  OccupationHistogram h{bins, std::vector<double>(bins.size()), std::vector<double>(bins.size()),
                        0.0, horizon, n, seed};
  for (std::size_t s = 0; s < slots; ++s) {
    RunningStats total;
    for (std::size_t b = 0; b < blocks; ++b) total.merge(stats[b][s]);
    if (s < bins.size()) {
      h.masses[s] = total.mean();
      h.std_errors[s] = total.std_error();
    } else {
      h.escaped = total.mean();
    }
  }
  return h;
}

OccupationHistogram mc_random_green_measure(const JumpKernel& kernel, std::span<const double> x,
                                            double T, const BinSpec& bins, std::uint64_t n,
                                            std::uint64_t seed) {
  check_bins(kernel, x, T, bins);
  return block_histogram(bins, T, n, seed, [&](Rng& rng, std::vector<double>& m) {
    deposit_path(kernel, x, T, bins, rng, m);
  });
}

}  // namespace greenwalk
