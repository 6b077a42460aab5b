#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "greenwalk/green.hpp"
#include "greenwalk/kernels.hpp"

namespace greenwalk {

/// One compound Poisson trajectory on [0, horizon].
/// positions[i] is the state on [jump_times[i], jump_times[i+1]).
struct CppPath {
  Point start;
  std::vector<double> jump_times;
  std::vector<Point> positions;
  double horizon;

  /// State at time t in [0, horizon].
  std::span<const double> at(double t) const;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Welford accumulator with Chan's pairwise merge.
class RunningStats {
 public:
  void add(double x) noexcept;
  void merge(const RunningStats& other) noexcept;
  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept;
  double std_error() const noexcept;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Streams the holding intervals of one path: visit(position, t0, t1) for
/// each interval of [0, T], the last one clipped at T. Draw order per jump
/// is holding time then displacement, so every functional sees the same path.
template <class Visit>
void walk_intervals(const JumpKernel& kernel, std::span<const double> x, double T, Rng& rng,
                    Visit&& visit) {
  std::exponential_distribution<double> hold(1.0);
  Point pos(x.begin(), x.end());
  Point jump(x.size());
  double t = 0.0;
  while (true) {
    const double next = t + hold(rng);
    if (next >= T) {
      visit(std::span<const double>(pos), t, T);
      return;
    }
    visit(std::span<const double>(pos), t, next);
    kernel.sample_jump(rng, jump);
    for (std::size_t a = 0; a < pos.size(); ++a) pos[a] += jump[a];
    t = next;
  }
}

CppPath sample_cpp_path(const JumpKernel& kernel, std::span<const double> x, double T, Rng& rng);

McEstimate mc_expectation(const JumpKernel& kernel, const CLFunction& f,
                          std::span<const double> x, double t, std::uint64_t n,
                          std::uint64_t seed);

/// int_0^T f(X(t)) dt along one path, summed by parts so constants are exact.
double sample_random_potential(const JumpKernel& kernel, const CLFunction& f,
                               std::span<const double> x, double T, Rng& rng);

McEstimate mc_truncated_potential(const JumpKernel& kernel, const CLFunction& f,
                                  std::span<const double> x, double T, std::uint64_t n,
                                  std::uint64_t seed);

/// Cubic bins: per_axis^d cells of side `width` starting at `lower`.
class BinSpec {
 public:
  BinSpec(std::vector<double> lower, double width, int per_axis);
  static BinSpec centered(std::span<const double> center, double width, int per_axis);

  int dim() const noexcept { return static_cast<int>(lower_.size()); }
  std::size_t size() const noexcept { return size_; }
  double width() const noexcept { return width_; }
  int per_axis() const noexcept { return per_axis_; }
  const std::vector<double>& lower() const noexcept { return lower_; }
  /// size() when x lies outside the binned box.
  std::size_t index(std::span<const double> x) const noexcept;
  Point center(std::size_t bin) const;
  /// True when the bin does not touch the outer layer of the box.
  bool interior(std::size_t bin) const noexcept;

 private:
  std::vector<double> lower_;
  double width_;
  int per_axis_;
  std::size_t size_;
};

struct OccupationHistogram {
  BinSpec bins;
  std::vector<double> masses;
  std::vector<double> std_errors;
  double escaped = 0.0;
  double horizon = 0.0;
  std::uint64_t n_paths = 1;
  std::uint64_t seed = 0;

  double total() const;
};

/// Occupation measure of a single path.
OccupationHistogram empirical_random_green_measure(const JumpKernel& kernel,
                                                   std::span<const double> x, double T,
                                                   const BinSpec& bins, Rng& rng);

/// Average of n single-path occupation measures, with per-bin standard errors.
OccupationHistogram mc_random_green_measure(const JumpKernel& kernel, std::span<const double> x,
                                            double T, const BinSpec& bins, std::uint64_t n,
                                            std::uint64_t seed);

/// Adds one path's masses into slots (bins.size() + 1, last = escape);
/// slots arrive zeroed.
using PathDeposit = std::function<void(Rng&, std::vector<double>&)>;

/// Per-bin means and standard errors over n paths, blocked like
/// block_monte_carlo.
OccupationHistogram block_histogram(const BinSpec& bins, double horizon, std::uint64_t n,
                                    std::uint64_t seed, const PathDeposit& deposit);

/// Shared Monte Carlo driver: sample(rng) returns one draw; paths are
/// grouped into fixed seeded blocks of kPathsPerBlock.
McEstimate block_monte_carlo(std::uint64_t n, std::uint64_t seed,
                             const std::function<double(Rng&)>& sample);

}  // namespace greenwalk
