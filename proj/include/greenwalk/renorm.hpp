#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "greenwalk/green.hpp"
#include "greenwalk/kernels.hpp"
#include "greenwalk/simulate.hpp"
#include "greenwalk/subordinate.hpp"

namespace greenwalk {

struct SubordinationOptions {
  // absolute, relative to sup |f|
  double tol = 1e-9;
};

/// v(t, x) = int_0^inf u(tau, x) rho_t(tau) dtau.
double subordinated_solution(const JumpKernel& kernel, const SubordinatorSpec& spec,
                             const CLFunction& f, std::span<const double> x, double t,
                             const SubordinationOptions& opts = {});

/// Mean of f(X(D(t))) over n replicas; D(t) drawn on the grid of step ds
/// (0 picks 1e-3 t).
McEstimate mc_time_changed_expectation(const JumpKernel& kernel, const SubordinatorSpec& spec,
                                       const CLFunction& f, std::span<const double> x, double t,
                                       std::uint64_t n, std::uint64_t seed, double ds = 0.0);

/// N(T) = int_0^T k(s) ds.
double normalization_N(const SubordinatorSpec& spec, double T);

/// E[min(S(tau), T)], the expected real time spent before operational time tau.
double capped_subordinator_mean(const SubordinatorSpec& spec, double tau, double T);

struct RenormCurve {
  std::vector<double> T_grid;
  std::vector<double> N_values;
  std::vector<double> integrals;  // int_0^T v(s, x) ds
  std::vector<double> values;     // integrals / N
  std::vector<double> rel_gaps;   // |value / target - 1|
  double target = 0.0;
  double gap_threshold = 0.05;
  bool gap_trend_decreasing = false;
  bool final_below_threshold = false;
};

struct RenormOptions {
  double s0 = 1.0;
  double gap_threshold = 0.05;
};

/// Checks the renormalization hypotheses: existence of the Green measure
/// of X, assumption H and admissibility of k. Throws on failure.
void require_renormalization_hypotheses(const JumpKernel& kernel, const SubordinatorSpec& spec,
                                        double s0 = 1.0);

RenormCurve renormalized_potential_curve(const JumpKernel& kernel, const SubordinatorSpec& spec,
                                         const CLFunction& f, std::span<const double> x,
                                         std::span<const double> T_grid,
                                         const RenormOptions& opts = {});

/// Expected occupation of Z in the bins over [0, T] given each X path,
/// divided by N(T). Deposits are exact conditional means over S.
OccupationHistogram renormalized_green_histogram(const JumpKernel& kernel,
                                                 const SubordinatorSpec& spec,
                                                 std::span<const double> x, double T,
                                                 const BinSpec& bins, std::uint64_t n,
                                                 std::uint64_t seed, double s0 = 1.0);

struct FkeResidual {
  std::vector<double> t_grid;
  std::vector<double> v;
  std::vector<double> lhs;  // generalized fractional derivative of v
  std::vector<double> rhs;  // (L v)(t, x)
  double window_start = 0.0;
  double max_residual = 0.0;
};

/// Residual of D_t^(k) v = L v at x on a uniform time grid starting at 0.
/// Only times >= window * t_max enter the maximum.
FkeResidual fke_residual(const JumpKernel& kernel, const SubordinatorSpec& spec,
                         const CLFunction& f, std::span<const double> x,
                         std::span<const double> t_grid, double window = 0.1);

}  // namespace greenwalk
