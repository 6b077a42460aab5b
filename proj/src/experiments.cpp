#include "greenwalk/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "greenwalk/errors.hpp"
#include "greenwalk/green.hpp"
#include "greenwalk/io.hpp"
#include "greenwalk/kernels.hpp"
#include "greenwalk/parallel.hpp"
#include "greenwalk/renorm.hpp"
#include "greenwalk/simulate.hpp"
#include "greenwalk/subordinate.hpp"

namespace greenwalk::experiments {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum Section : unsigned {
  kKernel = 1u << 0,
  kGrid = 1u << 1,
  kSubordinator = 1u << 2,
  kFunction = 1u << 3,
  kPoint = 1u << 4,
  kMc = 1u << 5,
  kHorizons = 1u << 6,
};

struct SectionName {
  Section bit;
  const char* key;
};

constexpr SectionName kSections[] = {
    {kKernel, "kernel"},     {kGrid, "grid"}, {kSubordinator, "subordinator"},
    {kFunction, "function"}, {kPoint, "point"}, {kMc, "mc"},
    {kHorizons, "horizons"},
};

class Context {
 public:
  json cfg;
  std::optional<JumpKernel> kernel;
  std::optional<GridSpec> grid;
  std::optional<SubordinatorSpec> sub;
  std::optional<CLFunction> f;
  Point x;
  fs::path prefix;
  std::string output;
  std::vector<fs::path> files;

  double num(const char* key) const { return cfg.at("params").at(key).get<double>(); }
  long integer(const char* key) const { return cfg.at("params").at(key).get<long>(); }
  double tol(const char* key) const { return cfg.at("tolerances").at(key).get<double>(); }
  double horizon() const { return cfg.at("horizons").at("T").get<double>(); }
  std::vector<double> horizon_grid() const {
    return cfg.at("horizons").at("T_grid").get<std::vector<double>>();
  }
  std::uint64_t n() const { return cfg.at("mc").at("n").get<std::uint64_t>(); }
  std::uint64_t seed() const { return cfg.at("mc").at("seed").get<std::uint64_t>(); }

  void write(const std::string& suffix, const std::string& content) {
    const fs::path p = prefix.string() + suffix;
    io::write_text(p, content);
    files.push_back(p);
  }
};

using Runner = json (*)(Context&);

struct Entry {
  ExperimentInfo info;
  unsigned sections = 0;
  const char* horizon_key = nullptr;  // "T" or "T_grid"
  json horizon_default;
  std::uint64_t mc_n = 0;
  json params = json::object();
  json tolerances = json::object();
  json example = json::object();  // merged over the defaults in example_config
  Runner run = nullptr;
};

// ---- config helpers ----

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::kConfigError, msg); }

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) config_error(where + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || k == a;
    if (!known) config_error("unknown key '" + k + "' in " + where);
  }
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) config_error(where + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_error(where + " must be finite");
  return v;
}

double positive(const json& j, const std::string& where) {
  const double v = number(j, where);
  if (!(v > 0.0)) config_error(where + " must be positive");
  return v;
}

std::uint64_t count(const json& j, const std::string& where) {
  if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<long long>() < 0))
    config_error(where + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

const json* member(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

// Merges user values over typed defaults; keys outside the defaults are errors.
json merge_typed(const json& defaults, const json* given, const std::string& where,
                 bool require_positive) {
  json out = defaults;
  if (!given) return out;
  if (!given->is_object()) config_error(where + " must be an object");
  for (const auto& [k, v] : given->items()) {
    auto it = defaults.find(k);
    if (it == defaults.end()) config_error("unknown key '" + k + "' in " + where);
    const std::string name = where + "." + k;
    if (it->is_boolean()) {
      if (!v.is_boolean()) config_error(name + " must be a boolean");
      out[k] = v;
    } else if (it->is_number_integer()) {
      if (!v.is_number_integer()) config_error(name + " must be an integer");
      out[k] = v;
    } else if (it->is_number()) {
      out[k] = number(v, name);
    } else if (it->is_array()) {
      if (!v.is_array()) config_error(name + " must be an array");
      json arr = json::array();
      for (const auto& e : v) arr.push_back(number(e, name + "[]"));
      out[k] = arr;
    } else {
      config_error(name + " has an unsupported type");
    }
    if (require_positive && !(out[k].get<double>() > 0.0)) config_error(name + " must be positive");
  }
  return out;
}

json resolve_kernel(const json* given) {
  json in = given ? *given : json::object();
  check_keys(in, {"family", "dim", "params"}, "kernel");
  const std::string family = in.value("family", std::string("gaussian"));
  if (family != "gaussian" && family != "cauchy")
    config_error("unknown kernel family '" + family + "' (registered: cauchy, gaussian)");
  const json* dj = member(in, "dim");
  const std::uint64_t dim = dj ? count(*dj, "kernel.dim") : (family == "cauchy" ? 1 : 3);
  if (dim < 1 || dim > 8) fail(ErrorCode::kInvalidDimension, "kernel.dim must lie in [1, 8]");
  if (family == "cauchy" && dim != 1)
    fail(ErrorCode::kInvalidDimension, "the cauchy kernel is one-dimensional");
  json params = json::object();
  if (const json* p = member(in, "params")) {
    check_keys(*p, {"A", "alpha"}, "kernel.params");
    if (p->contains("A") != p->contains("alpha"))
      config_error("kernel.params needs both A and alpha or neither");
    if (p->contains("A")) {
      params["A"] = positive(p->at("A"), "kernel.params.A");
      params["alpha"] = positive(p->at("alpha"), "kernel.params.alpha");
    }
  }
  return {{"family", family}, {"dim", dim}, {"params", params}};
}

JumpKernel build_kernel(const json& j) {
  const int dim = j.at("dim").get<int>();
  JumpKernel k = j.at("family") == "cauchy" ? make_cauchy_kernel() : make_gaussian_kernel(dim);
  const json& p = j.at("params");
  if (p.contains("A")) k = k.with_tail_params({p.at("A").get<double>(), p.at("alpha").get<double>()});
  return k;
}

json resolve_grid(const json* given, int dim) {
  const GridSpec def = default_green_grid(dim);
  json in = given ? *given : json::object();
  check_keys(in, {"N", "L"}, "grid");
  const json* nj = member(in, "N");
  const std::uint64_t N = nj ? count(*nj, "grid.N") : def.points_per_axis();
  const double L = member(in, "L") ? positive(in.at("L"), "grid.L") : def.half_width();
  if (N < 8) config_error("grid.N must be >= 8");
  return {{"N", N}, {"L", L}};
}

json resolve_function(const json* given) {
  json in = given ? *given : json::object();
  check_keys(in, {"family", "params"}, "function");
  const std::string family = in.value("family", std::string("kernel-density"));
  json defaults;
  if (family == "kernel-density" || family == "zero") {
    defaults = json::object();
  } else if (family == "constant") {
    defaults = {{"c", 1.0}};
  } else if (family == "gaussian-bump") {
    defaults = {{"amplitude", 1.0}, {"width", 1.0}};
  } else {
    config_error("unknown function family '" + family +
                 "' (registered: constant, gaussian-bump, kernel-density, zero)");
  }
  json params = merge_typed(defaults, member(in, "params"), "function.params", false);
  if (family == "gaussian-bump") positive(params.at("width"), "function.params.width");
  return {{"family", family}, {"params", params}};
}

CLFunction build_function(const json& j, const JumpKernel& kernel) {
  const std::string family = j.at("family");
  const json& p = j.at("params");
  const int dim = kernel.dim();
  if (family == "kernel-density") return CLFunction::kernel_density(kernel);
  if (family == "zero") return CLFunction::zero(dim);
  if (family == "constant") return CLFunction::constant(dim, p.at("c").get<double>());
  return CLFunction::gaussian_bump(dim, p.at("amplitude").get<double>(),
                                   p.at("width").get<double>());
}

json resolve_subordinator(const json* given) {
  json in = given ? *given : json::object();
  check_keys(in, {"family", "params"}, "subordinator");
  const std::string family = in.value("family", std::string("stable"));
  json defaults;
  if (family == "stable") {
    defaults = {{"alpha", 0.5}};
  } else if (family == "gamma") {
    defaults = {{"a", 1.0}, {"b", 1.0}};
  } else {
    config_error("unknown subordinator family '" + family + "' (registered: gamma, stable)");
  }
  json params = merge_typed(defaults, member(in, "params"), "subordinator.params", true);
  return {{"family", family}, {"params", params}};
}

json resolve_point(const json* given, int dim) {
  if (!given) return json(std::vector<double>(dim, 0.0));
  if (!given->is_array() || given->size() != static_cast<std::size_t>(dim))
    config_error("point must be an array of " + std::to_string(dim) + " numbers");
  json out = json::array();
  for (const auto& v : *given) out.push_back(number(v, "point[]"));
  return out;
}

json resolve_mc(const json* given, const Entry& e) {
  json in = given ? *given : json::object();
  check_keys(in, {"n", "seed"}, "mc");
  const json* nj = member(in, "n");
  const std::uint64_t n = nj ? count(*nj, "mc.n") : e.mc_n;
  if (n < 1) config_error("mc.n must be >= 1");
  json out = {{"n", n}};
  if (const json* s = member(in, "seed")) {
    out["seed"] = count(*s, "mc.seed");
  } else if (e.info.stochastic) {
    config_error("experiment '" + e.info.name + "' is stochastic and needs mc.seed");
  }
  return out;
}

json resolve_horizons(const json* given, const Entry& e) {
  json in = given ? *given : json::object();
  const std::string key = e.horizon_key;
  if (!in.is_object()) config_error("horizons must be an object");
  for (const auto& [k, v] : in.items()) {
    if (k != key) config_error("unknown key '" + k + "' in horizons (expected '" + key + "')");
  }
  const json* v = member(in, key.c_str());
  if (!v) return {{key, e.horizon_default}};
  if (key == "T") return {{key, positive(*v, "horizons.T")}};
  if (!v->is_array() || v->empty()) config_error("horizons.T_grid must be a non-empty array");
  json arr = json::array();
  double prev = 0.0;
  for (const auto& t : *v) {
    const double x = positive(t, "horizons.T_grid[]");
    if (x <= prev) config_error("horizons.T_grid must be strictly increasing");
    prev = x;
    arr.push_back(x);
  }
  return {{key, arr}};
}

const std::vector<Entry>& entries();

const Entry& entry(const std::string& name) {
  for (const auto& e : entries()) {
    if (e.info.name == name) return e;
  }
  fail(ErrorCode::kUnknownExperiment, "unknown experiment '" + name + "'; see `greenwalk list`");
}

Context build_context(const json& cfg, const fs::path& out_dir) {
  Context c;
  c.cfg = cfg;
  const Entry& e = entry(cfg.at("experiment"));
  if (e.sections & kKernel) c.kernel = build_kernel(cfg.at("kernel"));
  if (e.sections & kGrid) {
    c.grid = GridSpec(c.kernel->dim(), cfg.at("grid").at("N").get<std::size_t>(),
                      cfg.at("grid").at("L").get<double>());
  }
  if (e.sections & kSubordinator) c.sub = io::subordinator_from_json(cfg.at("subordinator"));
  if (e.sections & kFunction) c.f = build_function(cfg.at("function"), *c.kernel);
  if (e.sections & kPoint) c.x = cfg.at("point").get<std::vector<double>>();
  c.output = cfg.at("output").get<std::string>();
  const fs::path p(c.output);
  c.prefix = p.is_absolute() ? p : out_dir / p;
  return c;
}

// ---- shared pieces ----

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

std::size_t require_node(const GridSpec& g, std::span<const double> x) {
  const std::size_t idx = g.node_index(x);
  require(idx < g.size(), ErrorCode::kInvalidArgument, "point must be a grid node");
  return idx;
}

bool spectral_available(const JumpKernel& k, const CLFunction& f) {
  return k.isotropic() && f.has_fourier() && k.tail_params().has_value();
}

// ---- kernels ----

json run_validate_kernel(Context& c) {
  const auto& k = *c.kernel;
  const auto r = validate_kernel(k, *c.grid);
  const FieldGrid dens = FieldGrid::sample(*c.grid, [&](std::span<const double> x) {
    return k.density(x);
  });
  c.write(".csv", io::field_csv(dens, io::axis_line(*c.grid)));
  return {{"symmetry_error", r.symmetry_error},
          {"min_density", r.min_density},
          {"normalization_error", r.normalization_error},
          {"max_fourier_modulus", r.max_fourier_modulus},
          {"decay_value", r.decay_value},
          {"boundary_density", r.boundary_density},
          {"symmetric", r.symmetric},
          {"positive", r.positive},
          {"normalized", r.normalized},
          {"bounded", r.bounded},
          {"decays", r.decays},
          {"aliasing_ok", r.aliasing_ok},
          {"passed", r.passed()},
          {"green_existence", existence_name(check_green_existence(k))}};
}

json run_fit_expansion(Context& c) {
  const auto& k = *c.kernel;
  const double k_min = c.num("k_min"), k_max = c.num("k_max");
  const long n_probe = c.integer("n_probe");
  require(k_min > 0.0 && k_max > k_min, ErrorCode::kInvalidArgument, "need 0 < k_min < k_max");
  require(n_probe >= 2, ErrorCode::kInvalidArgument, "n_probe must be >= 2");
  const auto fit = fit_small_k_expansion(k, k_min, k_max, static_cast<int>(n_probe));
  io::CsvWriter csv({"k", "complement", "model"});
  Point kv(k.dim(), 0.0);
  for (long i = 0; i < n_probe; ++i) {
    const double r = k_min * std::pow(k_max / k_min, static_cast<double>(i) / (n_probe - 1));
    kv[0] = r;
    csv.row({r, k.fourier_complement(kv), fit.A * std::pow(r, fit.alpha)});
  }
  c.write(".csv", csv.str());
  json out = {{"A", fit.A}, {"alpha", fit.alpha}, {"residual", fit.residual}};
  if (const auto& tp = k.tail_params()) {
    out["declared"] = {{"A", tp->A}, {"alpha", tp->alpha}};
    out["rel_error_A"] = std::abs(fit.A / tp->A - 1.0);
    out["rel_error_alpha"] = std::abs(fit.alpha / tp->alpha - 1.0);
  }
  return out;
}

json run_convolve_power(Context& c) {
  const long n = c.integer("n");
  require(n >= 1, ErrorCode::kInvalidArgument, "params.n must be >= 1");
  const FieldGrid p = convolve_power(*c.kernel, static_cast<int>(n), *c.grid);
  c.write(".csv", io::field_csv(p, io::axis_line(*c.grid)));
  c.write(".bin", io::field_binary(p));
  return {{"n", n},
          {"integral", p.integral()},
          {"sup_norm", p.sup_norm()},
          {"at_origin", p[c.grid->center_index()]}};
}

// ---- green ----

json run_green_series(Context& c) {
  const auto g = green_regular_series(*c.kernel, *c.grid, c.num("lambda"), c.tol("tol"));
  c.write(".csv", io::field_csv(g.regular_part, io::axis_line(*c.grid)));
  c.write(".bin", io::field_binary(g.regular_part));
  const json meta = io::resolvent_metadata(g);
  c.write(".json", meta.dump(2) + "\n");
  json out = meta;
  out["at_origin"] = g.regular_part[c.grid->center_index()];
  return out;
}

json run_green_fourier(Context& c) {
  const long n = c.integer("n_points");
  require(n >= 1, ErrorCode::kInvalidArgument, "params.n_points must be >= 1");
  io::CsvWriter csv({"r", "G"});
  Point x(c.kernel->dim(), 0.0);
  double at_origin = kNaN;
  for (double r : linspace(0.0, c.num("r_max"), static_cast<std::size_t>(n))) {
    x[0] = r;
    const double g = green_regular_fourier(*c.kernel, x, c.num("lambda"));
    if (r == 0.0) at_origin = g;
    csv.row({r, g});
  }
  c.write(".csv", csv.str());
  return {{"at_origin", at_origin}};
}

json run_green_compare(Context& c) {
  const double lambda = c.num("lambda");
  const auto g = green_regular_series(*c.kernel, *c.grid, lambda, c.tol("tol"));
  const auto& grid = *c.grid;
  io::CsvWriter csv({"x", "G0_series", "G0_fourier", "rel_diff"});
  Point x(grid.dim());
  double max_rel = 0.0;
  for (std::size_t m : io::axis_line(grid)) {
    grid.point(m, x);
    if (x[0] < 0.0 || x[0] > c.num("r_max") + 1e-12) continue;
    const double s = g.regular_part[m];
    const double f = green_regular_fourier(*c.kernel, x, lambda);
    const double rel = std::abs(s - f) / std::abs(f);
    max_rel = std::max(max_rel, rel);
    csv.row({x[0], s, f, rel});
  }
  c.write(".csv", csv.str());
  return {{"max_rel_diff", max_rel},
          {"G0_origin", g.regular_part[grid.center_index()]},
          {"n_terms", g.n_terms},
          {"tail_estimate", g.tail_estimate}};
}

json run_potential(Context& c) {
  const auto& k = *c.kernel;
  const double value = potential(k, *c.f, c.x, *c.grid);
  PotentialOperator op(green_regular_series(k, *c.grid, 0.0, c.tol("tol")));
  const FieldGrid v = op.field(*c.f);
  c.write(".csv", io::field_csv(v, io::axis_line(*c.grid)));
  json out = {{"value", value}, {"cl_norm", cl_norm(*c.f)}};
  if (spectral_available(k, *c.f)) {
    const double s = potential_spectral(k, *c.f, c.x);
    out["spectral"] = s;
    out["rel_diff"] = std::abs(value / s - 1.0);
  }
  return out;
}

json run_semigroup(Context& c) {
  const auto& k = *c.kernel;
  KernelOnGrid op(k, *c.grid);
  const std::size_t node = require_node(*c.grid, c.x);
  const FieldGrid f0 = c.f->sample_on(*c.grid);
  const bool pointwise = k.isotropic() && c.f->has_fourier();
  io::CsvWriter csv({"t", "u_grid", "u_pointwise", "Lu"});
  double max_diff = 0.0;
  for (double t : c.horizon_grid()) {
    const FieldGrid u = evolve_semigroup(op, f0, t, c.tol("tol"));
    const double lu = apply_generator(op, u)[node];
    const double up = pointwise ? semigroup_pointwise(k, *c.f, t, c.x) : kNaN;
    if (pointwise) max_diff = std::max(max_diff, std::abs(u[node] - up));
    csv.row({t, u[node], up, lu});
  }
  c.write(".csv", csv.str());
  json out = json::object();
  if (pointwise) out["max_abs_diff"] = max_diff;
  return out;
}

// ---- simulate ----

json run_mc_expectation(Context& c) {
  const auto& k = *c.kernel;
  const bool exact = k.isotropic() && c.f->has_fourier();
  io::CsvWriter csv({"t", "mean", "std_error", "exact"});
  double worst = 0.0;
  for (double t : c.horizon_grid()) {
    const auto est = mc_expectation(k, *c.f, c.x, t, c.n(), c.seed());
    const double e = exact ? semigroup_pointwise(k, *c.f, t, c.x) : kNaN;
    if (exact && est.std_error > 0.0) worst = std::max(worst, std::abs(est.mean - e) / est.std_error);
    csv.row({t, est.mean, est.std_error, e});
  }
  c.write(".csv", csv.str());
  json out = json::object();
  if (exact) out["max_z_score"] = worst;
  return out;
}

json run_sample_path(Context& c) {
  const int d = c.kernel->dim();
  std::vector<std::string> header{"path", "t"};
  for (int a = 0; a < d; ++a) header.push_back("x" + std::to_string(a));
  io::CsvWriter csv(header);
  std::uint64_t jumps = 0;
  for (std::uint64_t p = 0; p < c.n(); ++p) {
    Rng rng = substream(c.seed(), p);
    const CppPath path = sample_cpp_path(*c.kernel, c.x, c.horizon(), rng);
    std::vector<double> row{static_cast<double>(p), 0.0};
    row.insert(row.end(), path.start.begin(), path.start.end());
    csv.row(row);
    for (std::size_t i = 0; i < path.jump_times.size(); ++i) {
      row = {static_cast<double>(p), path.jump_times[i]};
      row.insert(row.end(), path.positions[i].begin(), path.positions[i].end());
      csv.row(row);
    }
    jumps += path.jump_times.size();
  }
  c.write(".csv", csv.str());
  return {{"paths", c.n()},
          {"mean_jumps", static_cast<double>(jumps) / static_cast<double>(c.n())}};
}

json run_mc_potential(Context& c) {
  const auto& k = *c.kernel;
  const double target =
      spectral_available(k, *c.f) ? potential_spectral(k, *c.f, c.x) : potential(k, *c.f, c.x);
  io::CsvWriter csv({"T", "mean", "std_error", "tail_estimate", "corrected", "target", "rel_gap"});
  json last;
  for (double T : c.horizon_grid()) {
    const auto est = mc_truncated_potential(k, *c.f, c.x, T, c.n(), c.seed());
    const double tail = truncation_tail_estimate(k, *c.f, T);
    const double gap = std::abs(est.mean / target - 1.0);
    csv.row({T, est.mean, est.std_error, tail, est.mean + tail, target, gap});
    last = {{"T", T}, {"mean", est.mean}, {"std_error", est.std_error},
            {"tail_estimate", tail}, {"rel_gap", gap}};
  }
  c.write(".csv", csv.str());
  return {{"target", target}, {"final", last}};
}

json run_random_green(Context& c) {
  const auto& k = *c.kernel;
  const double T = c.horizon();
  const BinSpec bins =
      BinSpec::centered(c.x, c.num("bin_width"), static_cast<int>(c.integer("per_axis")));
  const auto g0 = green_regular_series(k, *c.grid, 0.0, c.tol("tol"));
  const auto h = mc_random_green_measure(k, c.x, T, bins, c.n(), c.seed());
  const std::size_t home = bins.index(c.x);
  io::CsvWriter cmp({"bin", "mass", "std_error", "oracle", "interior"});
  double worst = 0.0;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const Point ctr = bins.center(b);
    const double oracle = (b == home ? 1.0 : 0.0) + box_integral(g0.regular_part, ctr, bins.width());
    const bool interior = bins.interior(b);
    if (interior) worst = std::max(worst, std::abs(h.masses[b] / oracle - 1.0));
    cmp.row({static_cast<double>(b), h.masses[b], h.std_errors[b], oracle, interior ? 1.0 : 0.0});
  }
  c.write(".csv", io::histogram_csv(h));
  c.write(".json", io::histogram_metadata(h).dump(2) + "\n");
  c.write(".compare.csv", cmp.str());

  // one path on its own stream, for the mass identity
  Rng rng = substream(c.seed(), std::numeric_limits<std::uint64_t>::max());
  const auto one = empirical_random_green_measure(k, c.x, T, bins, rng);
  return {{"total", h.total()},
          {"escaped", h.escaped},
          {"max_interior_rel_gap", worst},
          {"single_path_mass_error", std::abs(one.total() + one.escaped - T)}};
}

// ---- subordinate ----

json limit_json(const LimitCheck& l) {
  return {{"name", l.name}, {"passed", l.passed}, {"monotone", l.monotone},
          {"at_zero", l.at_zero}, {"at_infinity", l.at_infinity}};
}

json run_subordinator_check(Context& c) {
  const auto& s = *c.sub;
  const HReport h = check_H(s);
  const AdmissibleReport a = check_admissible(s, c.num("s0"));
  io::CsvWriter csv({"lambda", "a1_value"});
  for (std::size_t i = 0; i < a.a1_lambdas.size(); ++i) csv.row({a.a1_lambdas[i], a.a1_values[i]});
  c.write(".csv", csv.str());
  c.write(".subordinator.json", io::subordinator_json(s).dump(2) + "\n");
  json limits = json::array();
  for (const auto& l : h.limits) limits.push_back(limit_json(l));
  return {{"H", {{"limits", limits},
                 {"completely_monotone", h.completely_monotone},
                 {"cm_max_order", h.cm_max_order},
                 {"passed", h.passed}}},
          {"admissible", {{"s0", a.s0},
                          {"a1_estimate", a.a1_estimate},
                          {"a1_passed", a.a1_passed},
                          {"a2_horizon", a.a2_horizon},
                          {"a2_quotients", a.a2_quotients},
                          {"a2_ratios", a.a2_ratios},
                          {"a2_passed", a.a2_passed},
                          {"passed", a.passed}}}};
}

json run_inverse_subordinator(Context& c) {
  const auto& s = *c.sub;
  const double t = c.horizon(), ds = c.num("ds");
  const std::uint64_t n = c.n();
  std::vector<double> samples(n);
  const std::size_t blocks = (n + kPathsPerBlock - 1) / kPathsPerBlock;
  parallel_blocks(blocks, [&](std::size_t b) {
    Rng rng = substream(c.seed(), b);
    const std::uint64_t hi = std::min<std::uint64_t>(n, (b + 1) * kPathsPerBlock);
    for (std::uint64_t i = b * kPathsPerBlock; i < hi; ++i) {
      samples[i] = sample_inverse_subordinator(s, t, ds, rng).value;
    }
  });
  io::CsvWriter csv({"sample", "D"});
  RunningStats stats;
  for (std::uint64_t i = 0; i < n; ++i) {
    csv.row({static_cast<double>(i), samples[i]});
    stats.add(samples[i]);
  }
  c.write(".csv", csv.str());

  const long n_levels = c.integer("path_levels");
  require(n_levels >= 1, ErrorCode::kInvalidArgument, "params.path_levels must be >= 1");
  std::vector<double> levels(static_cast<std::size_t>(n_levels));
  for (long i = 0; i < n_levels; ++i) levels[i] = t * static_cast<double>(i + 1) / n_levels;
  Rng prng = substream(c.seed(), std::numeric_limits<std::uint64_t>::max());
  const auto path = sample_inverse_subordinator_path(s, levels, ds, prng);
  io::CsvWriter pcsv({"level", "D"});
  for (std::size_t i = 0; i < levels.size(); ++i) pcsv.row({levels[i], path[i]});
  c.write(".path.csv", pcsv.str());

  json out = {{"mean", stats.mean()}, {"std_error", stats.std_error()}, {"n", n}};
  if (s.is_stable()) {
    const double a = s.stable_alpha();
    out["exact_mean"] = std::pow(t, a) / boost::math::tgamma(1.0 + a);
    if (a == 0.5) {
      std::sort(samples.begin(), samples.end());
      double ks = 0.0;
      for (std::uint64_t i = 0; i < n; ++i) {
        const double F = std::erf(samples[i] / (2.0 * std::sqrt(t)));
        ks = std::max({ks, std::abs(F - static_cast<double>(i) / n),
                       std::abs(F - static_cast<double>(i + 1) / n)});
      }
      out["ks_distance"] = ks;
    }
  }
  return out;
}

json run_rho(Context& c) {
  const RhoDensity rho(*c.sub);
  const long n_tau = c.integer("n_tau");
  require(n_tau >= 2, ErrorCode::kInvalidArgument, "params.n_tau must be >= 2");
  const auto taus = linspace(0.0, c.num("tau_max"), static_cast<std::size_t>(n_tau));
  io::CsvWriter csv({"t", "tau", "rho"});
  json mass = json::array();
  for (double t : c.horizon_grid()) {
    double m = 0.0, prev = 0.0;
    for (std::size_t j = 0; j < taus.size(); ++j) {
      const double r = rho(t, taus[j]);
      if (j) m += 0.5 * (r + prev) * (taus[j] - taus[j - 1]);
      prev = r;
      csv.row({t, taus[j], r});
    }
    mass.push_back(m);
  }
  c.write(".csv", csv.str());
  return {{"method", rho.method() == RhoMethod::kClosedForm ? "closed-form" : "laplace-inversion"},
          {"trapezoid_mass", mass}};
}

json run_time_average(Context& c) {
  const double tau = c.num("tau");
  io::CsvWriter csv({"t", "M_rho", "M_k", "ratio", "gap"});
  json gaps = json::array();
  for (double t : c.horizon_grid()) {
    const auto a = time_averaged_ratio(*c.sub, tau, t);
    const double gap = std::abs(a.ratio - 1.0);
    gaps.push_back(gap);
    csv.row({t, a.M_rho, a.M_k, a.ratio, gap});
  }
  c.write(".csv", csv.str());
  bool decreasing = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    decreasing = decreasing && gaps[i].get<double>() < gaps[i - 1].get<double>();
  }
  return {{"gaps", gaps}, {"decreasing", decreasing}};
}

json run_gfd(Context& c) {
  const double dt = c.num("dt"), t_max = c.num("t_max"), p = c.num("power");
  require(dt > 0.0 && t_max > dt, ErrorCode::kInvalidArgument, "need 0 < dt < t_max");
  require(p >= 0.0, ErrorCode::kInvalidArgument, "params.power must be >= 0");
  const auto n = static_cast<std::size_t>(std::llround(t_max / dt)) + 1;
  const auto k = sample_memory_kernel(*c.sub, dt, n);
  std::vector<double> f(n);
  for (std::size_t j = 0; j < n; ++j) f[j] = std::pow(static_cast<double>(j) * dt, p);
  const auto g = gfd_apply(k, f);
  const bool oracle = c.sub->is_stable();
  const double a = oracle ? c.sub->stable_alpha() : 0.0;
  const double coef =
      oracle ? boost::math::tgamma(p + 1.0) / boost::math::tgamma(p + 1.0 - a) : kNaN;
  io::CsvWriter csv({"t", "gfd", "oracle"});
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * dt;
    csv.row({t, g[j], oracle ? coef * std::pow(t, p - a) : kNaN});
  }
  c.write(".csv", csv.str());
  const double tn = static_cast<double>(n - 1) * dt;
  json out = {{"final_t", tn}, {"final_value", g.back()}};
  if (oracle) {
    const double o = coef * std::pow(tn, p - a);
    out["final_oracle"] = o;
    out["final_rel_error"] = std::abs(g.back() / o - 1.0);
  }
  return out;
}

// ---- renorm ----

json run_subordinate_solve(Context& c) {
  SubordinationOptions opts;
  opts.tol = c.tol("tol");
  io::CsvWriter csv({"t", "v", "mc_mean", "mc_std_error"});
  double worst = 0.0;
  for (double t : c.horizon_grid()) {
    const double v = subordinated_solution(*c.kernel, *c.sub, *c.f, c.x, t, opts);
    const auto est = mc_time_changed_expectation(*c.kernel, *c.sub, *c.f, c.x, t, c.n(), c.seed(),
                                                 c.num("ds"));
    if (est.std_error > 0.0) worst = std::max(worst, std::abs(est.mean - v) / est.std_error);
    csv.row({t, v, est.mean, est.std_error});
  }
  c.write(".csv", csv.str());
  return {{"max_z_score", worst}};
}

json run_renorm_curve(Context& c) {
  RenormOptions opts;
  opts.s0 = c.num("s0");
  opts.gap_threshold = c.num("gap_threshold");
  const auto Ts = c.horizon_grid();
  const auto curve = renormalized_potential_curve(*c.kernel, *c.sub, *c.f, c.x, Ts, opts);
  c.write(".csv", io::renorm_csv(curve));
  return {{"target", curve.target},
          {"integrals", curve.integrals},
          {"final_rel_gap", curve.rel_gaps.back()},
          {"gap_trend_decreasing", curve.gap_trend_decreasing},
          {"final_below_threshold", curve.final_below_threshold}};
}

json run_renorm_histogram(Context& c) {
  const BinSpec bins =
      BinSpec::centered(c.x, c.num("bin_width"), static_cast<int>(c.integer("per_axis")));
  const auto h = renormalized_green_histogram(*c.kernel, *c.sub, c.x, c.horizon(), bins, c.n(),
                                              c.seed(), c.num("s0"));
  c.write(".csv", io::histogram_csv(h));
  c.write(".json", io::histogram_metadata(h).dump(2) + "\n");
  return {{"total", h.total()},
          {"escaped", h.escaped},
          {"N", normalization_N(*c.sub, c.horizon())}};
}

json run_fke_residual(Context& c) {
  const double dt = c.num("dt"), t_max = c.num("t_max");
  require(dt > 0.0 && t_max > dt, ErrorCode::kInvalidArgument, "need 0 < dt < t_max");
  const auto n = static_cast<std::size_t>(std::llround(t_max / dt)) + 1;
  std::vector<double> ts(n);
  for (std::size_t j = 0; j < n; ++j) ts[j] = static_cast<double>(j) * dt;
  const auto r = fke_residual(*c.kernel, *c.sub, *c.f, c.x, ts, c.num("window"));
  io::CsvWriter csv({"t", "v", "lhs", "rhs", "residual"});
  for (std::size_t j = 0; j < n; ++j) {
    csv.row({r.t_grid[j], r.v[j], r.lhs[j], r.rhs[j], std::abs(r.lhs[j] - r.rhs[j])});
  }
  c.write(".csv", csv.str());
  return {{"max_residual", r.max_residual}, {"window_start", r.window_start}};
}

// ---- registry ----

const std::vector<Entry>& entries() {
  static const std::vector<Entry> all = [] {
    std::vector<Entry> v;
    auto add = [&](Entry e) { v.push_back(std::move(e)); };
    const json small_grid3 = {{"grid", {{"N", 32}, {"L", 20.0}}}};

    add({{"convolve-power", "n-fold convolution power of the jump kernel on a grid",
          {"convolve_power", "KernelOnGrid", "field_binary", "field_csv"}, false},
         kKernel | kGrid, nullptr, nullptr, 0, {{"n", 2}}, json::object(), small_grid3,
         run_convolve_power});
    add({{"fit-expansion", "fit of 1 - a^(k) ~ A |k|^alpha at small frequencies",
          {"fit_small_k_expansion", "fourier_complement"}, false},
         kKernel, nullptr, nullptr, 0, {{"k_min", 1e-3}, {"k_max", 5e-2}, {"n_probe", 64}},
         json::object(), json::object(), run_fit_expansion});
    add({{"fke-residual", "residual of the fractional Kolmogorov equation for the time change",
          {"fke_residual", "gfd_apply", "sample_memory_kernel", "subordinated_solution",
           "apply_generator", "evolve_semigroup", "require_renormalization_hypotheses"},
          false},
         kKernel | kSubordinator | kFunction | kPoint, nullptr, nullptr, 0,
         {{"dt", 0.02}, {"t_max", 2.0}, {"window", 0.1}}, json::object(),
         {{"kernel", {{"family", "gaussian"}, {"dim", 1}}}}, run_fke_residual});
    add({{"gfd", "generalized fractional derivative of t^p by product integration",
          {"sample_memory_kernel", "gfd_apply"}, false},
         kSubordinator, nullptr, nullptr, 0, {{"dt", 1e-3}, {"t_max", 1.0}, {"power", 1.0}},
         json::object(), json::object(), run_gfd});
    add({{"green-compare", "regular Green kernel: Neumann series against Fourier quadrature",
          {"green_regular_series", "green_regular_fourier", "require_green_existence"}, false},
         kKernel | kGrid, nullptr, nullptr, 0, {{"lambda", 0.0}, {"r_max", 3.0}},
         {{"tol", 1e-10}}, small_grid3, run_green_compare});
    add({{"green-fourier", "regular Green kernel by radial Fourier quadrature",
          {"green_regular_fourier", "check_green_existence"}, false},
         kKernel, nullptr, nullptr, 0, {{"lambda", 0.0}, {"r_max", 3.0}, {"n_points", 13}},
         json::object(), json::object(), run_green_fourier});
    add({{"green-series", "regular Green kernel by the truncated Neumann series",
          {"green_regular_series", "KernelOnGrid", "resolvent_metadata", "field_binary"}, false},
         kKernel | kGrid, nullptr, nullptr, 0, {{"lambda", 0.0}}, {{"tol", 1e-10}}, small_grid3,
         run_green_series});
    add({{"inverse-subordinator", "samples of the inverse subordinator D(t) on a step grid",
          {"sample_inverse_subordinator", "sample_inverse_subordinator_path", "sample_increment"},
          true},
         kSubordinator | kMc | kHorizons, "T", 1.0, 10000, {{"ds", 1e-3}, {"path_levels", 10}},
         json::object(), {{"mc", {{"n", 2000}, {"seed", 1}}}}, run_inverse_subordinator});
    add({{"mc-expectation", "Monte Carlo E f(X(t)) against the Fourier semigroup",
          {"mc_expectation", "block_monte_carlo", "semigroup_pointwise"}, true},
         kKernel | kFunction | kPoint | kMc | kHorizons, "T_grid", json{0.5, 1.0, 2.0}, 10000,
         json::object(), json::object(), {{"mc", {{"n", 1000}, {"seed", 1}}}},
         run_mc_expectation});
    add({{"mc-potential", "Monte Carlo truncated potential against V(x, f)",
          {"mc_truncated_potential", "sample_random_potential", "truncation_tail_estimate",
           "potential_spectral", "potential"},
          true},
         kKernel | kFunction | kPoint | kMc | kHorizons, "T_grid", json{50.0, 100.0, 200.0}, 10000,
         json::object(), json::object(), {{"mc", {{"n", 1000}, {"seed", 1}}}}, run_mc_potential});
    add({{"potential", "potential V(x, f) = int E f(X(t)) dt on the Green grid",
          {"potential", "PotentialOperator", "potential_spectral", "cl_norm",
           "require_green_existence"},
          false},
         kKernel | kGrid | kFunction | kPoint, nullptr, nullptr, 0, json::object(),
         {{"tol", 1e-10}}, small_grid3, run_potential});
    add({{"random-green", "averaged occupation histograms against delta + G_0",
          {"mc_random_green_measure", "empirical_random_green_measure", "block_histogram",
           "green_regular_series", "box_integral"},
          true},
         kKernel | kGrid | kPoint | kMc | kHorizons, "T", 200.0, 2000,
         {{"bin_width", 1.25}, {"per_axis", 7}}, {{"tol", 1e-10}},
         {{"grid", {{"N", 32}, {"L", 20.0}}}, {"mc", {{"n", 200}, {"seed", 1}}}},
         run_random_green});
    add({{"renorm-curve", "renormalized potential (1/N(T)) int_0^T v ds against V(x, f)",
          {"renormalized_potential_curve", "normalization_N", "capped_subordinator_mean",
           "require_renormalization_hypotheses", "check_H", "check_admissible", "potential"},
          false},
         kKernel | kSubordinator | kFunction | kPoint | kHorizons, "T_grid",
         json{1e3, 1e4, 1e5, 1e6, 1e7}, 0, {{"s0", 1.0}, {"gap_threshold", 0.05}},
         json::object(), json::object(), run_renorm_curve});
    add({{"renorm-histogram", "occupation histogram of the time-changed walk divided by N(T)",
          {"renormalized_green_histogram", "capped_subordinator_mean", "normalization_N",
           "walk_intervals"},
          true},
         kKernel | kSubordinator | kPoint | kMc | kHorizons, "T", 1e4, 1000,
         {{"s0", 1.0}, {"bin_width", 1.25}, {"per_axis", 7}}, json::object(),
         {{"mc", {{"n", 200}, {"seed", 1}}}}, run_renorm_histogram});
    add({{"rho", "density of D(t): closed form or Talbot inversion",
          {"RhoDensity", "rho_density", "talbot_inverse"}, false},
         kSubordinator | kHorizons, "T_grid", json{0.5, 1.0, 2.0}, 0,
         {{"tau_max", 4.0}, {"n_tau", 41}}, json::object(), json::object(), run_rho});
    add({{"sample-path", "compound Poisson trajectories (jump times and states)",
          {"sample_cpp_path", "walk_intervals", "sample_jump"}, true},
         kKernel | kPoint | kMc | kHorizons, "T", 10.0, 1, json::object(), json::object(),
         {{"mc", {{"n", 3}, {"seed", 1}}}}, run_sample_path});
    add({{"semigroup", "u(t, x) = E f(X(t)) on the grid and by Fourier inversion",
          {"evolve_semigroup", "apply_generator", "semigroup_pointwise"}, false},
         kKernel | kGrid | kFunction | kPoint | kHorizons, "T_grid", json{0.5, 1.0, 2.0}, 0,
         json::object(), {{"tol", 1e-12}}, small_grid3, run_semigroup});
    add({{"subordinate-solve", "v(t, x) by subordination against time-changed Monte Carlo",
          {"subordinated_solution", "mc_time_changed_expectation", "rho_density",
           "sample_inverse_subordinator"},
          true},
         kKernel | kSubordinator | kFunction | kPoint | kMc | kHorizons, "T_grid",
         json{0.5, 1.0, 2.0}, 2000, {{"ds", 0.0}}, {{"tol", 1e-9}},
         {{"mc", {{"n", 200}, {"seed", 1}}}}, run_subordinate_solve});
    add({{"subordinator-check", "assumption H limits and admissibility of k",
          {"check_H", "check_admissible", "subordinator_json"}, false},
         kSubordinator, nullptr, nullptr, 0, {{"s0", 1.0}}, json::object(), json::object(),
         run_subordinator_check});
    add({{"time-average", "time-averaged rho_t(tau) against time-averaged k(t)",
          {"time_averaged_ratio", "rho_density", "normalization_N"}, false},
         kSubordinator | kHorizons, "T_grid", json{1e2, 1e3, 1e4}, 0, {{"tau", 1.0}},
         json::object(), json::object(), run_time_average});
    add({{"validate-kernel", "symmetry, positivity, normalization and aliasing of the kernel",
          {"validate_kernel", "boundary_density", "check_green_existence", "field_csv"}, false},
         kKernel | kGrid, nullptr, nullptr, 0, json::object(), json::object(), small_grid3,
         run_validate_kernel});
    std::sort(v.begin(), v.end(),
              [](const Entry& a, const Entry& b) { return a.info.name < b.info.name; });
    return v;
  }();
  return all;
}

}  // namespace

std::vector<ExperimentInfo> registry() {
  std::vector<ExperimentInfo> out;
  for (const auto& e : entries()) out.push_back(e.info);
  return out;
}

const ExperimentInfo& find(const std::string& name) { return entry(name).info; }

json resolve_config(const json& config) {
  check_keys(config,
             {"schema", "experiment", "kernel", "grid", "subordinator", "function", "point", "mc",
              "horizons", "tolerances", "params", "output"},
             "config");
  const json* schema = member(config, "schema");
  if (!schema || !schema->is_string()) config_error("config needs \"schema\": \"" + std::string(kSchema) + "\"");
  if (*schema != kSchema) {
    config_error("unsupported schema '" + schema->get<std::string>() + "' (expected " + kSchema + ")");
  }
  const json* name = member(config, "experiment");
  if (!name || !name->is_string()) config_error("config needs a string 'experiment'");
  const Entry& e = entry(*name);

  for (const auto& s : kSections) {
    if (!(e.sections & s.bit) && config.contains(s.key)) {
      config_error("section '" + std::string(s.key) + "' is not used by experiment '" +
                   e.info.name + "'");
    }
  }

  json out = {{"schema", kSchema}, {"experiment", e.info.name}};
  int dim = 0;
  if (e.sections & kKernel) {
    out["kernel"] = resolve_kernel(member(config, "kernel"));
    dim = out["kernel"]["dim"].get<int>();
  }
  if (e.sections & kGrid) out["grid"] = resolve_grid(member(config, "grid"), dim);
  if (e.sections & kSubordinator) out["subordinator"] = resolve_subordinator(member(config, "subordinator"));
  if (e.sections & kFunction) out["function"] = resolve_function(member(config, "function"));
  if (e.sections & kPoint) out["point"] = resolve_point(member(config, "point"), dim);
  if (e.sections & kMc) out["mc"] = resolve_mc(member(config, "mc"), e);
  if (e.sections & kHorizons) out["horizons"] = resolve_horizons(member(config, "horizons"), e);
  out["params"] = merge_typed(e.params, member(config, "params"), "params", false);
  out["tolerances"] = merge_typed(e.tolerances, member(config, "tolerances"), "tolerances", true);

  if (const json* o = member(config, "output")) {
    if (!o->is_string() || o->get<std::string>().empty()) config_error("output must be a non-empty string");
    out["output"] = *o;
  } else {
    out["output"] = e.info.name;
  }
  return out;
}

json example_config(const std::string& name) {
  const Entry& e = entry(name);
  json cfg = {{"schema", kSchema}, {"experiment", e.info.name}};
  cfg.update(e.example);
  return resolve_config(cfg);
}

RunResult run(const json& config, const fs::path& out_dir) {
  const json cfg = resolve_config(config);
  const Entry& e = entry(cfg.at("experiment"));
  Context c = build_context(cfg, out_dir);
  if (c.prefix.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(c.prefix.parent_path(), ec);
    if (ec) fail(ErrorCode::kIoError, "cannot create " + c.prefix.parent_path().string());
  }
  json result = e.run(c);
  c.write(".manifest.json", cfg.dump(2) + "\n");

  json outputs = json::array();
  for (const auto& p : c.files) outputs.push_back(c.output + p.string().substr(c.prefix.string().size()));
  outputs.push_back(c.output + ".summary.json");
  json summary = {{"experiment", e.info.name}, {"result", result}, {"outputs", outputs}};
  c.write(".summary.json", summary.dump(2) + "\n");
  return {summary, c.files};
}

std::string listing() {
  std::size_t width = 0;
  for (const auto& e : entries()) width = std::max(width, e.info.name.size());
  std::ostringstream os;
  for (const auto& e : entries()) {
    os << e.info.name << std::string(width - e.info.name.size() + 2, ' ') << e.info.doc << '\n';
  }
  return os.str();
}

}  // namespace greenwalk::experiments
