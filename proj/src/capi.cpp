#include "greenwalk.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include <json.hpp>

#include "greenwalk/errors.hpp"
#include "greenwalk/experiments.hpp"
#include "greenwalk/green.hpp"
#include "greenwalk/io.hpp"
#include "greenwalk/kernels.hpp"
#include "greenwalk/parallel.hpp"
#include "greenwalk/renorm.hpp"
#include "greenwalk/simulate.hpp"
#include "greenwalk/subordinate.hpp"

using namespace greenwalk;
using nlohmann::json;

struct gw_kernel {
  JumpKernel k;
};
struct gw_grid {
  GridSpec g;
};
struct gw_field {
  FieldGrid f;
};
struct gw_resolvent {
  ResolventKernel r;
};
struct gw_function {
  CLFunction f;
};
struct gw_subordinator {
  SubordinatorSpec s;
};

namespace {

thread_local std::string last_error;

template <class Fn>
gw_status guarded(Fn&& fn) noexcept {
  try {
    last_error.clear();
    fn();
    return GW_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<gw_status>(static_cast<int>(e.code()));
  } catch (const json::exception& e) {
    last_error = e.what();
    return GW_CONFIG_ERROR;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return GW_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return GW_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown failure";
    return GW_INTERNAL_ERROR;
  }
}

void need(const void* p, const char* what) {
  require(p != nullptr, ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::span<const double> point(const double* x, int dim) {
  need(x, "x");
  return {x, static_cast<std::size_t>(dim)};
}

}  // namespace

extern "C" {

const char* gw_version(void) { return "0.1.0"; }

const char* gw_status_name(gw_status status) {
  if (status == GW_OK) return "Ok";
  if (status == GW_INTERNAL_ERROR) return "InternalError";
  if (status >= 1 && status <= 20) return error_code_name(static_cast<ErrorCode>(status));
  return "Unknown";
}

const char* gw_last_error(void) { return last_error.c_str(); }

gw_status gw_set_threads(int n) {
  return guarded([&] {
    require(n >= 1, ErrorCode::kInvalidArgument, "thread count must be >= 1");
    set_thread_count(n);
  });
}

void gw_string_free(char* s) { std::free(s); }

gw_status gw_kernel_gaussian(int dim, gw_kernel** out) {
  return guarded([&] {
    need(out, "out");
    *out = new gw_kernel{make_gaussian_kernel(dim)};
  });
}

gw_status gw_kernel_cauchy(gw_kernel** out) {
  return guarded([&] {
    need(out, "out");
    *out = new gw_kernel{make_cauchy_kernel()};
  });
}

gw_status gw_kernel_with_tail(const gw_kernel* k, double A, double alpha, gw_kernel** out) {
  return guarded([&] {
    need(k, "kernel");
    need(out, "out");
    *out = new gw_kernel{k->k.with_tail_params({A, alpha})};
  });
}

void gw_kernel_free(gw_kernel* k) { delete k; }

gw_status gw_kernel_dim(const gw_kernel* k, int* out) {
  return guarded([&] {
    need(k, "kernel");
    need(out, "out");
    *out = k->k.dim();
  });
}

gw_status gw_kernel_density(const gw_kernel* k, const double* x, double* out) {
  return guarded([&] {
    need(k, "kernel");
    need(out, "out");
    *out = k->k.density(point(x, k->k.dim()));
  });
}

gw_status gw_kernel_fit_expansion(const gw_kernel* k, double* A, double* alpha, double* residual) {
  return guarded([&] {
    need(k, "kernel");
    const auto fit = fit_small_k_expansion(k->k);
    if (A) *A = fit.A;
    if (alpha) *alpha = fit.alpha;
    if (residual) *residual = fit.residual;
  });
}

gw_status gw_kernel_green_existence(const gw_kernel* k, int* out) {
  return guarded([&] {
    need(k, "kernel");
    need(out, "out");
    *out = static_cast<int>(check_green_existence(k->k));
  });
}

gw_status gw_kernel_validate(const gw_kernel* k, const gw_grid* g, int* passed) {
  return guarded([&] {
    need(k, "kernel");
    need(g, "grid");
    need(passed, "out");
    *passed = validate_kernel(k->k, g->g).passed() ? 1 : 0;
  });
}

gw_status gw_grid_create(int dim, size_t n, double half_width, gw_grid** out) {
  return guarded([&] {
    need(out, "out");
    *out = new gw_grid{GridSpec(dim, n, half_width)};
  });
}

gw_status gw_grid_default(int dim, gw_grid** out) {
  return guarded([&] {
    need(out, "out");
    *out = new gw_grid{default_green_grid(dim)};
  });
}

void gw_grid_free(gw_grid* g) { delete g; }

gw_status gw_grid_size(const gw_grid* g, size_t* out) {
  return guarded([&] {
    need(g, "grid");
    need(out, "out");
    *out = g->g.size();
  });
}

void gw_field_free(gw_field* f) { delete f; }

gw_status gw_field_size(const gw_field* f, size_t* out) {
  return guarded([&] {
    need(f, "field");
    need(out, "out");
    *out = f->f.size();
  });
}

gw_status gw_field_values(const gw_field* f, double* out, size_t n) {
  return guarded([&] {
    need(f, "field");
    need(out, "out");
    const auto v = f->f.values();
    std::memcpy(out, v.data(), std::min(n, v.size()) * sizeof(double));
  });
}

gw_status gw_field_save(const gw_field* f, const char* path) {
  return guarded([&] {
    need(f, "field");
    need(path, "path");
    io::write_text(path, io::field_binary(f->f));
  });
}

gw_status gw_field_load(const char* path, gw_field** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new gw_field{io::parse_field_binary(io::read_text(path))};
  });
}

gw_status gw_convolve_power(const gw_kernel* k, int n, const gw_grid* g, gw_field** out) {
  return guarded([&] {
    need(k, "kernel");
    need(g, "grid");
    need(out, "out");
    *out = new gw_field{convolve_power(k->k, n, g->g)};
  });
}

gw_status gw_green_series(const gw_kernel* k, const gw_grid* g, double lambda, double tol,
                          gw_resolvent** out) {
  return guarded([&] {
    need(k, "kernel");
    need(g, "grid");
    need(out, "out");
    *out = new gw_resolvent{green_regular_series(k->k, g->g, lambda, tol)};
  });
}

void gw_resolvent_free(gw_resolvent* r) { delete r; }

gw_status gw_resolvent_regular_part(const gw_resolvent* r, gw_field** out) {
  return guarded([&] {
    need(r, "resolvent");
    need(out, "out");
    *out = new gw_field{r->r.regular_part};
  });
}

gw_status gw_resolvent_info(const gw_resolvent* r, double* singular_weight, int* n_terms,
                            double* tail_estimate) {
  return guarded([&] {
    need(r, "resolvent");
    if (singular_weight) *singular_weight = r->r.singular_weight;
    if (n_terms) *n_terms = r->r.n_terms;
    if (tail_estimate) *tail_estimate = r->r.tail_estimate;
  });
}

gw_status gw_green_fourier(const gw_kernel* k, const double* x, double lambda, double* out) {
  return guarded([&] {
    need(k, "kernel");
    need(out, "out");
    *out = green_regular_fourier(k->k, point(x, k->k.dim()), lambda);
  });
}

gw_status gw_function_kernel_density(const gw_kernel* k, gw_function** out) {
  return guarded([&] {
    need(k, "kernel");
    need(out, "out");
    *out = new gw_function{CLFunction::kernel_density(k->k)};
  });
}

gw_status gw_function_gaussian_bump(int dim, double amplitude, double width, gw_function** out) {
  return guarded([&] {
    need(out, "out");
    *out = new gw_function{CLFunction::gaussian_bump(dim, amplitude, width)};
  });
}

gw_status gw_function_constant(int dim, double c, gw_function** out) {
  return guarded([&] {
    need(out, "out");
    *out = new gw_function{CLFunction::constant(dim, c)};
  });
}

void gw_function_free(gw_function* f) { delete f; }

gw_status gw_potential(const gw_kernel* k, const gw_function* f, const double* x, double* out) {
  return guarded([&] {
    need(k, "kernel");
    need(f, "function");
    need(out, "out");
    *out = potential(k->k, f->f, point(x, k->k.dim()));
  });
}

gw_status gw_mc_truncated_potential(const gw_kernel* k, const gw_function* f, const double* x,
                                    double T, uint64_t n, uint64_t seed, double* mean,
                                    double* std_error) {
  return guarded([&] {
    need(k, "kernel");
    need(f, "function");
    const auto est = mc_truncated_potential(k->k, f->f, point(x, k->k.dim()), T, n, seed);
    if (mean) *mean = est.mean;
    if (std_error) *std_error = est.std_error;
  });
}

gw_status gw_subordinator_stable(double alpha, gw_subordinator** out) {
  return guarded([&] {
    need(out, "out");
    *out = new gw_subordinator{make_stable_subordinator(alpha)};
  });
}

gw_status gw_subordinator_gamma(double a, double b, gw_subordinator** out) {
  return guarded([&] {
    need(out, "out");
    *out = new gw_subordinator{make_gamma_subordinator(a, b)};
  });
}

void gw_subordinator_free(gw_subordinator* s) { delete s; }

gw_status gw_subordinator_k(const gw_subordinator* s, double t, double* out) {
  return guarded([&] {
    need(s, "subordinator");
    need(out, "out");
    *out = s->s.k(t);
  });
}

gw_status gw_subordinator_phi(const gw_subordinator* s, double lambda, double* out) {
  return guarded([&] {
    need(s, "subordinator");
    need(out, "out");
    *out = s->s.phi(lambda);
  });
}

gw_status gw_rho_density(const gw_subordinator* s, double t, double tau, double* out) {
  return guarded([&] {
    need(s, "subordinator");
    need(out, "out");
    *out = rho_density(s->s, t, tau);
  });
}

gw_status gw_subordinated_solution(const gw_kernel* k, const gw_subordinator* s,
                                   const gw_function* f, const double* x, double t, double* out) {
  return guarded([&] {
    need(k, "kernel");
    need(s, "subordinator");
    need(f, "function");
    need(out, "out");
    *out = subordinated_solution(k->k, s->s, f->f, point(x, k->k.dim()), t);
  });
}

gw_status gw_list_experiments(char** json_out) {
  return guarded([&] {
    need(json_out, "out");
    json arr = json::array();
    for (const auto& e : experiments::registry()) {
      arr.push_back({{"name", e.name},
                     {"doc", e.doc},
                     {"operations", e.operations},
                     {"stochastic", e.stochastic}});
    }
    *json_out = dup(arr.dump());
  });
}

gw_status gw_validate_config(const char* config_json, char** resolved_json) {
  return guarded([&] {
    need(config_json, "config");
    const json resolved = experiments::resolve_config(json::parse(config_json));
    if (resolved_json) *resolved_json = dup(resolved.dump(2));
  });
}

gw_status gw_run_experiment(const char* config_json, const char* out_dir, char** summary_json) {
  return guarded([&] {
    need(config_json, "config");
    const auto result =
        experiments::run(json::parse(config_json), out_dir ? out_dir : ".");
    if (summary_json) *summary_json = dup(result.summary.dump(2));
  });
}

}  // extern "C"
