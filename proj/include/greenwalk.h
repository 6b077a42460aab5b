#ifndef GREENWALK_H
#define GREENWALK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define GW_API __declspec(dllexport)
#else
#  define GW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status values match the library error codes and the CLI exit codes. */
typedef enum gw_status {
  GW_OK = 0,
  GW_INVALID_ARGUMENT = 1,
  GW_INVALID_DIMENSION = 2,
  GW_GRID_MISMATCH = 3,
  GW_ALIASING_VIOLATION = 4,
  GW_DIVERGENT_GREEN_MEASURE = 5,
  GW_UNKNOWN_TAIL_PARAMS = 6,
  GW_NEGATIVE_SAMPLE = 7,
  GW_ASYMMETRIC_TABLE = 8,
  GW_ZERO_MASS = 9,
  GW_DEGENERATE_FIT = 10,
  GW_TRUNCATION_CAP = 11,
  GW_QUADRATURE_FAILURE = 12,
  GW_INVERSION_INSTABILITY = 13,
  GW_STEP_CAP_EXCEEDED = 14,
  GW_ADMISSIBILITY_FAILURE = 15,
  GW_INVALID_KERNEL = 16,
  GW_NOT_SUPPORTED = 17,
  GW_CONFIG_ERROR = 18,
  GW_UNKNOWN_EXPERIMENT = 19,
  GW_IO_ERROR = 20,
  GW_INTERNAL_ERROR = 99
} gw_status;

typedef struct gw_kernel gw_kernel;
typedef struct gw_grid gw_grid;
typedef struct gw_field gw_field;
typedef struct gw_resolvent gw_resolvent;
typedef struct gw_function gw_function;
typedef struct gw_subordinator gw_subordinator;

GW_API const char* gw_version(void);
GW_API const char* gw_status_name(gw_status status);
/* Message of the last failure on this thread ("" if none). */
GW_API const char* gw_last_error(void);
GW_API gw_status gw_set_threads(int n);
GW_API void gw_string_free(char* s);

/* Kernels. Points are arrays of length gw_kernel_dim. */
GW_API gw_status gw_kernel_gaussian(int dim, gw_kernel** out);
GW_API gw_status gw_kernel_cauchy(gw_kernel** out);
GW_API gw_status gw_kernel_with_tail(const gw_kernel* k, double A, double alpha, gw_kernel** out);
GW_API void gw_kernel_free(gw_kernel* k);
GW_API gw_status gw_kernel_dim(const gw_kernel* k, int* out);
GW_API gw_status gw_kernel_density(const gw_kernel* k, const double* x, double* out);
GW_API gw_status gw_kernel_fit_expansion(const gw_kernel* k, double* A, double* alpha,
                                         double* residual);
/* 0 exists, 1 divergent, 2 unknown. */
GW_API gw_status gw_kernel_green_existence(const gw_kernel* k, int* out);
GW_API gw_status gw_kernel_validate(const gw_kernel* k, const gw_grid* g, int* passed);

/* Grids and fields. */
GW_API gw_status gw_grid_create(int dim, size_t n, double half_width, gw_grid** out);
GW_API gw_status gw_grid_default(int dim, gw_grid** out);
GW_API void gw_grid_free(gw_grid* g);
GW_API gw_status gw_grid_size(const gw_grid* g, size_t* out);

GW_API void gw_field_free(gw_field* f);
GW_API gw_status gw_field_size(const gw_field* f, size_t* out);
/* Copies min(n, size) values in lexicographic order. */
GW_API gw_status gw_field_values(const gw_field* f, double* out, size_t n);
GW_API gw_status gw_field_save(const gw_field* f, const char* path);
GW_API gw_status gw_field_load(const char* path, gw_field** out);
GW_API gw_status gw_convolve_power(const gw_kernel* k, int n, const gw_grid* g, gw_field** out);

/* Green kernels. */
GW_API gw_status gw_green_series(const gw_kernel* k, const gw_grid* g, double lambda, double tol,
                                 gw_resolvent** out);
GW_API void gw_resolvent_free(gw_resolvent* r);
GW_API gw_status gw_resolvent_regular_part(const gw_resolvent* r, gw_field** out);
GW_API gw_status gw_resolvent_info(const gw_resolvent* r, double* singular_weight, int* n_terms,
                                   double* tail_estimate);
GW_API gw_status gw_green_fourier(const gw_kernel* k, const double* x, double lambda, double* out);

/* Test functions and potentials. */
GW_API gw_status gw_function_kernel_density(const gw_kernel* k, gw_function** out);
GW_API gw_status gw_function_gaussian_bump(int dim, double amplitude, double width,
                                           gw_function** out);
GW_API gw_status gw_function_constant(int dim, double c, gw_function** out);
GW_API void gw_function_free(gw_function* f);
GW_API gw_status gw_potential(const gw_kernel* k, const gw_function* f, const double* x,
                              double* out);
GW_API gw_status gw_mc_truncated_potential(const gw_kernel* k, const gw_function* f,
                                           const double* x, double T, uint64_t n, uint64_t seed,
                                           double* mean, double* std_error);

/* Subordinators. */
GW_API gw_status gw_subordinator_stable(double alpha, gw_subordinator** out);
GW_API gw_status gw_subordinator_gamma(double a, double b, gw_subordinator** out);
GW_API void gw_subordinator_free(gw_subordinator* s);
GW_API gw_status gw_subordinator_k(const gw_subordinator* s, double t, double* out);
GW_API gw_status gw_subordinator_phi(const gw_subordinator* s, double lambda, double* out);
GW_API gw_status gw_rho_density(const gw_subordinator* s, double t, double tau, double* out);
GW_API gw_status gw_subordinated_solution(const gw_kernel* k, const gw_subordinator* s,
                                          const gw_function* f, const double* x, double t,
                                          double* out);

/* Experiments. JSON strings returned through char** are freed with gw_string_free. */
GW_API gw_status gw_list_experiments(char** json_out);
GW_API gw_status gw_validate_config(const char* config_json, char** resolved_json);
/* out_dir may be NULL (current directory). */
GW_API gw_status gw_run_experiment(const char* config_json, const char* out_dir,
                                   char** summary_json);

#ifdef __cplusplus
}
#endif

#endif
