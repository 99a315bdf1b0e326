#ifndef PT_CS_H
#define PT_CS_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum PtStatus {
  PT_STATUS_OK = 0,
  // An argument is outside the domain of the operation.
  PT_STATUS_DOMAIN = 1,
  // A computation failed to converge or produced non-finite values.
  PT_STATUS_NUMERIC = 2,
  PT_STATUS_NULL_POINTER = 3,
  // The output buffer is shorter than required.
  PT_STATUS_BUFFER_TOO_SMALL = 4,
  // Input string is not valid UTF-8.
  PT_STATUS_INVALID_STRING = 5,
  PT_STATUS_PANIC = 6,
} PtStatus;

// Potential parameters.
typedef struct PtParams PtParams;

// Result of one verification check.
typedef struct PtReport PtReport;

// A truncated Fock-space state.
typedef struct PtState PtState;

typedef struct PtVariances {
  double dw2;
  double dp2;
  double mean_g;
  double mean_f;
  // `dw2 * dp2 - (mean_g^2 + mean_f^2) / 4`.
  double rs_residual;
} PtVariances;

// Quadrature and truncation sizes for verification checks.
typedef struct PtSuiteConfig {
  size_t dim;
  size_t radial_nodes;
  size_t angular_nodes;
  size_t grid_nodes;
} PtSuiteConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *pt_last_error(void);

// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum PtStatus pt_params_new(double kappa,
                            double kappap,
                            double a,
                            double alpha,
                            struct PtParams **out);

// # Safety
// `params` must be null or a handle from `pt_params_new` not yet freed.
void pt_params_free(struct PtParams *params);

// `e_n = n (n + kappa + kappa')`.
//
// # Safety
// `params` must be a live handle and `out` writable.
enum PtStatus pt_energy(const struct PtParams *params, size_t n, double *out);

// Displacement state with label `zeta` (`|zeta| < 1`).
//
// # Safety
// `params` must be a live handle and `out` writable.
enum PtStatus pt_state_kp(const struct PtParams *params,
                          double zeta_re,
                          double zeta_im,
                          double alpha,
                          size_t dim,
                          struct PtState **out);

// Displacement state labelled by the displacement parameter `z`.
//
// # Safety
// `params` must be a live handle and `out` writable.
enum PtStatus pt_state_kp_from_z(const struct PtParams *params,
                                 double z_re,
                                 double z_im,
                                 double alpha,
                                 size_t dim,
                                 struct PtState **out);

// Annihilation eigenstate with eigenvalue `z`.
//
// # Safety
// `params` must be a live handle and `out` writable.
enum PtStatus pt_state_gk(const struct PtParams *params,
                          double z_re,
                          double z_im,
                          double alpha,
                          size_t dim,
                          struct PtState **out);

// Intelligent state solving `(W + i lambda P) psi = sqrt(2) z psi`.
//
// # Safety
// `params` must be a live handle and `out` writable.
enum PtStatus pt_state_is(const struct PtParams *params,
                          double z_re,
                          double z_im,
                          double lambda_re,
                          double lambda_im,
                          double alpha,
                          size_t dim,
                          struct PtState **out);

// # Safety
// `state` must be null or a live state handle.
void pt_state_free(struct PtState *state);

// Number of retained levels; 0 for a null handle.
//
// # Safety
// `state` must be null or a live state handle.
size_t pt_state_dim(const struct PtState *state);

// Upper bound on the probability mass beyond the last level; NaN for a null handle.
//
// # Safety
// `state` must be null or a live state handle.
double pt_state_tail_bound(const struct PtState *state);

// Copies the coefficients into `re[0..dim]` and `im[0..dim]`.
//
// # Safety
// `re` and `im` must each point to `len` writable doubles.
enum PtStatus pt_state_coefficients(const struct PtState *state,
                                    double *re,
                                    double *im,
                                    size_t len);

// New state `e^{-iHt}|state>`.
//
// # Safety
// `state` must be a live handle and `out` writable.
enum PtStatus pt_state_evolve(const struct PtState *state, double t, struct PtState **out);

// # Safety
// `state` must be a live handle and `out` writable.
enum PtStatus pt_state_variances(const struct PtState *state, struct PtVariances *out);

// Closed-form `<G>` of the annihilation eigenstate with `|z| = zmod`.
//
// # Safety
// `params` must be a live handle and `out` writable.
enum PtStatus pt_gk_mean_g(const struct PtParams *params, double zmod, double *out);

size_t pt_check_count(void);

// Static name of check `i`, or null when out of range.
const char *pt_check_name(size_t i);

struct PtSuiteConfig pt_suite_config_default(void);

// Runs check `name`. `config` may be null for the defaults.
//
// # Safety
// `params` must be a live handle, `name` a nul-terminated string, `config`
// null or valid, and `out` writable.
enum PtStatus pt_verify_run(const struct PtParams *params,
                            const char *name,
                            const struct PtSuiteConfig *config,
                            struct PtReport **out);

// # Safety
// `report` must be null or a live report handle.
void pt_report_free(struct PtReport *report);

// Check name, owned by the report.
//
// # Safety
// `report` must be null or a live report handle.
const char *pt_report_name(const struct PtReport *report);

// # Safety
// `report` must be null or a live report handle.
bool pt_report_passed(const struct PtReport *report);

// # Safety
// `report` must be null or a live report handle.
double pt_report_max_deviation(const struct PtReport *report);

// # Safety
// `report` must be null or a live report handle.
double pt_report_tolerance(const struct PtReport *report);

// # Safety
// `report` must be null or a live report handle.
size_t pt_report_detail_count(const struct PtReport *report);

// Detail `i` in key order. `key` receives a string owned by the report.
//
// # Safety
// `report` must be a live handle; `key` and `value` writable.
enum PtStatus pt_report_detail(const struct PtReport *report,
                               size_t i,
                               const char **key,
                               double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PT_CS_H */
