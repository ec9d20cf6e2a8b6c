#ifndef BFF_H
#define BFF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BffStatus {
  BFF_STATUS_OK = 0,
  BFF_STATUS_NULL_POINTER = 1,
  BFF_STATUS_INVALID_ARGUMENT = 2,
  BFF_STATUS_DOMAIN = 3,
  BFF_STATUS_NON_CONVERGENCE = 4,
  BFF_STATUS_IO = 5,
  BFF_STATUS_PANIC = 6,
} BffStatus;

typedef enum BffDesign {
  BFF_DESIGN_ONE_SAMPLE_Z = 0,
  BFF_DESIGN_ONE_SAMPLE_T = 1,
  BFF_DESIGN_TWO_SAMPLE_Z = 2,
  BFF_DESIGN_TWO_SAMPLE_T = 3,
  BFF_DESIGN_MULTINOMIAL_CHISQ = 4,
  BFF_DESIGN_LIKELIHOOD_RATIO_CHISQ = 5,
  BFF_DESIGN_LINEAR_MODEL_F = 6,
} BffDesign;

typedef enum BffFamily {
  BFF_FAMILY_Z = 0,
  BFF_FAMILY_T = 1,
  BFF_FAMILY_CHISQ = 2,
  BFF_FAMILY_F = 3,
} BffFamily;

/**
 * Opaque curve handle; keeps its studies so thresholds can be refined later.
 */
typedef struct BffCurve BffCurve;

/**
 * Opaque study handle.
 */
typedef struct BffStudy BffStudy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *bff_last_error(void);

enum BffStatus bff_log_bf_z(double z, double tau2, double *out);

enum BffStatus bff_log_bf_t(double t, uint32_t nu, double tau2, double *out);

enum BffStatus bff_log_bf_chisq(double h, uint32_t k, double tau2, double *out);

enum BffStatus bff_log_bf_f(double f, uint32_t k, uint32_t m, double tau2, double *out);

/**
 * Prior scale τ² for `design` at effect size `omega >= 0`.
 */
enum BffStatus bff_tau2_for(enum BffDesign design,
                            uint32_t n,
                            uint32_t n1,
                            uint32_t n2,
                            uint32_t k,
                            double omega,
                            double *out);

/**
 * Build a study. For vector designs `k` = 0 means "same as df1".
 */
enum BffStatus bff_study_new(enum BffFamily family,
                             double value,
                             uint32_t df1,
                             uint32_t df2,
                             enum BffDesign design,
                             uint32_t n,
                             uint32_t n1,
                             uint32_t n2,
                             uint32_t k,
                             struct BffStudy **out);

void bff_study_free(struct BffStudy *study);

enum BffStatus bff_curve_evaluate(const struct BffStudy *study,
                                  double omega_min,
                                  double omega_max,
                                  size_t steps,
                                  struct BffCurve **out);

/**
 * Combined curve of `count` independent studies sharing one effect size.
 */
enum BffStatus bff_curve_combine(const struct BffStudy *const *studies,
                                 size_t count,
                                 double omega_min,
                                 double omega_max,
                                 size_t steps,
                                 struct BffCurve **out);

enum BffStatus bff_curve_len(const struct BffCurve *curve, size_t *out);

enum BffStatus bff_curve_point(const struct BffCurve *curve,
                               size_t index,
                               double *omega,
                               double *log_bf10);

enum BffStatus bff_curve_max(const struct BffCurve *curve,
                             double *argmax_omega,
                             double *max_log_bf);

/**
 * BF = 1 crossings. Writes up to `capacity` values into `buf` (which may be
 * NULL when `capacity` is 0) and the total count into `count`.
 */
enum BffStatus bff_curve_crossings(const struct BffCurve *curve,
                                   double *buf,
                                   size_t capacity,
                                   size_t *count);

/**
 * JSON export of a curve with crossings for `n_thresholds` BF values.
 * Free the returned string with [`bff_string_free`].
 */
enum BffStatus bff_curve_to_json(const struct BffCurve *curve,
                                 const double *thresholds,
                                 size_t n_thresholds,
                                 char **out);

void bff_string_free(char *s);

void bff_curve_free(struct BffCurve *curve);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BFF_H */
