#ifndef GRCIM_H
#define GRCIM_H

/* Generated by cbindgen from crates/grcim-ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum GrcimStatus {
  GRCIM_STATUS_OK = 0,
  GRCIM_STATUS_NULL_POINTER = 1,
  GRCIM_STATUS_INVALID_ARGUMENT = 2,
  GRCIM_STATUS_FORMAT = 3,
  GRCIM_STATUS_CONFIG = 4,
  GRCIM_STATUS_RANGE_VIOLATION = 5,
  GRCIM_STATUS_UNSATISFIABLE = 6,
  GRCIM_STATUS_CIRCUIT = 7,
  GRCIM_STATUS_PANIC = 8,
} GrcimStatus;

/**
 * Stage capacitance used when sizing coupling capacitors.
 */
typedef enum GrcimStage {
  GRCIM_STAGE_EXTENDED = 0,
  GRCIM_STAGE_MANTISSA = 1,
} GrcimStage;

/**
 * MAC architecture selector.
 */
typedef enum GrcimArch {
  GRCIM_ARCH_CONVENTIONAL = 0,
  GRCIM_ARCH_GAIN_RANGING_UNIT = 1,
  GRCIM_ARCH_GAIN_RANGING_ROW = 2,
  GRCIM_ARCH_GAIN_RANGING_INT_WEIGHTS = 3,
} GrcimArch;

/**
 * Opaque minifloat format.
 */
typedef struct GrcimFormat GrcimFormat;

/**
 * Opaque coupling-capacitor network.
 */
typedef struct GrcimNetwork GrcimNetwork;

/**
 * Opaque MAC result.
 */
typedef struct GrcimTrace GrcimTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null.
 *
 * The pointer stays valid until the next call into this library on the
 * same thread. Do not free it.
 */
const char *grcim_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *grcim_version(void);

/**
 * Creates a format with `n_e` exponent and `n_m` stored mantissa bits.
 *
 * # Safety
 * `out` must be valid for writing a pointer.
 */
enum GrcimStatus grcim_format_new(uint32_t n_e, uint32_t n_m, struct GrcimFormat **out);

/**
 * Parses a literal such as `"E2M1"`.
 *
 * # Safety
 * `literal` must be a valid NUL-terminated string and `out` valid for
 * writing a pointer.
 */
enum GrcimStatus grcim_format_parse(const char *literal, struct GrcimFormat **out);

/**
 * Releases a format. Null is ignored.
 *
 * # Safety
 * `fmt` must come from this library and not be used afterwards.
 */
void grcim_format_free(struct GrcimFormat *fmt);

/**
 * Exponent and stored mantissa widths.
 *
 * # Safety
 * `fmt` must be a live handle; `n_e` and `n_m` valid for writing.
 */
enum GrcimStatus grcim_format_bits(const struct GrcimFormat *fmt, uint32_t *n_e, uint32_t *n_m);

/**
 * Rounds `x` to the nearest representable value (ties to even, saturating).
 *
 * # Safety
 * `fmt` must be a live handle and `out` valid for writing.
 */
enum GrcimStatus grcim_format_round(const struct GrcimFormat *fmt, double x, double *out);

/**
 * Analytic quantization SQNR of the format in dB; NaN for a null handle.
 *
 * # Safety
 * `fmt` must be null or a live handle.
 */
double grcim_format_sqnr_db(const struct GrcimFormat *fmt);

/**
 * Sizes exponent-selected coupling capacitors with parasitic compensation.
 *
 * # Safety
 * `out` must be valid for writing a pointer.
 */
enum GrcimStatus grcim_network_new(uint32_t n_m_w,
                                   uint32_t e_max,
                                   double c_u,
                                   double c_p1,
                                   enum GrcimStage stage,
                                   struct GrcimNetwork **out);

/**
 * Releases a network. Null is ignored.
 *
 * # Safety
 * `net` must come from this library and not be used afterwards.
 */
void grcim_network_free(struct GrcimNetwork *net);

/**
 * Coupling capacitor for exponent `e_j`; infinity marks the direct
 * connection at the top exponent.
 *
 * # Safety
 * `net` must be a live handle and `out` valid for writing.
 */
enum GrcimStatus grcim_network_capacitance(const struct GrcimNetwork *net,
                                           uint32_t e_j,
                                           double *out);

/**
 * Gain of exponent `e_j` relative to the direct connection, from a charge
 * conservation solve.
 *
 * # Safety
 * `net` must be a live handle and `out` valid for writing.
 */
enum GrcimStatus grcim_network_gain(const struct GrcimNetwork *net, uint32_t e_j, double *out);

/**
 * Simulates one column dot product of `n` rows with an ideal ADC.
 *
 * Inputs are quantized to the given formats first. A negative
 * `gain_range_limit` disables the span check.
 *
 * # Safety
 * `x` and `w` must point to `n` readable doubles, the formats must be live
 * handles and `out` valid for writing a pointer.
 */
enum GrcimStatus grcim_mac(enum GrcimArch arch,
                           const struct GrcimFormat *x_fmt,
                           const struct GrcimFormat *w_fmt,
                           const double *x,
                           const double *w,
                           size_t n,
                           int32_t gain_range_limit,
                           struct GrcimTrace **out);

/**
 * Releases a trace. Null is ignored.
 *
 * # Safety
 * `trace` must come from this library and not be used afterwards.
 */
void grcim_trace_free(struct GrcimTrace *trace);

/**
 * Normalized column voltage seen by the ADC; NaN for a null handle.
 *
 * # Safety
 * `trace` must be null or a live handle.
 */
double grcim_trace_z_analog(const struct GrcimTrace *trace);

/**
 * Reconstructed dot product divided by the row count; NaN for null.
 *
 * # Safety
 * `trace` must be null or a live handle.
 */
double grcim_trace_z_digital(const struct GrcimTrace *trace);

/**
 * Effective number of contributors; NaN for null.
 *
 * # Safety
 * `trace` must be null or a live handle.
 */
double grcim_trace_n_eff(const struct GrcimTrace *trace);

/**
 * Smallest ENOB keeping ADC noise 6 dB under `target_db` for mean signal
 * power `p_z` on full scale +-1.
 */
double grcim_enob_for(double p_z, double target_db);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRCIM_H */
