#ifndef GRADLOAD_H
#define GRADLOAD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GlStatus {
  GL_STATUS_OK = 0,
  GL_STATUS_NULL_POINTER = 1,
  GL_STATUS_INVALID_ARGUMENT = 2,
  GL_STATUS_ZERO_VECTOR = 3,
  GL_STATUS_OUT_OF_RANGE = 4,
  GL_STATUS_BOUND_INVALID = 5,
  GL_STATUS_UNSUPPORTED = 6,
  GL_STATUS_BUFFER_TOO_SMALL = 7,
  GL_STATUS_IO = 8,
  GL_STATUS_PANIC = 9,
} GlStatus;

typedef enum GlMode {
  GL_MODE_AMPLIFY = 0,
  GL_MODE_POSTSELECT = 1,
} GlMode;

typedef enum GlVariant {
  GL_VARIANT_SANDERS_V1 = 0,
  GL_VARIANT_SANDERS_V2 = 1,
  GL_VARIANT_OURS_V1 = 2,
  GL_VARIANT_OURS_V2 = 3,
} GlVariant;

/**
 * Normalized nonnegative target amplitudes.
 */
typedef struct GlAmplitudes GlAmplitudes;

/**
 * Fixed-point amplitudes with `g` bits each.
 */
typedef struct GlQuantized GlQuantized;

/**
 * Outcome of a simulated loading run, with the conditional output state.
 */
typedef struct GlReport GlReport;

/**
 * Per-round gate counts. `toffoli_bound` is 0 when no bound applies.
 */
typedef struct GlTally {
  size_t toffoli;
  size_t toffoli_bound;
  size_t sqrt_swap;
  size_t t_gates;
  size_t cnot;
  size_t ancillas;
} GlTally;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *gl_last_error_message(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void gl_string_free(char *s);

/**
 * Normalizes `len` nonnegative values into a new handle.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be writable.
 */
enum GlStatus gl_amplitudes_new(const double *values, size_t len, struct GlAmplitudes **out);

/**
 * Generates a named test distribution. `param` is the power-law exponent
 * or the normal width and is ignored by the other families; `seed` is used
 * by `random`.
 *
 * # Safety
 * `family` must be a NUL-terminated string; `out` must be writable.
 */
enum GlStatus gl_amplitudes_generate(const char *family,
                                     size_t n,
                                     double param,
                                     uint64_t seed,
                                     struct GlAmplitudes **out);

/**
 * # Safety
 * `a` must be null or a handle from this library, freed at most once.
 */
void gl_amplitudes_free(struct GlAmplitudes *a);

/**
 * # Safety
 * `a` must be a live handle.
 */
size_t gl_amplitudes_len(const struct GlAmplitudes *a);

/**
 * Copies the normalized values into `out`, which holds `cap` doubles.
 *
 * # Safety
 * `a` must be a live handle and `out` writable for `cap` doubles.
 */
enum GlStatus gl_amplitudes_values(const struct GlAmplitudes *a, double *out, size_t cap);

/**
 * Rounds toward zero to `g` bits, optionally shifting the largest
 * amplitude's leading one into the first bit.
 *
 * # Safety
 * `a` must be a live handle; `out` must be writable.
 */
enum GlStatus gl_quantize(const struct GlAmplitudes *a,
                          size_t g,
                          bool shift,
                          struct GlQuantized **out);

/**
 * # Safety
 * `q` must be null or a handle from this library, freed at most once.
 */
void gl_quantized_free(struct GlQuantized *q);

/**
 * # Safety
 * `q` must be a live handle.
 */
size_t gl_quantized_n(const struct GlQuantized *q);

/**
 * # Safety
 * `q` must be a live handle.
 */
size_t gl_quantized_g(const struct GlQuantized *q);

/**
 * # Safety
 * `q` must be a live handle.
 */
uint32_t gl_quantized_shift(const struct GlQuantized *q);

/**
 * Copies the fixed-point values `A_i` into `out`.
 *
 * # Safety
 * `q` must be a live handle and `out` writable for `cap` doubles.
 */
enum GlStatus gl_quantized_values(const struct GlQuantized *q, double *out, size_t cap);

/**
 * Stage overlaps `lambda1` and `lambda2` in closed form.
 *
 * # Safety
 * `q` must be a live handle; both outputs writable.
 */
enum GlStatus gl_overlaps(const struct GlQuantized *q, double *lambda1, double *lambda2);

/**
 * Simulates the two-stage loader. `alpha` may be null; when given, the
 * report carries the runtime bounds.
 *
 * # Safety
 * `q` must be a live handle, `alpha` null or live, `out` writable.
 */
enum GlStatus gl_load_state(const struct GlQuantized *q,
                            const struct GlAmplitudes *alpha,
                            double delta1,
                            double delta2,
                            bool bootstrap,
                            enum GlMode mode,
                            struct GlReport **out);

/**
 * # Safety
 * `r` must be null or a handle from this library, freed at most once.
 */
void gl_report_free(struct GlReport *r);

/**
 * # Safety
 * `r` must be a live handle.
 */
double gl_report_final_fidelity(const struct GlReport *r);

/**
 * # Safety
 * `r` must be a live handle.
 */
uint64_t gl_report_total_oracle_calls(const struct GlReport *r);

/**
 * # Safety
 * `r` must be a live handle.
 */
size_t gl_report_state_len(const struct GlReport *r);

/**
 * Copies the conditional output state, split into real and imaginary
 * parts. The global phase is whatever the simulation produced.
 *
 * # Safety
 * `r` must be a live handle; `re` and `im` writable for `cap` doubles.
 */
enum GlStatus gl_report_state(const struct GlReport *r, double *re, double *im, size_t cap);

/**
 * Full report as JSON. Release with [`gl_string_free`].
 *
 * # Safety
 * `r` must be a live handle; `out` writable.
 */
enum GlStatus gl_report_to_json(const struct GlReport *r, char **out);

/**
 * Writes the `g` amplitudes `2^-(j+1)/2` of the gradient state scaled to
 * unit norm.
 *
 * # Safety
 * `out` must be writable for `cap` doubles.
 */
enum GlStatus gl_gradient_state(size_t g, double *out, size_t cap);

/**
 * Per-round resource counts of one construction at precision `g`.
 *
 * # Safety
 * `out` must be writable.
 */
enum GlStatus gl_resource_tally(enum GlVariant variant, size_t g, struct GlTally *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRADLOAD_H */
