#ifndef BERNCONV_H
#define BERNCONV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BcPreset {
  BC_PRESET_GOLDEN = 0,
  BC_PRESET_PLASTIC_INV = 1,
  BC_PRESET_PISOT_X4 = 2,
  BC_PRESET_SALEM_X5 = 3,
  BC_PRESET_SQRT2 = 4,
  BC_PRESET_CBRT2 = 5,
} BcPreset;

/**
 * Result of every fallible call.
 */
typedef enum BcStatus {
  BC_STATUS_OK = 0,
  BC_STATUS_INVALID_PARAMETER = 1,
  BC_STATUS_RESOURCE = 2,
  BC_STATUS_INTEGRITY = 3,
  BC_STATUS_PRECISION = 4,
  BC_STATUS_INTERNAL = 5,
  BC_STATUS_NULL_POINTER = 6,
  BC_STATUS_PANIC = 7,
} BcStatus;

typedef enum BcVerdict {
  BC_VERDICT_CERTIFIED = 0,
  BC_VERDICT_REFUTED = 1,
  BC_VERDICT_INCONCLUSIVE = 2,
} BcVerdict;

/**
 * Opaque tent-map envelope.
 */
typedef struct BcEnvelope BcEnvelope;

/**
 * Opaque sorted half-sum table.
 */
typedef struct BcTable BcTable;

/**
 * Flat view of a convexity certificate. `witness` is meaningful only when
 * `has_witness` is set; `checked_first > checked_last` means nothing was
 * checked.
 */
typedef struct BcCertificate {
  double lambda0;
  double eps;
  uint32_t depth;
  uint32_t grid;
  enum BcVerdict verdict;
  double scale;
  bool has_witness;
  uint32_t witness;
  double witness_x;
  double min_margin;
  uint32_t checked_first;
  uint32_t checked_last;
  bool exists_witness;
} BcCertificate;

typedef struct BcRychlik {
  double lambda;
  uint32_t n;
  double min_cyl;
  double var_bound;
  double sup_bound;
} BcRychlik;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *bc_last_error(void);

/**
 * Default slack `η` for depth `L`; `NaN` for `L > 64`.
 */
double bc_default_eta(uint32_t depth);

/**
 * # Safety
 * `out` must be valid for a write of one `double`.
 */
enum BcStatus bc_preset_lambda(enum BcPreset preset, double *out);

/**
 * Builds the half-sum table for `λ ∈ (0, 1)` at even depth `L`.
 *
 * # Safety
 * `out` must be valid for a write of one pointer. On success `*out` owns a
 * table that must be released with [`bc_table_free`].
 */
enum BcStatus bc_table_build(double lambda, uint32_t depth, double eta, struct BcTable **out);

/**
 * # Safety
 * `table` must be null or a pointer from [`bc_table_build`] not yet freed.
 */
void bc_table_free(struct BcTable *table);

/**
 * Number of digit strings of length `L` whose normalized sum is `≤ x`.
 *
 * # Safety
 * `table` must be a live table and `out` valid for one `uint64_t`.
 */
enum BcStatus bc_table_count_le(const struct BcTable *table, double x, uint64_t *out);

/**
 * Dyadic bounds `lower/2^L ≤ F_λ(x) ≤ upper/2^L` at the table's `λ`.
 *
 * # Safety
 * `table` must be a live table; `lower` and `upper` valid for one
 * `uint64_t` each.
 */
enum BcStatus bc_cdf_bounds(const struct BcTable *table,
                            double x,
                            uint64_t *lower,
                            uint64_t *upper);

/**
 * Envelope of `φ_λ` on the grid `i/M` for every `λ ∈ [λ − ε, λ + ε]`,
 * where `λ` is the table's parameter.
 *
 * # Safety
 * `table` must be a live table and `out` valid for one pointer. On success
 * `*out` must be released with [`bc_envelope_free`].
 */
enum BcStatus bc_envelope_build(const struct BcTable *table,
                                double eps,
                                uint32_t grid,
                                double rho,
                                struct BcEnvelope **out);

/**
 * # Safety
 * `env` must be null or a pointer from [`bc_envelope_build`] not yet freed.
 */
void bc_envelope_free(struct BcEnvelope *env);

/**
 * Bracket at grid index `i ∈ 0..=M`.
 *
 * # Safety
 * `env` must be a live envelope; `lo` and `hi` valid for one `double` each.
 */
enum BcStatus bc_envelope_bracket(const struct BcEnvelope *env, uint32_t i, double *lo, double *hi);

/**
 * # Safety
 * `env` must be a live envelope and `out` valid for one [`BcCertificate`].
 */
enum BcStatus bc_envelope_certify(const struct BcEnvelope *env, struct BcCertificate *out);

/**
 * Point convexity check with default `η` and `ρ`.
 *
 * # Safety
 * `out` must be valid for one [`BcCertificate`].
 */
enum BcStatus bc_check_point(double lambda,
                             uint32_t depth,
                             uint32_t grid,
                             struct BcCertificate *out);

/**
 * Uniform convexity check over `[λ₀ − ε, λ₀ + ε]` with default `η` and `ρ`.
 *
 * # Safety
 * `out` must be valid for one [`BcCertificate`].
 */
enum BcStatus bc_check_interval(double lambda0,
                                double eps,
                                uint32_t depth,
                                uint32_t grid,
                                struct BcCertificate *out);

/**
 * Smallest `n` with `2λⁿ < 1`; 0 for `λ` outside `(0, 1)`.
 */
uint32_t bc_minimal_n(double lambda);

/**
 * Variation and sup bounds on the invariant density from a minimum
 * cylinder length, conditional on piecewise convexity of `φ_λ`.
 *
 * # Safety
 * `out` must be valid for one [`BcRychlik`].
 */
enum BcStatus bc_rychlik_bounds(double lambda, uint32_t n, double min_cyl, struct BcRychlik *out);

/**
 * Density bounds from the minimum cylinder length measured on `table`, at
 * `n` or, when `n == 0`, at the minimal admissible `n`.
 *
 * # Safety
 * `table` must be a live table and `out` valid for one [`BcRychlik`].
 */
enum BcStatus bc_sup_density(const struct BcTable *table,
                             uint32_t n,
                             double rho,
                             struct BcRychlik *out);

/**
 * Exact density bounds at `λ = 2^{−1/2}`, where `F_λ` is piecewise quadratic.
 *
 * # Safety
 * `out` must be valid for one [`BcRychlik`].
 */
enum BcStatus bc_sup_density_sqrt2(uint32_t n, struct BcRychlik *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BERNCONV_H */
