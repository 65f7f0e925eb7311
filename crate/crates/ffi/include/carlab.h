#ifndef CARLAB_H
#define CARLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum CarlabStatus {
  CARLAB_STATUS_OK = 0,
  // A required pointer was null or a string was not UTF-8.
  CARLAB_STATUS_NULL_POINTER = 1,
  CARLAB_STATUS_INVALID_ARGUMENT = 2,
  // Mode count above the dense cap, or a cap above the hard maximum.
  CARLAB_STATUS_CAP_EXCEEDED = 3,
  CARLAB_STATUS_DIMENSION_MISMATCH = 4,
  // Index out of range: mode, site or matrix entry.
  CARLAB_STATUS_OUT_OF_RANGE = 5,
  // Invalid unitary, contraction, partition or gauge element.
  CARLAB_STATUS_INVALID_OBJECT = 6,
  // A single mode carries mass at least `eps^2`.
  CARLAB_STATUS_ATOM_TOO_LARGE = 7,
  CARLAB_STATUS_PANIC = 8,
} CarlabStatus;

// A mode space: sites, fiber dimension and site weights.
typedef struct CarlabModeSpace CarlabModeSpace;

// A dense operator on the Fock space of `m` modes.
typedef struct CarlabOperator CarlabOperator;

// A campaign report.
typedef struct CarlabReport CarlabReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *carlab_last_error(void);

// Library version as a static NUL-terminated string.
const char *carlab_version(void);

// Creates a mode space. `weights` holds `site_count` positive numbers, or
// is null for unit weights.
//
// # Safety
// `weights` must be null or point to `site_count` doubles; `out_space` must be writable.
enum CarlabStatus carlab_mode_space_new(size_t site_count,
                                        size_t fiber_dim,
                                        const double *weights,
                                        size_t max_modes,
                                        struct CarlabModeSpace **out_space);

// # Safety
// `space` must be null or a handle from `carlab_mode_space_new`, freed once.
void carlab_mode_space_free(struct CarlabModeSpace *space);

// Number of modes `site_count * fiber_dim`, or 0 for a null handle.
//
// # Safety
// `space` must be null or a live handle.
size_t carlab_mode_space_mode_count(const struct CarlabModeSpace *space);

// Smeared annihilator `a(f)` (or creator `a(f)^*` when `creator` is true)
// for `f` given by `mode_count` real and imaginary parts.
//
// # Safety
// `re` and `im` must point to `len` doubles; `out_op` must be writable.
enum CarlabStatus carlab_operator_field(const struct CarlabModeSpace *space,
                                        const double *re,
                                        const double *im,
                                        size_t len,
                                        bool creator,
                                        struct CarlabOperator **out_op);

// Identity on the Fock space of `space`.
//
// # Safety
// `out_op` must be writable.
enum CarlabStatus carlab_operator_identity(const struct CarlabModeSpace *space,
                                           struct CarlabOperator **out_op);

// Operator from a column-major array of `4^m` complex entries given as
// interleaved (re, im) pairs.
//
// # Safety
// `entries` must point to `2 * 4^m` doubles; `out_op` must be writable.
enum CarlabStatus carlab_operator_from_entries(const struct CarlabModeSpace *space,
                                               const double *entries,
                                               size_t len,
                                               struct CarlabOperator **out_op);

// # Safety
// `op` must be null or a live handle, freed once.
void carlab_operator_free(struct CarlabOperator *op);

// Fock dimension `2^m`, or 0 for a null handle.
//
// # Safety
// `op` must be null or a live handle.
size_t carlab_operator_dim(const struct CarlabOperator *op);

// Matrix entry `(row, col)` in the occupation basis (mode 0 is bit 0).
//
// # Safety
// `op` must be a live handle; `re` and `im` must be writable.
enum CarlabStatus carlab_operator_entry(const struct CarlabOperator *op,
                                        size_t row,
                                        size_t col,
                                        double *re,
                                        double *im);

// Product `a b`.
//
// # Safety
// `a`, `b` must be live handles; `out_op` must be writable.
enum CarlabStatus carlab_operator_mul(const struct CarlabOperator *a,
                                      const struct CarlabOperator *b,
                                      struct CarlabOperator **out_op);

// `a + c b` for a complex scalar `c = c_re + i c_im`.
//
// # Safety
// `a`, `b` must be live handles; `out_op` must be writable.
enum CarlabStatus carlab_operator_add_scaled(const struct CarlabOperator *a,
                                             const struct CarlabOperator *b,
                                             double c_re,
                                             double c_im,
                                             struct CarlabOperator **out_op);

// Hermitian adjoint.
//
// # Safety
// `a` must be a live handle; `out_op` must be writable.
enum CarlabStatus carlab_operator_adjoint(const struct CarlabOperator *a,
                                          struct CarlabOperator **out_op);

// Spectral norm.
//
// # Safety
// `a` must be a live handle; `norm` must be writable.
enum CarlabStatus carlab_operator_norm(const struct CarlabOperator *a, double *norm);

// Module twirl for the partition with block label `labels[i]` on mode `i`.
//
// # Safety
// `labels` must point to `len` entries; `a` must be live; `out_op` writable.
enum CarlabStatus carlab_twirl(const struct CarlabOperator *a,
                               const size_t *labels,
                               size_t len,
                               struct CarlabOperator **out_op);

// Restriction `nu_W` onto the local algebra of the listed sites.
//
// # Safety
// `sites` must point to `len` entries; handles must be live; `out_op` writable.
enum CarlabStatus carlab_restrict(const struct CarlabModeSpace *space,
                                  const struct CarlabOperator *a,
                                  const size_t *sites,
                                  size_t len,
                                  struct CarlabOperator **out_op);

// Runs a campaign by name (`verify-car`, `twirl-bound`, `localize`,
// `net-fixed-points`, `partition`). `config_json` may be null for the
// defaults; `seed` is applied when `override_seed` is true; `max_modes` of
// 0 keeps the default dense cap.
//
// # Safety
// Strings must be NUL-terminated; `out_report` must be writable.
enum CarlabStatus carlab_run(const char *command,
                             const char *config_json,
                             bool override_seed,
                             uint64_t seed,
                             size_t max_modes,
                             struct CarlabReport **out_report);

// True when every row of the report passed; false for a null handle.
//
// # Safety
// `report` must be null or a live handle.
bool carlab_report_passed(const struct CarlabReport *report);

// Number of data rows.
//
// # Safety
// `report` must be null or a live handle.
size_t carlab_report_row_count(const struct CarlabReport *report);

// The report as CSV with its comment preamble. Release with
// `carlab_string_free`.
//
// # Safety
// `report` must be a live handle; `out_csv` must be writable.
enum CarlabStatus carlab_report_csv(const struct CarlabReport *report, char **out_csv);

// # Safety
// `report` must be null or a live handle, freed once.
void carlab_report_free(struct CarlabReport *report);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a string from `carlab_report_csv`, freed once.
void carlab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CARLAB_H */
