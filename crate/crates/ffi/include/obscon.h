#ifndef OBSCON_H
#define OBSCON_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ObsconDomain {
  OBSCON_DOMAIN_INTERVAL = 0,
  OBSCON_DOMAIN_DISK = 1,
} ObsconDomain;

typedef enum ObsconPotential {
  /**
   * `x²` on `[0.5 - δ, 0.5 + δ]`.
   */
  OBSCON_POTENTIAL_INTERVAL_QUADRATIC = 0,
  /**
   * `1/r²` on `r <= δ`.
   */
  OBSCON_POTENTIAL_DISK_INVERSE_SQUARE = 1,
  /**
   * `r` on `r <= δ`.
   */
  OBSCON_POTENTIAL_DISK_RADIUS = 2,
} ObsconPotential;

/**
 * Result codes of every fallible call.
 */
typedef enum ObsconStatus {
  OBSCON_STATUS_OK = 0,
  OBSCON_STATUS_NULL_POINTER = 1,
  OBSCON_STATUS_INVALID_ARGUMENT = 2,
  OBSCON_STATUS_NUMERICAL = 3,
  OBSCON_STATUS_DEGENERATE_SPECTRUM = 4,
  OBSCON_STATUS_PANIC = 5,
} ObsconStatus;

/**
 * Opaque enumerated eigenbasis.
 */
typedef struct ObsconBasis ObsconBasis;

/**
 * Opaque mode family sampled on a mesh.
 */
typedef struct ObsconFamily ObsconFamily;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buffer` (nul-terminated,
 * truncated to `len`). Returns the full message length without the nul, or 0 when
 * there is no error.
 *
 * # Safety
 * `buffer` must be null or point to `len` writable bytes.
 */
size_t obscon_last_error_message(char *buffer, size_t len);

/**
 * `J_order(x)`.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum ObsconStatus obscon_bessel_j(uint32_t order, double x, double *out);

/**
 * `J'_order(x)`.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum ObsconStatus obscon_bessel_j_prime(uint32_t order, double x, double *out);

/**
 * The `rank`-th positive zero of `J_order` (rank starts at 1).
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum ObsconStatus obscon_bessel_zero(uint32_t order, uint32_t rank, double *out);

/**
 * The first `count` Dirichlet eigenpairs of the domain, in eigenvalue order.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle to release with
 * [`obscon_basis_free`].
 */
enum ObsconStatus obscon_basis_new(enum ObsconDomain domain,
                                   size_t count,
                                   struct ObsconBasis **out);

/**
 * # Safety
 * `basis` must be null or a handle from [`obscon_basis_new`] not yet freed.
 */
void obscon_basis_free(struct ObsconBasis *basis);

/**
 * Number of eigenpairs in the basis; 0 for a null handle.
 *
 * # Safety
 * `basis` must be null or a live handle.
 */
size_t obscon_basis_len(const struct ObsconBasis *basis);

/**
 * Eigenvalue of mode `index` (0-based).
 *
 * # Safety
 * `basis` must be a live handle and `out` a valid pointer.
 */
enum ObsconStatus obscon_basis_eigenvalue(const struct ObsconBasis *basis,
                                          size_t index,
                                          double *out);

/**
 * Value of mode `index` at `x` (interval) or at polar `(x, theta)` (disk; `x` is
 * the radius).
 *
 * # Safety
 * `basis` must be a live handle and `out` a valid pointer.
 */
enum ObsconStatus obscon_basis_evaluate(const struct ObsconBasis *basis,
                                        size_t index,
                                        double x,
                                        double theta,
                                        double *out);

/**
 * First-order perturbed modes of `-Δ + εV₀` sampled on the default mesh of the
 * potential's domain, or on `mesh` cells (interval) / increments (disk) when
 * nonzero. `modes` is `N`, `truncation` the number of modes in the correction
 * sums. Degenerate disk clusters use the mock-degenerate treatment.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle to release with
 * [`obscon_family_free`].
 */
enum ObsconStatus obscon_family_new(enum ObsconPotential potential,
                                    double epsilon,
                                    double delta,
                                    size_t modes,
                                    size_t truncation,
                                    size_t mesh,
                                    struct ObsconFamily **out);

/**
 * # Safety
 * `family` must be null or a handle from [`obscon_family_new`] not yet freed.
 */
void obscon_family_free(struct ObsconFamily *family);

/**
 * `J_N = min_{j<N} ∫_ω φ_j²` and the 0-based position of the minimising mode.
 *
 * # Safety
 * `family` must be a live handle, `bounds` must hold `2 * count` doubles, and the
 * output pointers must be valid.
 */
enum ObsconStatus obscon_j_functional(const struct ObsconFamily *family,
                                      const double *bounds,
                                      size_t count,
                                      size_t modes,
                                      double *value,
                                      size_t *argmin);

/**
 * Truncated finite-time observability constant over horizon `horizon`.
 *
 * # Safety
 * As [`obscon_j_functional`].
 */
enum ObsconStatus obscon_finite_time_constant(const struct ObsconFamily *family,
                                              const double *bounds,
                                              size_t count,
                                              size_t modes,
                                              double horizon,
                                              double *out);

/**
 * Time-asymptotic constant with eigenvalue clusters grouped.
 *
 * # Safety
 * As [`obscon_j_functional`].
 */
enum ObsconStatus obscon_asymptotic_constant(const struct ObsconFamily *family,
                                             const double *bounds,
                                             size_t count,
                                             size_t modes,
                                             double *out);

/**
 * Maximises `J_N` over densities of mass `fraction · |Ω|`. When `density` is
 * non-null it receives the optimal density, one value per mesh node (`capacity`
 * must be at least [`obscon_family_nodes`]).
 *
 * # Safety
 * `family` must be a live handle, `value` valid, and `density` null or pointing to
 * `capacity` writable doubles.
 */
enum ObsconStatus obscon_maximize_relaxed(const struct ObsconFamily *family,
                                          size_t modes,
                                          double fraction,
                                          double *value,
                                          double *density,
                                          size_t capacity);

/**
 * Number of mesh nodes of the family; 0 for a null handle.
 *
 * # Safety
 * `family` must be null or a live handle.
 */
size_t obscon_family_nodes(const struct ObsconFamily *family);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OBSCON_H */
