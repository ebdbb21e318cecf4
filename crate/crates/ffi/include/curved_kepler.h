#ifndef CURVED_KEPLER_H
#define CURVED_KEPLER_H

#include <stdint.h>
#include <stddef.h>

/**
 * Status codes. Zero is success.
 */
typedef enum CkStatus {
  CK_STATUS_OK = 0,
  CK_STATUS_NULL_POINTER = 1,
  CK_STATUS_INVALID_ARGUMENT = 2,
  CK_STATUS_POLE_EVALUATION = 3,
  CK_STATUS_EMBEDDING_UNAVAILABLE = 4,
  CK_STATUS_EQUATOR_DEGENERACY = 5,
  CK_STATUS_CHART_DOMAIN = 6,
  CK_STATUS_DEGENERATE_ORBIT = 7,
  CK_STATUS_BLOCK_TOO_LARGE = 8,
  CK_STATUS_ZETA_DOMAIN = 9,
  CK_STATUS_ASYMPTOTIC_SET = 10,
  CK_STATUS_TRANSIT_TIMEOUT = 11,
  CK_STATUS_NUMERICAL_FAILURE = 12,
  CK_STATUS_INDEX_OUT_OF_RANGE = 13,
  CK_STATUS_PANIC = 14,
} CkStatus;

/**
 * How an integration ended.
 */
typedef enum CkTermination {
  CK_TERMINATION_TIME_LIMIT = 0,
  CK_TERMINATION_COLLISION_APPROACH = 1,
  CK_TERMINATION_NUMERICAL_FAILURE = 2,
} CkTermination;

/**
 * Opaque isolating-block handle; keeps its surface.
 */
typedef struct CkBlock CkBlock;

/**
 * Opaque surface handle.
 */
typedef struct CkSurface CkSurface;

/**
 * Opaque trajectory handle.
 */
typedef struct CkTrajectory CkTrajectory;

/**
 * Phase-space point `(r, θ, p_r, p_θ)`.
 */
typedef struct CkState {
  double r;
  double theta;
  double p_r;
  double p_theta;
} CkState;

/**
 * Values of the four first integrals at one state.
 */
typedef struct CkConserved {
  double h;
  double p_theta;
  double i1;
  double i2;
} CkConserved;

/**
 * Regularizability verdict. Zero in `north_m` or `orbifold_n` means none.
 */
typedef struct CkVerdict {
  double beta;
  uint32_t north_m;
  uint32_t orbifold_n;
} CkVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Short static description of a status code.
 */
const char *ck_status_name(enum CkStatus status);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
uintptr_t ck_last_error(char *buf, uintptr_t len);

/**
 * Creates the surface `f(r) = L sin(√K r)` with coupling `gamma_c`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum CkStatus ck_surface_new(double k, double l, double gamma_c, struct CkSurface **out);

/**
 * Creates a surface from curvature and `β = L√K`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum CkStatus ck_surface_from_beta(double k, double beta, double gamma_c, struct CkSurface **out);

/**
 * # Safety
 * `surface` must be null or a handle from `ck_surface_*` not yet freed.
 */
void ck_surface_free(struct CkSurface *surface);

/**
 * β and the south-pole radius of the surface.
 *
 * # Safety
 * `surface` must be a live handle; the out-pointers valid or null.
 */
enum CkStatus ck_surface_params(const struct CkSurface *surface, double *beta, double *r_south);

/**
 * # Safety
 * `surface` and `state` must be valid; `out` writable.
 */
enum CkStatus ck_hamiltonian(const struct CkSurface *surface,
                             const struct CkState *state,
                             double *out);

/**
 * # Safety
 * `surface` and `state` must be valid; `out` writable.
 */
enum CkStatus ck_conserved(const struct CkSurface *surface,
                           const struct CkState *state,
                           struct CkConserved *out);

/**
 * Residual of the quadratic relation between the four integrals.
 *
 * # Safety
 * `surface` and `state` must be valid; `out` writable.
 */
enum CkStatus ck_dependency_residual(const struct CkSurface *surface,
                                     const struct CkState *state,
                                     double *out);

/**
 * Integrates from `state` up to `t_end`, stopping near the north pole.
 * `collision_margin <= 0` selects the default margin.
 *
 * # Safety
 * `surface` and `state` must be valid; `out` writable.
 */
enum CkStatus ck_integrate(const struct CkSurface *surface,
                           const struct CkState *state,
                           double t_end,
                           double tol,
                           double collision_margin,
                           struct CkTrajectory **out);

/**
 * # Safety
 * `traj` must be null or a handle from `ck_integrate` not yet freed.
 */
void ck_trajectory_free(struct CkTrajectory *traj);

/**
 * Number of samples and the termination reason.
 *
 * # Safety
 * `traj` must be a live handle; out-pointers writable.
 */
enum CkStatus ck_trajectory_info(const struct CkTrajectory *traj,
                                 uintptr_t *len,
                                 enum CkTermination *termination);

/**
 * Sample `index` of the trajectory.
 *
 * # Safety
 * `traj` must be a live handle; out-pointers writable.
 */
enum CkStatus ck_trajectory_sample(const struct CkTrajectory *traj,
                                   uintptr_t index,
                                   double *t,
                                   struct CkState *state);

/**
 * Regularizability verdict with integer search bound `m_max`.
 *
 * # Safety
 * `surface` must be a live handle; `out` writable.
 */
enum CkStatus ck_classify(const struct CkSurface *surface, uint32_t m_max, struct CkVerdict *out);

/**
 * Isolating block around the north pole at energy `h`. `delta <= 0`
 * selects the default size.
 *
 * # Safety
 * `surface` must be a live handle; `out` writable.
 */
enum CkStatus ck_block_new(const struct CkSurface *surface,
                           double h,
                           double delta,
                           struct CkBlock **out);

/**
 * # Safety
 * `blk` must be null or a handle from `ck_block_new` not yet freed.
 */
void ck_block_free(struct CkBlock *blk);

/**
 * Block size δ, boundary radius and the largest admissible |u|.
 *
 * # Safety
 * `blk` must be a live handle; out-pointers writable.
 */
enum CkStatus ck_block_params(const struct CkBlock *blk,
                              double *delta,
                              double *r_delta,
                              double *u_max);

/**
 * Analytic θ-shift Γ(u) of the map across the block.
 *
 * # Safety
 * `blk` must be a live handle; `out` writable.
 */
enum CkStatus ck_block_gamma(const struct CkBlock *blk, double u, double *out);

/**
 * θ-shift from integrating the regularized flow through the block.
 *
 * # Safety
 * `blk` must be a live handle; `out` writable.
 */
enum CkStatus ck_block_transit(const struct CkBlock *blk, double theta, double u, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CURVED_KEPLER_H */
