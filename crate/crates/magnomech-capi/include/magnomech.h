/* C interface to the magnomech simulator. */

#ifndef MAGNOMECH_H
#define MAGNOMECH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Capacity, in doubles, that spectrum output arrays must provide.
 */
#define MM_SPECTRUM_MAX 6

/**
 * Status code of every fallible call.
 */
typedef enum MmStatus {
  /**
   * Success; out-pointers hold the results.
   */
  MmStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  MmStatus_NullArgument = 1,
  /**
   * The inputs do not describe a valid or physical configuration.
   */
  MmStatus_InvalidParameter = 2,
  /**
   * A numerical routine failed (non-Hurwitz drift, lost precision, ...).
   */
  MmStatus_NumericalFailure = 3,
  /**
   * The quantity is undefined for these parameters (wrong regime).
   */
  MmStatus_NotApplicable = 4,
} MmStatus;

/**
 * Opaque handle to a linearized model of the driven cavity-magnon-mechanics
 * system; create with [`mm_model_new`], release with [`mm_model_free`].
 */
typedef struct MmModel MmModel;

/**
 * Library version as a static UTF-8 string; do not free.
 */
const char *mm_version(void);

/**
 * Short static name of a status code; do not free.
 */
const char *mm_status_name(enum MmStatus status);

/**
 * Message of the most recent failure on the calling thread, or an empty
 * string. Valid until the next failing call on the same thread; do not free.
 */
const char *mm_last_error_message(void);

/**
 * Build a model from detunings, the magnon squeezing parameter, couplings,
 * damping rates, and thermal occupations, writing a heap handle to `out`.
 *
 * `delta_m` is the Kerr-shifted magnon detuning (must be positive when
 * `r > 0`); rates and occupations must be non-negative. Frequencies are in
 * whatever unit makes `omega_b` the mechanical frequency (1 for normalized
 * spectra).
 *
 * # Safety
 * `out` must point to writable storage for one `*mut MmModel`.
 */
enum MmStatus mm_model_new(double delta_a,
                           double delta_m,
                           double omega_b,
                           double r,
                           double g,
                           double g_mech,
                           double kappa_a,
                           double kappa_b,
                           double kappa_m,
                           double n_a,
                           double n_b,
                           double n_m,
                           struct MmModel **out);

/**
 * Release a handle from [`mm_model_new`]; null is a no-op.
 *
 * # Safety
 * `handle` must be null or a pointer returned by [`mm_model_new`] that has
 * not been freed yet; it is invalid after the call.
 */
void mm_model_free(struct MmModel *handle);

/**
 * Effective photon-phonon two-mode-squeezing coupling of the adiabatic
 * model (negative in the squeezing regime).
 *
 * # Safety
 * `handle` must be a live handle from [`mm_model_new`]; `out` must point to
 * writable storage for one double.
 */
enum MmStatus mm_effective_coupling(const struct MmModel *handle, double *out);

/**
 * Magnon-induced shift of the cavity resonance; the squeezing window is
 * centered on `delta_a = -omega_b + shift`.
 *
 * # Safety
 * Same contract as [`mm_effective_coupling`].
 */
enum MmStatus mm_detuning_shift(const struct MmModel *handle, double *out);

/**
 * Eigenvalues of the quadrature flow: oscillation frequencies in `re`,
 * attraction/decay parts in `im`, count in `len` (6 for the full three-mode
 * flow, 4 for the effective two-mode flow, unordered).
 *
 * # Safety
 * `handle` must be a live handle; `re` and `im` must each point to at least
 * [`MM_SPECTRUM_MAX`] writable doubles and `len` to one writable `size_t`.
 */
enum MmStatus mm_spectrum(const struct MmModel *handle,
                          bool full,
                          double *re,
                          double *im,
                          uintptr_t *len);

/**
 * Evolve the vacuum-initial covariance and report, at each requested time,
 * the phi-optimized photon-phonon quadrature variance (`dx_phi`, vacuum is
 * 0.5) and the logarithmic negativity (`e_n`). `full` selects the
 * three-mode model, reported in the frame co-rotating at the mechanical
 * frequency, over the effective two-mode one. Times must be finite and
 * strictly increasing.
 *
 * # Safety
 * `handle` must be a live handle; `times` must point to `n` readable
 * doubles; `dx_phi` and `e_n` must each point to `n` writable doubles.
 */
enum MmStatus mm_evolve(const struct MmModel *handle,
                        bool full,
                        const double *times,
                        uintptr_t n,
                        double *dx_phi,
                        double *e_n);

/**
 * Stationary phi-optimized variance and logarithmic negativity of the
 * effective model; fails with a numerical status when the coupling is
 * outside the stable regime `g_eff^2 < kappa_a kappa_b`.
 *
 * # Safety
 * `handle` must be a live handle; `dx_phi` and `e_n` must each point to one
 * writable double.
 */
enum MmStatus mm_steady_state(const struct MmModel *handle, double *dx_phi, double *e_n);

/**
 * Time of the interior minimum of the shared-quadrature variance in the
 * unstable regime (the proposed measurement window is twice this time);
 * fails as not-applicable in the stable regime.
 *
 * # Safety
 * `handle` must be a live handle; `out` must point to one writable double.
 */
enum MmStatus mm_convergence_time(const struct MmModel *handle, double *out);

/**
 * Long-time squeezing in the unstable regime: the asymptotic optimal-angle
 * variance (`dx_phi`), the squeezing level below vacuum in decibels (`db`),
 * and the asymptotic logarithmic negativity (`e_n`).
 *
 * # Safety
 * `handle` must be a live handle; `dx_phi`, `db`, and `e_n` must each point
 * to one writable double.
 */
enum MmStatus mm_asymptotic_squeezing(const struct MmModel *handle,
                                      double *dx_phi,
                                      double *db,
                                      double *e_n);

#endif  /* MAGNOMECH_H */
