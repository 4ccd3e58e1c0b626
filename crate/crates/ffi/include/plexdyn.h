#ifndef PLEXDYN_H
#define PLEXDYN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>

typedef enum {
  PLEXDYN_STATUS_OK = 0,
  PLEXDYN_STATUS_NULL_POINTER = 1,
  PLEXDYN_STATUS_INVALID_ARGUMENT = 2,
  PLEXDYN_STATUS_CONFIG = 3,
  PLEXDYN_STATUS_NUMERICAL = 4,
  PLEXDYN_STATUS_DEGENERATE_POLES = 5,
  PLEXDYN_STATUS_RESOLUTION = 6,
  PLEXDYN_STATUS_BAND_TRUNCATION = 7,
  PLEXDYN_STATUS_OUT_OF_RANGE = 8,
  PLEXDYN_STATUS_PANIC = 9,
} PlexdynStatus;

/**
 * Dynamical regime of the emitter.
 */
typedef enum {
  PLEXDYN_REGIME_WEAK = 0,
  PLEXDYN_REGIME_STRONG = 1,
  PLEXDYN_REGIME_MULTI_MODE = 2,
} PlexdynRegime;

/**
 * Kernel spectrum K(ω) sampled on an energy grid.
 */
typedef struct PlexdynKernel PlexdynKernel;

/**
 * Positive multi-Lorentzian pseudo-mode set.
 */
typedef struct PlexdynLorentzians PlexdynLorentzians;

/**
 * Poles and residues of the emitter amplitude.
 */
typedef struct PlexdynPoles PlexdynPoles;

/**
 * Core (and optional shell) permittivities and radii of the nanosphere.
 */
typedef struct PlexdynStack PlexdynStack;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *plexdyn_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *plexdyn_last_error(void);

/**
 * Drude sphere of radius `core_radius_nm` in a medium of permittivity `eps_b`.
 *
 * # Safety
 * The output pointer must be valid for writing a handle.
 */
PlexdynStatus plexdyn_stack_bare(double eps_inf,
                                 double omega_p,
                                 double gamma,
                                 double core_radius_nm,
                                 double eps_b,
                                 PlexdynStack **out_stack);

/**
 * Drude core with a Lorentz-oscillator shell. `f_nominal` is the oscillator
 * strength defined at `omega_ref` and is rescaled to `omega_ex`.
 *
 * # Safety
 * The output pointer must be valid for writing a handle.
 */
PlexdynStatus plexdyn_stack_coated(double eps_inf,
                                   double omega_p,
                                   double gamma,
                                   double shell_eps_inf,
                                   double f_nominal,
                                   double omega_ref,
                                   double omega_ex,
                                   double gamma_ex,
                                   double core_radius_nm,
                                   double shell_thickness_nm,
                                   double eps_b,
                                   PlexdynStack **out_stack);

/**
 * Stack of a shipped preset ("bare-paper" or "coated-paper").
 *
 * # Safety
 * `name` must be a NUL-terminated string and the output pointer valid.
 */
PlexdynStatus plexdyn_stack_preset(const char *name, PlexdynStack **out_stack);

/**
 * # Safety
 * `stack` must be NULL or a handle from a `plexdyn_stack_*` constructor.
 */
void plexdyn_stack_free(PlexdynStack *stack);

/**
 * Extinction and scattering cross sections (nm²) at `omega` (eV).
 *
 * # Safety
 * Pointers must be valid; `stack` must be a live handle.
 */
PlexdynStatus plexdyn_cross_sections(const PlexdynStack *stack,
                                     double omega,
                                     size_t n_max,
                                     double *sigma_ext,
                                     double *sigma_sca);

/**
 * Radial-dipole Purcell factor at distance `r_nm` from the sphere centre.
 *
 * # Safety
 * Pointers must be valid; `stack` must be a live handle.
 */
PlexdynStatus plexdyn_purcell_factor(const PlexdynStack *stack,
                                     double r_nm,
                                     double omega,
                                     size_t n_max,
                                     double *factor);

/**
 * Kernel spectrum for a radial emitter `gap_nm` outside the particle,
 * sampled from `omega_min` to `omega_max` (eV) in steps of `omega_step`.
 *
 * # Safety
 * Pointers must be valid; `stack` must be a live handle.
 */
PlexdynStatus plexdyn_kernel_compute(const PlexdynStack *stack,
                                     double dipole_debye,
                                     double gap_nm,
                                     double omega_min,
                                     double omega_max,
                                     double omega_step,
                                     size_t n_max,
                                     PlexdynKernel **out_kernel);

/**
 * Kernel spectrum from caller-supplied samples (`K` in meV).
 *
 * # Safety
 * `omega` and `values` must each point to `len` doubles.
 */
PlexdynStatus plexdyn_kernel_from_samples(const double *omega,
                                          const double *values,
                                          size_t len,
                                          PlexdynKernel **out_kernel);

/**
 * Number of samples, or 0 for a NULL handle.
 *
 * # Safety
 * `kernel` must be NULL or a live handle.
 */
size_t plexdyn_kernel_len(const PlexdynKernel *kernel);

/**
 * Copies the grid (eV) and values (meV) into arrays of length `len`, which
 * must equal `plexdyn_kernel_len`.
 *
 * # Safety
 * `omega` and `values` must each point to `len` writable doubles.
 */
PlexdynStatus plexdyn_kernel_copy(const PlexdynKernel *kernel,
                                  double *omega,
                                  double *values,
                                  size_t len);

/**
 * # Safety
 * `kernel` must be NULL or a live handle.
 */
void plexdyn_kernel_free(PlexdynKernel *kernel);

/**
 * Pseudo-mode set from `n` terms: centres (eV), widths (meV), areas (meV²).
 *
 * # Safety
 * The three arrays must each hold `n` doubles.
 */
PlexdynStatus plexdyn_lorentzians_new(const double *omega,
                                      const double *width,
                                      const double *area,
                                      size_t n,
                                      PlexdynLorentzians **out_set);

/**
 * Fits `n_terms` Lorentzians to the kernel with the default fit options.
 *
 * # Safety
 * Pointers must be valid; `kernel` must be a live handle.
 */
PlexdynStatus plexdyn_lorentzians_fit(const PlexdynKernel *kernel,
                                      size_t n_terms,
                                      PlexdynLorentzians **out_set);

/**
 * Number of terms, or 0 for a NULL handle.
 *
 * # Safety
 * `set` must be NULL or a live handle.
 */
size_t plexdyn_lorentzians_len(const PlexdynLorentzians *set);

/**
 * Term `j` (0-based, sorted by centre).
 *
 * # Safety
 * Pointers must be valid; `set` must be a live handle.
 */
PlexdynStatus plexdyn_lorentzians_get(const PlexdynLorentzians *set,
                                      size_t j,
                                      double *omega,
                                      double *width,
                                      double *area);

/**
 * # Safety
 * `set` must be NULL or a live handle.
 */
void plexdyn_lorentzians_free(PlexdynLorentzians *set);

/**
 * Poles and residues for an emitter at `omega_e` (eV). With `two_pi`
 * nonzero the areas are multiplied by 2π before solving, as for the
 * tabulated pseudo-mode sets.
 *
 * # Safety
 * Pointers must be valid; `set` must be a live handle.
 */
PlexdynStatus plexdyn_poles_compute(const PlexdynLorentzians *set,
                                    double omega_e,
                                    bool two_pi,
                                    PlexdynPoles **out_poles);

/**
 * Number of poles, or 0 for a NULL handle.
 *
 * # Safety
 * `poles` must be NULL or a live handle.
 */
size_t plexdyn_poles_len(const PlexdynPoles *poles);

/**
 * Pole `m` (0-based, by decreasing |R|): decay rate γ (meV), frequency ω
 * (meV) and residue modulus.
 *
 * # Safety
 * Pointers must be valid; `poles` must be a live handle.
 */
PlexdynStatus plexdyn_poles_get(const PlexdynPoles *poles,
                                size_t m,
                                double *gamma,
                                double *omega,
                                double *abs_residue);

/**
 * Excited-state population |C_e0(t)|² at `len` times (fs).
 *
 * # Safety
 * `t_fs` and `population` must each point to `len` doubles.
 */
PlexdynStatus plexdyn_poles_population(const PlexdynPoles *poles,
                                       const double *t_fs,
                                       double *population,
                                       size_t len);

/**
 * Regime label with the default classifier thresholds.
 *
 * # Safety
 * Pointers must be valid; `poles` must be a live handle.
 */
PlexdynStatus plexdyn_poles_regime(const PlexdynPoles *poles, PlexdynRegime *regime);

/**
 * # Safety
 * `poles` must be NULL or a live handle.
 */
void plexdyn_poles_free(PlexdynPoles *poles);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLEXDYN_H */
