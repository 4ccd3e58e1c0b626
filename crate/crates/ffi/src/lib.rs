//! C interface to `plexdyn`.
//!
//! Objects are opaque handles created by `*_new`/`*_compute` functions and
//! released with the matching `*_free`. Every fallible function returns a
//! [`PlexdynStatus`]; on failure a description is available from
//! [`plexdyn_last_error`] on the same thread. Energies are in eV, widths and
//! rates in meV, areas in meV², lengths in nm and times in fs.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use plexdyn::config::ScenarioConfig;
use plexdyn::dynamics::{
    build_transfer_function, classify_regime, find_poles, ClassifierThresholds, MemoryConvention, PoleDecomposition,
    Regime,
};
use plexdyn::greens::{energy_grid, kernel_spectrum, purcell_factor, EmitterConfig, KernelSpectrum};
use plexdyn::materials::{DrudeParams, LorentzShellParams, MaterialStack};
use plexdyn::mie::cross_sections;
use plexdyn::pseudomode::{fit_kernel, FitOptions, Lorentzian, LorentzianSet};
use plexdyn::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlexdynStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    DegeneratePoles = 5,
    Resolution = 6,
    BandTruncation = 7,
    OutOfRange = 8,
    Panic = 9,
}

/// Dynamical regime of the emitter.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlexdynRegime {
    Weak = 0,
    Strong = 1,
    MultiMode = 2,
}

/// Core (and optional shell) permittivities and radii of the nanosphere.
pub struct PlexdynStack(MaterialStack);

/// Kernel spectrum K(ω) sampled on an energy grid.
pub struct PlexdynKernel(KernelSpectrum);

/// Positive multi-Lorentzian pseudo-mode set.
pub struct PlexdynLorentzians(LorentzianSet);

/// Poles and residues of the emitter amplitude.
pub struct PlexdynPoles(PoleDecomposition);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> PlexdynStatus {
    match e {
        Error::Domain { .. } | Error::InvalidParameter(_) | Error::Geometry(_) => PlexdynStatus::InvalidArgument,
        Error::Config(_) | Error::Io(_) | Error::Json(_) => PlexdynStatus::Config,
        Error::DegenerateRoots { .. } => PlexdynStatus::DegeneratePoles,
        Error::Resolution(_) => PlexdynStatus::Resolution,
        Error::BandTruncation { .. } => PlexdynStatus::BandTruncation,
        Error::Range { .. } | Error::Singular { .. } | Error::Numerical(_) => PlexdynStatus::Numerical,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (PlexdynStatus, String)>) -> PlexdynStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PlexdynStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PlexdynStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (PlexdynStatus, String)>;
}

impl<T> IntoFfi<T> for plexdyn::Result<T> {
    fn ffi(self) -> Result<T, (PlexdynStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (PlexdynStatus, String) {
    (PlexdynStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PlexdynStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (PlexdynStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (PlexdynStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], (PlexdynStatus, String)> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn boxed<T>(slot: &mut *mut T, value: T) {
    *slot = Box::into_raw(Box::new(value));
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn plexdyn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn plexdyn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Drude sphere of radius `core_radius_nm` in a medium of permittivity `eps_b`.
///
/// # Safety
/// The output pointer must be valid for writing a handle.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_stack_bare(
    eps_inf: f64,
    omega_p: f64,
    gamma: f64,
    core_radius_nm: f64,
    eps_b: f64,
    out_stack: *mut *mut PlexdynStack,
) -> PlexdynStatus {
    guard(|| {
        let slot = out(out_stack, "out_stack")?;
        let stack = MaterialStack::bare(DrudeParams { eps_inf, omega_p, gamma }, core_radius_nm, eps_b);
        stack.validate().ffi()?;
        boxed(slot, PlexdynStack(stack));
        Ok(())
    })
}

/// Drude core with a Lorentz-oscillator shell. `f_nominal` is the oscillator
/// strength defined at `omega_ref` and is rescaled to `omega_ex`.
///
/// # Safety
/// The output pointer must be valid for writing a handle.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn plexdyn_stack_coated(
    eps_inf: f64,
    omega_p: f64,
    gamma: f64,
    shell_eps_inf: f64,
    f_nominal: f64,
    omega_ref: f64,
    omega_ex: f64,
    gamma_ex: f64,
    core_radius_nm: f64,
    shell_thickness_nm: f64,
    eps_b: f64,
    out_stack: *mut *mut PlexdynStack,
) -> PlexdynStatus {
    guard(|| {
        let slot = out(out_stack, "out_stack")?;
        let shell = LorentzShellParams { eps_inf_sh: shell_eps_inf, f_nominal, omega_ex, gamma_ex, omega_ref };
        let stack = MaterialStack::coated(
            DrudeParams { eps_inf, omega_p, gamma },
            shell,
            core_radius_nm,
            shell_thickness_nm,
            eps_b,
        );
        stack.validate().ffi()?;
        boxed(slot, PlexdynStack(stack));
        Ok(())
    })
}

/// Stack of a shipped preset ("bare-paper" or "coated-paper").
///
/// # Safety
/// `name` must be a NUL-terminated string and the output pointer valid.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_stack_preset(name: *const c_char, out_stack: *mut *mut PlexdynStack) -> PlexdynStatus {
    guard(|| {
        let slot = out(out_stack, "out_stack")?;
        if name.is_null() {
            return Err(null("name"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| (PlexdynStatus::InvalidArgument, "preset name is not UTF-8".to_string()))?;
        let stack = ScenarioConfig::preset(name).and_then(|c| c.stack()).ffi()?;
        boxed(slot, PlexdynStack(stack));
        Ok(())
    })
}

/// # Safety
/// `stack` must be NULL or a handle from a `plexdyn_stack_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_stack_free(stack: *mut PlexdynStack) {
    free(stack)
}

/// Extinction and scattering cross sections (nm²) at `omega` (eV).
///
/// # Safety
/// Pointers must be valid; `stack` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_cross_sections(
    stack: *const PlexdynStack,
    omega: f64,
    n_max: usize,
    sigma_ext: *mut f64,
    sigma_sca: *mut f64,
) -> PlexdynStatus {
    guard(|| {
        let stack = deref(stack, "stack")?;
        let (ext, sca) = (out(sigma_ext, "sigma_ext")?, out(sigma_sca, "sigma_sca")?);
        let x = cross_sections(&stack.0, omega, n_max).ffi()?;
        *ext = x.sigma_ext;
        *sca = x.sigma_sca;
        Ok(())
    })
}

/// Radial-dipole Purcell factor at distance `r_nm` from the sphere centre.
///
/// # Safety
/// Pointers must be valid; `stack` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_purcell_factor(
    stack: *const PlexdynStack,
    r_nm: f64,
    omega: f64,
    n_max: usize,
    factor: *mut f64,
) -> PlexdynStatus {
    guard(|| {
        let stack = deref(stack, "stack")?;
        let slot = out(factor, "factor")?;
        *slot = purcell_factor(&stack.0, r_nm, omega, n_max).ffi()?;
        Ok(())
    })
}

/// Kernel spectrum for a radial emitter `gap_nm` outside the particle,
/// sampled from `omega_min` to `omega_max` (eV) in steps of `omega_step`.
///
/// # Safety
/// Pointers must be valid; `stack` must be a live handle.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn plexdyn_kernel_compute(
    stack: *const PlexdynStack,
    dipole_debye: f64,
    gap_nm: f64,
    omega_min: f64,
    omega_max: f64,
    omega_step: f64,
    n_max: usize,
    out_kernel: *mut *mut PlexdynKernel,
) -> PlexdynStatus {
    guard(|| {
        let stack = deref(stack, "stack")?;
        let slot = out(out_kernel, "out_kernel")?;
        let grid = energy_grid(omega_min, omega_max, omega_step).ffi()?;
        // The emitter energy does not enter K(ω).
        let emitter = EmitterConfig::new(dipole_debye, gap_nm, omega_min);
        let k = kernel_spectrum(&stack.0, &emitter, &grid, n_max).ffi()?;
        boxed(slot, PlexdynKernel(k));
        Ok(())
    })
}

/// Kernel spectrum from caller-supplied samples (`K` in meV).
///
/// # Safety
/// `omega` and `values` must each point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_kernel_from_samples(
    omega: *const f64,
    values: *const f64,
    len: usize,
    out_kernel: *mut *mut PlexdynKernel,
) -> PlexdynStatus {
    guard(|| {
        let slot = out(out_kernel, "out_kernel")?;
        let (w, v) = (slice(omega, len, "omega")?, slice(values, len, "values")?);
        let k = KernelSpectrum::from_samples(w.to_vec(), v.to_vec(), "C samples").ffi()?;
        boxed(slot, PlexdynKernel(k));
        Ok(())
    })
}

/// Number of samples, or 0 for a NULL handle.
///
/// # Safety
/// `kernel` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_kernel_len(kernel: *const PlexdynKernel) -> usize {
    kernel.as_ref().map_or(0, |k| k.0.grid.len())
}

/// Copies the grid (eV) and values (meV) into arrays of length `len`, which
/// must equal `plexdyn_kernel_len`.
///
/// # Safety
/// `omega` and `values` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_kernel_copy(
    kernel: *const PlexdynKernel,
    omega: *mut f64,
    values: *mut f64,
    len: usize,
) -> PlexdynStatus {
    guard(|| {
        let k = &deref(kernel, "kernel")?.0;
        if len != k.grid.len() {
            return Err((PlexdynStatus::OutOfRange, format!("buffer length {len}, kernel has {}", k.grid.len())));
        }
        slice_mut(omega, len, "omega")?.copy_from_slice(&k.grid);
        slice_mut(values, len, "values")?.copy_from_slice(&k.values);
        Ok(())
    })
}

/// # Safety
/// `kernel` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_kernel_free(kernel: *mut PlexdynKernel) {
    free(kernel)
}

/// Pseudo-mode set from `n` terms: centres (eV), widths (meV), areas (meV²).
///
/// # Safety
/// The three arrays must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_lorentzians_new(
    omega: *const f64,
    width: *const f64,
    area: *const f64,
    n: usize,
    out_set: *mut *mut PlexdynLorentzians,
) -> PlexdynStatus {
    guard(|| {
        let slot = out(out_set, "out_set")?;
        let (w, b, a) = (slice(omega, n, "omega")?, slice(width, n, "width")?, slice(area, n, "area")?);
        let terms = (0..n).map(|j| Lorentzian::new(w[j], b[j], a[j])).collect();
        let set = LorentzianSet::new(terms).ffi()?;
        boxed(slot, PlexdynLorentzians(set));
        Ok(())
    })
}

/// Fits `n_terms` Lorentzians to the kernel with the default fit options.
///
/// # Safety
/// Pointers must be valid; `kernel` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_lorentzians_fit(
    kernel: *const PlexdynKernel,
    n_terms: usize,
    out_set: *mut *mut PlexdynLorentzians,
) -> PlexdynStatus {
    guard(|| {
        let k = &deref(kernel, "kernel")?.0;
        let slot = out(out_set, "out_set")?;
        let (set, _) = fit_kernel(k, n_terms, None, &FitOptions::default()).ffi()?;
        boxed(slot, PlexdynLorentzians(set));
        Ok(())
    })
}

/// Number of terms, or 0 for a NULL handle.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_lorentzians_len(set: *const PlexdynLorentzians) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// Term `j` (0-based, sorted by centre).
///
/// # Safety
/// Pointers must be valid; `set` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_lorentzians_get(
    set: *const PlexdynLorentzians,
    j: usize,
    omega: *mut f64,
    width: *mut f64,
    area: *mut f64,
) -> PlexdynStatus {
    guard(|| {
        let set = &deref(set, "set")?.0;
        let t = set.terms().get(j).ok_or_else(|| (PlexdynStatus::OutOfRange, format!("term {j} of {}", set.len())))?;
        *out(omega, "omega")? = t.omega;
        *out(width, "width")? = t.width;
        *out(area, "area")? = t.area;
        Ok(())
    })
}

/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_lorentzians_free(set: *mut PlexdynLorentzians) {
    free(set)
}

/// Poles and residues for an emitter at `omega_e` (eV). With `two_pi`
/// nonzero the areas are multiplied by 2π before solving, as for the
/// tabulated pseudo-mode sets.
///
/// # Safety
/// Pointers must be valid; `set` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_poles_compute(
    set: *const PlexdynLorentzians,
    omega_e: f64,
    two_pi: bool,
    out_poles: *mut *mut PlexdynPoles,
) -> PlexdynStatus {
    guard(|| {
        let set = &deref(set, "set")?.0;
        let slot = out(out_poles, "out_poles")?;
        let convention = if two_pi { MemoryConvention::TwoPi } else { MemoryConvention::Unit };
        let scaled = convention.apply(set).ffi()?;
        let decomp = find_poles(&build_transfer_function(&scaled, omega_e)).ffi()?;
        boxed(slot, PlexdynPoles(decomp));
        Ok(())
    })
}

/// Number of poles, or 0 for a NULL handle.
///
/// # Safety
/// `poles` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_poles_len(poles: *const PlexdynPoles) -> usize {
    poles.as_ref().map_or(0, |p| p.0.poles.len())
}

/// Pole `m` (0-based, by decreasing |R|): decay rate γ (meV), frequency ω
/// (meV) and residue modulus.
///
/// # Safety
/// Pointers must be valid; `poles` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_poles_get(
    poles: *const PlexdynPoles,
    m: usize,
    gamma: *mut f64,
    omega: *mut f64,
    abs_residue: *mut f64,
) -> PlexdynStatus {
    guard(|| {
        let d = &deref(poles, "poles")?.0;
        if m >= d.poles.len() {
            return Err((PlexdynStatus::OutOfRange, format!("pole {m} of {}", d.poles.len())));
        }
        *out(gamma, "gamma")? = d.gamma(m);
        *out(omega, "omega")? = d.omega(m);
        *out(abs_residue, "abs_residue")? = d.residues[m].norm();
        Ok(())
    })
}

/// Excited-state population |C_e0(t)|² at `len` times (fs).
///
/// # Safety
/// `t_fs` and `population` must each point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_poles_population(
    poles: *const PlexdynPoles,
    t_fs: *const f64,
    population: *mut f64,
    len: usize,
) -> PlexdynStatus {
    guard(|| {
        let d = &deref(poles, "poles")?.0;
        let t = slice(t_fs, len, "t_fs")?;
        let p = slice_mut(population, len, "population")?;
        for (p, &t) in p.iter_mut().zip(t) {
            *p = d.amplitude(t).norm_sqr();
        }
        Ok(())
    })
}

/// Regime label with the default classifier thresholds.
///
/// # Safety
/// Pointers must be valid; `poles` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_poles_regime(poles: *const PlexdynPoles, regime: *mut PlexdynRegime) -> PlexdynStatus {
    guard(|| {
        let d = &deref(poles, "poles")?.0;
        let slot = out(regime, "regime")?;
        *slot = match classify_regime(d, &ClassifierThresholds::default()).regime {
            Regime::Weak => PlexdynRegime::Weak,
            Regime::Strong => PlexdynRegime::Strong,
            Regime::MultiMode => PlexdynRegime::MultiMode,
        };
        Ok(())
    })
}

/// # Safety
/// `poles` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn plexdyn_poles_free(poles: *mut PlexdynPoles) {
    free(poles)
}
