//! Physical constants and unit conversions.
//!
//! Energies and frequencies are carried in eV (absolute) or meV (rates,
//! detunings, kernel spectra), lengths in nm and times in fs.

/// ħc in eV·nm; converts a photon energy in eV to a vacuum wavenumber in 1/nm.
pub const HBAR_C_EV_NM: f64 = 197.326_980_4;

/// ħ in meV·fs; a rate of 1 meV corresponds to 1/ħ per fs.
pub const HBAR_MEV_FS: f64 = 658.211_956_9;

/// One Debye in C·m.
pub const DEBYE_C_M: f64 = 3.335_64e-30;

/// Converts `d² ω² Im G / (π ε₀ c²)` to a kernel density in meV.
///
/// With the dipole `d` in Debye, the photon energy `E = ħω` in eV and
/// `Im G` in 1/nm, the kernel density (energy per unit energy, meV) is
///
/// ```text
/// K = KERNEL_MEV_PER_D2_EV2_INV_NM · d² · E² · Im G
/// ```
///
/// Derivation: `K = ħ · d² ω² Im G / (π ħ ε₀ c²)` in J. Substituting
/// `ω = E e / ħ`, `Im G[1/m] = 1e9 Im G[1/nm]` and dividing by `e / 1000`
/// (J → meV) gives `D² e · 1e12 / (ħ² π ε₀ c²)` with D = 3.33564e-30 C·m,
/// e = 1.602176634e-19 C, ħ = 1.054571817e-34 J·s,
/// ε₀ = 8.8541878128e-12 F/m and c = 299792458 m/s.
pub const KERNEL_MEV_PER_D2_EV2_INV_NM: f64 = 6.411_747_482_235_517e-5;

/// Converts meV to eV.
pub const MEV_PER_EV: f64 = 1000.0;

/// Vacuum wavenumber (1/nm) of a photon with energy `omega_ev` in a medium
/// of permittivity `eps`.
pub fn wavenumber(omega_ev: f64, eps: num_complex::Complex64) -> num_complex::Complex64 {
    eps.sqrt() * (omega_ev / HBAR_C_EV_NM)
}

/// Converts a time in fs to the reciprocal-meV units used by pole exponents.
#[inline]
pub fn fs_to_inv_mev(t_fs: f64) -> f64 {
    t_fs / HBAR_MEV_FS
}
