//! Frequency-dependent permittivities of the core, shell and background.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Anything that can report a complex relative permittivity at a photon
/// energy in eV.
pub trait Permittivity {
    fn permittivity(&self, omega: f64) -> Result<Complex64>;
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { quantity: "photon energy", value: omega })
    }
}

/// Free-electron (Drude) metal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrudeParams {
    pub eps_inf: f64,
    /// Plasma energy, eV.
    pub omega_p: f64,
    /// Damping, eV.
    pub gamma: f64,
}

impl DrudeParams {
    /// Silver as used for the reference configurations.
    pub const SILVER: DrudeParams = DrudeParams { eps_inf: 3.7, omega_p: 8.55, gamma: 0.065 };

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps_inf", self.eps_inf), ("omega_p", self.omega_p), ("gamma", self.gamma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("Drude {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

impl Permittivity for DrudeParams {
    fn permittivity(&self, omega: f64) -> Result<Complex64> {
        check_omega(omega)?;
        let denom = Complex64::new(omega, 0.0) * Complex64::new(omega, self.gamma);
        Ok(self.eps_inf - self.omega_p * self.omega_p / denom)
    }
}

/// Lorentz oscillator shell whose nominal oscillator strength is defined at
/// a reference energy `omega_ref` and rescaled to `f·omega_ref/omega_ex`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzShellParams {
    pub eps_inf_sh: f64,
    pub f_nominal: f64,
    /// Exciton energy, eV.
    pub omega_ex: f64,
    /// Exciton linewidth, eV.
    pub gamma_ex: f64,
    /// Reference energy at which `f_nominal` is quoted, eV.
    pub omega_ref: f64,
}

impl LorentzShellParams {
    /// J-aggregate shell of the reference configuration, with the exciton
    /// placed at `omega_ex`.
    pub fn j_aggregate(omega_ex: f64) -> Self {
        LorentzShellParams { eps_inf_sh: 1.69, f_nominal: 0.3, omega_ex, gamma_ex: 0.050, omega_ref: 1.8 }
    }

    /// Oscillator strength entering the Lorentz term.
    pub fn effective_strength(&self) -> f64 {
        self.f_nominal * self.omega_ref / self.omega_ex
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_nominal >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "shell oscillator strength must be non-negative, got {}",
                self.f_nominal
            )));
        }
        for (name, v) in [
            ("eps_inf_sh", self.eps_inf_sh),
            ("omega_ex", self.omega_ex),
            ("gamma_ex", self.gamma_ex),
            ("omega_ref", self.omega_ref),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("shell {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// First contiguous window in `[lo, hi]` where `Re ε_sh < 0`, scanned at
    /// 1 meV resolution.
    pub fn negative_window(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        const STEP: f64 = 1e-3;
        let n = ((hi - lo) / STEP).floor() as usize;
        let mut start = None;
        for i in 0..=n {
            let w = lo + i as f64 * STEP;
            let negative = self.permittivity(w).map(|e| e.re < 0.0).unwrap_or(false);
            match (negative, start) {
                (true, None) => start = Some(w),
                (false, Some(s)) => return Some((s, w - STEP)),
                _ => {}
            }
        }
        start.map(|s| (s, lo + n as f64 * STEP))
    }
}

impl Permittivity for LorentzShellParams {
    fn permittivity(&self, omega: f64) -> Result<Complex64> {
        check_omega(omega)?;
        let wex2 = self.omega_ex * self.omega_ex;
        let denom = Complex64::new(wex2 - omega * omega, -self.gamma_ex * omega);
        Ok(self.eps_inf_sh + self.effective_strength() * wex2 / denom)
    }
}

/// Dispersionless dielectric, e.g. the embedding medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantPermittivity(pub f64);

impl Permittivity for ConstantPermittivity {
    fn permittivity(&self, omega: f64) -> Result<Complex64> {
        check_omega(omega)?;
        Ok(Complex64::new(self.0, 0.0))
    }
}

/// Core, optional shell and background, with the layer radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialStack {
    pub core: DrudeParams,
    pub shell: Option<LorentzShellParams>,
    /// Core radius, nm.
    pub core_radius: f64,
    /// Shell thickness, nm (0 without shell).
    pub shell_thickness: f64,
    /// Background permittivity n_b².
    pub eps_b: f64,
}

/// Permittivities of the three regions at one frequency.
#[derive(Debug, Clone, Copy)]
pub struct LayerPermittivities {
    pub core: Complex64,
    pub shell: Complex64,
    pub background: f64,
}

impl MaterialStack {
    pub fn bare(core: DrudeParams, core_radius: f64, eps_b: f64) -> Self {
        MaterialStack { core, shell: None, core_radius, shell_thickness: 0.0, eps_b }
    }

    pub fn coated(core: DrudeParams, shell: LorentzShellParams, core_radius: f64, thickness: f64, eps_b: f64) -> Self {
        MaterialStack { core, shell: Some(shell), core_radius, shell_thickness: thickness, eps_b }
    }

    pub fn outer_radius(&self) -> f64 {
        self.core_radius + self.shell_thickness
    }

    pub fn validate(&self) -> Result<()> {
        self.core.validate()?;
        if let Some(shell) = &self.shell {
            shell.validate()?;
        }
        if !(self.core_radius > 0.0) {
            return Err(Error::Geometry(format!("core radius must be positive, got {}", self.core_radius)));
        }
        if !(self.shell_thickness >= 0.0) {
            return Err(Error::Geometry(format!("shell thickness must be non-negative, got {}", self.shell_thickness)));
        }
        if !(self.eps_b >= 1.0) {
            return Err(Error::InvalidParameter(format!("background permittivity must be >= 1, got {}", self.eps_b)));
        }
        Ok(())
    }

    /// A missing shell is filled with background material.
    pub fn layers(&self, omega: f64) -> Result<LayerPermittivities> {
        let core = self.core.permittivity(omega)?;
        let shell = match &self.shell {
            Some(s) => s.permittivity(omega)?,
            None => ConstantPermittivity(self.eps_b).permittivity(omega)?,
        };
        Ok(LayerPermittivities { core, shell, background: self.eps_b })
    }
}
