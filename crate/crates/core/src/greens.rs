//! On-axis scattering Green's tensor, Purcell factor and coupling-kernel
//! spectrum for a radially oriented dipole.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::MaterialStack;
use crate::mie::{scattered_dipole_terms, MieGeometry};
use crate::units::KERNEL_MEV_PER_D2_EV2_INV_NM;

/// Two-level emitter on the symmetry axis, dipole along the radial direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterConfig {
    /// Transition dipole, Debye.
    pub dipole_debye: f64,
    /// Distance from the metal surface, nm.
    pub gap_nm: f64,
    /// Transition energy, eV.
    pub omega_e: f64,
    /// Ground-state energy, eV. Only a global phase; carried for completeness.
    #[serde(default)]
    pub omega_g: f64,
}

impl EmitterConfig {
    pub fn new(dipole_debye: f64, gap_nm: f64, omega_e: f64) -> Self {
        EmitterConfig { dipole_debye, gap_nm, omega_e, omega_g: 0.0 }
    }

    /// Distance from the particle centre, nm.
    pub fn center_distance(&self, stack: &MaterialStack) -> f64 {
        stack.core_radius + self.gap_nm
    }

    pub fn validate(&self, stack: &MaterialStack) -> Result<()> {
        if !(self.dipole_debye > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "transition dipole must be positive, got {}",
                self.dipole_debye
            )));
        }
        if !(self.gap_nm > stack.shell_thickness) {
            return Err(Error::Geometry(format!(
                "gap {} nm must exceed the shell thickness {} nm",
                self.gap_nm, stack.shell_thickness
            )));
        }
        if !(self.omega_e > 0.0) {
            return Err(Error::Domain { quantity: "transition energy", value: self.omega_e });
        }
        Ok(())
    }
}

/// `Σ (2n+1) n(n+1) a_n h_n(k₃R)² / (k₃R)²`, the sum shared by `G_zz` and the
/// Purcell factor.
fn multipole_sum(stack: &MaterialStack, r: f64, omega: f64, n_max: usize) -> Result<(f64, Complex64)> {
    let g = MieGeometry::new(stack, omega)?;
    let terms = scattered_dipole_terms(&g, r, n_max)?;
    let x = g.k3 * r;
    let x4 = x.powi(4);
    let sum = terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let n = (i + 1) as f64;
            (2.0 * n + 1.0) * n * (n + 1.0) * t / x4
        })
        .sum();
    Ok((g.k3, sum))
}

/// Scattering part of `G_zz` at the emitter position, 1/nm.
pub fn scattering_gzz(stack: &MaterialStack, r: f64, omega: f64, n_max: usize) -> Result<Complex64> {
    let (k3, sum) = multipole_sum(stack, r, omega, n_max)?;
    Ok(-Complex64::i() * k3 / (4.0 * PI) * sum)
}

/// Radial Purcell factor `Γ⊥/Γ₀ = 1 − (3/2) Σ n(n+1)(2n+1) Re[a_n (h_n/k₃R)²]`.
pub fn purcell_factor(stack: &MaterialStack, r: f64, omega: f64, n_max: usize) -> Result<f64> {
    let g = MieGeometry::new(stack, omega)?;
    let x = g.k3 * r;
    let mut acc = 0.0;
    for (i, t) in scattered_dipole_terms(&g, r, n_max)?.iter().enumerate() {
        let n = (i + 1) as f64;
        // a_n h_n² = a_n ξ_n² / x², so a_n (h_n/x)² = term / x⁴
        acc += n * (n + 1.0) * (2.0 * n + 1.0) * (t / (x * x) / (x * x)).re;
    }
    Ok(1.0 - 1.5 * acc)
}

/// Kernel density `K(ω)` in meV at one photon energy.
pub fn kernel_density(stack: &MaterialStack, emitter: &EmitterConfig, omega: f64, n_max: usize) -> Result<f64> {
    let im_g = scattering_gzz(stack, emitter.center_distance(stack), omega, n_max)?.im;
    let d = emitter.dipole_debye;
    Ok(KERNEL_MEV_PER_D2_EV2_INV_NM * d * d * omega * omega * im_g)
}

/// Where a kernel spectrum came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelSource {
    Mie { stack: MaterialStack, emitter: EmitterConfig, n_max: usize },
    Samples { description: String },
}

/// `K(ω)` sampled on an increasing energy grid (eV), values in meV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelSpectrum {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub source: KernelSource,
}

impl KernelSpectrum {
    pub fn from_samples(grid: Vec<f64>, values: Vec<f64>, description: impl Into<String>) -> Result<Self> {
        let ks = KernelSpectrum { grid, values, source: KernelSource::Samples { description: description.into() } };
        ks.validate()?;
        Ok(ks)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.len() < 2 || self.grid.len() != self.values.len() {
            return Err(Error::InvalidParameter(format!(
                "kernel spectrum needs matching grid and values with at least two samples ({} vs {})",
                self.grid.len(),
                self.values.len()
            )));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("kernel grid must be strictly increasing".into()));
        }
        if let Some((w, v)) = self.grid.iter().zip(&self.values).find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::Numerical(format!("kernel spectrum negative or undefined at {w} eV: {v}")));
        }
        Ok(())
    }

    /// `∫K dω` in meV² (trapezoid).
    pub fn area(&self) -> f64 {
        trapezoid(&self.grid, &self.values) * 1e3
    }

    /// Spectrum with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        KernelSpectrum { values: self.values.iter().map(|v| v * factor).collect(), ..self.clone() }
    }

    /// Grid point with the largest kernel value.
    pub fn argmax(&self) -> (f64, f64) {
        self.grid
            .iter()
            .zip(&self.values)
            .fold((f64::NAN, f64::NEG_INFINITY), |best, (&w, &v)| if v > best.1 { (w, v) } else { best })
    }

    /// Linear interpolation; zero outside the sampled band.
    pub fn interpolate(&self, omega: f64) -> f64 {
        let g = &self.grid;
        if omega < g[0] || omega > g[g.len() - 1] {
            return 0.0;
        }
        let i = g.partition_point(|&x| x <= omega).clamp(1, g.len() - 1);
        let t = (omega - g[i - 1]) / (g[i] - g[i - 1]);
        self.values[i - 1] * (1.0 - t) + self.values[i] * t
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "omega_eV,K_meV")?;
        for (g, v) in self.grid.iter().zip(&self.values) {
            writeln!(w, "{g:.6},{v:.10e}")?;
        }
        Ok(())
    }
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Uniform grid from `lo` to `hi` inclusive, built by index to avoid drift.
pub fn energy_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!("invalid grid [{lo}, {hi}] with step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

/// Kernel spectrum of a stack/emitter pair on `grid`, evaluated in parallel.
pub fn kernel_spectrum(
    stack: &MaterialStack,
    emitter: &EmitterConfig,
    grid: &[f64],
    n_max: usize,
) -> Result<KernelSpectrum> {
    stack.validate()?;
    emitter.validate(stack)?;
    let values = grid.par_iter().map(|&w| kernel_density(stack, emitter, w, n_max)).collect::<Result<Vec<f64>>>()?;
    let ks = KernelSpectrum {
        grid: grid.to_vec(),
        values,
        source: KernelSource::Mie { stack: stack.clone(), emitter: *emitter, n_max },
    };
    ks.validate()?;
    Ok(ks)
}
