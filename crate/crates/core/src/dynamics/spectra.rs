//! Coherence spectrum, stationary single-photon spectrum and the
//! time-dependent photon amplitude.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_time_grid, AmplitudeTrace, PoleDecomposition, TransferFunction};
use crate::error::{Error, Result};
use crate::greens::KernelSpectrum;
use crate::pseudomode::LorentzianSet;
use crate::units::{fs_to_inv_mev, HBAR_MEV_FS, MEV_PER_EV};

/// Anything that yields a kernel density `K(ω)` in meV at an absolute
/// energy in eV.
pub trait KernelDensity {
    fn density(&self, omega: f64) -> f64;
}

impl KernelDensity for LorentzianSet {
    fn density(&self, omega: f64) -> f64 {
        self.evaluate(omega)
    }
}

impl KernelDensity for KernelSpectrum {
    fn density(&self, omega: f64) -> f64 {
        self.interpolate(omega)
    }
}

/// `|Im C_e0(ω)|` in fs, where
/// `Im C_e0(ω) = ∫₀^∞ Im[C_e0(t) e^{−iω_e t}] e^{−iωt} dt`.
///
/// With `z_m = s_m − iω_e` the transform is
/// `(1/2i) Σ_m [R_m/(iω − z_m) − R_m*/(iω − z_m*)]`.
pub fn coherence_spectrum(decomp: &PoleDecomposition, omega_grid: &[f64]) -> Vec<f64> {
    let we = decomp.omega_e * MEV_PER_EV;
    omega_grid
        .iter()
        .map(|&w| {
            let iw = Complex64::new(0.0, w * MEV_PER_EV);
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, r) in decomp.poles.iter().zip(&decomp.residues) {
                let z = s - Complex64::new(0.0, we);
                acc += r / (iw - z) - r.conj() / (iw - z.conj());
            }
            (acc / Complex64::new(0.0, 2.0)).norm() * HBAR_MEV_FS
        })
        .collect()
}

/// Numerical half-line transform of a sampled trace (trapezoid rule), a
/// cross-check of [`coherence_spectrum`]. The trace must be long enough for
/// `C_e0` to have decayed and fine enough to resolve `ω + ω_e`.
pub fn coherence_spectrum_numerical(trace: &AmplitudeTrace, omega_e: f64, omega_grid: &[f64]) -> Result<Vec<f64>> {
    check_time_grid(&trace.t_fs)?;
    let fastest = omega_grid.iter().fold(0.0f64, |m, w| m.max(w.abs())) + omega_e;
    let period = 2.0 * std::f64::consts::PI / (fastest * MEV_PER_EV);
    let max_dt = trace.t_fs.windows(2).map(|w| fs_to_inv_mev(w[1] - w[0])).fold(0.0, f64::max);
    if max_dt > period / 10.0 {
        return Err(Error::Resolution(format!(
            "time step {:.4} fs exceeds a tenth of the fastest period {:.4} fs",
            max_dt * HBAR_MEV_FS,
            period * HBAR_MEV_FS
        )));
    }
    let we = omega_e * MEV_PER_EV;
    let samples: Vec<(f64, f64)> = trace
        .t_fs
        .iter()
        .zip(&trace.amplitude)
        .map(|(&t, c)| {
            let x = fs_to_inv_mev(t);
            (x, (c * Complex64::new(0.0, -we * x).exp()).im)
        })
        .collect();
    Ok(omega_grid
        .iter()
        .map(|&w| {
            let wm = w * MEV_PER_EV;
            let f = |(x, v): (f64, f64)| v * Complex64::new(0.0, -wm * x).exp();
            let acc: Complex64 = samples.windows(2).map(|p| (f(p[0]) + f(p[1])) * (0.5 * (p[1].0 - p[0].0))).sum();
            acc.norm() * HBAR_MEV_FS
        })
        .collect())
}

/// `|C_g1^∞(δ)|² = K(ω_e + δ) |Q(−iδ)/P(−iδ)|²` per meV of detuning.
///
/// `set` must be the pseudo-mode set used to build `tf` (the kernel of the
/// amplitude equation).
pub fn stationary_photon_spectrum(set: &LorentzianSet, tf: &TransferFunction, delta_grid: &[f64]) -> Vec<f64> {
    delta_grid
        .iter()
        .map(|&d| {
            let k = set.evaluate(tf.omega_e + d / MEV_PER_EV);
            k * tf.amplitude(Complex64::new(0.0, -d)).norm_sqr()
        })
        .collect()
}

/// `C_g1(ω, t) = −i √K(ω) ∫₀ᵗ C_e0(t′) e^{i(ω−ω_e)t′} dt′` on `omega_grid`
/// (eV), by trapezoid quadrature over the trace samples up to `t_fs`.
/// `|C_g1|²` is a density per meV.
pub fn photon_amplitude(
    kernel: &dyn KernelDensity,
    trace: &AmplitudeTrace,
    omega_e: f64,
    omega_grid: &[f64],
    t_fs: f64,
) -> Result<Vec<Complex64>> {
    check_time_grid(&trace.t_fs)?;
    let t_last = *trace.t_fs.last().unwrap();
    if t_fs < 0.0 || t_fs > t_last + 1e-9 {
        return Err(Error::InvalidParameter(format!("trace covers [0, {t_last}] fs but t = {t_fs} fs was requested")));
    }
    let n_in = trace.t_fs.iter().take_while(|&&t| t <= t_fs + 1e-12).count();
    let x: Vec<f64> = trace.t_fs.iter().map(|&t| fs_to_inv_mev(t)).collect();

    // fastest oscillation: detuning plus the largest rate of change of the
    // trace relative to its peak magnitude
    let detuning = omega_grid.iter().fold(0.0f64, |m, w| m.max((w - omega_e).abs() * MEV_PER_EV));
    let peak = trace.amplitude[..n_in.max(1)].iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let mut own = 0.0f64;
    let mut max_dt = 0.0f64;
    for i in 1..n_in.max(1) {
        let dt = x[i] - x[i - 1];
        max_dt = max_dt.max(dt);
        if peak > 0.0 {
            own = own.max((trace.amplitude[i] - trace.amplitude[i - 1]).norm() / (dt * peak));
        }
    }
    let fastest = detuning + own;
    if fastest > 0.0 && max_dt > 2.0 * std::f64::consts::PI / fastest / 10.0 {
        return Err(Error::Resolution(format!(
            "time step {:.4} fs gives fewer than 10 points per fastest oscillation ({:.1} meV)",
            max_dt * HBAR_MEV_FS,
            fastest
        )));
    }

    let xt = fs_to_inv_mev(t_fs);
    Ok(omega_grid
        .iter()
        .map(|&w| {
            let d = (w - omega_e) * MEV_PER_EV;
            let f = |i: usize| trace.amplitude[i] * Complex64::new(0.0, d * x[i]).exp();
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 1..n_in {
                acc += (f(i - 1) + f(i)) * (0.5 * (x[i] - x[i - 1]));
            }
            // partial last segment when t falls between samples
            if n_in >= 1 && n_in < x.len() && xt > x[n_in - 1] {
                let j = n_in - 1;
                let frac = (xt - x[j]) / (x[j + 1] - x[j]);
                let c = trace.amplitude[j] + (trace.amplitude[j + 1] - trace.amplitude[j]) * frac;
                acc += (f(j) + c * Complex64::new(0.0, d * xt).exp()) * (0.5 * (xt - x[j]));
            }
            Complex64::new(0.0, -kernel.density(w).max(0.0).sqrt()) * acc
        })
        .collect())
}

/// A local maximum of a sampled spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub omega: f64,
    pub value: f64,
}

/// Local maxima refined by a parabola through the three samples around each,
/// sorted by height descending.
pub fn spectral_peaks(grid: &[f64], values: &[f64]) -> Vec<SpectralPeak> {
    let mut peaks = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (l, c, r) = (values[i - 1], values[i], values[i + 1]);
        if c > l && c >= r {
            let denom = l - 2.0 * c + r;
            let off = if denom < 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
            let h = 0.5 * (grid[i + 1] - grid[i - 1]);
            peaks.push(SpectralPeak { omega: grid[i] + off * h, value: c - 0.25 * (l - r) * off });
        }
    }
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value));
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{amplitude_trace, build_transfer_function, find_poles, time_grid};
    use crate::pseudomode::Lorentzian;

    fn single(area: f64, width: f64) -> LorentzianSet {
        LorentzianSet::new(vec![Lorentzian::new(3.0, width, area)]).unwrap()
    }

    fn stationary_peaks(area: f64, width: f64) -> Vec<SpectralPeak> {
        let set = single(area, width);
        let tf = build_transfer_function(&set, 3.0);
        let grid: Vec<f64> = (-3000..=3000).map(|i| i as f64 * 0.1).collect();
        spectral_peaks(&grid, &stationary_photon_spectrum(&set, &tf, &grid))
    }

    #[test]
    fn stationary_single_mode_matches_closed_form() {
        let (a, b) = (3717.0, 24.8);
        let set = single(a, b);
        let tf = build_transfer_function(&set, 3.0);
        let grid: Vec<f64> = (-50..=50).map(|i| i as f64 * 4.0).collect();
        let got = stationary_photon_spectrum(&set, &tf, &grid);
        for (d, g) in grid.iter().zip(&got) {
            let k = a / std::f64::consts::PI * b / (d * d + b * b);
            let want = k * (d * d + b * b) / (d.powi(4) + (b * b - 2.0 * a) * d * d + a * a);
            assert!((g - want).abs() < 1e-12 * want.max(1e-300), "{d}: {g} vs {want}");
        }
    }

    #[test]
    fn stationary_doublet_and_singlet() {
        let p = stationary_peaks(3717.0, 24.8);
        assert_eq!(p.len(), 2);
        let sep = (p[0].omega - p[1].omega).abs();
        let exact = 2.0 * (3717.0 - 24.8f64 * 24.8 / 2.0).sqrt();
        assert!((sep - exact).abs() < 0.05, "{sep} vs {exact}");

        let p = stationary_peaks(100.0, 20.0); // 2A < B²
        assert_eq!(p.len(), 1);
        assert!(p[0].omega.abs() < 0.1);
    }

    #[test]
    fn single_mode_splitting_matches_poles() {
        let (a, b) = (10000.0, 20.0);
        let d = find_poles(&build_transfer_function(&single(a, b), 3.0)).unwrap();
        let two_omega1 = 2.0 * d.omega(0).abs();
        let p = stationary_peaks(a, b);
        let sep = (p[0].omega - p[1].omega).abs();
        assert!((two_omega1 - sep).abs() / sep < 0.02, "{two_omega1} vs {sep}");
    }

    #[test]
    fn one_pole_coherence_is_lorentzian() {
        // nearly decoupled emitter: C ≈ e^{s t}, a single line at ω_e − Im s
        let set = LorentzianSet::new(vec![Lorentzian::new(3.2, 40.0, 20.0)]).unwrap();
        let d = find_poles(&build_transfer_function(&set, 3.0)).unwrap();
        assert!(d.residues[0].norm() > 0.99);
        let grid: Vec<f64> = (0..=2000).map(|i| 2.9 + i as f64 * 1e-4).collect();
        let spec = coherence_spectrum(&d, &grid);
        let peaks = spectral_peaks(&grid, &spec);
        let want = 3.0 - d.omega(0) / 1000.0;
        assert!((peaks[0].omega - want).abs() < 1e-4, "{} vs {want}", peaks[0].omega);
        // half width at half maximum equals the decay rate
        let half = peaks[0].value / 2.0;
        let hi = grid.iter().zip(&spec).find(|(w, v)| **w > want && **v < half).unwrap().0;
        assert!(((hi - want) * 1000.0 - d.gamma(0)).abs() < 0.3);
    }

    #[test]
    fn numerical_transform_agrees() {
        let set = LorentzianSet::new(vec![Lorentzian::new(3.0, 60.0, 2000.0)]).unwrap();
        let d = find_poles(&build_transfer_function(&set, 3.0)).unwrap();
        let t = time_grid(300.0, 0.005).unwrap();
        let trace = amplitude_trace(&d, &t).unwrap();
        let grid = [2.9, 2.95, 3.0, 3.05];
        let a = coherence_spectrum(&d, &grid);
        let b = coherence_spectrum_numerical(&trace, 3.0, &grid).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-2 * x.max(1.0), "{x} vs {y}");
        }
        let coarse = amplitude_trace(&d, &time_grid(300.0, 0.5).unwrap()).unwrap();
        assert!(matches!(coherence_spectrum_numerical(&coarse, 3.0, &grid), Err(Error::Resolution(_))));
    }

    #[test]
    fn photon_amplitude_initial_and_resolution() {
        let set = single(3717.0, 24.8);
        let d = find_poles(&build_transfer_function(&set, 3.0)).unwrap();
        let trace = amplitude_trace(&d, &time_grid(50.0, 0.05).unwrap()).unwrap();
        let grid = [2.8, 3.0, 3.2];
        let z = photon_amplitude(&set, &trace, 3.0, &grid, 0.0).unwrap();
        assert!(z.iter().all(|c| c.norm() == 0.0));
        let coarse = amplitude_trace(&d, &time_grid(50.0, 4.0).unwrap()).unwrap();
        assert!(matches!(photon_amplitude(&set, &coarse, 3.0, &grid, 40.0), Err(Error::Resolution(_))));
    }

    #[test]
    fn stationary_limit_of_photon_amplitude() {
        let (a, b) = (10000.0, 20.0);
        let set = single(a, b);
        let tf = build_transfer_function(&set, 3.0);
        let d = find_poles(&tf).unwrap();
        let gamma_min = d.poles.iter().map(|s| -s.re).fold(f64::INFINITY, f64::min);
        let t_end = 500.0 / gamma_min * HBAR_MEV_FS;
        let trace = amplitude_trace(&d, &time_grid(t_end, 0.2).unwrap()).unwrap();
        let t_end = *trace.t_fs.last().unwrap();
        let deltas: Vec<f64> = (-2000..=2000).map(|i| i as f64 * 0.1).collect();
        let stat = stationary_photon_spectrum(&set, &tf, &deltas);
        for p in spectral_peaks(&deltas, &stat).iter().take(2) {
            let w = 3.0 + p.omega / 1000.0;
            let c = photon_amplitude(&set, &trace, 3.0, &[w], t_end).unwrap()[0];
            let want = stationary_photon_spectrum(&set, &tf, &[p.omega])[0];
            assert!((c.norm_sqr() - want).abs() < 1e-3 * want, "{} vs {want}", c.norm_sqr());
        }
    }
}
