//! Direct solution of the amplitude equation
//! `Ċ(t) = −∫₀ᵗ 𝒦(t−t′) C(t′) dt′`, `C(0) = 1`, from a sampled kernel
//! spectrum. Independent of the pseudo-mode fit and used to validate it.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{check_time_grid, AmplitudeTrace, TraceSource};
use crate::error::{Error, Result};
use crate::greens::KernelSpectrum;
use crate::pseudomode::LorentzianSet;
use crate::units::{fs_to_inv_mev, HBAR_MEV_FS, MEV_PER_EV};

/// Largest accepted time step, fs.
pub const MAX_STEP_FS: f64 = 0.02;

/// Default limit on the estimated fraction of kernel area outside the band.
pub const DEFAULT_TAIL_LIMIT: f64 = 0.05;

/// `𝒦(τ) = ∫ K(ω) e^{−i(ω−ω_e)τ} dω` on a delay grid (fs), values in meV².
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeKernel {
    pub tau_fs: Vec<f64>,
    pub values: Vec<Complex64>,
    pub omega_e: f64,
    /// Largest change of `𝒦` when the spectral grid is coarsened by two,
    /// relative to `𝒦(0)`. Zero for analytic kernels.
    pub halving_error: f64,
}

impl TimeKernel {
    /// Analytic kernel of a Lorentzian expansion, `Σ_j A_j e^{−B̃_j τ}`.
    pub fn from_lorentzians(set: &LorentzianSet, omega_e: f64, tau_fs: &[f64]) -> Self {
        let values = tau_fs
            .iter()
            .map(|&t| {
                let x = fs_to_inv_mev(t);
                set.terms()
                    .iter()
                    .map(|l| l.area * (-Complex64::new(l.width, (l.omega - omega_e) * MEV_PER_EV) * x).exp())
                    .sum()
            })
            .collect();
        TimeKernel { tau_fs: tau_fs.to_vec(), values, omega_e, halving_error: 0.0 }
    }
}

/// Estimated kernel area beyond the sampled band, in meV², and its fraction
/// of the total. Each edge is treated as the start of a `1/(ω−ω̄)²` tail
/// about the spectral centroid `ω̄`, whose remaining area is `K_edge·|edge − ω̄|`.
pub fn band_truncation(spectrum: &KernelSpectrum) -> (f64, f64) {
    let g = &spectrum.grid;
    let v = &spectrum.values;
    let area = spectrum.area();
    let weighted: Vec<f64> = g.iter().zip(v).map(|(w, k)| w * k).collect();
    let centroid = crate::greens::trapezoid(g, &weighted) * MEV_PER_EV / area;
    let lo = v[0] * (centroid - g[0]).abs() * MEV_PER_EV;
    let hi = v[v.len() - 1] * (g[g.len() - 1] - centroid).abs() * MEV_PER_EV;
    let missing = lo + hi;
    (missing, missing / (area + missing))
}

fn transform(grid: &[f64], values: &[f64], omega_e: f64, x: f64) -> Complex64 {
    let f = |i: usize| values[i] * Complex64::new(0.0, -(grid[i] - omega_e) * MEV_PER_EV * x).exp();
    (1..grid.len()).map(|i| (f(i - 1) + f(i)) * (0.5 * (grid[i] - grid[i - 1]) * MEV_PER_EV)).sum()
}

/// Trapezoid quadrature of the kernel transform over the sampled band.
/// Fails with [`Error::BandTruncation`] when the estimated missing area
/// exceeds `tail_limit`.
pub fn time_kernel(spectrum: &KernelSpectrum, omega_e: f64, tau_fs: &[f64], tail_limit: f64) -> Result<TimeKernel> {
    spectrum.validate()?;
    let (missing_area, missing_fraction) = band_truncation(spectrum);
    if missing_fraction > tail_limit {
        return Err(Error::BandTruncation { missing_area, missing_fraction, limit: tail_limit });
    }
    let (g, v) = (&spectrum.grid, &spectrum.values);
    let values: Vec<Complex64> = tau_fs.par_iter().map(|&t| transform(g, v, omega_e, fs_to_inv_mev(t))).collect();

    // the same transform on every second sample, at a few delays
    let g2: Vec<f64> = g.iter().step_by(2).copied().collect();
    let v2: Vec<f64> = v.iter().step_by(2).copied().collect();
    let k0 = values.first().map_or(1.0, |c| c.norm().max(f64::MIN_POSITIVE));
    let stride = (tau_fs.len() / 16).max(1);
    let halving_error = tau_fs
        .iter()
        .zip(&values)
        .step_by(stride)
        .map(|(&t, k)| (transform(&g2, &v2, omega_e, fs_to_inv_mev(t)) - k).norm() / k0)
        .fold(0.0, f64::max);

    Ok(TimeKernel { tau_fs: tau_fs.to_vec(), values, omega_e, halving_error })
}

fn uniform_step(t_fs: &[f64]) -> Result<f64> {
    check_time_grid(t_fs)?;
    if t_fs[0] != 0.0 || t_fs.len() < 2 {
        return Err(Error::InvalidParameter("oracle time grid must start at 0 with at least two points".into()));
    }
    let h = t_fs[1] - t_fs[0];
    if t_fs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
        return Err(Error::InvalidParameter("oracle time grid must be uniform".into()));
    }
    if h > MAX_STEP_FS + 1e-12 {
        return Err(Error::Resolution(format!("oracle step {h} fs exceeds the {MAX_STEP_FS} fs limit")));
    }
    Ok(h)
}

/// Trapezoidal product integration of the amplitude equation. The kernel
/// must be sampled on the same uniform grid as the solution.
pub fn solve_volterra(kernel: &TimeKernel) -> Result<AmplitudeTrace> {
    let h_fs = uniform_step(&kernel.tau_fs)?;
    let h = fs_to_inv_mev(h_fs);
    let k = &kernel.values;
    let n = k.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    c[0] = Complex64::new(1.0, 0.0);
    let denom = 1.0 + h * h * k[0] / 4.0;
    // I_n = h[½𝒦_n C_0 + Σ_{j=1}^{n−1} 𝒦_{n−j} C_j + ½𝒦_0 C_n]
    let mut i_prev = Complex64::new(0.0, 0.0);
    for m in 1..n {
        let mut partial = 0.5 * k[m] * c[0];
        for j in 1..m {
            partial += k[m - j] * c[j];
        }
        let partial = partial * h;
        c[m] = (c[m - 1] - 0.5 * h * (i_prev + partial)) / denom;
        i_prev = partial + 0.5 * h * k[0] * c[m];
    }
    Ok(AmplitudeTrace::new(kernel.tau_fs.clone(), c, TraceSource::Oracle))
}

/// Builds the time kernel from the sampled spectrum on `t_fs` and solves
/// the amplitude equation.
pub fn solve_ide_direct(
    spectrum: &KernelSpectrum,
    omega_e: f64,
    t_fs: &[f64],
    tail_limit: f64,
) -> Result<AmplitudeTrace> {
    uniform_step(t_fs)?;
    solve_volterra(&time_kernel(spectrum, omega_e, t_fs, tail_limit)?)
}

/// Decay time of `|𝒦(τ)|` below `fraction·𝒦(0)`, fs.
pub fn memory_depth(kernel: &TimeKernel, fraction: f64) -> Option<f64> {
    let k0 = kernel.values.first()?.norm();
    let last = kernel.values.iter().rposition(|v| v.norm() >= fraction * k0)?;
    kernel.tau_fs.get(last + 1).copied()
}

/// Rate `γ` (meV) of a population falling as `e^{−2γt/ħ}`, from the
/// samples nearest to `t_from` and `t_to` (fs).
pub fn population_decay_rate(trace: &AmplitudeTrace, t_from: f64, t_to: f64) -> Option<f64> {
    let i = trace.t_fs.iter().position(|&t| t >= t_from)?;
    let j = trace.t_fs.iter().rposition(|&t| t <= t_to)?;
    if j <= i || trace.population[i] <= 0.0 || trace.population[j] <= 0.0 {
        return None;
    }
    let slope = (trace.population[j].ln() - trace.population[i].ln()) / (trace.t_fs[j] - trace.t_fs[i]);
    Some(-slope * HBAR_MEV_FS / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{single_lorentzian_closed_form, time_grid};
    use crate::greens::energy_grid;
    use crate::pseudomode::Lorentzian;

    fn lorentzian_spectrum(set: &LorentzianSet, lo: f64, hi: f64, step: f64) -> KernelSpectrum {
        set.sample(&energy_grid(lo, hi, step).unwrap()).unwrap()
    }

    #[test]
    fn quadrature_of_a_lorentzian() {
        let set = LorentzianSet::new(vec![Lorentzian::new(3.0, 1.0, 500.0)]).unwrap();
        let spec = lorentzian_spectrum(&set, -7.0, 13.0, 1e-4);
        let tau: Vec<f64> = (0..=10).map(|i| i as f64 * 10.0).collect();
        let tk = time_kernel(&spec, 3.02, &tau, 1.0).unwrap();
        let exact = TimeKernel::from_lorentzians(&set, 3.02, &tau);
        for (a, b) in tk.values.iter().zip(&exact.values) {
            assert!((a - b).norm() < 1e-4 * b.norm(), "{a} vs {b}");
        }
    }

    #[test]
    fn zero_delay_is_area_and_bounded() {
        let set = LorentzianSet::new(vec![
            Lorentzian::new(3.0, 20.0, 400.0),
            Lorentzian::new(3.3, 40.0, 900.0),
            Lorentzian::new(3.6, 10.0, 200.0),
        ])
        .unwrap();
        let spec = lorentzian_spectrum(&set, -30.0, 36.0, 1e-3);
        let tau = time_grid(100.0, 0.5).unwrap();
        let tk = time_kernel(&spec, 3.2, &tau, 1.0).unwrap();
        assert!(tk.values[0].im.abs() < 1e-9 * tk.values[0].re);
        assert!((tk.values[0].re - 1500.0).abs() < 1.5);
        assert!(tk.values.iter().all(|v| v.norm() <= tk.values[0].norm() * (1.0 + 1e-12)));
    }

    #[test]
    fn band_guard() {
        let set = LorentzianSet::new(vec![Lorentzian::new(3.0, 100.0, 500.0)]).unwrap();
        let narrow = lorentzian_spectrum(&set, 2.8, 3.2, 1e-3);
        let err = time_kernel(&narrow, 3.0, &[0.0], DEFAULT_TAIL_LIMIT).unwrap_err();
        assert!(matches!(err, Error::BandTruncation { .. }));
        // the estimate tracks the true missing fraction of a Lorentzian
        let (_, frac) = band_truncation(&lorentzian_spectrum(&set, 1.0, 5.0, 1e-3));
        let truth = 1.0 - 2.0 / std::f64::consts::PI * (2000.0f64 / 100.0).atan();
        assert!((frac - truth).abs() < 0.2 * truth, "{frac} vs {truth}");
    }

    #[test]
    fn oracle_matches_closed_form() {
        let set = LorentzianSet::new(vec![Lorentzian::new(3.0, 24.8, 3717.0)]).unwrap();
        let t = time_grid(50.0, 0.01).unwrap();
        let trace = solve_volterra(&TimeKernel::from_lorentzians(&set, 3.0, &t)).unwrap();
        let cf = single_lorentzian_closed_form(3717.0, Complex64::new(24.8, 0.0), &t).unwrap();
        let err = trace.amplitude.iter().zip(&cf.amplitude).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
        assert_eq!(trace.source, TraceSource::Oracle);
    }

    #[test]
    fn second_order_convergence() {
        let set = LorentzianSet::new(vec![Lorentzian::new(3.05, 30.0, 5000.0)]).unwrap();
        let err = |h: f64| {
            let t = time_grid(20.0, h).unwrap();
            let tr = solve_volterra(&TimeKernel::from_lorentzians(&set, 3.0, &t)).unwrap();
            let cf = single_lorentzian_closed_form(5000.0, Complex64::new(30.0, 50.0), &t).unwrap();
            tr.amplitude.iter().zip(&cf.amplitude).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
        };
        let order = (err(0.02) / err(0.01)).log2();
        assert!(order >= 1.9, "order {order}");
    }

    #[test]
    fn step_limit() {
        let set = LorentzianSet::new(vec![Lorentzian::new(3.0, 20.0, 100.0)]).unwrap();
        let t = time_grid(10.0, 0.05).unwrap();
        let err = solve_volterra(&TimeKernel::from_lorentzians(&set, 3.0, &t)).unwrap_err();
        assert!(matches!(err, Error::Resolution(_)));
    }
}
