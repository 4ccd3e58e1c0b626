//! Emitter amplitude from a pseudo-mode expansion via the Laplace transfer
//! function `Y(s) = Q(s)/P(s)`, its poles and residues.
//!
//! Rates, detunings and poles are in meV; times in fs; `e^{s t}` is
//! evaluated as `exp(s · t/ħ)`.

pub mod poly;
mod regime;
mod spectra;

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::KernelSpectrum;
use crate::pseudomode::LorentzianSet;
use crate::units::{fs_to_inv_mev, MEV_PER_EV};
use poly::Poly;

pub use regime::{classify_regime, ClassifierThresholds, Regime, RegimeReport};
pub use spectra::{
    coherence_spectrum, coherence_spectrum_numerical, photon_amplitude, spectral_peaks, stationary_photon_spectrum,
    KernelDensity, SpectralPeak,
};

/// Normalization linking the kernel spectrum `K(ω)` to the memory kernel of
/// the amplitude equation, `𝒦(τ) = κ ∫ K(ω) e^{−i(ω−ω_e)τ} dω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemoryConvention {
    /// κ = 1.
    Unit,
    /// κ = 2π, the normalization of the reference pole tables and dynamics.
    #[default]
    TwoPi,
}

impl MemoryConvention {
    pub fn factor(self) -> f64 {
        match self {
            MemoryConvention::Unit => 1.0,
            MemoryConvention::TwoPi => 2.0 * std::f64::consts::PI,
        }
    }

    /// Pseudo-mode set entering the amplitude equation.
    pub fn apply(self, set: &LorentzianSet) -> Result<LorentzianSet> {
        set.with_area_scale(self.factor())
    }

    pub fn apply_spectrum(self, spectrum: &KernelSpectrum) -> KernelSpectrum {
        spectrum.scaled(self.factor())
    }
}

/// `Y(s) = Q(s)/P(s)` with `Q = Π(s + B̃_j)` and `P = sQ + Σ A_k Q_k`.
#[derive(Debug, Clone)]
pub struct TransferFunction {
    pub q: Poly,
    pub p: Poly,
    pub omega_e: f64,
    /// `B̃_j = B_j + i(Ω_j − ω_e)`, meV.
    pub shifted_rates: Vec<Complex64>,
    /// `A_j`, meV².
    pub areas: Vec<f64>,
}

impl TransferFunction {
    /// `s Q(s) + Σ A_k Π_{j≠k}(s + B̃_j)` evaluated from the factors directly.
    pub fn p_from_factors(&self, s: Complex64) -> Complex64 {
        let q: Complex64 = self.shifted_rates.iter().map(|b| s + b).product();
        let mut acc = s * q;
        for (k, a) in self.areas.iter().enumerate() {
            let qk: Complex64 =
                self.shifted_rates.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, b)| s + b).product();
            acc += a * qk;
        }
        acc
    }

    /// Checks the expanded `P` against its factored form at three points.
    pub fn verify_identity(&self) -> Result<()> {
        let scale = self.shifted_rates.iter().map(|b| b.norm()).fold(1.0, f64::max);
        for s in [Complex64::new(0.37, -1.3), Complex64::new(-2.1, 0.8), Complex64::new(1.7, 2.9)] {
            let s = s * scale;
            let direct = self.p.eval(s);
            let factored = self.p_from_factors(s);
            if (direct - factored).norm() > 1e-10 * factored.norm().max(1.0) {
                return Err(Error::Numerical(format!(
                    "transfer-function identity violated at s={s}: {direct} vs {factored}"
                )));
            }
        }
        Ok(())
    }

    /// Laplace-domain amplitude `C̃(s) = Q(s)/P(s)`.
    pub fn amplitude(&self, s: Complex64) -> Complex64 {
        self.q.eval(s) / self.p.eval(s)
    }
}

pub fn build_transfer_function(set: &LorentzianSet, omega_e: f64) -> TransferFunction {
    let shifted: Vec<Complex64> =
        set.terms().iter().map(|t| Complex64::new(t.width, (t.omega - omega_e) * MEV_PER_EV)).collect();
    let areas: Vec<f64> = set.terms().iter().map(|t| t.area).collect();
    let q = shifted.iter().fold(Poly::one(), |acc, b| acc.mul_linear(*b));
    let mut p = q.shift_up();
    for k in 0..shifted.len() {
        let qk =
            shifted.iter().enumerate().filter(|(j, _)| *j != k).fold(Poly::one(), |acc, (_, b)| acc.mul_linear(*b));
        p.add_scaled(&qk, areas[k]);
    }
    TransferFunction { q, p, omega_e, shifted_rates: shifted, areas }
}

/// Poles `s_m` (meV) and residues `R_m`, sorted by `|R_m|` descending.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoleDecomposition {
    pub poles: Vec<Complex64>,
    pub residues: Vec<Complex64>,
    pub omega_e: f64,
}

/// One row of the pole table.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PoleRow {
    pub gamma_meV: f64,
    pub omega_meV: f64,
    pub abs_R: f64,
}

impl PoleDecomposition {
    /// Decay rate `γ_m = −Re s_m`, meV.
    pub fn gamma(&self, m: usize) -> f64 {
        -self.poles[m].re
    }

    /// Oscillation frequency `ω_m = Im s_m`, meV.
    pub fn omega(&self, m: usize) -> f64 {
        self.poles[m].im
    }

    pub fn abs_residues(&self) -> Vec<f64> {
        self.residues.iter().map(|r| r.norm()).collect()
    }

    /// `C_e0(t)` in the frame rotating at `ω_e`.
    pub fn amplitude(&self, t_fs: f64) -> Complex64 {
        let t = fs_to_inv_mev(t_fs);
        self.poles.iter().zip(&self.residues).map(|(s, r)| r * (s * t).exp()).sum()
    }

    pub fn rows(&self) -> Vec<PoleRow> {
        (0..self.poles.len())
            .map(|m| PoleRow { gamma_meV: self.gamma(m), omega_meV: self.omega(m), abs_R: self.residues[m].norm() })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Out<'a> {
            #[serde(rename = "omega_e_eV")]
            omega_e: f64,
            poles: &'a [PoleRow],
        }
        Ok(serde_json::to_string_pretty(&Out { omega_e: self.omega_e, poles: &self.rows() })?)
    }
}

fn companion_roots(p: &Poly) -> Result<Vec<Complex64>> {
    let coeffs = &p.0;
    let n = p.degree();
    let lead = p.leading();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    let eig = m
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("Schur decomposition of the companion matrix failed".into()))?;
    Ok(eig.iter().copied().collect())
}

fn polish(p: &Poly, dp: &Poly, mut s: Complex64) -> Complex64 {
    for _ in 0..50 {
        let d = dp.eval(s);
        if d.norm() == 0.0 {
            break;
        }
        let step = p.eval(s) / d;
        s -= step;
        if step.norm() <= 1e-15 * s.norm().max(1.0) {
            break;
        }
    }
    s
}

pub fn find_poles(tf: &TransferFunction) -> Result<PoleDecomposition> {
    let dp = tf.p.derivative();
    let roots: Vec<Complex64> = companion_roots(&tf.p)?
        .into_iter()
        .map(|s| {
            let mut s = polish(&tf.p, &dp, s);
            // the factored form avoids cancellation among large coefficients
            for _ in 0..3 {
                let d = dp.eval(s);
                if d.norm() > 0.0 {
                    s -= tf.p_from_factors(s) / d;
                }
            }
            s
        })
        .collect();

    let scale = roots.iter().map(|s| s.norm()).fold(1.0, f64::max);
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let sep = (roots[i] - roots[j]).norm();
            if sep < 1e-9 * scale {
                return Err(Error::DegenerateRoots { first: roots[i], second: roots[j], separation: sep });
            }
        }
    }
    // residual check relative to the size of the polynomial's terms
    for s in &roots {
        let size: f64 = tf.p.0.iter().enumerate().map(|(k, c)| c.norm() * s.norm().powi(k as i32)).sum();
        if tf.p.eval(*s).norm() > 1e-12 * size.max(1.0) {
            return Err(Error::Numerical(format!("root {s} not converged: |P| = {}", tf.p.eval(*s).norm())));
        }
    }

    // R_m = Q(s_m)/P'(s_m) with both evaluated in product form
    let mut pairs: Vec<(Complex64, Complex64)> = roots
        .iter()
        .enumerate()
        .map(|(m, &s)| {
            let q: Complex64 = tf.shifted_rates.iter().map(|b| s + b).product();
            let dp: Complex64 = roots.iter().enumerate().filter(|(j, _)| *j != m).map(|(_, r)| s - r).product();
            (s, q / dp)
        })
        .collect();
    pairs.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()));
    let decomp = PoleDecomposition {
        poles: pairs.iter().map(|p| p.0).collect(),
        residues: pairs.iter().map(|p| p.1).collect(),
        omega_e: tf.omega_e,
    };

    let sum: Complex64 = decomp.residues.iter().sum();
    if (sum - 1.0).norm() > 1e-8 {
        return Err(Error::Numerical(format!("residue sum rule violated: Σ R = {sum}")));
    }
    if let Some(s) = decomp.poles.iter().find(|s| s.re >= 0.0) {
        return Err(Error::Numerical(format!("unstable pole {s}")));
    }
    Ok(decomp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceSource {
    Residue,
    ClosedForm,
    Oracle,
}

impl TraceSource {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceSource::Residue => "residue",
            TraceSource::ClosedForm => "closed-form",
            TraceSource::Oracle => "oracle",
        }
    }
}

/// `C_e0(t)` and `|C_e0(t)|²` on a time grid (fs).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmplitudeTrace {
    pub t_fs: Vec<f64>,
    pub amplitude: Vec<Complex64>,
    pub population: Vec<f64>,
    pub source: TraceSource,
}

impl AmplitudeTrace {
    pub fn new(t_fs: Vec<f64>, amplitude: Vec<Complex64>, source: TraceSource) -> Self {
        let population = amplitude.iter().map(|c| c.norm_sqr()).collect();
        AmplitudeTrace { t_fs, amplitude, population, source }
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "# source={}", self.source.as_str())?;
        writeln!(w, "t_fs,re,im,population")?;
        for ((t, c), p) in self.t_fs.iter().zip(&self.amplitude).zip(&self.population) {
            writeln!(w, "{t:.6},{:.12e},{:.12e},{p:.12e}", c.re, c.im)?;
        }
        Ok(())
    }

    /// First local minimum of the population after `t = 0`.
    pub fn first_minimum(&self) -> Option<(f64, f64)> {
        let p = &self.population;
        (1..p.len().saturating_sub(1)).find(|&i| p[i] < p[i - 1] && p[i] <= p[i + 1]).map(|i| (self.t_fs[i], p[i]))
    }
}

pub(crate) fn check_time_grid(t_fs: &[f64]) -> Result<()> {
    if t_fs.is_empty() || t_fs[0] < 0.0 || t_fs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("time grid must be non-negative and strictly increasing".into()));
    }
    Ok(())
}

/// Uniform time grid `0, dt, …, t_max` (fs).
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && t_max > 0.0) {
        return Err(Error::InvalidParameter(format!("invalid time grid: t_max={t_max}, dt={dt}")));
    }
    let n = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| i as f64 * dt).collect())
}

pub fn amplitude_trace(decomp: &PoleDecomposition, t_fs: &[f64]) -> Result<AmplitudeTrace> {
    check_time_grid(t_fs)?;
    let amp = t_fs.iter().map(|&t| decomp.amplitude(t)).collect();
    Ok(AmplitudeTrace::new(t_fs.to_vec(), amp, TraceSource::Residue))
}

/// `sin(b t)/b`, continuous through `b = 0`.
fn sin_over(b: Complex64, t: f64) -> Complex64 {
    let x = b * t;
    if x.norm() < 1e-4 {
        t * (1.0 - x * x / 6.0)
    } else {
        x.sin() / b
    }
}

/// Single resonant-Lorentzian solution
/// `C(t) = e^{−B̃t/2}[cos(bt) + (B̃/2) sin(bt)/b]` with `2b = √(4A − B̃²)`.
pub fn single_lorentzian_closed_form(area: f64, shifted_rate: Complex64, t_fs: &[f64]) -> Result<AmplitudeTrace> {
    if !(area > 0.0) {
        return Err(Error::InvalidParameter(format!("Lorentzian area must be positive, got {area}")));
    }
    check_time_grid(t_fs)?;
    let bt = shifted_rate;
    let b = (4.0 * area - bt * bt).sqrt() / 2.0;
    let amp = t_fs
        .iter()
        .map(|&tf| {
            let t = fs_to_inv_mev(tf);
            (-bt * t / 2.0).exp() * ((b * t).cos() + bt / 2.0 * sin_over(b, t))
        })
        .collect();
    Ok(AmplitudeTrace::new(t_fs.to_vec(), amp, TraceSource::ClosedForm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudomode::Lorentzian;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one(area: f64, width: f64, omega: f64) -> LorentzianSet {
        LorentzianSet::new(vec![Lorentzian::new(omega, width, area)]).unwrap()
    }

    #[test]
    fn single_mode_polynomials() {
        let tf = build_transfer_function(&one(100.0, 20.0, 3.0), 3.0);
        assert_eq!(tf.q.0, vec![c(20.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(tf.p.0, vec![c(100.0, 0.0), c(20.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn symmetric_pair_expansion() {
        // hand expansion: P = s³ + 2B s² + (2A + B² + Δ²) s + 2AB for ±Δ detuning
        let set =
            LorentzianSet::new(vec![Lorentzian::new(2.95, 20.0, 100.0), Lorentzian::new(3.05, 20.0, 100.0)]).unwrap();
        let tf = build_transfer_function(&set, 3.0);
        let want = [1.0, 40.0, 200.0 + 400.0 + 2500.0, 4000.0];
        for (got, w) in tf.p.descending().iter().zip(want) {
            assert!((got - c(w, 0.0)).norm() < 1e-9, "{got} vs {w}");
        }
        tf.verify_identity().unwrap();
    }

    #[test]
    fn decoupled_limit() {
        let set =
            LorentzianSet::new(vec![Lorentzian::new(3.1, 20.0, 1e-12), Lorentzian::new(3.3, 30.0, 1e-12)]).unwrap();
        let tf = build_transfer_function(&set, 3.0);
        let d = find_poles(&tf).unwrap();
        let mut poles = d.poles.clone();
        poles.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        assert!(poles[0].norm() < 1e-9);
        assert!((poles[1] + c(20.0, 100.0)).norm() < 1e-6);
        assert!((poles[2] + c(30.0, 300.0)).norm() < 1e-6);
    }

    #[test]
    fn degenerate_roots_reported() {
        // critical damping: s² + Bs + B²/4 has a double root
        let tf = build_transfer_function(&one(200.0, 20.0, 3.0), 3.0);
        assert!(find_poles(&tf).is_ok());
        let crit = build_transfer_function(&one(100.0, 20.0, 3.0), 3.0);
        let crit = TransferFunction { p: Poly(vec![c(100.0, 0.0), c(20.0, 0.0), c(1.0, 0.0)]), ..crit };
        assert!(matches!(find_poles(&crit), Err(Error::DegenerateRoots { .. })));
    }

    #[test]
    fn closed_form_matches_residues() {
        let t = time_grid(200.0, 0.5).unwrap();
        let set = one(3717.0, 24.8, 3.0);
        let d = find_poles(&build_transfer_function(&set, 3.0)).unwrap();
        let res = amplitude_trace(&d, &t).unwrap();
        let cf = single_lorentzian_closed_form(3717.0, c(24.8, 0.0), &t).unwrap();
        for (a, b) in res.amplitude.iter().zip(&cf.amplitude) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn critical_damping_limit() {
        let t = time_grid(100.0, 1.0).unwrap();
        let cf = single_lorentzian_closed_form(100.0, c(20.0, 0.0), &t).unwrap();
        for (tf, a) in t.iter().zip(&cf.amplitude) {
            let x = fs_to_inv_mev(*tf);
            let want = (-10.0 * x).exp() * (1.0 + 10.0 * x);
            assert!((a - want).norm() < 1e-12);
        }
    }

    #[test]
    fn weak_coupling_decays_monotonically() {
        let t = time_grid(300.0, 0.5).unwrap();
        let cf = single_lorentzian_closed_form(1.0, c(50.0, 0.0), &t).unwrap();
        assert!(cf.population.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rabi_period() {
        let (a, b) = (10000.0, 10.0);
        let t = time_grid(120.0, 0.01).unwrap();
        let cf = single_lorentzian_closed_form(a, c(b, 0.0), &t).unwrap();
        let rabi = 2.0 * (a - b * b / 4.0f64).sqrt(); // 2 Re b, meV
        let period = 2.0 * std::f64::consts::PI / rabi * crate::units::HBAR_MEV_FS;
        // successive population minima are one Rabi period apart
        let p = &cf.population;
        let minima: Vec<f64> =
            (1..p.len() - 1).filter(|&i| p[i] < p[i - 1] && p[i] <= p[i + 1]).map(|i| t[i]).collect();
        assert!((minima[1] - minima[0] - period).abs() < 0.02, "{:?} vs {period}", minima);
    }

    #[test]
    fn memory_convention_scales_areas() {
        let s = MemoryConvention::TwoPi.apply(&one(10.0, 5.0, 3.0)).unwrap();
        assert!((s.terms()[0].area - 20.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(MemoryConvention::Unit.factor(), 1.0);
    }

    proptest::proptest! {
        #[test]
        fn n1_equivalence(a in 1.0f64..5000.0, b in 1.0f64..80.0, det in -200.0f64..200.0) {
            let set = one(a, b, 3.0 + det / 1000.0);
            let d = find_poles(&build_transfer_function(&set, 3.0)).unwrap();
            let t = time_grid(150.0, 1.5).unwrap();
            let res = amplitude_trace(&d, &t).unwrap();
            let cf = single_lorentzian_closed_form(a, c(b, det), &t).unwrap();
            for (x, y) in res.amplitude.iter().zip(&cf.amplitude) {
                proptest::prop_assert!((x - y).norm() < 1e-10, "{} vs {}", x, y);
            }
        }

        #[test]
        fn sum_rule_stability_and_bound(
            terms in proptest::collection::vec((2.6f64..4.0, 5.0f64..80.0, 0.5f64..5000.0), 1..9),
            omega_e in 2.6f64..4.0,
        ) {
            let set = LorentzianSet::new(terms.iter().map(|&(w, b, a)| Lorentzian::new(w, b, a)).collect()).unwrap();
            let tf = build_transfer_function(&set, omega_e);
            tf.verify_identity().unwrap();
            match find_poles(&tf) {
                Ok(d) => {
                    let sum: Complex64 = d.residues.iter().sum();
                    proptest::prop_assert!((sum - 1.0).norm() < 1e-8);
                    proptest::prop_assert!(d.poles.iter().all(|s| s.re < 0.0));
                    let t = time_grid(200.0, 0.5).unwrap();
                    let tr = amplitude_trace(&d, &t).unwrap();
                    proptest::prop_assert!((tr.population[0] - 1.0).abs() < 1e-9);
                    proptest::prop_assert!(tr.population.iter().all(|&p| p <= 1.0 + 1e-9));
                }
                Err(Error::DegenerateRoots { .. }) => {}
                Err(e) => proptest::prop_assert!(false, "{}", e),
            }
        }
    }
}
