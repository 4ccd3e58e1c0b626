//! Positive multi-Lorentzian (pseudo-mode) expansion of the kernel spectrum.

mod lm;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::KernelSpectrum;
use crate::units::MEV_PER_EV;

/// One pseudo-mode: `(A/π) B / ((ω−Ω)² + B²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorentzian {
    /// Centre, eV.
    pub omega: f64,
    /// Half width at half maximum, meV.
    pub width: f64,
    /// Area, meV².
    pub area: f64,
}

impl Lorentzian {
    pub fn new(omega: f64, width: f64, area: f64) -> Self {
        Lorentzian { omega, width, area }
    }

    /// Kernel density in meV at `omega` (eV).
    pub fn evaluate(&self, omega: f64) -> f64 {
        let d = (omega - self.omega) * MEV_PER_EV;
        self.area / PI * self.width / (d * d + self.width * self.width)
    }

    pub fn peak_value(&self) -> f64 {
        self.area / (PI * self.width)
    }
}

/// Strong-coupling figure of merit `2A/B²` of a single pseudo-mode.
pub fn criterion_ratio(term: &Lorentzian) -> f64 {
    2.0 * term.area / (term.width * term.width)
}

/// One table row as stored on disk.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    j: usize,
    #[serde(rename = "Omega_eV")]
    omega_ev: f64,
    #[serde(rename = "B_eV")]
    b_ev: f64,
    #[serde(rename = "A_meV2")]
    a_mev2: f64,
}

/// Pseudo-mode parameters with positive widths and areas, sorted by centre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Row>", into = "Vec<Row>")]
pub struct LorentzianSet {
    terms: Vec<Lorentzian>,
}

impl TryFrom<Vec<Row>> for LorentzianSet {
    type Error = Error;

    fn try_from(rows: Vec<Row>) -> Result<Self> {
        LorentzianSet::new(rows.iter().map(|r| Lorentzian::new(r.omega_ev, r.b_ev * MEV_PER_EV, r.a_mev2)).collect())
    }
}

impl From<LorentzianSet> for Vec<Row> {
    fn from(set: LorentzianSet) -> Self {
        set.terms
            .iter()
            .enumerate()
            .map(|(i, t)| Row { j: i + 1, omega_ev: t.omega, b_ev: t.width / MEV_PER_EV, a_mev2: t.area })
            .collect()
    }
}

impl LorentzianSet {
    pub fn new(mut terms: Vec<Lorentzian>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("a Lorentzian set needs at least one term".into()));
        }
        for t in &terms {
            if !(t.area > 0.0 && t.width > 0.0 && t.omega.is_finite() && t.area.is_finite() && t.width.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "pseudo-mode at {} eV needs positive width and area (B={} meV, A={} meV²)",
                    t.omega, t.width, t.area
                )));
            }
        }
        terms.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        Ok(LorentzianSet { terms })
    }

    pub fn terms(&self) -> &[Lorentzian] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Kernel density in meV.
    pub fn evaluate(&self, omega: f64) -> f64 {
        self.terms.iter().map(|t| t.evaluate(omega)).sum()
    }

    /// Total area `Σ A_j`, meV².
    pub fn total_area(&self) -> f64 {
        self.terms.iter().map(|t| t.area).sum()
    }

    /// Same set with every area multiplied by `factor`.
    pub fn with_area_scale(&self, factor: f64) -> Result<Self> {
        Self::new(self.terms.iter().map(|t| Lorentzian { area: t.area * factor, ..*t }).collect())
    }

    /// Term whose centre is closest to `omega`.
    pub fn nearest(&self, omega: f64) -> &Lorentzian {
        self.terms
            .iter()
            .min_by(|a, b| (a.omega - omega).abs().total_cmp(&(b.omega - omega).abs()))
            .expect("non-empty set")
    }

    pub fn sample(&self, grid: &[f64]) -> Result<KernelSpectrum> {
        KernelSpectrum::from_samples(grid.to_vec(), grid.iter().map(|&w| self.evaluate(w)).collect(), "Lorentzian set")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// How residuals are weighted in the least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// `model − data`.
    Uniform,
    /// `(model − data)/data`.
    Relative,
    /// `ln model − ln data`.
    #[default]
    Logarithmic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    pub weighting: Weighting,
    /// Peaks below this fraction of the global maximum are ignored when seeding.
    pub prominence: f64,
    pub max_iterations: usize,
    /// Optional sub-band (eV) of the spectrum to fit.
    pub window: Option<(f64, f64)>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { weighting: Weighting::default(), prominence: 0.01, max_iterations: 2000, window: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermUncertainty {
    pub omega_ev: f64,
    pub width_mev: f64,
    pub area_mev2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    /// `‖model − data‖₂ / ‖data‖₂` over the fitted samples.
    pub residual_rms: f64,
    pub uncertainties: Vec<TermUncertainty>,
    pub iterations: usize,
    pub converged: bool,
    pub weighting: Weighting,
    pub detected_peaks: usize,
    pub warnings: Vec<String>,
}

/// A local maximum of a sampled spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub omega: f64,
    pub value: f64,
    pub prominence: f64,
    /// Half of the width at half prominence, meV.
    pub half_width: f64,
}

/// Local maxima whose topographic prominence exceeds `rel_prominence` times
/// the global maximum, in order of decreasing prominence.
pub fn detect_peaks(grid: &[f64], values: &[f64], rel_prominence: f64) -> Vec<Peak> {
    let n = values.len();
    let vmax = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut peaks = Vec::new();
    for i in 1..n.saturating_sub(1) {
        let v = values[i];
        if !(v > values[i - 1] && v >= values[i + 1]) {
            continue;
        }
        let mut left_min = v;
        let mut k = i;
        while k > 0 && values[k - 1] <= v {
            k -= 1;
            left_min = left_min.min(values[k]);
        }
        let mut right_min = v;
        let mut k = i;
        while k + 1 < n && values[k + 1] <= v {
            k += 1;
            right_min = right_min.min(values[k]);
        }
        let prominence = v - left_min.max(right_min);
        if prominence < rel_prominence * vmax {
            continue;
        }
        let level = v - 0.5 * prominence;
        let mut l = i;
        while l > 0 && values[l] > level {
            l -= 1;
        }
        let mut r = i;
        while r + 1 < n && values[r] > level {
            r += 1;
        }
        let half_width = 0.5 * (grid[r] - grid[l]) * MEV_PER_EV;
        peaks.push(Peak { index: i, omega: grid[i], value: v, prominence, half_width });
    }
    peaks.sort_by(|a, b| b.prominence.total_cmp(&a.prominence));
    peaks
}

/// Samples and weighting shared by every model evaluation.
struct FitData {
    w_mev: Vec<f64>,
    data: Vec<f64>,
    weighting: Weighting,
}

impl FitData {
    /// Parameters per term: (Ω in meV, ln B, ln A).
    fn residuals(&self, p: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let m = self.data.len();
        let k = p.len() / 3;
        let mut model = vec![0.0; m];
        let mut jac = DMatrix::zeros(m, p.len());
        for t in 0..k {
            let (c, b, a) = (p[3 * t], p[3 * t + 1].exp(), p[3 * t + 2].exp());
            for i in 0..m {
                let d = self.w_mev[i] - c;
                let den = d * d + b * b;
                let l = a / PI * b / den;
                model[i] += l;
                jac[(i, 3 * t)] = l * 2.0 * d / den;
                jac[(i, 3 * t + 1)] = l * (d * d - b * b) / den;
                jac[(i, 3 * t + 2)] = l;
            }
        }
        let mut r = DVector::zeros(m);
        for i in 0..m {
            let (scale, res) = match self.weighting {
                Weighting::Uniform => (1.0, model[i] - self.data[i]),
                Weighting::Relative => (1.0 / self.data[i], (model[i] - self.data[i]) / self.data[i]),
                Weighting::Logarithmic => (1.0 / model[i], model[i].ln() - self.data[i].ln()),
            };
            r[i] = res;
            for j in 0..p.len() {
                jac[(i, j)] *= scale;
            }
        }
        (r, jac)
    }

    fn model(&self, p: &DVector<f64>, w: f64) -> f64 {
        (0..p.len() / 3)
            .map(|t| {
                let (c, b, a) = (p[3 * t], p[3 * t + 1].exp(), p[3 * t + 2].exp());
                let d = w - c;
                a / PI * b / (d * d + b * b)
            })
            .sum()
    }
}

fn pack(terms: &[Lorentzian]) -> DVector<f64> {
    DVector::from_iterator(
        3 * terms.len(),
        terms.iter().flat_map(|t| [t.omega * MEV_PER_EV, t.width.ln(), t.area.ln()]),
    )
}

fn unpack(p: &DVector<f64>) -> Vec<Lorentzian> {
    (0..p.len() / 3).map(|t| Lorentzian::new(p[3 * t] / MEV_PER_EV, p[3 * t + 1].exp(), p[3 * t + 2].exp())).collect()
}

/// Fits `n` positive Lorentzians to the spectrum. Without `init`, centres
/// are seeded at detected peaks and further terms are added one at a time
/// where the current model falls furthest below the data.
pub fn fit_kernel(
    spectrum: &KernelSpectrum,
    n: usize,
    init: Option<&LorentzianSet>,
    options: &FitOptions,
) -> Result<(LorentzianSet, FitReport)> {
    if n < 1 {
        return Err(Error::InvalidParameter("number of Lorentzian terms must be at least 1".into()));
    }
    spectrum.validate()?;
    let mut warnings = Vec::new();

    let (lo, hi) = options.window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let mut w_mev = Vec::new();
    let mut data = Vec::new();
    let mut dropped = 0;
    for (&w, &v) in spectrum.grid.iter().zip(&spectrum.values) {
        if w < lo || w > hi {
            continue;
        }
        if options.weighting != Weighting::Uniform && v <= 0.0 {
            dropped += 1;
            continue;
        }
        w_mev.push(w * MEV_PER_EV);
        data.push(v);
    }
    if dropped > 0 {
        warnings.push(format!("{dropped} non-positive samples excluded from the weighted fit"));
    }
    if data.len() < 3 * n + 1 {
        return Err(Error::InvalidParameter(format!("{} samples cannot determine {} Lorentzian terms", data.len(), n)));
    }
    let fd = FitData { w_mev, data, weighting: options.weighting };
    let settings = lm::LmSettings { max_iterations: options.max_iterations, ..Default::default() };
    let grid_ev: Vec<f64> = fd.w_mev.iter().map(|w| w / MEV_PER_EV).collect();
    let peaks = detect_peaks(&grid_ev, &fd.data, options.prominence);
    if n > peaks.len() {
        warnings.push(format!("requested {n} terms but only {} peaks were detected", peaks.len()));
    }

    let mut total_iterations = 0;
    let mut outcome = match init {
        Some(set) => {
            if set.len() != n {
                return Err(Error::InvalidParameter(format!("initial set has {} terms, expected {n}", set.len())));
            }
            lm::minimize(|p| fd.residuals(p), pack(set.terms()), &settings)
        }
        None => {
            let seeds: Vec<Lorentzian> = peaks
                .iter()
                .take(n)
                .map(|pk| {
                    let b = pk.half_width.max(5.0);
                    Lorentzian::new(pk.omega, b, pk.value * PI * b)
                })
                .collect();
            let seeds = if seeds.is_empty() {
                let (w, v) = spectrum.argmax();
                vec![Lorentzian::new(w, 30.0, v * PI * 30.0)]
            } else {
                seeds
            };
            let mut out = lm::minimize(|p| fd.residuals(p), pack(&seeds), &settings);
            while out.x.len() / 3 < n {
                total_iterations += out.iterations;
                // largest shortfall of the model on a log scale
                let (i, _) = fd
                    .data
                    .iter()
                    .zip(&fd.w_mev)
                    .map(|(d, w)| (d / fd.model(&out.x, *w)).ln())
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |b, (i, r)| if r > b.1 { (i, r) } else { b });
                let b: f64 = 30.0;
                let deficit = (fd.data[i] - fd.model(&out.x, fd.w_mev[i])).max(1e-3 * fd.data[i]);
                let mut p: Vec<f64> = out.x.iter().copied().collect();
                p.extend([fd.w_mev[i], b.ln(), (deficit * PI * b).ln()]);
                out = lm::minimize(|p| fd.residuals(p), DVector::from_vec(p), &settings);
            }
            out
        }
    };
    total_iterations += outcome.iterations;

    if !outcome.converged {
        warnings.push("Levenberg-Marquardt did not converge; returning the best iterate".into());
    }

    // parameter covariance from the Gauss–Newton approximation
    let dof = outcome.n_residuals.saturating_sub(outcome.x.len()).max(1) as f64;
    let s2 = 2.0 * outcome.cost / dof;
    let cov = outcome.jtj.clone().try_inverse();
    let terms = unpack(&outcome.x);
    let mut with_unc: Vec<(Lorentzian, TermUncertainty)> = terms
        .iter()
        .enumerate()
        .map(|(t, term)| {
            let sd = |k: usize| cov.as_ref().map_or(f64::NAN, |c| (c[(3 * t + k, 3 * t + k)] * s2).max(0.0).sqrt());
            (
                *term,
                TermUncertainty {
                    omega_ev: sd(0) / MEV_PER_EV,
                    width_mev: term.width * sd(1),
                    area_mev2: term.area * sd(2),
                },
            )
        })
        .collect();
    with_unc.sort_by(|a, b| a.0.omega.total_cmp(&b.0.omega));
    let set = LorentzianSet::new(with_unc.iter().map(|p| p.0).collect())?;

    let (num, den) = fd.w_mev.iter().zip(&fd.data).fold((0.0, 0.0), |(n, d), (w, v)| {
        let m = set.evaluate(w / MEV_PER_EV);
        (n + (m - v) * (m - v), d + v * v)
    });
    outcome.x = pack(set.terms());
    let report = FitReport {
        residual_rms: (num / den).sqrt(),
        uncertainties: with_unc.iter().map(|p| p.1).collect(),
        iterations: total_iterations,
        converged: outcome.converged,
        weighting: options.weighting,
        detected_peaks: peaks.len(),
        warnings,
    };
    Ok((set, report))
}

/// Increases the number of terms from one until the relative residual
/// improves by less than 1 %, up to `max_n`.
pub fn fit_kernel_auto(
    spectrum: &KernelSpectrum,
    max_n: usize,
    options: &FitOptions,
) -> Result<(LorentzianSet, FitReport)> {
    let mut best = fit_kernel(spectrum, 1, None, options)?;
    for n in 2..=max_n {
        let next = fit_kernel(spectrum, n, None, options)?;
        let improvement = (best.1.residual_rms - next.1.residual_rms) / best.1.residual_rms.max(f64::MIN_POSITIVE);
        if improvement < 0.01 {
            break;
        }
        best = next;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::energy_grid;

    const TABLE_BARE: &str = include_str!("../../fixtures/table3_bare.json");

    #[test]
    fn peak_value_and_area() {
        let t = Lorentzian::new(3.1441, 24.8, 3717.2);
        assert!((t.evaluate(3.1441) - 3717.2 / (PI * 24.8)).abs() < 1e-12);
        assert!((t.peak_value() - 47.71).abs() < 0.01);
        // closed-form area of the truncated Lorentzian on a fine grid
        let g = energy_grid(2.0, 4.3, 1e-4).unwrap();
        let ks = LorentzianSet::new(vec![t]).unwrap().sample(&g).unwrap();
        let exact = 3717.2 / PI * ((1156.0f64 / 24.8).atan() + (1144.1f64 / 24.8).atan());
        assert!((ks.area() - exact).abs() / exact < 1e-6);
    }

    #[test]
    fn rejects_nonpositive_terms() {
        assert!(LorentzianSet::new(vec![Lorentzian::new(3.0, 10.0, -1.0)]).is_err());
        assert!(LorentzianSet::new(vec![Lorentzian::new(3.0, 0.0, 1.0)]).is_err());
        assert!(LorentzianSet::new(vec![]).is_err());
    }

    #[test]
    fn json_round_trip_sorts_terms() {
        let set = LorentzianSet::from_json(TABLE_BARE).unwrap();
        assert_eq!(set.len(), 7);
        assert!((set.terms()[6].width - 34.8).abs() < 1e-9);
        let back = LorentzianSet::from_json(&set.to_json().unwrap()).unwrap();
        assert_eq!(set, back);
        let shuffled = r#"[{"j":1,"Omega_eV":3.5,"B_eV":0.02,"A_meV2":1.0},
                           {"j":2,"Omega_eV":3.0,"B_eV":0.03,"A_meV2":2.0}]"#;
        assert_eq!(LorentzianSet::from_json(shuffled).unwrap().terms()[0].omega, 3.0);
        assert!(LorentzianSet::from_json(r#"[{"j":1,"Omega_eV":3.0,"B_eV":0.02,"A_meV2":1.0,"x":1}]"#).is_err());
    }

    #[test]
    fn detects_isolated_peaks() {
        let set =
            LorentzianSet::new(vec![Lorentzian::new(3.0, 20.0, 500.0), Lorentzian::new(3.5, 40.0, 2000.0)]).unwrap();
        let g = energy_grid(2.5, 4.0, 1e-3).unwrap();
        let v: Vec<f64> = g.iter().map(|&w| set.evaluate(w)).collect();
        let peaks = detect_peaks(&g, &v, 0.01);
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0].omega - 3.5).abs() < 2e-3);
        assert!((peaks[1].half_width - 20.0).abs() < 3.0);
    }

    #[test]
    fn fit_recovers_generating_set() {
        let truth = LorentzianSet::from_json(TABLE_BARE).unwrap();
        let g = energy_grid(2.5, 4.2, 1e-3).unwrap();
        let ks = truth.sample(&g).unwrap();
        let (fit, report) = fit_kernel(&ks, 7, None, &FitOptions::default()).unwrap();
        assert!(report.converged, "{report:?}");
        for (a, b) in fit.terms().iter().zip(truth.terms()) {
            assert!((a.omega - b.omega).abs() / b.omega < 1e-3);
            assert!((a.width - b.width).abs() / b.width < 1e-3, "{a:?} {b:?}");
            assert!((a.area - b.area).abs() / b.area < 1e-3, "{a:?} {b:?}");
        }
    }

    #[test]
    fn noisy_negative_samples_keep_positive_areas() {
        let truth = LorentzianSet::new(vec![Lorentzian::new(3.1, 25.0, 1000.0)]).unwrap();
        let g = energy_grid(2.8, 3.4, 1e-3).unwrap();
        let mut v: Vec<f64> = g.iter().map(|&w| truth.evaluate(w)).collect();
        for (i, x) in v.iter_mut().enumerate() {
            *x += if i % 2 == 0 { 0.05 } else { -0.05 };
        }
        let ks = KernelSpectrum {
            grid: g,
            values: v,
            source: crate::greens::KernelSource::Samples { description: "noise".into() },
        };
        let opts = FitOptions { weighting: Weighting::Uniform, ..Default::default() };
        let (fit, _) = fit_kernel(&ks, 1, None, &opts).unwrap();
        assert!(fit.terms()[0].area > 0.0);
        assert!((fit.terms()[0].area - 1000.0).abs() < 20.0);
    }

    #[test]
    fn table_criterion_ratios() {
        let set = LorentzianSet::from_json(TABLE_BARE).unwrap();
        assert!((criterion_ratio(&set.terms()[6]) - 2.0 * 854.1 / (34.8 * 34.8)).abs() < 1e-12);
    }
}
