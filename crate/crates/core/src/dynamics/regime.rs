//! Coupling-regime classification from the residue distribution and the
//! coherence spectrum.

use serde::{Deserialize, Serialize};

use super::spectra::{coherence_spectrum, spectral_peaks, SpectralPeak};
use super::{PoleDecomposition, PoleRow};
use crate::units::MEV_PER_EV;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "WC")]
    Weak,
    #[serde(rename = "SC")]
    Strong,
    #[serde(rename = "MM-SC")]
    MultiMode,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Weak => "WC",
            Regime::Strong => "SC",
            Regime::MultiMode => "MM-SC",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierThresholds {
    /// `|R₁|` above which a single pole dominates.
    pub weak: f64,
    /// `|R_m|` above which a pole counts as significant.
    pub significant: f64,
    /// Second-tallest coherence peak relative to the tallest below which the
    /// spectrum counts as single-peaked.
    pub single_peak: f64,
    /// Relative mismatch `|2ω₁ − Ω_R|/Ω_R` above which the exchange is
    /// multi-mode.
    pub divergence: f64,
    /// Coherence sampling step, meV.
    pub step_mev: f64,
}

impl Default for ClassifierThresholds {
    fn default() -> Self {
        ClassifierThresholds { weak: 0.9, significant: 0.2, single_peak: 0.1, divergence: 0.2, step_mev: 0.5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub omega_e: f64,
    /// `2|ω₁|` of the dominant pole, meV.
    pub two_omega1: f64,
    /// Separation of the two tallest coherence peaks, meV.
    pub omega_r: Option<f64>,
    /// `|2ω₁ − Ω_R|/Ω_R`.
    pub divergence: Option<f64>,
    pub second_peak_ratio: f64,
    pub significant_poles: usize,
    pub residues: Vec<PoleRow>,
    /// Coherence peaks (eV), tallest first.
    pub peaks: Vec<SpectralPeak>,
}

/// Window covering every pole line with 0.3 eV of margin.
fn coherence_window(decomp: &PoleDecomposition, step_mev: f64) -> Vec<f64> {
    let lines = decomp.poles.iter().map(|s| decomp.omega_e - s.im / MEV_PER_EV);
    let (lo, hi) = lines.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), w| (l.min(w), h.max(w)));
    let (lo, hi) = ((lo - 0.3).max(1e-3), hi + 0.3);
    let step = step_mev / MEV_PER_EV;
    let n = ((hi - lo) / step).ceil() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// Rules, in order: `|R₁| > weak` → WC; single-peaked coherence spectrum → WC;
/// three or more significant residues → MM-SC; `2ω₁` and `Ω_R` diverging by
/// more than `divergence` → MM-SC; otherwise SC.
pub fn classify_regime(decomp: &PoleDecomposition, th: &ClassifierThresholds) -> RegimeReport {
    let grid = coherence_window(decomp, th.step_mev);
    let spec = coherence_spectrum(decomp, &grid);
    let peaks = spectral_peaks(&grid, &spec);
    let second_peak_ratio = if peaks.len() >= 2 { peaks[1].value / peaks[0].value } else { 0.0 };
    let omega_r = (peaks.len() >= 2).then(|| (peaks[0].omega - peaks[1].omega).abs() * MEV_PER_EV);
    let two_omega1 = 2.0 * decomp.omega(0).abs();
    let divergence = omega_r.map(|r| (two_omega1 - r).abs() / r);
    let abs_r = decomp.abs_residues();
    let significant_poles = abs_r.iter().filter(|&&r| r > th.significant).count();

    let regime = if abs_r[0] > th.weak || second_peak_ratio < th.single_peak {
        Regime::Weak
    } else if significant_poles >= 3 || divergence.is_some_and(|d| d > th.divergence) {
        Regime::MultiMode
    } else {
        Regime::Strong
    };

    RegimeReport {
        regime,
        omega_e: decomp.omega_e,
        two_omega1,
        omega_r,
        divergence,
        second_peak_ratio,
        significant_poles,
        residues: decomp.rows(),
        peaks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_transfer_function, find_poles};
    use crate::pseudomode::{Lorentzian, LorentzianSet};

    fn classify(terms: Vec<Lorentzian>, omega_e: f64) -> RegimeReport {
        let set = LorentzianSet::new(terms).unwrap();
        classify_regime(&find_poles(&build_transfer_function(&set, omega_e)).unwrap(), &Default::default())
    }

    #[test]
    fn single_mode_regimes() {
        let weak = classify(vec![Lorentzian::new(3.0, 50.0, 10.0)], 3.0);
        assert_eq!(weak.regime, Regime::Weak);
        let strong = classify(vec![Lorentzian::new(3.0, 20.0, 10000.0)], 3.0);
        assert_eq!(strong.regime, Regime::Strong);
        let r = strong.omega_r.unwrap();
        assert!((strong.two_omega1 - r).abs() / r < 0.02);
    }

    #[test]
    fn three_way_split_is_multimode() {
        let rep = classify(vec![Lorentzian::new(2.95, 15.0, 3000.0), Lorentzian::new(3.05, 15.0, 3000.0)], 3.0);
        assert!(rep.significant_poles >= 3);
        assert_eq!(rep.regime, Regime::MultiMode);
    }
}
