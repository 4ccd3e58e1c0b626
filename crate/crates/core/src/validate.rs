//! Acceptance checks against reference values, shared by the
//! `validate` subcommand and the acceptance tests.

use std::fmt::Write as _;
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;

use crate::config::ScenarioConfig;
use crate::dynamics::{
    amplitude_trace, build_transfer_function, classify_regime, coherence_spectrum, find_poles, photon_amplitude,
    single_lorentzian_closed_form, spectral_peaks, stationary_photon_spectrum, time_grid, ClassifierThresholds,
    MemoryConvention, PoleDecomposition, SpectralPeak,
};
use crate::error::{Error, Result};
use crate::greens::{energy_grid, kernel_spectrum, purcell_factor, KernelSpectrum};
use crate::materials::{DrudeParams, MaterialStack, Permittivity};
use crate::mie::{
    coefficients_for_geometry, cross_sections, homogeneous_sphere_coefficients, riccati_functions, MieGeometry,
};
use crate::oracle::{solve_ide_direct, solve_volterra, TimeKernel, DEFAULT_TAIL_LIMIT};
use crate::pseudomode::{criterion_ratio, fit_kernel_auto, Lorentzian, LorentzianSet};

const TABLE3_BARE: &str = include_str!("../fixtures/table3_bare.json");
const TABLE4_COATED: &str = include_str!("../fixtures/table4_coated.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    Bare,
    Coated,
}

impl System {
    pub fn name(self) -> &'static str {
        match self {
            System::Bare => "bare",
            System::Coated => "coated",
        }
    }

    pub fn preset(self) -> &'static str {
        match self {
            System::Bare => "bare-paper",
            System::Coated => "coated-paper",
        }
    }

    /// Pseudo-mode table shipped with the crate for this system.
    pub fn reference_set(self) -> LorentzianSet {
        let src = match self {
            System::Bare => TABLE3_BARE,
            System::Coated => TABLE4_COATED,
        };
        LorentzianSet::from_json(src).expect("shipped fixture parses")
    }
}

/// One row of the reference pole table.
#[derive(Debug, Clone, Copy)]
pub struct PoleReference {
    pub label: &'static str,
    /// Emitter energy used for the row, eV.
    pub omega_e: f64,
    pub system: System,
    pub gamma1: f64,
    pub omega1: f64,
    pub residues: &'static [f64],
    pub regime: &'static str,
}

/// The "2.98" and "3.14" rows are the emitter tuned to the coated lower
/// polariton and geometric mode, taken at the fixture centres.
pub const POLE_TABLE: [PoleReference; 8] = [
    PoleReference {
        label: "2.98",
        omega_e: 2.9782,
        system: System::Bare,
        gamma1: 2.9,
        omega1: 23.0,
        residues: &[0.96],
        regime: "WC",
    },
    PoleReference {
        label: "2.98",
        omega_e: 2.9782,
        system: System::Coated,
        gamma1: 10.0,
        omega1: 117.0,
        residues: &[0.67, 0.25, 0.07],
        regime: "MM-SC",
    },
    PoleReference {
        label: "3.14",
        omega_e: 3.1441,
        system: System::Bare,
        gamma1: 5.0,
        omega1: 25.0,
        residues: &[0.95],
        regime: "WC",
    },
    PoleReference {
        label: "3.14",
        omega_e: 3.1441,
        system: System::Coated,
        gamma1: 14.4,
        omega1: 145.0,
        residues: &[0.45, 0.29, 0.25],
        regime: "MM-SC",
    },
    PoleReference {
        label: "3.63",
        omega_e: 3.63,
        system: System::Bare,
        gamma1: 16.2,
        omega1: 108.0,
        residues: &[0.51, 0.21, 0.15],
        regime: "SC",
    },
    PoleReference {
        label: "3.63",
        omega_e: 3.63,
        system: System::Coated,
        gamma1: 24.8,
        omega1: 6.0,
        residues: &[0.33, 0.27, 0.25],
        regime: "MM-SC",
    },
    PoleReference {
        label: "3.75",
        omega_e: 3.75,
        system: System::Bare,
        gamma1: 7.9,
        omega1: 64.0,
        residues: &[0.76],
        regime: "WC",
    },
    PoleReference {
        label: "3.75",
        omega_e: 3.75,
        system: System::Coated,
        gamma1: 12.9,
        omega1: 109.0,
        residues: &[0.60, 0.14, 0.13],
        regime: "SC",
    },
];

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    /// One line per individual comparison.
    pub details: Vec<String>,
}

impl CriterionResult {
    pub fn summary(&self) -> String {
        let failed = self.details.iter().filter(|d| d.ends_with("FAIL")).count();
        format!(
            "[{}] criterion {:>2}: {} ({} checks, {} failed)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.details.len(),
            failed
        )
    }
}

/// Collects comparisons; the criterion passes when all of them do.
struct Checks {
    lines: Vec<String>,
    ok: bool,
}

impl Checks {
    fn new() -> Self {
        Checks { lines: Vec::new(), ok: true }
    }

    fn near(&mut self, what: impl std::fmt::Display, got: f64, want: f64, tol: f64) {
        let pass = (got - want).abs() <= tol;
        self.push(format!("{what}: {got:.4} vs {want} ± {tol}"), pass);
    }

    fn rel(&mut self, what: impl std::fmt::Display, got: f64, want: f64, tol: f64) {
        let pass = ((got - want) / want).abs() <= tol;
        self.push(
            format!("{what}: {got:.4} vs {want} (rel. {:.2}%, limit {}%)", 100.0 * (got - want) / want, 100.0 * tol),
            pass,
        );
    }

    fn holds(&mut self, what: impl std::fmt::Display, pass: bool) {
        self.push(what.to_string(), pass);
    }

    fn push(&mut self, mut line: String, pass: bool) {
        let _ = write!(line, " {}", if pass { "ok" } else { "FAIL" });
        self.ok &= pass;
        self.lines.push(line);
    }

    fn error(&mut self, what: &str, e: &Error) {
        self.push(format!("{what}: error: {e}"), false);
    }

    fn finish(self, id: usize, title: &'static str) -> CriterionResult {
        CriterionResult { id, title, passed: self.ok, details: self.lines }
    }
}

struct PaperCase {
    stack: MaterialStack,
    kernel: KernelSpectrum,
    fit: LorentzianSet,
}

fn build_case(system: System) -> Result<PaperCase> {
    let cfg = ScenarioConfig::preset(system.preset())?;
    let stack = cfg.stack()?;
    let kernel = kernel_spectrum(&stack, &cfg.emitter(), &cfg.energy_grid()?, cfg.numerics.n_max)?;
    let (fit, _) = fit_kernel_auto(&kernel, cfg.numerics.fit_terms, &cfg.numerics.fit)?;
    Ok(PaperCase { stack, kernel, fit })
}

/// Kernel and fitted set of a shipped preset, computed once per process.
fn paper_case(system: System) -> std::result::Result<&'static PaperCase, String> {
    static BARE: OnceLock<std::result::Result<PaperCase, String>> = OnceLock::new();
    static COATED: OnceLock<std::result::Result<PaperCase, String>> = OnceLock::new();
    let cell = match system {
        System::Bare => &BARE,
        System::Coated => &COATED,
    };
    cell.get_or_init(|| build_case(system).map_err(|e| e.to_string())).as_ref().map_err(Clone::clone)
}

fn decomposition(system: System, omega_e: f64) -> Result<PoleDecomposition> {
    let set = MemoryConvention::TwoPi.apply(&system.reference_set())?;
    find_poles(&build_transfer_function(&set, omega_e))
}

fn bare_stack() -> MaterialStack {
    MaterialStack::bare(DrudeParams::SILVER, 20.0, 1.69)
}

/// Purcell factors of the bare sphere at 23 nm from its centre.
pub fn criterion_1() -> CriterionResult {
    let mut c = Checks::new();
    for (w, want) in [(2.98, 551.0), (3.14, 578.0), (3.75, 1717.0)] {
        let t0 = Instant::now();
        match purcell_factor(&bare_stack(), 23.0, w, 60) {
            Ok(f) => {
                c.rel(format!("F_P({w} eV)"), f, want, 0.02);
                c.holds(format!("F_P({w} eV) runtime {:?} < 1 s", t0.elapsed()), t0.elapsed().as_secs_f64() < 1.0);
            }
            Err(e) => c.error("Purcell factor", &e),
        }
    }
    c.finish(1, "Purcell factors")
}

/// Single-peak ratio `2A/B²` of the fixture terms, compared to the table
/// within the propagated rounding of the listed A, B and ratio.
pub fn criterion_2() -> CriterionResult {
    let mut c = Checks::new();
    let cases = [
        ("coated j=1 (LP)", System::Coated, 0, 0.66, 0.005),
        ("coated j=2 (Geo)", System::Coated, 1, 12.10, 0.005),
        ("bare j=7 (UV)", System::Bare, 6, 1.41, 0.005),
    ];
    for (what, system, j, want, out_round) in cases {
        let t = system.reference_set().terms()[j];
        let r = criterion_ratio(&t);
        // A is listed to 0.05 meV², B to 0.05 meV
        let input = r * (0.05 / t.area + 2.0 * 0.05 / t.width);
        c.near(what, r, want, input + out_round);
    }
    c.finish(2, "strong-coupling criterion 2A/B²")
}

/// Fitting the computed kernels recovers the reference pseudo-mode tables.
pub fn criterion_3() -> CriterionResult {
    let mut c = Checks::new();
    for system in [System::Bare, System::Coated] {
        let t0 = Instant::now();
        let case = match paper_case(system) {
            Ok(p) => p,
            Err(e) => {
                c.holds(format!("{} kernel fit failed: {e}", system.name()), false);
                continue;
            }
        };
        let elapsed = t0.elapsed();
        let reference = system.reference_set();
        if case.fit.len() != reference.len() {
            c.holds(
                format!("{} fit returned {} terms, table has {}", system.name(), case.fit.len(), reference.len()),
                false,
            );
            continue;
        }
        for (j, (got, want)) in case.fit.terms().iter().zip(reference.terms()).enumerate() {
            let n = system.name();
            c.rel(format!("{n} j={} Ω", j + 1), got.omega, want.omega, 0.05);
            c.rel(format!("{n} j={} B", j + 1), got.width, want.width, 0.05);
            c.rel(format!("{n} j={} A", j + 1), got.area, want.area, 0.05);
        }
        if system == System::Coated {
            let dom = case.fit.nearest(3.1441);
            c.near("coated dominant Ω (eV)", dom.omega, 3.1441, 0.005);
            c.near("coated dominant B (meV)", dom.width, 24.8, 1.5);
            c.near("coated dominant A (meV²)", dom.area, 3717.0, 200.0);
        }
        c.holds(format!("{} kernel + fit runtime {elapsed:?} < 60 s", system.name()), elapsed.as_secs_f64() < 60.0);
    }
    c.finish(3, "kernel fit recovery")
}

/// Dominant poles and residues from the fixtures.
pub fn criterion_4() -> CriterionResult {
    let mut c = Checks::new();
    for row in POLE_TABLE {
        let t0 = Instant::now();
        let what = format!("{} {}", row.label, row.system.name());
        match decomposition(row.system, row.omega_e) {
            Ok(d) => {
                c.near(format!("{what} γ₁"), d.gamma(0), row.gamma1, 1.0);
                c.near(format!("{what} |ω₁|"), d.omega(0).abs(), row.omega1, 1.0);
                for (m, want) in row.residues.iter().enumerate() {
                    c.near(format!("{what} |R{}|", m + 1), d.residues[m].norm(), *want, 0.02);
                }
                c.holds(format!("{what} runtime {:?} < 1 s", t0.elapsed()), t0.elapsed().as_secs_f64() < 1.0);
            }
            Err(e) => c.error(&what, &e),
        }
    }
    c.finish(4, "pole data")
}

fn coherence_peaks(d: &PoleDecomposition) -> Vec<f64> {
    let grid = energy_grid(2.5, 4.2, 2e-4).expect("static grid");
    let spec = coherence_spectrum(d, &grid);
    spectral_peaks(&grid, &spec).iter().map(|p| p.omega).collect()
}

/// Coherence triplet and doublet of the coated particle.
pub fn criterion_5() -> CriterionResult {
    let mut c = Checks::new();
    match decomposition(System::Coated, 3.1441) {
        Ok(d) => {
            let mut peaks: Vec<f64> = coherence_peaks(&d).into_iter().take(3).collect();
            peaks.sort_by(f64::total_cmp);
            if peaks.len() == 3 {
                for (p, want) in peaks.iter().zip([2.94, 3.01, 3.29]) {
                    c.near("3.14 peak (eV)", *p, want, 0.010);
                }
                c.near("3.14 span (meV)", (peaks[2] - peaks[0]) * 1e3, 345.0, 10.0);
                c.near("3.14 fine splitting (meV)", (peaks[1] - peaks[0]) * 1e3, 69.0, 5.0);
            } else {
                c.holds(format!("3.14 triplet: found {} peaks", peaks.len()), false);
            }
        }
        Err(e) => c.error("coated 3.14", &e),
    }
    match decomposition(System::Coated, 2.9782) {
        Ok(d) => {
            let mut peaks: Vec<f64> = coherence_peaks(&d).into_iter().take(2).collect();
            peaks.sort_by(f64::total_cmp);
            if peaks.len() == 2 {
                c.near("2.98 lower peak (eV)", peaks[0], 2.86, 0.010);
                c.near("2.98 upper peak (eV)", peaks[1], 3.24, 0.010);
                c.near("2.98 splitting (meV)", (peaks[1] - peaks[0]) * 1e3, 372.0, 10.0);
            } else {
                c.holds(format!("2.98 doublet: found {} peaks", peaks.len()), false);
            }
        }
        Err(e) => c.error("coated 2.98", &e),
    }
    c.finish(5, "coherence spectra")
}

/// Population collapse and first minimum of the coated particle.
pub fn criterion_6() -> CriterionResult {
    let mut c = Checks::new();
    let t = time_grid(30.0, 0.01).expect("static grid");
    match decomposition(System::Coated, 3.1441).and_then(|d| amplitude_trace(&d, &t)) {
        Ok(tr) => {
            let below = tr.t_fs.iter().zip(&tr.population).find(|(_, p)| **p < 0.02).map(|(t, _)| *t);
            match below {
                Some(t) => c.near("3.14 first time below 0.02 (fs)", t, 7.0, 1.0),
                None => c.holds("3.14 population never below 0.02", false),
            }
        }
        Err(e) => c.error("coated 3.14", &e),
    }
    match decomposition(System::Coated, 2.9782).and_then(|d| amplitude_trace(&d, &t)) {
        Ok(tr) => match tr.first_minimum() {
            Some((_, p)) => c.near("2.98 first minimum", p, 0.20, 0.05),
            None => c.holds("2.98 population has no minimum", false),
        },
        Err(e) => c.error("coated 2.98", &e),
    }
    c.finish(6, "population dynamics")
}

/// Extinction maxima of both presets.
pub fn criterion_7() -> CriterionResult {
    let mut c = Checks::new();
    let grid = energy_grid(2.5, 4.2, 1e-3).expect("static grid");
    let peaks = |system: System| -> Result<Vec<SpectralPeak>> {
        let cfg = ScenarioConfig::preset(system.preset())?;
        let stack = cfg.stack()?;
        let ext = grid
            .iter()
            .map(|&w| cross_sections(&stack, w, cfg.numerics.n_max).map(|x| x.sigma_ext))
            .collect::<Result<Vec<f64>>>()?;
        Ok(spectral_peaks(&grid, &ext))
    };
    // Peaks come sorted by height. The three tallest coated maxima are taken
    // as lower polariton, shell resonance and upper polariton.
    match peaks(System::Coated) {
        Ok(p) if p.len() >= 3 => {
            let mut three: Vec<f64> = p[..3].iter().map(|q| q.omega).collect();
            three.sort_by(f64::total_cmp);
            let weakest = p[2].value / p[0].value;
            c.holds(
                format!("coated extinction maxima {three:.3?}: three peaks, weakest at {weakest:.2} of tallest"),
                weakest > 0.2,
            );
            c.near("coated UP–LP splitting (eV)", three[2] - three[0], 0.6, 0.05);
        }
        Ok(p) => c.holds(format!("coated extinction shows only {} maxima", p.len()), false),
        Err(e) => c.error("coated extinction", &e),
    }
    match peaks(System::Bare) {
        Ok(p) => match p.first() {
            Some(top) => {
                let second = p.get(1).map_or(0.0, |q| q.value / top.value);
                c.holds(format!("bare extinction: next maximum at {second:.2} of the dipole peak"), second < 0.2);
                c.near("bare extinction peak (eV)", top.omega, 3.07, 0.02)
            }
            None => c.holds("bare extinction has no maximum", false),
        },
        Err(e) => c.error("bare extinction", &e),
    }
    c.finish(7, "cross sections")
}

/// Direct solve with the exact kernel against the residue solution of the
/// fitted kernel, plus the single-Lorentzian closed form.
pub fn criterion_8() -> CriterionResult {
    let mut c = Checks::new();
    let t = time_grid(100.0, 0.01).expect("static grid");
    for row in POLE_TABLE {
        let what = format!("{} {}", row.label, row.system.name());
        let case = match paper_case(row.system) {
            Ok(p) => p,
            Err(e) => {
                c.holds(format!("{what}: kernel fit failed: {e}"), false);
                continue;
            }
        };
        let run = || -> Result<f64> {
            let exact = MemoryConvention::TwoPi.apply_spectrum(&case.kernel);
            let oracle = solve_ide_direct(&exact, row.omega_e, &t, DEFAULT_TAIL_LIMIT)?;
            let set = MemoryConvention::TwoPi.apply(&case.fit)?;
            let residue = amplitude_trace(&find_poles(&build_transfer_function(&set, row.omega_e))?, &t)?;
            Ok(oracle.population.iter().zip(&residue.population).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        };
        match run() {
            Ok(diff) => c.push(format!("{what}: max |Δ population| {diff:.4} < 0.05"), diff < 0.05),
            Err(e) => c.error(&what, &e),
        }
    }
    let single = LorentzianSet::new(vec![Lorentzian::new(3.0, 24.8, 3717.0)]).expect("valid set");
    let t50 = time_grid(50.0, 0.01).expect("static grid");
    let run = || -> Result<f64> {
        let oracle = solve_volterra(&TimeKernel::from_lorentzians(&single, 3.0, &t50))?;
        let cf = single_lorentzian_closed_form(3717.0, Complex64::new(24.8, 0.0), &t50)?;
        Ok(oracle.amplitude.iter().zip(&cf.amplitude).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    };
    match run() {
        Ok(err) => c.push(format!("single Lorentzian oracle vs closed form: {err:.2e} < 1e-4"), err < 1e-4),
        Err(e) => c.error("single Lorentzian", &e),
    }
    c.finish(8, "oracle equivalence")
}

fn sum_rule_and_stability(c: &mut Checks) {
    let mut worst_sum = 0.0f64;
    let mut max_re = f64::NEG_INFINITY;
    let mut failures = 0;
    let sweep = energy_grid(2.8, 3.9, 0.01).expect("static grid");
    for system in [System::Bare, System::Coated] {
        for &w in &sweep {
            match decomposition(system, w) {
                Ok(d) => {
                    let s: Complex64 = d.residues.iter().sum();
                    worst_sum = worst_sum.max((s - 1.0).norm());
                    max_re = d.poles.iter().fold(max_re, |m, p| m.max(p.re));
                }
                Err(_) => failures += 1,
            }
        }
    }
    c.holds(format!("pole decomposition on 2×{} sweep points: {failures} failures", sweep.len()), failures == 0);
    c.push(format!("residue sum rule: max |ΣR − 1| = {worst_sum:.1e} < 1e-8"), worst_sum < 1e-8);
    c.push(format!("pole stability: max Re s = {max_re:.3} meV < 0"), max_re < 0.0);
}

fn norm_conservation(c: &mut Checks) -> Result<()> {
    let case = paper_case(System::Coated).map_err(Error::Numerical)?;
    let exact = MemoryConvention::TwoPi.apply_spectrum(&case.kernel);
    let t = time_grid(50.0, 0.01)?;
    let trace = solve_ide_direct(&exact, 3.1441, &t, DEFAULT_TAIL_LIMIT)?;
    for checkpoint in [10.0, 20.0, 30.0, 40.0, 50.0] {
        let amp = photon_amplitude(&exact, &trace, 3.1441, &exact.grid, checkpoint)?;
        let density: Vec<f64> = amp.iter().map(|a| a.norm_sqr()).collect();
        let photons = crate::greens::trapezoid(&exact.grid, &density) * 1e3;
        let i = trace.t_fs.iter().position(|&x| (x - checkpoint).abs() < 1e-9).unwrap_or(trace.t_fs.len() - 1);
        let total = trace.population[i] + photons;
        c.near(format!("norm at {checkpoint} fs"), total, 1.0, 0.01);
    }
    Ok(())
}

fn mie_reduction(c: &mut Checks) -> Result<()> {
    let mut worst = 0.0f64;
    for w in [2.6, 3.1, 3.7] {
        let eps_core = DrudeParams::SILVER.permittivity(w)?;
        // shell made of background material: homogeneous sphere of the core radius
        let g = MieGeometry::from_permittivities(w, 20.0, 22.0, eps_core, Complex64::new(1.69, 0.0), 1.69)?;
        let full = coefficients_for_geometry(&g, 5)?;
        let (a, b) = homogeneous_sphere_coefficients(g.m1, g.x1(), 5)?;
        // shell made of core material: homogeneous sphere of the outer radius
        let g2 = MieGeometry::from_permittivities(w, 20.0, 22.0, eps_core, eps_core, 1.69)?;
        let full2 = coefficients_for_geometry(&g2, 5)?;
        let (a2, b2) = homogeneous_sphere_coefficients(g2.m1, g2.x2(), 5)?;
        for n in 0..5 {
            for (x, y) in [(full.a[n], a[n]), (full.b[n], b[n]), (full2.a[n], a2[n]), (full2.b[n], b2[n])] {
                worst = worst.max((x - y).norm() / y.norm());
            }
        }
    }
    c.push(format!("Mie reduction limits: max relative deviation {worst:.1e} ≤ 1e-12"), worst <= 1e-12);
    Ok(())
}

fn wronskian(c: &mut Checks) -> Result<()> {
    let mut worst = 0.0f64;
    for z in [Complex64::new(5.0, 0.0), Complex64::new(12.3, 0.8), Complex64::new(0.7, -3.0), Complex64::new(0.0, 6.0)]
    {
        let t = riccati_functions(30, z)?;
        for n in 0..=30 {
            let w = t.dpsi[n] * t.chi[n] - t.psi[n] * t.dchi[n];
            let scale = (t.dpsi[n] * t.chi[n]).norm().max((t.psi[n] * t.dchi[n]).norm()).max(1.0);
            worst = worst.max((w - 1.0).norm() / scale);
        }
    }
    c.push(format!("Riccati Wronskian: max scaled deviation {worst:.1e} < 1e-10"), worst < 1e-10);
    Ok(())
}

fn criterion_doublet(c: &mut Checks) {
    let mut mismatches = 0;
    let mut cases = 0;
    for a in [50.0, 150.0, 199.0, 201.0, 400.0, 3717.0] {
        for b in [10.0, 20.0, 24.8, 40.0] {
            let set = LorentzianSet::new(vec![Lorentzian::new(3.0, b, a)]).expect("valid set");
            let tf = build_transfer_function(&set, 3.0);
            let s = stationary_photon_spectrum(&set, &tf, &[-0.01, 0.0, 0.01]);
            let dip = s[1] < s[0] && s[1] < s[2];
            cases += 1;
            if dip != (2.0 * a > b * b) {
                mismatches += 1;
            }
        }
    }
    c.holds(format!("stationary spectrum dips at δ=0 iff 2A > B²: {mismatches}/{cases} mismatches"), mismatches == 0);
}

/// Structural invariants spot-checked on the reference configurations.
pub fn criterion_9() -> CriterionResult {
    let mut c = Checks::new();
    sum_rule_and_stability(&mut c);
    for system in [System::Bare, System::Coated] {
        match paper_case(system) {
            Ok(p) => c.holds(
                format!("{} kernel non-negative on {} samples", system.name(), p.kernel.values.len()),
                p.kernel.validate().is_ok() && p.stack.validate().is_ok(),
            ),
            Err(e) => c.holds(format!("{} kernel: {e}", system.name()), false),
        }
    }
    if let Err(e) = norm_conservation(&mut c) {
        c.error("norm conservation", &e);
    }
    if let Err(e) = mie_reduction(&mut c) {
        c.error("Mie reduction", &e);
    }
    if let Err(e) = wronskian(&mut c) {
        c.error("Wronskian", &e);
    }
    criterion_doublet(&mut c);
    c.finish(9, "property suite")
}

/// Regime labels of the pole table with default thresholds.
pub fn criterion_10() -> CriterionResult {
    let mut c = Checks::new();
    let th = ClassifierThresholds::default();
    for row in POLE_TABLE {
        let what = format!("{} {}", row.label, row.system.name());
        match decomposition(row.system, row.omega_e) {
            Ok(d) => {
                let got = classify_regime(&d, &th).regime.label();
                c.holds(format!("{what}: {got} vs {}", row.regime), got == row.regime);
            }
            Err(e) => c.error(&what, &e),
        }
    }
    c.finish(10, "regime labels")
}

pub fn criterion(id: usize) -> Option<CriterionResult> {
    Some(match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        _ => return None,
    })
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=10).filter_map(criterion).collect()
}
