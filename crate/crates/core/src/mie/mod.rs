//! Lorenz–Mie scattering by a coated sphere.
//!
//! The coefficients are assembled from logarithmic derivatives and ratios of
//! Riccati–Bessel functions, never from the raw functions, so orders far
//! beyond the size parameter stay finite even though `ξ_n(x)²` itself would
//! overflow.

pub mod riccati;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::materials::MaterialStack;
use crate::units::HBAR_C_EV_NM;
use riccati::RatioSeries;

pub use riccati::{psi_log_derivative, riccati_functions, RiccatiTable};

/// Multipole cut-off used throughout unless overridden.
pub const DEFAULT_N_MAX: usize = 60;

/// Radii, wavenumbers and relative indices of a core/shell sphere at one
/// photon energy.
#[derive(Debug, Clone, Copy)]
pub struct MieGeometry {
    pub omega: f64,
    /// Core radius, nm.
    pub r1: f64,
    /// Outer radius, nm.
    pub r2: f64,
    pub k1: Complex64,
    pub k2: Complex64,
    /// Exterior wavenumber, 1/nm (real).
    pub k3: f64,
    pub m1: Complex64,
    pub m2: Complex64,
}

impl MieGeometry {
    pub fn from_permittivities(
        omega: f64,
        r1: f64,
        r2: f64,
        eps_core: Complex64,
        eps_shell: Complex64,
        eps_b: f64,
    ) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::Domain { quantity: "photon energy", value: omega });
        }
        if !(r1 > 0.0 && r2 >= r1) {
            return Err(Error::Geometry(format!("radii must satisfy R2 >= R1 > 0, got R1={r1}, R2={r2}")));
        }
        let k0 = omega / HBAR_C_EV_NM;
        let k3 = k0 * eps_b.sqrt();
        let k1 = eps_core.sqrt() * k0;
        let k2 = eps_shell.sqrt() * k0;
        Ok(MieGeometry { omega, r1, r2, k1, k2, k3, m1: k1 / k3, m2: k2 / k3 })
    }

    pub fn new(stack: &MaterialStack, omega: f64) -> Result<Self> {
        let eps = stack.layers(omega)?;
        Self::from_permittivities(omega, stack.core_radius, stack.outer_radius(), eps.core, eps.shell, eps.background)
    }

    pub fn x1(&self) -> f64 {
        self.k3 * self.r1
    }

    pub fn x2(&self) -> f64 {
        self.k3 * self.r2
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MieCoefficients {
    pub omega: f64,
    /// TM coefficients, `a[0]` is order 1.
    pub a: Vec<Complex64>,
    /// TE coefficients, `b[0]` is order 1.
    pub b: Vec<Complex64>,
}

impl MieCoefficients {
    pub fn n_max(&self) -> usize {
        self.a.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossSections {
    pub omega: f64,
    /// nm²
    pub sigma_ext: f64,
    /// nm²
    pub sigma_sca: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Polarization {
    Tm,
    Te,
}

/// Series shared by every order at one geometry.
struct Series {
    core: RatioSeries,
    shell_inner_psi: RatioSeries,
    shell_inner_chi: RatioSeries,
    shell_outer_psi: RatioSeries,
    shell_outer_chi: RatioSeries,
    out_psi: RatioSeries,
    out_xi: RatioSeries,
}

impl Series {
    fn new(g: &MieGeometry, n_max: usize) -> Result<Self> {
        let z1 = g.m1 * g.x1();
        let z1s = g.m2 * g.x1();
        let z2 = g.m2 * g.x2();
        let x2 = Complex64::new(g.x2(), 0.0);
        Ok(Series {
            core: RatioSeries::psi(n_max, z1)?,
            shell_inner_psi: RatioSeries::psi(n_max, z1s)?,
            shell_inner_chi: RatioSeries::chi(n_max, z1s)?,
            shell_outer_psi: RatioSeries::psi(n_max, z2)?,
            shell_outer_chi: RatioSeries::chi(n_max, z2)?,
            out_psi: RatioSeries::psi(n_max, x2)?,
            out_xi: RatioSeries::xi(n_max, x2)?,
        })
    }
}

fn checked(v: Complex64, order: usize, omega: f64) -> Result<Complex64> {
    if v.norm() == 0.0 || !v.is_finite() {
        Err(Error::Singular { order, omega_ev: omega })
    } else {
        Ok(v)
    }
}

/// Bracket `[m₂ D₁ − m₁ Dψ(z₁')] / [m₂ D₁ − m₁ Dχ(z₁')]` (prefactors inverted for TE).
fn core_bracket(g: &MieGeometry, s: &Series, n: usize, pol: Polarization) -> Result<Complex64> {
    let (p1, p2) = match pol {
        Polarization::Tm => (g.m1, g.m2),
        Polarization::Te => (1.0 / g.m1, 1.0 / g.m2),
    };
    let d1 = s.core.logd[n];
    let num = p2 * d1 - p1 * s.shell_inner_psi.logd[n];
    let den = checked(p2 * d1 - p1 * s.shell_inner_chi.logd[n], n, g.omega)?;
    Ok(num / den)
}

/// Effective logarithmic derivative of the shell field at the outer surface
/// together with the bracket `M_n` with `a_n = ψ_n(x₂)/ξ_n(x₂) · M_n`.
fn outer_bracket(
    g: &MieGeometry,
    s: &Series,
    psi_ratio: &[Complex64],
    chi_ratio: &[Complex64],
    n: usize,
    pol: Polarization,
) -> Result<Complex64> {
    let t = psi_ratio[n] * chi_ratio[n] * core_bracket(g, s, n, pol)?;
    let one_minus_t = checked(1.0 - t, n, g.omega)?;
    let eff = (s.shell_outer_psi.logd[n] - t * s.shell_outer_chi.logd[n]) / one_minus_t;
    let p = match pol {
        Polarization::Tm => g.m2,
        Polarization::Te => 1.0 / g.m2,
    };
    let num = p * s.out_psi.logd[n] - eff;
    let den = checked(p * s.out_xi.logd[n] - eff, n, g.omega)?;
    Ok(num / den)
}

/// Per-order brackets `M_n` (TM, TE) for `n = 1..=n_max`.
fn brackets(g: &MieGeometry, n_max: usize) -> Result<(Series, Vec<Complex64>, Vec<Complex64>)> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let s = Series::new(g, n_max)?;
    // ψ_n(z₁')/ψ_n(z₂) and χ_n(z₂)/χ_n(z₁')
    let psi_ratio = s.shell_inner_psi.quotient(&s.shell_outer_psi);
    let chi_ratio = s.shell_outer_chi.quotient(&s.shell_inner_chi);
    let mut tm = Vec::with_capacity(n_max);
    let mut te = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        tm.push(outer_bracket(g, &s, &psi_ratio, &chi_ratio, n, Polarization::Tm)?);
        te.push(outer_bracket(g, &s, &psi_ratio, &chi_ratio, n, Polarization::Te)?);
    }
    Ok((s, tm, te))
}

/// Core ratio `A_n^c = ψ_n(z₁')/χ_n(z₁') · [m₂ D₁ − m₁ Dψ(z₁')]/[m₂ D₁ − m₁ Dχ(z₁')]`
/// of the TM problem, with `z₁' = m₂ k₃ R₁` and `D₁ = ψ_n'(m₁ k₃ R₁)/ψ_n(m₁ k₃ R₁)`.
pub fn core_ratio(n: usize, geometry: &MieGeometry) -> Result<Complex64> {
    if n < 1 {
        return Err(Error::InvalidParameter("multipole order must be at least 1".into()));
    }
    let s = Series::new(geometry, n)?;
    let psi_over_chi = s.shell_inner_psi.quotient(&s.shell_inner_chi);
    Ok(psi_over_chi[n] * core_bracket(geometry, &s, n, Polarization::Tm)?)
}

/// Coefficients `a_n`, `b_n` for `n = 1..=n_max` of a prepared geometry.
pub fn coefficients_for_geometry(g: &MieGeometry, n_max: usize) -> Result<MieCoefficients> {
    let (s, tm, te) = brackets(g, n_max)?;
    let q = s.out_psi.quotient(&s.out_xi);
    let a = (1..=n_max).map(|n| q[n] * tm[n - 1]).collect();
    let b = (1..=n_max).map(|n| q[n] * te[n - 1]).collect();
    Ok(MieCoefficients { omega: g.omega, a, b })
}

pub fn mie_coefficients(stack: &MaterialStack, omega: f64, n_max: usize) -> Result<MieCoefficients> {
    coefficients_for_geometry(&MieGeometry::new(stack, omega)?, n_max)
}

/// `a_n ξ_n(k₃R)²` for `n = 1..=n_max`, evaluated as
/// `ψ_n(x₂) ξ_n(x₂) · M_n · (ξ_n(k₃R)/ξ_n(x₂))²` so that neither the
/// vanishing `a_n` nor the diverging `ξ_n(k₃R)²` is formed.
pub(crate) fn scattered_dipole_terms(g: &MieGeometry, r: f64, n_max: usize) -> Result<Vec<Complex64>> {
    if !(r > g.r2) {
        return Err(Error::Geometry(format!("emitter at R={r} nm must lie outside the particle (R2={} nm)", g.r2)));
    }
    let (s, tm, _) = brackets(g, n_max)?;
    let xr = RatioSeries::xi(n_max, Complex64::new(g.k3 * r, 0.0))?;
    let prod = s.out_psi.product(&s.out_xi);
    let shift = xr.quotient(&s.out_xi);
    Ok((1..=n_max).map(|n| prod[n] * tm[n - 1] * shift[n] * shift[n]).collect())
}

pub fn cross_sections_for_geometry(g: &MieGeometry, n_max: usize) -> Result<CrossSections> {
    let c = coefficients_for_geometry(g, n_max)?;
    let (mut ext, mut sca) = (0.0, 0.0);
    for (i, (a, b)) in c.a.iter().zip(&c.b).enumerate() {
        let w = (2 * i + 3) as f64;
        ext += w * (a + b).re;
        sca += w * (a.norm_sqr() + b.norm_sqr());
    }
    let pref = 2.0 * std::f64::consts::PI / (g.k3 * g.k3);
    Ok(CrossSections { omega: g.omega, sigma_ext: pref * ext, sigma_sca: pref * sca })
}

pub fn cross_sections(stack: &MaterialStack, omega: f64, n_max: usize) -> Result<CrossSections> {
    cross_sections_for_geometry(&MieGeometry::new(stack, omega)?, n_max)
}

/// Homogeneous-sphere coefficients in the Bohren–Huffman form, for relative
/// index `m` and size parameter `x`.
pub fn homogeneous_sphere_coefficients(m: Complex64, x: f64, n_max: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let t = riccati_functions(n_max, Complex64::new(x, 0.0))?;
    let d = psi_log_derivative(n_max, m * x);
    let mut a = Vec::with_capacity(n_max);
    let mut b = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let nx = n as f64 / x;
        let (psi, psi1) = (t.psi[n], t.psi[n - 1]);
        let (xi, xi1) = (t.xi(n), t.xi(n - 1));
        let ta = d[n] / m + nx;
        let tb = d[n] * m + nx;
        a.push((ta * psi - psi1) / (ta * xi - xi1));
        b.push((tb * psi - psi1) / (tb * xi - xi1));
    }
    Ok((a, b))
}

/// Photon energy in `[lo, hi]` (eV) maximizing `|a_1|` of the stack's bare
/// core, located by a 1 meV scan refined with golden-section search.
pub fn dipole_resonance(stack: &MaterialStack, lo: f64, hi: f64) -> Result<f64> {
    let bare = MaterialStack { shell: None, shell_thickness: 0.0, ..stack.clone() };
    let a1 = |w: f64| -> Result<f64> { Ok(mie_coefficients(&bare, w, 1)?.a[0].norm()) };
    let step = 1e-3;
    let n = ((hi - lo) / step).ceil().max(2.0) as usize;
    let mut best = (lo, f64::NEG_INFINITY);
    for i in 0..=n {
        let w = (lo + i as f64 * step).min(hi);
        let v = a1(w)?;
        if v > best.1 {
            best = (w, v);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (a1(c)?, a1(d)?);
    while b - a > 1e-10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = a1(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = a1(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{DrudeParams, LorentzShellParams, Permittivity};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn bare() -> MaterialStack {
        MaterialStack::bare(DrudeParams::SILVER, 20.0, 1.69)
    }

    fn coated(wex: f64) -> MaterialStack {
        MaterialStack::coated(DrudeParams::SILVER, LorentzShellParams::j_aggregate(wex), 20.0, 2.0, 1.69)
    }

    #[test]
    fn bare_coefficients_against_reference() {
        // 40-digit evaluation of the textbook formulas
        let m = mie_coefficients(&bare(), 3.0, 5).unwrap();
        assert!(rel(m.a[0], c(0.362_581_245_389_631_78, -0.308_713_080_261_081_49)) < 1e-11);
        assert!(rel(m.b[0], c(2.007_710_551_921_473e-5, 7.175_671_575_970_345e-4)) < 1e-10);
        assert!(rel(m.a[2], c(1.944_992_224_010_068e-7, -3.619_029_403_447_971e-6)) < 1e-10);
    }

    #[test]
    fn coated_coefficients_against_reference() {
        let m = mie_coefficients(&coated(3.07), 3.14, 5).unwrap();
        assert!(rel(m.a[0], c(0.168_796_982_066_281_47, 0.165_835_292_692_576_9)) < 1e-10);
        assert!(rel(m.b[0], c(1.265_118_589_683_279e-4, 1.089_328_423_415_803_6e-3)) < 1e-9);
        assert!(rel(m.a[2], c(1.271_141_905_214_862e-5, -8.619_476_208_228_015e-6)) < 1e-9);
    }

    #[test]
    fn coated_tail_is_negligible() {
        let m = mie_coefficients(&coated(3.07), 3.14, 60).unwrap();
        assert!((m.a[59] / m.a[0]).norm() < 1e-8);
        assert!(m.a.iter().chain(&m.b).all(|v| v.is_finite()));
    }

    #[test]
    fn core_ratio_merges_with_homogeneous_limit() {
        // shell identical to the exterior: the coated core ratio reduces to
        // the homogeneous sphere of radius R1 with T_n = A_n^c χ/ψ.
        let eps = DrudeParams::SILVER.permittivity(3.1).unwrap();
        let g = MieGeometry::from_permittivities(3.1, 20.0, 22.0, eps, c(1.69, 0.0), 1.69).unwrap();
        let a_c = core_ratio(1, &g).unwrap();
        assert!(a_c.is_finite());
        let full = coefficients_for_geometry(&g, 3).unwrap();
        let (a_h, _) = homogeneous_sphere_coefficients(g.m1, g.x1(), 3).unwrap();
        assert!(rel(full.a[0], a_h[0]) < 1e-12);
    }

    #[test]
    fn rayleigh_scaling() {
        let st = bare();
        let pts: Vec<(f64, f64)> = (0..=10)
            .map(|i| {
                let w = 0.1 + 0.02 * i as f64;
                let a1 = mie_coefficients(&st, w, 3).unwrap().a[0].norm();
                (w.ln(), a1.ln())
            })
            .collect();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (mx, my) = (sx / n, sy / n);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope - 3.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn bare_dipole_resonance() {
        let w = dipole_resonance(&bare(), 2.5, 3.6).unwrap();
        assert!((w - 3.07).abs() < 0.02, "{w}");
    }

    #[test]
    fn emitter_inside_particle_rejected() {
        let g = MieGeometry::new(&coated(3.07), 3.0).unwrap();
        assert!(matches!(scattered_dipole_terms(&g, 21.0, 10), Err(Error::Geometry(_))));
    }

    #[test]
    fn scaled_terms_match_direct_product() {
        let g = MieGeometry::new(&coated(3.07), 3.2).unwrap();
        let terms = scattered_dipole_terms(&g, 23.0, 12).unwrap();
        let m = coefficients_for_geometry(&g, 12).unwrap();
        let t = riccati_functions(12, c(g.k3 * 23.0, 0.0)).unwrap();
        for n in 1..=12 {
            let direct = m.a[n - 1] * t.xi(n) * t.xi(n);
            assert!(rel(terms[n - 1], direct) < 1e-10, "n={n}");
        }
    }

    #[test]
    fn high_orders_stay_finite() {
        let g = MieGeometry::new(&bare(), 3.5).unwrap();
        let terms = scattered_dipole_terms(&g, 23.0, 120).unwrap();
        assert!(terms.iter().all(|t| t.is_finite()));
    }
}
