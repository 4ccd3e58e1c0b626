//! Riccati–Bessel functions of complex argument.
//!
//! Conventions: `ψ_n(z) = z j_n(z)`, `χ_n(z) = -z y_n(z)` and
//! `ξ_n(z) = z h_n^(1)(z) = ψ_n(z) - i χ_n(z)`. With these signs
//! `ψ_n' χ_n - ψ_n χ_n' = 1`.
//!
//! `ψ_n` is built from its logarithmic derivative, obtained by downward
//! recurrence; `χ_n` and `ξ_n` use upward recurrence where they are the
//! dominant solution.

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Values and first derivatives of `ψ_n`, `χ_n` for `n = 0..=n_max`.
#[derive(Debug, Clone)]
pub struct RiccatiTable {
    pub z: Complex64,
    pub psi: Vec<Complex64>,
    pub dpsi: Vec<Complex64>,
    pub chi: Vec<Complex64>,
    pub dchi: Vec<Complex64>,
}

impl RiccatiTable {
    pub fn n_max(&self) -> usize {
        self.psi.len() - 1
    }

    pub fn xi(&self, n: usize) -> Complex64 {
        self.psi[n] - I * self.chi[n]
    }

    pub fn dxi(&self, n: usize) -> Complex64 {
        self.dpsi[n] - I * self.dchi[n]
    }
}

fn check_argument(z: Complex64) -> Result<()> {
    if z.norm() == 0.0 || !z.is_finite() {
        return Err(Error::Domain { quantity: "|Riccati-Bessel argument|", value: z.norm() });
    }
    Ok(())
}

/// `iσ` with `σ = ±1` chosen so that `ζ_n = ψ_n − iσχ_n` is dominant.
fn hankel_sign(z: Complex64) -> Complex64 {
    if z.im >= 0.0 {
        I
    } else {
        -I
    }
}

/// `ζ_0 = −iσ e^{iσz}` and `ζ_1 = e^{iσz}(−iσ/z − 1)`, formed without the
/// cancellation in `sin z − iσ cos z`.
fn hankel_start(z: Complex64, sigma: Complex64) -> (Complex64, Complex64) {
    let e = (sigma * z).exp();
    (-sigma * e, e * (-sigma / z - 1.0))
}

fn range_error(order: usize, z: Complex64) -> Error {
    Error::Range { order, re: z.re, im: z.im }
}

/// Starting order for the downward recurrence of the logarithmic derivative.
fn downward_start(n_max: usize, z: Complex64) -> usize {
    let a = z.norm();
    n_max.max(a.ceil() as usize) + 16 + (4.0 * a.cbrt()).ceil() as usize
}

/// `D_n(z) = ψ_n'(z)/ψ_n(z)` for `n = 0..=n_max`.
pub fn psi_log_derivative(n_max: usize, z: Complex64) -> Vec<Complex64> {
    let start = downward_start(n_max, z);
    let mut d = vec![Complex64::new(0.0, 0.0); start + 1];
    for n in (1..=start).rev() {
        let nz = n as f64 / z;
        d[n - 1] = nz - 1.0 / (d[n] + nz);
    }
    d.truncate(n_max + 1);
    d
}

/// Evaluates `ψ_n, ψ_n', χ_n, χ_n'` for `n = 0..=n_max`.
pub fn riccati_functions(n_max: usize, z: Complex64) -> Result<RiccatiTable> {
    check_argument(z)?;
    if n_max < 1 {
        return Err(Error::InvalidParameter("Riccati-Bessel n_max must be at least 1".into()));
    }
    let d = psi_log_derivative(n_max, z);
    let (s, c) = (z.sin(), z.cos());

    let mut psi = vec![Complex64::new(0.0, 0.0); n_max + 1];
    psi[0] = s;
    // ψ_0 = sin z vanishes near z = kπ; restart the upward product from ψ_1.
    let scale = z.im.abs().exp();
    let first = if s.norm() < 1e-8 * scale {
        psi[1] = s / z - c;
        2
    } else {
        1
    };
    for n in first..=n_max {
        psi[n] = psi[n - 1] / (d[n] + n as f64 / z);
    }
    let dpsi: Vec<Complex64> = psi.iter().zip(&d).map(|(p, dn)| p * dn).collect();

    // χ = iσ(ζ − ψ) with ζ = ψ − iσχ = z h_n^(1|2)(z); σ = sign(Im z) makes
    // ζ the solution that upward recurrence carries without cancellation.
    let sigma = hankel_sign(z);
    let mut zeta = vec![Complex64::new(0.0, 0.0); n_max + 1];
    let (z0, z1) = hankel_start(z, sigma);
    zeta[0] = z0;
    zeta[1] = z1;
    for n in 1..n_max {
        zeta[n + 1] = (2 * n + 1) as f64 / z * zeta[n] - zeta[n - 1];
    }
    let mut chi: Vec<Complex64> = (0..=n_max).map(|n| sigma * (zeta[n] - psi[n])).collect();
    chi[0] = c;
    chi[1] = c / z + s;
    let mut dchi = vec![Complex64::new(0.0, 0.0); n_max + 1];
    dchi[0] = -s;
    for n in 1..=n_max {
        let dzeta = zeta[n - 1] - n as f64 / z * zeta[n];
        dchi[n] = sigma * (dzeta - dpsi[n]);
    }

    for n in 0..=n_max {
        if !(psi[n].is_finite() && chi[n].is_finite() && dpsi[n].is_finite() && dchi[n].is_finite()) {
            return Err(range_error(n, z));
        }
    }
    Ok(RiccatiTable { z, psi, dpsi, chi, dchi })
}

/// Overflow-free description of one Riccati–Bessel family at one argument:
/// the zeroth-order value, the successive ratios `f_n/f_{n-1}` and the
/// logarithmic derivatives `f_n'/f_n`.
#[derive(Debug, Clone)]
pub(crate) struct RatioSeries {
    pub first: Complex64,
    /// `ratio[n] = f_n / f_{n-1}` for `n >= 1`; `ratio[0]` is unused.
    pub ratio: Vec<Complex64>,
    /// `logd[n] = f_n' / f_n`.
    pub logd: Vec<Complex64>,
}

impl RatioSeries {
    /// `ψ_n` family.
    pub fn psi(n_max: usize, z: Complex64) -> Result<Self> {
        check_argument(z)?;
        let logd = psi_log_derivative(n_max, z);
        let mut ratio = vec![Complex64::new(0.0, 0.0); n_max + 1];
        for n in 1..=n_max {
            ratio[n] = 1.0 / (logd[n] + n as f64 / z);
        }
        Ok(RatioSeries { first: z.sin(), ratio, logd })
    }

    /// Family obeying the upward recurrence from `f_0`, `f_1` (χ_n or ξ_n).
    fn upward(n_max: usize, z: Complex64, f0: Complex64, f1: Complex64, df0: Complex64) -> Result<Self> {
        check_argument(z)?;
        let mut ratio = vec![Complex64::new(0.0, 0.0); n_max + 1];
        let mut logd = vec![Complex64::new(0.0, 0.0); n_max + 1];
        logd[0] = df0 / f0;
        if n_max >= 1 {
            ratio[1] = f1 / f0;
        }
        for n in 1..n_max {
            ratio[n + 1] = (2 * n + 1) as f64 / z - 1.0 / ratio[n];
        }
        for n in 1..=n_max {
            // f_n' = f_{n-1} - n f_n / z
            logd[n] = 1.0 / ratio[n] - n as f64 / z;
            if !(ratio[n].is_finite() && logd[n].is_finite()) {
                return Err(range_error(n, z));
            }
        }
        Ok(RatioSeries { first: f0, ratio, logd })
    }

    /// `χ_n` family, assembled as `iσ(ζ_n − ψ_n)` from two well-conditioned
    /// recurrences and renormalized at every order.
    pub fn chi(n_max: usize, z: Complex64) -> Result<Self> {
        let psi = Self::psi(n_max, z)?;
        let sigma = hankel_sign(z);
        let (z0, z1) = hankel_start(z, sigma);
        let zeta = Self::upward(n_max, z, z0, z1, (sigma * z).exp())?;

        let mut ratio = vec![Complex64::new(0.0, 0.0); n_max + 1];
        let mut logd = vec![Complex64::new(0.0, 0.0); n_max + 1];
        let c = z.cos();
        logd[0] = -z.sin() / c;
        // p, q: ψ_n and ζ_n divided by a common running scale
        let (mut p, mut q) = (psi.first, zeta.first);
        let mut prev = c;
        for n in 1..=n_max {
            p *= psi.ratio[n];
            q *= zeta.ratio[n];
            let chi_n = sigma * (q - p);
            ratio[n] = chi_n / prev;
            logd[n] = sigma * (q * zeta.logd[n] - p * psi.logd[n]) / chi_n;
            if !(ratio[n].is_finite() && logd[n].is_finite()) {
                return Err(range_error(n, z));
            }
            let scale = chi_n.norm();
            p /= scale;
            q /= scale;
            prev = chi_n / scale;
        }
        Ok(RatioSeries { first: c, ratio, logd })
    }

    pub fn xi(n_max: usize, z: Complex64) -> Result<Self> {
        let (x0, x1) = hankel_start(z, I);
        Self::upward(n_max, z, x0, x1, (I * z).exp())
    }

    /// `f_n(self) / f_n(other)` for `n = 0..=n_max` (both series of equal length).
    pub fn quotient(&self, other: &RatioSeries) -> Vec<Complex64> {
        let n_max = self.ratio.len() - 1;
        let mut out = Vec::with_capacity(n_max + 1);
        let mut q = self.first / other.first;
        out.push(q);
        for n in 1..=n_max {
            q *= self.ratio[n] / other.ratio[n];
            out.push(q);
        }
        out
    }

    /// `f_n(self) · g_n(other)` for `n = 0..=n_max`.
    pub fn product(&self, other: &RatioSeries) -> Vec<Complex64> {
        let n_max = self.ratio.len() - 1;
        let mut out = Vec::with_capacity(n_max + 1);
        let mut p = self.first * other.first;
        out.push(p);
        for n in 1..=n_max {
            p *= self.ratio[n] * other.ratio[n];
            out.push(p);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_close(a: Complex64, b: Complex64, rel: f64) {
        let err = (a - b).norm() / b.norm();
        assert!(err < rel, "{a} vs {b}: relative error {err:e}");
    }

    #[test]
    fn zeroth_order_closed_forms() {
        for z in [c(0.3, 0.0), c(2.0, 1.0), c(-1.5, 0.7), c(10.0, -3.0)] {
            let t = riccati_functions(4, z).unwrap();
            assert_close(t.psi[0], z.sin(), 1e-14);
            assert_close(t.chi[0], z.cos(), 1e-14);
        }
    }

    #[test]
    fn third_order_against_series_oracle() {
        // 40-digit power series / mpmath evaluation at z = 2 + i
        let t = riccati_functions(5, c(2.0, 1.0)).unwrap();
        assert_close(t.psi[3], c(-0.011_048_021_337_478_924, 0.201_717_647_243_524_22), 1e-12);
        assert_close(t.dpsi[3], c(0.171_225_915_009_224_2, 0.287_848_806_823_154_08), 1e-12);
        assert_close(t.chi[3], c(1.207_567_437_618_117_4, -1.373_481_403_573_268_7), 1e-12);
        assert_close(t.dchi[3], c(0.663_360_499_878_092_1, 1.936_118_935_184_444), 1e-12);
    }

    #[test]
    fn small_argument_high_order() {
        let z = c(0.5, 0.2);
        let t = riccati_functions(10, z).unwrap();
        assert_close(t.psi[10], c(-4.050_792_152_286_639e-14, -6.895_113_328_166_966e-14), 1e-11);
        assert_close(t.chi[10], c(-253_921_008_181.634_34, 196_339_841_030.848_17), 1e-11);
    }

    #[test]
    fn zero_argument_rejected() {
        assert!(matches!(riccati_functions(3, c(0.0, 0.0)), Err(Error::Domain { .. })));
    }

    #[test]
    fn overflow_reports_order() {
        match riccati_functions(200, c(1e-3, 0.0)) {
            Err(Error::Range { order, .. }) => assert!(order > 50 && order <= 200),
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn psi_restarts_at_multiples_of_pi() {
        let z = c(std::f64::consts::PI, 0.0);
        let t = riccati_functions(6, z).unwrap();
        assert_close(t.psi[1], c(1.0, 0.0), 1e-12);
        for n in 1..6 {
            let w = t.dpsi[n] * t.chi[n] - t.psi[n] * t.dchi[n];
            assert_close(w, c(1.0, 0.0), 1e-10);
        }
    }

    #[test]
    fn ratio_series_match_tables() {
        let (a, b) = (c(1.3, 0.4), c(1.1, 0.3));
        let (ta, tb) = (riccati_functions(20, a).unwrap(), riccati_functions(20, b).unwrap());
        let q = RatioSeries::psi(20, a).unwrap().quotient(&RatioSeries::psi(20, b).unwrap());
        let qc = RatioSeries::chi(20, a).unwrap().quotient(&RatioSeries::chi(20, b).unwrap());
        let xa = RatioSeries::xi(20, a).unwrap();
        for n in 0..=20 {
            assert_close(q[n], ta.psi[n] / tb.psi[n], 1e-11);
            assert_close(qc[n], ta.chi[n] / tb.chi[n], 1e-11);
            assert_close(xa.logd[n], ta.dxi(n) / ta.xi(n), 1e-11);
        }
    }

    #[test]
    fn chi_series_on_imaginary_axis() {
        let z = c(0.0, 7.485_974_602_266_235);
        let t = riccati_functions(12, z).unwrap();
        let s = RatioSeries::chi(12, z).unwrap();
        for n in 1..=12 {
            assert_close(s.ratio[n], t.chi[n] / t.chi[n - 1], 1e-12);
            assert_close(s.logd[n], t.dchi[n] / t.chi[n], 1e-12);
        }
    }

    proptest::proptest! {
        #[test]
        fn wronskian(re in -30.0f64..30.0, im in -8.0f64..8.0, n_max in 1usize..40) {
            let z = c(re, im);
            proptest::prop_assume!(z.norm() > 0.05);
            let t = riccati_functions(n_max, z).unwrap();
            for n in 0..=n_max {
                let w = t.dpsi[n] * t.chi[n] - t.psi[n] * t.dchi[n];
                let scale = (t.dpsi[n] * t.chi[n]).norm().max((t.psi[n] * t.dchi[n]).norm()).max(1.0);
                proptest::prop_assert!((w - 1.0).norm() < 1e-10 * scale, "n={} w={}", n, w);
            }
        }
    }
}
