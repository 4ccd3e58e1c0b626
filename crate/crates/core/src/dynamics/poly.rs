//! Dense complex polynomials, coefficients in ascending order.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn one() -> Self {
        Poly(vec![Complex64::new(1.0, 0.0)])
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * s + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![Complex64::new(0.0, 0.0)]);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect())
    }

    /// `self · (s + root_shift)`.
    pub fn mul_linear(&self, root_shift: Complex64) -> Poly {
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len() + 1];
        for (k, c) in self.0.iter().enumerate() {
            out[k + 1] += c;
            out[k] += c * root_shift;
        }
        Poly(out)
    }

    /// `s · self`.
    pub fn shift_up(&self) -> Poly {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        out.push(Complex64::new(0.0, 0.0));
        out.extend_from_slice(&self.0);
        Poly(out)
    }

    pub fn add_scaled(&mut self, other: &Poly, factor: f64) {
        if other.0.len() > self.0.len() {
            self.0.resize(other.0.len(), Complex64::new(0.0, 0.0));
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b * factor;
        }
    }

    pub fn leading(&self) -> Complex64 {
        *self.0.last().expect("non-empty polynomial")
    }

    /// Coefficients from the highest power down.
    pub fn descending(&self) -> Vec<Complex64> {
        self.0.iter().rev().copied().collect()
    }
}
