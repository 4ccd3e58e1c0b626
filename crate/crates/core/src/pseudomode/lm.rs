//! Levenberg–Marquardt least squares with Marquardt diagonal scaling and
//! Nielsen's damping update.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub(crate) struct LmSettings {
    pub max_iterations: usize,
    /// Relative step tolerance.
    pub xtol: f64,
    /// Relative reduction of the cost below which the iteration stops.
    pub ftol: f64,
    /// Infinity norm of the gradient below which the iteration stops.
    pub gtol: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        LmSettings { max_iterations: 2000, xtol: 1e-10, ftol: 1e-12, gtol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub x: DVector<f64>,
    /// `½‖r‖²` at `x`.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `JᵀJ` at `x`, for parameter uncertainties.
    pub jtj: DMatrix<f64>,
    pub n_residuals: usize,
}

/// Minimizes `½‖r(x)‖²`. `eval` returns the residual vector and its Jacobian.
pub(crate) fn minimize<F>(eval: F, x0: DVector<f64>, settings: &LmSettings) -> LmOutcome
where
    F: Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
{
    let mut x = x0;
    let (mut r, mut j) = eval(&x);
    let mut cost = 0.5 * r.norm_squared();
    let mut jtj = j.transpose() * &j;
    let mut g = j.transpose() * &r;
    let p = x.len();

    let max_diag = (0..p).map(|i| jtj[(i, i)]).fold(0.0, f64::max);
    let mut mu = 1e-3 * max_diag.max(1e-300);
    let mut nu = 2.0;
    let mut converged = g.amax() < settings.gtol;
    let mut iterations = 0;

    while !converged && iterations < settings.max_iterations {
        iterations += 1;
        let mut a = jtj.clone();
        for i in 0..p {
            a[(i, i)] += mu * jtj[(i, i)].max(1e-12 * max_diag.max(1e-300));
        }
        let step = match a.cholesky() {
            Some(ch) => ch.solve(&(-&g)),
            None => {
                mu *= nu;
                nu *= 2.0;
                continue;
            }
        };

        if step.norm() <= settings.xtol * (x.norm() + settings.xtol) {
            converged = true;
            break;
        }

        let x_new = &x + &step;
        let (r_new, j_new) = eval(&x_new);
        let cost_new = 0.5 * r_new.norm_squared();
        // predicted reduction of the linear model
        let predicted = -(step.dot(&g) + 0.5 * step.dot(&(&jtj * &step)));
        let rho = if cost_new.is_finite() && predicted > 0.0 { (cost - cost_new) / predicted } else { -1.0 };

        if rho > 0.0 {
            let rel_drop = (cost - cost_new) / cost.max(f64::MIN_POSITIVE);
            x = x_new;
            r = r_new;
            j = j_new;
            cost = cost_new;
            jtj = j.transpose() * &j;
            g = j.transpose() * &r;
            mu *= f64::max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
            if g.amax() < settings.gtol || rel_drop < settings.ftol {
                converged = true;
            }
        } else {
            mu *= nu;
            nu *= 2.0;
            if !mu.is_finite() {
                break;
            }
        }
    }

    LmOutcome { x, cost, iterations, converged, jtj, n_residuals: r.len() }
}
