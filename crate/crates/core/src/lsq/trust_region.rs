//! Bound-constrained Levenberg–Marquardt.
//!
//! The damping parameter acts as the trust-region radius: it grows when the
//! quadratic model predicts the actual reduction poorly and shrinks otherwise.
//! Variables sitting on a bound with the gradient pushing outward are frozen
//! for the step; trial points are projected back into the box.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

/// Relative forward-difference step for Jacobians.
pub const FD_STEP: f64 = 1e-7;

#[derive(Clone, Copy, Debug)]
pub struct LocalOptions {
    pub gtol: f64,
    pub xtol: f64,
    pub max_iters: usize,
}

#[derive(Clone, Debug)]
pub struct LocalOutcome {
    pub x: Vec<f64>,
    /// Sum of squared residuals at `x`.
    pub cost: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, l), u) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*l, *u);
    }
}

/// Forward differences; steps backwards at the upper bound.
fn jacobian<F>(
    residuals: &F,
    x: &[f64],
    r: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64], &mut Vec<f64>) -> Result<()>,
{
    let m = r.len();
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    let mut rp = Vec::with_capacity(m);
    for j in 0..n {
        let mut h = FD_STEP * x[j].abs().max(1.0);
        if x[j] + h > upper[j] && x[j] - h >= lower[j] {
            h = -h;
        }
        xp[j] = x[j] + h;
        let step = xp[j] - x[j];
        residuals(&xp, &mut rp)?;
        for i in 0..m {
            jac[(i, j)] = (rp[i] - r[i]) / step;
        }
        xp[j] = x[j];
    }
    Ok(jac)
}

/// Minimizes `sum r_i(x)^2` over the box `[lower, upper]` starting at `x0`.
pub fn minimize<F>(
    residuals: &F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: LocalOptions,
) -> Result<LocalOutcome>
where
    F: Fn(&[f64], &mut Vec<f64>) -> Result<()>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let mut r = Vec::new();
    residuals(&x, &mut r)?;
    let mut cost = sum_sq(&r);
    let mut mu = -1.0;
    let mut nu = 2.0;
    let mut trial = vec![0.0; n];
    let mut r_trial = Vec::with_capacity(r.len());

    for iter in 0..opts.max_iters {
        if cost == 0.0 {
            return Ok(LocalOutcome { x, cost, converged: true, iterations: iter });
        }
        let jac = jacobian(residuals, &x, &r, lower, upper)?;
        let rv = DVector::from_column_slice(&r);
        let grad = jac.tr_mul(&rv);
        let normal = jac.tr_mul(&jac);

        let free: Vec<usize> = (0..n)
            .filter(|&j| {
                let at_lower = x[j] <= lower[j] && grad[j] > 0.0;
                let at_upper = x[j] >= upper[j] && grad[j] < 0.0;
                !(at_lower || at_upper)
            })
            .collect();
        let pg = free.iter().map(|&j| grad[j].abs()).fold(0.0, f64::max);
        if free.is_empty() || pg <= opts.gtol {
            return Ok(LocalOutcome { x, cost, converged: true, iterations: iter });
        }

        let max_diag = free.iter().map(|&j| normal[(j, j)]).fold(0.0, f64::max);
        let diag_floor = (max_diag * 1e-12).max(f64::MIN_POSITIVE);
        if mu < 0.0 {
            mu = 1e-3;
        }

        let k = free.len();
        let mut a = DMatrix::zeros(k, k);
        let mut b = DVector::zeros(k);
        for (p, &jp) in free.iter().enumerate() {
            b[p] = -grad[jp];
            for (q, &jq) in free.iter().enumerate() {
                a[(p, q)] = normal[(jp, jq)];
            }
        }

        let mut accepted = false;
        loop {
            let mut damped = a.clone();
            for p in 0..k {
                let jp = free[p];
                damped[(p, p)] += mu * normal[(jp, jp)].max(diag_floor);
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&b),
                None => {
                    mu *= nu;
                    nu *= 2.0;
                    if mu > 1e20 {
                        break;
                    }
                    continue;
                }
            };
            trial.copy_from_slice(&x);
            for (p, &jp) in free.iter().enumerate() {
                trial[jp] += step[p];
            }
            project(&mut trial, lower, upper);

            let s: Vec<f64> = trial.iter().zip(&x).map(|(t, v)| t - v).collect();
            let s_norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if s_norm <= opts.xtol * (opts.xtol + x_norm) {
                return Ok(LocalOutcome { x, cost, converged: true, iterations: iter + 1 });
            }

            let predicted = {
                let sv = DVector::from_column_slice(&s);
                let lin = &rv + &jac * sv;
                cost - lin.norm_squared()
            };
            let actual = match residuals(&trial, &mut r_trial) {
                Ok(()) => cost - sum_sq(&r_trial),
                Err(_) => f64::NEG_INFINITY,
            };
            if predicted > 0.0 && actual > 1e-4 * predicted {
                let rho = actual / predicted;
                mu *= (1.0 / 3.0f64).max(1.0 - (2.0 * rho - 1.0).powi(3));
                nu = 2.0;
                x.copy_from_slice(&trial);
                std::mem::swap(&mut r, &mut r_trial);
                cost = sum_sq(&r);
                accepted = true;
                break;
            }
            mu *= nu;
            nu *= 2.0;
            if mu > 1e20 {
                break;
            }
        }
        if !accepted {
            // No productive step at any damping: stationary to working precision.
            return Ok(LocalOutcome { x, cost, converged: true, iterations: iter + 1 });
        }
    }
    Ok(LocalOutcome {
        x,
        cost,
        converged: false,
        iterations: opts.max_iters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const OPTS: LocalOptions = LocalOptions { gtol: 1e-12, xtol: 1e-12, max_iters: 200 };

    #[test]
    fn rosenbrock_unconstrained() {
        let f = |x: &[f64], r: &mut Vec<f64>| {
            r.clear();
            r.push(10.0 * (x[1] - x[0] * x[0]));
            r.push(1.0 - x[0]);
            Ok(())
        };
        let out = minimize(&f, &[-1.2, 1.0], &[-5.0, -5.0], &[5.0, 5.0], OPTS).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6, "{:?}", out.x);
    }

    #[test]
    fn bound_active_at_solution() {
        // minimum of (x - 3)^2 + (y + 1)^2 over [0,2] x [0,2] is (2, 0)
        let f = |x: &[f64], r: &mut Vec<f64>| {
            r.clear();
            r.push(x[0] - 3.0);
            r.push(x[1] + 1.0);
            Ok(())
        };
        let out = minimize(&f, &[1.0, 1.0], &[0.0, 0.0], &[2.0, 2.0], OPTS).unwrap();
        assert!(out.converged);
        assert_eq!(out.x, vec![2.0, 0.0]);
        assert!((out.cost - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_fit() {
        let ts = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0];
        let f = move |p: &[f64], r: &mut Vec<f64>| {
            r.clear();
            r.extend(ts.iter().map(|t| p[0] * (-p[1] * t).exp() - 2.0 * (-0.7 * t).exp()));
            Ok(())
        };
        let out = minimize(&f, &[1.0, 0.1], &[0.0, 0.0], &[10.0, 10.0], OPTS).unwrap();
        assert!((out.x[0] - 2.0).abs() < 1e-7 && (out.x[1] - 0.7).abs() < 1e-7, "{:?}", out.x);
    }
}
