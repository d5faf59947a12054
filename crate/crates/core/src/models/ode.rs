//! Dormand–Prince 5(4) integrator with embedded error control.
//!
//! Only the state at the final time is returned; there is no dense output.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorTol {
    pub rel: f64,
    pub abs: f64,
}

impl Default for IntegratorTol {
    fn default() -> Self {
        Self { rel: 1e-8, abs: 1e-10 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 100_000;

/// Integrates `y' = f(t, y)` from `t = 0` to `t_end` and returns `y(t_end)`.
pub fn integrate<F>(f: F, y0: &[f64], t_end: f64, tol: IntegratorTol) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    if t_end <= 0.0 {
        return Ok(y);
    }
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let scale = |y: &[f64], yn: &[f64], i: usize| tol.abs + tol.rel * y[i].abs().max(yn[i].abs());

    let mut t = 0.0;
    f(t, &y, &mut k1);

    // Initial step from the Hairer–Wanner heuristic.
    let d0 = rms(n, |i| y[i] / scale(&y, &y, i));
    let d1 = rms(n, |i| k1[i] / scale(&y, &y, i));
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(t_end);
    for i in 0..n {
        tmp[i] = y[i] + h * k1[i];
    }
    f(t + h, &tmp, &mut k2);
    let d2 = rms(n, |i| (k2[i] - k1[i]) / scale(&y, &y, i)) / h;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    h = (100.0 * h).min(h1).min(t_end);

    let mut err_prev: f64 = 1e-4;
    let mut rejected = false;
    for _ in 0..MAX_STEPS {
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h <= 1e-14 * t_end.max(1.0) {
            return Err(Error::Integration {
                t,
                state: y,
                reason: "step size underflow".into(),
            });
        }

        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, &tmp, &mut k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, &tmp, &mut k5);
        for i in 0..n {
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, &tmp, &mut k6);
        for i in 0..n {
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t + h, &y_new, &mut k7);

        let err = rms(n, |i| {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            e / scale(&y, &y_new, i)
        });
        if !err.is_finite() {
            h *= 0.1;
            rejected = true;
            continue;
        }

        if err <= 1.0 {
            // PI step control.
            let mut fac = 0.9 * err.max(1e-10).powf(-0.17) * err_prev.powf(0.04);
            fac = fac.clamp(0.2, 10.0);
            if rejected {
                fac = fac.min(1.0);
            }
            t += h;
            std::mem::swap(&mut y, &mut y_new);
            // First same as last.
            std::mem::swap(&mut k1, &mut k7);
            if last {
                return Ok(y);
            }
            err_prev = err.max(1e-4);
            h *= fac;
            rejected = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            rejected = true;
        }
    }
    Err(Error::Integration {
        t,
        state: y,
        reason: format!("exceeded {MAX_STEPS} steps"),
    })
}

fn rms(n: usize, term: impl Fn(usize) -> f64) -> f64 {
    ((0..n).map(|i| term(i).powi(2)).sum::<f64>() / n.max(1) as f64).sqrt()
}
