//! Michaelis–Menten rate law and its variant with an added linear term.

use crate::design::ParameterSpace;
use crate::error::Result;
use crate::model::ModelPair;

/// `V x / (K + x)`. Returns NaN when `K + x` is numerically zero, which the
/// model pair reports as an evaluation error.
pub fn mm_eval(x: f64, v: f64, k: f64) -> f64 {
    let denom = k + x;
    if denom.abs() <= 1e-15 {
        return f64::NAN;
    }
    v * x / denom
}

/// `V x / (K + x) + F x`.
pub fn modmm_eval(x: f64, v: f64, k: f64, f: f64) -> f64 {
    mm_eval(x, v, k) + f * x
}

pub const DEFAULT_THETA_LOWER: [f64; 2] = [1e-3, 1e-3];
pub const DEFAULT_THETA_UPPER: [f64; 2] = [5.0, 5.0];

/// Modified MM with `(V, K, F)` as the true model against plain MM with
/// fitted `(V, K)` on the default parameter box.
pub fn mm_pair(v: f64, k: f64, f: f64) -> Result<ModelPair> {
    let space = ParameterSpace::new(DEFAULT_THETA_LOWER.to_vec(), DEFAULT_THETA_UPPER.to_vec())?;
    Ok(ModelPair::scalar(
        |x: &[f64], p: &[f64]| modmm_eval(x[0], p[0], p[1], p[2]),
        vec![v, k, f],
        |x: &[f64], p: &[f64]| mm_eval(x[0], p[0], p[1]),
        space,
    ))
}
