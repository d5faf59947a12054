//! The T-criterion and its directional derivative.

use rayon::prelude::*;

use crate::design::{Design, DesignPoint};
use crate::error::Result;
use crate::model::ModelPair;

/// Squared model distance `phi(x, theta) = ||f1(x) - f2(x, theta)||^2`.
pub fn squared_distance(pair: &ModelPair, x: &DesignPoint, theta: &[f64]) -> Result<f64> {
    pair.squared_distance(x, theta)
}

/// Squared distance at every point of `points`, in order.
pub fn squared_distances(
    pair: &ModelPair,
    points: &[DesignPoint],
    theta: &[f64],
) -> Result<Vec<f64>> {
    points
        .par_iter()
        .map(|x| pair.squared_distance(x, theta))
        .collect()
}

/// `T(design, theta)`: the design-weighted squared distance.
pub fn t_value(pair: &ModelPair, design: &Design, theta: &[f64]) -> Result<f64> {
    let phi = squared_distances(pair, design.points(), theta)?;
    Ok(weighted_sum(design.weights(), &phi))
}

pub(crate) fn weighted_sum(weights: &[f64], values: &[f64]) -> f64 {
    weights.iter().zip(values).map(|(w, v)| w * v).sum()
}

/// `psi(x, design) = phi(x, theta_hat) - T(design, theta_hat)`.
///
/// `theta_hat` must be the fitted parameter for `design`; it is not re-fitted
/// here so a single fit can be shared across many evaluations.
pub fn directional_derivative(
    pair: &ModelPair,
    design: &Design,
    theta_hat: &[f64],
    x: &DesignPoint,
) -> Result<f64> {
    Ok(pair.squared_distance(x, theta_hat)? - t_value(pair, design, theta_hat)?)
}
