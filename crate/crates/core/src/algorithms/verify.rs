//! Equivalence-theorem check of a design.

use crate::criterion::{squared_distances, t_value};
use crate::design::{Design, DesignPoint, DesignSpace};
use crate::error::Result;
use crate::global::{maximize_distance, GlobalSearchConfig};
use crate::model::ModelPair;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalityReport {
    /// `max_x psi(x)`: the largest directional derivative found.
    pub max_psi: f64,
    /// `min over the support of phi - T`. Never positive, since `T` is a
    /// weighted mean of the support values.
    pub min_support_gap: f64,
    /// `max_x phi - min over the support of phi`. Small only when every
    /// support point sits at the global maximum of `phi`.
    pub support_spread: f64,
    /// Where `max_psi` is attained.
    pub worst_point: DesignPoint,
    pub t_value: f64,
}

impl OptimalityReport {
    /// Is the design epsilon-T-optimal?
    pub fn is_eps_optimal(&self, eps: f64) -> bool {
        self.max_psi <= eps
    }
}

/// Combines a global scan result with the support values.
pub(crate) fn assemble(
    pair: &ModelPair,
    design: &Design,
    theta_hat: &[f64],
    t: f64,
    scan: (DesignPoint, f64),
) -> Result<OptimalityReport> {
    let support: Vec<DesignPoint> = design.support().map(|(x, _)| x.clone()).collect();
    let phi = squared_distances(pair, &support, theta_hat)?;
    let (mut worst, mut max_phi) = scan;
    let mut min_support = f64::INFINITY;
    for (x, &v) in support.iter().zip(&phi) {
        if v > max_phi {
            max_phi = v;
            worst = x.clone();
        }
        min_support = min_support.min(v);
    }
    Ok(OptimalityReport {
        max_psi: max_phi - t,
        min_support_gap: min_support - t,
        support_spread: max_phi - min_support,
        worst_point: worst,
        t_value: t,
    })
}

/// Scans the design space for the largest directional derivative of `design`.
/// `theta_hat` must be the fit for `design`.
pub fn check_optimality(
    pair: &ModelPair,
    design: &Design,
    theta_hat: &[f64],
    space: &DesignSpace,
    gcfg: &GlobalSearchConfig,
) -> Result<OptimalityReport> {
    space.check_design(design)?;
    let t = t_value(pair, design, theta_hat)?;
    let scan = maximize_distance(pair, theta_hat, space, gcfg)?;
    assemble(pair, design, theta_hat, t, scan)
}
