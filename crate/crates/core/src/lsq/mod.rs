//! Weighted least-squares fit of the alternative model, the lower-level
//! problem of the weight LP.
//!
//! The objective is `sum_i (w_i + lambda) * phi(x_i, theta)` over every point
//! of the design, including zero-weight candidates; `lambda` keeps the fit
//! well posed when the weights concentrate on too few points. Starts are the
//! warm start (if any) followed by Sobol points in the parameter box; the best
//! regularized objective wins, lowest start index on ties.

pub mod trust_region;

use rayon::prelude::*;

use crate::criterion::weighted_sum;
use crate::design::Design;
use crate::error::{Error, Result};
use crate::model::ModelPair;
use crate::sobol::sobol_points;

pub use trust_region::{LocalOptions, LocalOutcome};

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    /// Sobol starts in addition to the warm start.
    pub n_starts: usize,
    pub lambda: f64,
    pub local_tol: f64,
    pub max_local_iters: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_starts: 9,
            lambda: 1e-8,
            local_tol: 1e-10,
            max_local_iters: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub theta_hat: Vec<f64>,
    /// Unregularized `T(design, theta_hat)`.
    pub objective: f64,
    pub regularized_objective: f64,
    /// Index into `[warm start, sobol...]` of the winning start.
    pub start_index: usize,
    /// Starts abandoned because the model failed to evaluate.
    pub skipped: Vec<(usize, String)>,
}

struct Residuals<'a> {
    pair: &'a ModelPair,
    design: &'a Design,
    /// Per-point `(index, sqrt(w + lambda), f1(x))` for points that contribute.
    rows: Vec<(usize, f64, Vec<f64>)>,
}

impl Residuals<'_> {
    fn eval(&self, theta: &[f64], out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        let dim = self.pair.response_dim();
        let mut alt = vec![0.0; dim];
        for (i, scale, reference) in &self.rows {
            self.pair
                .alternative_into(self.design.points()[*i].coords(), theta, &mut alt)?;
            out.extend(reference.iter().zip(&alt).map(|(a, b)| scale * (a - b)));
        }
        Ok(())
    }
}

fn check_config(cfg: &FitConfig) -> Result<()> {
    if !(cfg.lambda >= 0.0) || !cfg.lambda.is_finite() {
        return Err(Error::InvalidConfig(format!("lambda = {} must be >= 0", cfg.lambda)));
    }
    if !(cfg.local_tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "local_tol = {} must be positive",
            cfg.local_tol
        )));
    }
    Ok(())
}

pub fn fit_parameters(
    pair: &ModelPair,
    design: &Design,
    warm_start: Option<&[f64]>,
    cfg: &FitConfig,
) -> Result<FitResult> {
    check_config(cfg)?;
    let space = pair.parameter_space();
    if let Some(ws) = warm_start {
        if ws.len() != space.dim() {
            return Err(Error::Dimension(format!(
                "warm start has {} entries, parameter space has {}",
                ws.len(),
                space.dim()
            )));
        }
    }

    let rows = design
        .weights()
        .par_iter()
        .enumerate()
        .filter(|(_, w)| **w + cfg.lambda > 0.0)
        .map(|(i, w)| Ok((i, (w + cfg.lambda).sqrt(), pair.reference(&design.points()[i])?)))
        .collect::<Result<Vec<_>>>()?;
    let residuals = Residuals { pair, design, rows };

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(cfg.n_starts + 1);
    if let Some(ws) = warm_start {
        let mut ws = ws.to_vec();
        space.clamp(&mut ws);
        starts.push(ws);
    }
    let offset = usize::from(warm_start.is_none());
    starts.extend(sobol_points(space.dim(), cfg.n_starts, space)?);

    let opts = LocalOptions {
        gtol: cfg.local_tol,
        xtol: cfg.local_tol,
        max_iters: cfg.max_local_iters,
    };
    let f = |theta: &[f64], out: &mut Vec<f64>| residuals.eval(theta, out);
    let outcomes: Vec<Result<LocalOutcome>> = starts
        .par_iter()
        .map(|s| trust_region::minimize(&f, s, space.lower(), space.upper(), opts))
        .collect();

    let mut skipped = Vec::new();
    let mut best: Option<(usize, LocalOutcome)> = None;
    let mut best_partial: Option<LocalOutcome> = None;
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let index = i + offset;
        match outcome {
            Err(e) => {
                log::debug!("least-squares start {index} skipped: {e}");
                skipped.push((index, e.to_string()));
            }
            Ok(o) if !o.converged => {
                if best_partial.as_ref().is_none_or(|b| o.cost < b.cost) {
                    best_partial = Some(o);
                }
            }
            Ok(o) => {
                if best.as_ref().is_none_or(|(_, b)| o.cost < b.cost) {
                    best = Some((index, o));
                }
            }
        }
    }

    let Some((start_index, outcome)) = best else {
        return Err(Error::FitFailed {
            reason: if best_partial.is_some() {
                "no start converged".into()
            } else {
                format!("all {} starts failed to evaluate", skipped.len())
            },
            best: best_partial.map(|o| o.x),
        });
    };

    let objective = design_objective(pair, design, &residuals.rows, &outcome.x)?;
    Ok(FitResult {
        theta_hat: outcome.x,
        objective,
        regularized_objective: outcome.cost,
        start_index,
        skipped,
    })
}

/// `sum_i w_i phi(x_i, theta)`, summed in design order so it matches
/// [`crate::criterion::t_value`] bit for bit.
fn design_objective(
    pair: &ModelPair,
    design: &Design,
    rows: &[(usize, f64, Vec<f64>)],
    theta: &[f64],
) -> Result<f64> {
    let mut phi = vec![0.0; design.len()];
    for (i, _, reference) in rows {
        if design.weights()[*i] > 0.0 {
            phi[*i] = pair.squared_distance_to(reference, &design.points()[*i], theta)?;
        }
    }
    Ok(weighted_sum(design.weights(), &phi))
}
