//! 2-ADAPT-MD: adaptive growth of both the candidate points and the
//! parameter cuts around DISC-MD.

use std::time::Instant;

use super::disc_md::run as run_disc_md;
use super::phi_table::PhiTable;
use super::verify::{assemble, OptimalityReport};
use super::{timed, AlgoParams, IterationRecord, PhaseTimes, RecordKind, SolveResult};
use crate::design::{canonical, Design, DesignPoint, DesignSpace};
use crate::error::{Error, Result};
use crate::global::{maximize_distance, GlobalSearchConfig};
use crate::lsq::fit_parameters;
use crate::model::ModelPair;

/// Computes a T-optimal design on `space`.
///
/// The run stops once every support point attains the global maximum of
/// `phi(., theta_hat)` to within `params.eps`, which also bounds the largest
/// directional derivative by `eps`. An empty `theta_disc0` starts the
/// parameter cuts from the fit at `initial`.
pub fn two_adapt_md(
    pair: &ModelPair,
    space: &DesignSpace,
    initial: &Design,
    theta_disc0: &[Vec<f64>],
    params: &AlgoParams,
    gcfg: &GlobalSearchConfig,
) -> Result<SolveResult> {
    params.validate()?;
    gcfg.validate()?;
    space.check_design(initial)?;
    let d_theta = pair.parameter_space().dim();
    if let Some(th) = theta_disc0.iter().find(|th| th.len() != d_theta) {
        return Err(Error::Dimension(format!(
            "parameter cut {th:?} has {} entries, expected {d_theta}",
            th.len()
        )));
    }
    let clock = Instant::now();
    let mut pending = PhaseTimes::default();

    let candidates: Vec<DesignPoint> = initial.support().map(|(x, _)| x.clone()).collect();
    let mut theta_disc = if theta_disc0.is_empty() {
        let fit = timed(&mut pending.ls, || fit_parameters(pair, initial, None, &params.fit_config()))?;
        vec![fit.theta_hat]
    } else {
        theta_disc0.to_vec()
    };
    let mut warm = theta_disc.last().expect("nonempty").clone();
    let mut table = PhiTable::new(pair, &candidates)?;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut last: Option<(Design, Vec<f64>, OptimalityReport)> = None;
    let mut converged = false;
    let mut stall = None;
    let mut iterations = 0;

    for n in 1..=params.max_iter {
        iterations = n;
        let cuts_before = theta_disc.clone();
        let disc = run_disc_md(&mut table, theta_disc, &warm, params, n, clock)
            .map_err(|e| with_inner_history(e, &history))?;
        history.extend(disc.history.iter().cloned());
        if !disc.converged {
            log::info!("DISC-MD hit its iteration limit in outer iteration {n}");
        }
        theta_disc = disc.theta_disc;
        let theta_hat = disc.fit.theta_hat.clone();
        warm = theta_hat.clone();

        let mut phase = disc.phase;
        phase.ls += pending.ls;
        pending = PhaseTimes::default();
        let scan = timed(&mut phase.global, || maximize_distance(pair, &theta_hat, space, gcfg))
            .map_err(|e| e.aborted(&history))?;
        let new_point = scan.0.clone();
        let report = assemble(pair, &disc.design, &theta_hat, disc.t_value, scan)
            .map_err(|e| e.aborted(&history))?;

        history.push(IterationRecord {
            kind: RecordKind::Outer,
            iteration: n,
            inner: 0,
            t_value: disc.t_value,
            t_lp: Some(disc.t_lp),
            accuracy: report.max_psi,
            n_theta: theta_disc.len(),
            n_candidates: table.candidates().len(),
            phase,
            elapsed: clock.elapsed().as_secs_f64(),
        });
        log::info!(
            "2-ADAPT-MD iteration {n}: T = {:.8e}, max psi = {:.3e}, spread = {:.3e}, {} candidates, {} cuts",
            disc.t_value,
            report.max_psi,
            report.support_spread,
            table.candidates().len(),
            theta_disc.len()
        );
        let done = report.support_spread <= params.eps;
        last = Some((disc.design, theta_hat, report));
        if done {
            converged = true;
            break;
        }
        if table.contains(&new_point) {
            // The candidates are complete at this resolution; keep tightening
            // the parameter cuts unless those have stopped growing too.
            if cuts_before.iter().any(|th| same_theta(th, &last.as_ref().expect("set above").1)) {
                let msg = format!(
                    "new point {new_point} is already a candidate and the fitted parameters are already a cut"
                );
                log::warn!("{msg}");
                stall = Some(msg);
                break;
            }
            log::debug!("point {new_point} already a candidate; refining parameter cuts");
            continue;
        }
        table.add_candidate(new_point).map_err(|e| e.aborted(&history))?;
    }

    let (design, theta_hat, report) = last.expect("at least one iteration");
    Ok(SolveResult {
        t_value: report.t_value,
        accuracy: report.max_psi,
        min_support_gap: report.min_support_gap,
        design,
        theta_hat,
        iterations,
        converged,
        stall,
        history,
        runtime_seconds: clock.elapsed().as_secs_f64(),
    })
}

fn same_theta(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| canonical(*x) == canonical(*y))
}

/// Prepends the outer history to an error that already carries DISC-MD steps.
fn with_inner_history(e: Error, outer: &[IterationRecord]) -> Error {
    match e {
        Error::Aborted { source, history } => {
            let mut all = outer.to_vec();
            all.extend(history);
            Error::Aborted { source, history: all }
        }
        other => other.aborted(outer),
    }
}
