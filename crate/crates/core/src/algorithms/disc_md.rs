//! DISC-MD: optimal weights on a fixed candidate set.
//!
//! This is the cutting-plane engine with the weight LP as master problem and
//! the weighted least-squares fit as lower level. Parameter cuts accumulate
//! and can be passed on to later calls.

use std::time::Instant;

use super::blankenship_falk::{blankenship_falk, LsipProblem};
use super::phi_table::PhiTable;
use super::verify::check_optimality;
use super::{timed, AlgoParams, IterationRecord, PhaseTimes, RecordKind, SolveResult};
use crate::criterion::t_value;
use crate::design::{prune_design, Design, DesignPoint, DesignSpace};
use crate::global::{box_grid, GlobalSearchConfig};
use crate::error::{Error, Result};
use crate::lp::solve_weight_lp_strict;
use crate::lsq::{fit_parameters, FitConfig, FitResult};
use crate::model::ModelPair;

#[derive(Clone, Debug)]
pub struct DiscMdResult {
    /// Optimal weights over the candidates, pruned.
    pub design: Design,
    /// Parameter cuts, grown by this run.
    pub theta_disc: Vec<Vec<f64>>,
    /// Fit at the final weights (all candidates, before pruning).
    pub fit: FitResult,
    /// `T(design, fit.theta_hat)` of the pruned design.
    pub t_value: f64,
    /// Final LP optimum.
    pub t_lp: f64,
    pub converged: bool,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
    pub phase: PhaseTimes,
}

struct Problem<'t, 'a> {
    table: &'t mut PhiTable<'a>,
    cfg: FitConfig,
    warm: Vec<f64>,
    last_fit: Option<FitResult>,
    iteration: usize,
    clock: Instant,
    phase: PhaseTimes,
    history: Vec<IterationRecord>,
    prev_t_lp: f64,
}

impl LsipProblem for Problem<'_, '_> {
    type Decision = (Vec<f64>, f64);
    type Index = Vec<f64>;

    fn solve_upper(&mut self, thetas: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
        let table = &mut *self.table;
        let sol = timed(&mut self.phase.lp, || -> Result<_> {
            table.sync_thetas(thetas)?;
            solve_weight_lp_strict(&table.lp_instance()?)
        })?;
        if sol.t > self.prev_t_lp + 1e-10 * self.prev_t_lp.abs().max(1.0) {
            log::warn!("LP value increased from {} to {}", self.prev_t_lp, sol.t);
        }
        self.prev_t_lp = sol.t;
        Ok((sol.weights, sol.t))
    }

    fn solve_lower(&mut self, (weights, t_lp): &(Vec<f64>, f64)) -> Result<(Vec<f64>, f64)> {
        let design = Design::normalized(self.table.candidates().to_vec(), weights.clone())?;
        let pair = self.table.pair();
        let (cfg, warm) = (&self.cfg, &self.warm);
        let fit = timed(&mut self.phase.ls, || fit_parameters(pair, &design, Some(warm), cfg))?;
        let gap = fit.objective - t_lp;
        self.history.push(IterationRecord {
            kind: RecordKind::Inner,
            iteration: self.iteration,
            inner: self.history.len() + 1,
            t_value: fit.objective,
            t_lp: Some(*t_lp),
            accuracy: -gap,
            n_theta: self.table.thetas().len(),
            n_candidates: self.table.candidates().len(),
            phase: self.phase,
            elapsed: self.clock.elapsed().as_secs_f64(),
        });
        log::debug!(
            "DISC-MD step {}: t_lp = {t_lp:.6e}, T = {:.6e}, theta = {:?}",
            self.history.len(),
            fit.objective,
            fit.theta_hat
        );
        self.warm = fit.theta_hat.clone();
        let theta = fit.theta_hat.clone();
        self.last_fit = Some(fit);
        Ok((theta, gap))
    }
}

/// Runs DISC-MD on the candidates held by `table`, starting from the cuts in
/// `theta_disc` and warm-starting fits at `warm`.
pub(crate) fn run(
    table: &mut PhiTable<'_>,
    theta_disc: Vec<Vec<f64>>,
    warm: &[f64],
    params: &AlgoParams,
    iteration: usize,
    clock: Instant,
) -> Result<DiscMdResult> {
    let pair = table.pair();
    let mut problem = Problem {
        table,
        cfg: params.fit_config(),
        warm: warm.to_vec(),
        last_fit: None,
        iteration,
        clock,
        phase: PhaseTimes::default(),
        history: Vec::new(),
        prev_t_lp: f64::INFINITY,
    };
    let outcome = blankenship_falk(&mut problem, theta_disc, params.eps_sip, params.max_iter_sip);
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => return Err(e.aborted(&problem.history)),
    };
    let fit = problem.last_fit.take().expect("at least one lower-level solve");
    let (weights, t_lp) = outcome.decision;
    let full = Design::normalized(problem.table.candidates().to_vec(), weights)?;
    let design = prune_design(&full, params.prune_threshold);
    let t = t_value(pair, &design, &fit.theta_hat).map_err(|e| e.aborted(&problem.history))?;
    Ok(DiscMdResult {
        design,
        theta_disc: outcome.indices,
        fit,
        t_value: t,
        t_lp,
        converged: outcome.converged,
        iterations: outcome.iterations,
        history: problem.history,
        phase: problem.phase,
    })
}

/// Optimal weights on `candidates`.
///
/// `initial` must be supported on the candidates. When `theta_disc` is empty
/// the cuts start from the fit at `initial`.
pub fn disc_md(
    pair: &ModelPair,
    candidates: &[DesignPoint],
    initial: &Design,
    theta_disc: &[Vec<f64>],
    params: &AlgoParams,
) -> Result<DiscMdResult> {
    params.validate()?;
    let clock = Instant::now();
    let mut table = PhiTable::new(pair, candidates)?;
    if let Some((x, _)) = initial.support().find(|(x, _)| !table.contains(x)) {
        return Err(Error::InvalidDesign(format!(
            "initial design point {x} is not a candidate"
        )));
    }
    let d_theta = pair.parameter_space().dim();
    if let Some(th) = theta_disc.iter().find(|th| th.len() != d_theta) {
        return Err(Error::Dimension(format!(
            "parameter cut {th:?} has {} entries, expected {d_theta}",
            th.len()
        )));
    }
    let theta_disc = if theta_disc.is_empty() {
        vec![fit_parameters(pair, initial, None, &params.fit_config())?.theta_hat]
    } else {
        theta_disc.to_vec()
    };
    let warm = theta_disc.last().expect("nonempty").clone();
    run(&mut table, theta_disc, &warm, params, 1, clock)
}

/// DISC-MD over candidates drawn from `space`: every lattice point, or the
/// search grid of a box together with the support of `initial`. The result's
/// accuracy is the largest directional derivative over the whole space.
pub fn disc_md_on_space(
    pair: &ModelPair,
    space: &DesignSpace,
    initial: &Design,
    params: &AlgoParams,
    gcfg: &GlobalSearchConfig,
) -> Result<SolveResult> {
    params.validate()?;
    gcfg.validate()?;
    space.check_design(initial)?;
    let clock = Instant::now();
    let mut candidates: Vec<DesignPoint> = match space {
        DesignSpace::Lattice { .. } => space.lattice_points(),
        DesignSpace::Box { lower, upper } => box_grid(lower, upper, gcfg.grid_per_dim)
            .into_iter()
            .map(DesignPoint::new)
            .collect::<Result<_>>()?,
    };
    for (x, _) in initial.support() {
        if !candidates.iter().any(|c| c.same_as(x)) {
            candidates.push(x.clone());
        }
    }
    let mut phase = PhaseTimes::default();
    let cfg = params.fit_config();
    let theta0 = timed(&mut phase.ls, || fit_parameters(pair, initial, None, &cfg))?.theta_hat;
    let mut table = PhiTable::new(pair, &candidates)?;
    let disc = run(&mut table, vec![theta0.clone()], &theta0, params, 1, clock)?;
    let mut history = disc.history.clone();
    let report = timed(&mut phase.global, || {
        check_optimality(pair, &disc.design, &disc.fit.theta_hat, space, gcfg)
    })
    .map_err(|e| e.aborted(&history))?;
    phase.lp += disc.phase.lp;
    phase.ls += disc.phase.ls;
    history.push(IterationRecord {
        kind: RecordKind::Outer,
        iteration: 1,
        inner: 0,
        t_value: disc.t_value,
        t_lp: Some(disc.t_lp),
        accuracy: report.max_psi,
        n_theta: disc.theta_disc.len(),
        n_candidates: candidates.len(),
        phase,
        elapsed: clock.elapsed().as_secs_f64(),
    });
    Ok(SolveResult {
        design: disc.design,
        theta_hat: disc.fit.theta_hat,
        t_value: disc.t_value,
        accuracy: report.max_psi,
        min_support_gap: report.min_support_gap,
        iterations: disc.iterations,
        converged: disc.converged,
        stall: None,
        history,
        runtime_seconds: clock.elapsed().as_secs_f64(),
    })
}
