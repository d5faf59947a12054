//! Design algorithms: the cutting-plane engine, DISC-MD, 2-ADAPT-MD, the
//! vector direction method, and optimality verification.

mod blankenship_falk;
mod disc_md;
mod phi_table;
mod two_adapt;
mod vdm;
mod verify;

use std::time::Instant;

pub use blankenship_falk::{blankenship_falk, BfOutcome, LsipProblem};
pub use disc_md::{disc_md, disc_md_on_space, DiscMdResult};
pub use two_adapt::two_adapt_md;
pub use vdm::vdm;
pub use verify::{check_optimality, OptimalityReport};

use crate::design::{Design, DEFAULT_PRUNE_THRESHOLD};
use crate::error::{Error, Result};
use crate::lsq::FitConfig;

/// Step-length rule for the vector direction method.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VdmStep {
    /// `alpha_k = 1 / (k + 2)`.
    Harmonic,
    /// Golden-section search on `alpha` in `[0, 1]`, refitting at every trial.
    LineSearch,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgoParams {
    pub eps: f64,
    pub max_iter: usize,
    pub n_theta_starts: usize,
    pub lambda: f64,
    pub eps_sip: f64,
    pub max_iter_sip: usize,
    pub local_tol: f64,
    pub max_local_iters: usize,
    pub prune_threshold: f64,
    pub vdm_step: VdmStep,
}

impl Default for AlgoParams {
    fn default() -> Self {
        Self {
            eps: 1e-5,
            max_iter: 100,
            n_theta_starts: 9,
            lambda: 1e-8,
            eps_sip: 1e-5,
            max_iter_sip: 20,
            local_tol: 1e-10,
            max_local_iters: 200,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
            vdm_step: VdmStep::Harmonic,
        }
    }
}

impl AlgoParams {
    /// Defaults for the vector direction method: no regularizer, more iterations.
    pub fn vdm_defaults() -> Self {
        Self {
            max_iter: 1000,
            lambda: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps", self.eps),
            ("eps_sip", self.eps_sip),
            ("local_tol", self.local_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda = {} must be nonnegative", self.lambda)));
        }
        if !(0.0..1.0).contains(&self.prune_threshold) {
            return Err(Error::InvalidConfig(format!(
                "prune_threshold = {} must lie in [0, 1)",
                self.prune_threshold
            )));
        }
        for (name, v) in [
            ("max_iter", self.max_iter),
            ("max_iter_sip", self.max_iter_sip),
            ("max_local_iters", self.max_local_iters),
        ] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            n_starts: self.n_theta_starts,
            lambda: self.lambda,
            local_tol: self.local_tol,
            max_local_iters: self.max_local_iters,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecordKind {
    /// One pass of the outer loop (2-ADAPT-MD or VDM).
    Outer,
    /// One cutting-plane step inside DISC-MD.
    Inner,
}

impl RecordKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::Outer => "outer",
            RecordKind::Inner => "inner",
        }
    }
}

/// Wall-clock seconds spent per phase.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimes {
    pub lp: f64,
    pub ls: f64,
    pub global: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub kind: RecordKind,
    /// Outer iteration, counted from 1.
    pub iteration: usize,
    /// DISC-MD step within the outer iteration, counted from 1; 0 on outer records.
    pub inner: usize,
    /// `T(design, theta_hat)` after this step.
    pub t_value: f64,
    /// LP optimum, on inner records.
    pub t_lp: Option<f64>,
    /// Outer records: maximal directional derivative. Inner records: `t_lp - T`.
    pub accuracy: f64,
    pub n_theta: usize,
    pub n_candidates: usize,
    pub phase: PhaseTimes,
    /// Seconds since the solve started.
    pub elapsed: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub design: Design,
    pub theta_hat: Vec<f64>,
    pub t_value: f64,
    /// Maximal directional derivative over the design space at termination.
    pub accuracy: f64,
    pub min_support_gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the run stopped because no new candidate could be found.
    pub stall: Option<String>,
    pub history: Vec<IterationRecord>,
    pub runtime_seconds: f64,
}

impl SolveResult {
    pub fn outer_records(&self) -> impl Iterator<Item = &IterationRecord> {
        self.history.iter().filter(|r| r.kind == RecordKind::Outer)
    }
}

/// Times a closure, adding the elapsed seconds to `slot`.
pub(crate) fn timed<T>(slot: &mut f64, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    *slot += start.elapsed().as_secs_f64();
    out
}
