//! Vector direction method: repeatedly shift mass towards the point of
//! steepest ascent of the criterion.

use std::time::Instant;

use super::verify::assemble;
use super::{timed, AlgoParams, IterationRecord, PhaseTimes, RecordKind, SolveResult, VdmStep};
use crate::criterion::t_value;
use crate::design::{mix_designs, prune_design, Design, DesignSpace};
use crate::error::Result;
use crate::global::{maximize_distance, GlobalSearchConfig};
use crate::lsq::{fit_parameters, FitConfig, FitResult};
use crate::model::ModelPair;

const GOLDEN: f64 = 0.618_033_988_749_894_8;
const LINE_SEARCH_TOL: f64 = 1e-4;

/// Stops once the largest directional derivative is at most `params.eps`.
/// Use [`AlgoParams::vdm_defaults`] for the customary settings.
pub fn vdm(
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
    let cfg = params.fit_config();
    let mut design = prune_design(initial, 0.0);
    let mut warm: Option<Vec<f64>> = None;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut last = None;

    for k in 0..params.max_iter {
        iterations = k + 1;
        let mut phase = PhaseTimes::default();
        let fit = timed(&mut phase.ls, || fit_parameters(pair, &design, warm.as_deref(), &cfg))
            .map_err(|e| e.aborted(&history))?;
        let theta = fit.theta_hat.clone();
        let t = t_value(pair, &design, &theta).map_err(|e| e.aborted(&history))?;
        let scan = timed(&mut phase.global, || maximize_distance(pair, &theta, space, gcfg))
            .map_err(|e| e.aborted(&history))?;
        let x_star = scan.0.clone();
        let report = assemble(pair, &design, &theta, t, scan).map_err(|e| e.aborted(&history))?;
        history.push(IterationRecord {
            kind: RecordKind::Outer,
            iteration: k + 1,
            inner: 0,
            t_value: t,
            t_lp: None,
            accuracy: report.max_psi,
            n_theta: 1,
            n_candidates: design.len(),
            phase,
            elapsed: clock.elapsed().as_secs_f64(),
        });
        log::debug!("VDM iteration {}: T = {t:.8e}, max psi = {:.3e}", k + 1, report.max_psi);
        warm = Some(theta.clone());
        let done = report.max_psi <= params.eps;
        last = Some((design.clone(), theta, report));
        if done {
            converged = true;
            break;
        }
        let target = Design::point_mass(x_star);
        let alpha = match params.vdm_step {
            VdmStep::Harmonic => 1.0 / (k as f64 + 2.0),
            VdmStep::LineSearch => line_search(pair, &design, &target, &fit, &cfg)
                .map_err(|e| e.aborted(&history))?,
        };
        design = mix_designs(&design, &target, alpha)?;
    }

    let (design, theta_hat, report) = last.expect("at least one iteration");
    let pruned = prune_design(&design, params.prune_threshold);
    let (t, report) = if pruned.len() == design.len() {
        (report.t_value, report)
    } else {
        let t = t_value(pair, &pruned, &theta_hat)?;
        let scan = (report.worst_point.clone(), report.max_psi + report.t_value);
        (t, assemble(pair, &pruned, &theta_hat, t, scan)?)
    };
    Ok(SolveResult {
        design: pruned,
        theta_hat,
        t_value: t,
        accuracy: report.max_psi,
        min_support_gap: report.min_support_gap,
        iterations,
        converged,
        stall: None,
        history,
        runtime_seconds: clock.elapsed().as_secs_f64(),
    })
}

/// Golden-section search for the step maximizing the refitted criterion.
fn line_search(
    pair: &ModelPair,
    design: &Design,
    target: &Design,
    fit: &FitResult,
    cfg: &FitConfig,
) -> Result<f64> {
    let value = |alpha: f64| -> Result<f64> {
        let mixed = mix_designs(design, target, alpha)?;
        Ok(fit_parameters(pair, &mixed, Some(&fit.theta_hat), cfg)?.objective)
    };
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = value(c)?;
    let mut fd = value(d)?;
    while b - a > LINE_SEARCH_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = value(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = value(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{DesignPoint, ParameterSpace};

    fn linear_vs_constant() -> ModelPair {
        ModelPair::scalar(
            |x: &[f64], _: &[f64]| x[0],
            vec![],
            |_: &[f64], p: &[f64]| p[0],
            ParameterSpace::new(vec![0.0], vec![1.0]).unwrap(),
        )
    }

    #[test]
    fn identical_models_stop_immediately() {
        let pair = ModelPair::scalar(
            |x: &[f64], _: &[f64]| 2.0 * x[0],
            vec![],
            |x: &[f64], p: &[f64]| p[0] * x[0],
            ParameterSpace::new(vec![0.0], vec![3.0]).unwrap(),
        );
        let space = DesignSpace::new_box(vec![0.0], vec![1.0]).unwrap();
        let init = Design::point_mass(DesignPoint::scalar(0.5));
        let res = vdm(&pair, &space, &init, &AlgoParams::vdm_defaults(), &GlobalSearchConfig::default()).unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        assert!(res.t_value < 1e-20);
    }

    #[test]
    fn linear_vs_constant_approaches_optimum() {
        let space = DesignSpace::new_box(vec![0.0], vec![1.0]).unwrap();
        let init = Design::point_mass(DesignPoint::scalar(0.5));
        let params = AlgoParams { eps: 1e-3, ..AlgoParams::vdm_defaults() };
        let res = vdm(&linear_vs_constant(), &space, &init, &params, &GlobalSearchConfig::default()).unwrap();
        assert!(res.converged, "{:?}", res.history.last());
        assert!((res.t_value - 0.25).abs() < 1e-3);
        let w0: f64 = res.design.iter().filter(|(x, _)| x.coords()[0] == 0.0).map(|(_, w)| w).sum();
        let w1: f64 = res.design.iter().filter(|(x, _)| x.coords()[0] == 1.0).map(|(_, w)| w).sum();
        assert!((w0 - 0.5).abs() < 0.05 && (w1 - 0.5).abs() < 0.05, "{}", res.design);
    }

    #[test]
    fn line_search_step() {
        let space = DesignSpace::new_box(vec![0.0], vec![1.0]).unwrap();
        let init = Design::point_mass(DesignPoint::scalar(0.5));
        let gcfg = GlobalSearchConfig::default();
        let params = AlgoParams { eps: 1e-3, vdm_step: VdmStep::LineSearch, ..AlgoParams::vdm_defaults() };
        let res = vdm(&linear_vs_constant(), &space, &init, &params, &gcfg).unwrap();
        assert!(res.converged, "{:?}", res.history.last());
        assert!((res.t_value - 0.25).abs() < 1e-3);

    }
}
