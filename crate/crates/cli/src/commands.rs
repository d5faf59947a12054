//! The `solve`, `verify` and `compare` subcommands.

use std::path::{Path, PathBuf};

use discrim_core::{
    check_optimality, disc_md_on_space, fit_parameters, two_adapt_md, vdm, OptimalityReport,
    SolveResult,
};
use log::{info, warn};

use crate::config::{self, Algorithm, Problem};
use crate::error::{CliError, CliResult};
use crate::output::{
    self, ComparisonRow, DesignFile, COMPARISON_FILE, DESIGN_FILE, HISTORY_FILE, PSI_FILE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Runs one algorithm on a loaded problem without touching the filesystem.
pub fn run_algorithm(problem: &Problem, algorithm: Algorithm) -> CliResult<SolveResult> {
    let params = problem.params(algorithm)?;
    let gcfg = problem.global_search()?;
    let (pair, space, initial) = (&problem.pair, &problem.space, &problem.initial);
    let result = match algorithm {
        Algorithm::TwoAdapt => two_adapt_md(pair, space, initial, &[], &params, &gcfg)?,
        Algorithm::Disc => disc_md_on_space(pair, space, initial, &params, &gcfg)?,
        Algorithm::Vdm => vdm(pair, space, initial, &params, &gcfg)?,
    };
    Ok(result)
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub result: SolveResult,
    pub algorithm: Algorithm,
    pub out_dir: PathBuf,
}

impl SolveOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.result.converged {
            EXIT_OK
        } else {
            EXIT_NOT_CONVERGED
        }
    }
}

fn output_dir(problem: &Problem, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| problem.output.directory.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Solves and writes the result files. On a solver error the partial history
/// is still written before the error is returned.
pub fn solve_problem(problem: &Problem, algorithm: Algorithm, dir: &Path) -> CliResult<SolveResult> {
    output::ensure_dir(dir)?;
    info!("solving {} with {}", problem.model_name, algorithm.name());
    let result = match run_algorithm(problem, algorithm) {
        Ok(r) => r,
        Err(e) => {
            if let Some(history) = e.history() {
                if let Err(w) = output::write_history(&dir.join(HISTORY_FILE), history) {
                    warn!("could not flush history: {w}");
                }
            }
            return Err(e);
        }
    };
    DesignFile::from_result(&result, algorithm.name(), &problem.model_name)
        .write(&dir.join(DESIGN_FILE))?;
    output::write_history(&dir.join(HISTORY_FILE), &result.history)?;
    if problem.output.emit_psi_curve {
        match output::psi_curve(
            &problem.pair,
            &problem.space,
            &result.theta_hat,
            result.t_value,
            problem.output.psi_grid,
        )? {
            Some(curve) => output::write_psi_curve(&dir.join(PSI_FILE), &curve)?,
            None => warn!("psi curve is only emitted for one-dimensional box spaces"),
        }
    }
    Ok(result)
}

pub fn cmd_solve(config: &Path, algorithm: Option<&str>, out: Option<&Path>) -> CliResult<SolveOutcome> {
    let problem = config::load(config)?;
    let algorithm = match algorithm {
        Some(name) => name.parse()?,
        None => problem.algorithm,
    };
    let out_dir = output_dir(&problem, out);
    let result = solve_problem(&problem, algorithm, &out_dir)?;
    Ok(SolveOutcome { result, algorithm, out_dir })
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub report: OptimalityReport,
    pub theta_hat: Vec<f64>,
    pub eps: f64,
}

impl VerifyOutcome {
    pub fn optimal(&self) -> bool {
        self.report.is_eps_optimal(self.eps)
    }

    pub fn exit_code(&self) -> i32 {
        if self.optimal() {
            EXIT_OK
        } else {
            EXIT_NOT_CONVERGED
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "t_value: {}\ntheta_hat: {:?}\nmax_psi: {:e}\nmin_support_gap: {:e}\nworst_point: {}\neps: {:e}\neps-T-optimal: {}\n",
            self.report.t_value,
            self.theta_hat,
            self.report.max_psi,
            self.report.min_support_gap,
            self.report.worst_point,
            self.eps,
            if self.optimal() { "yes" } else { "no" },
        )
    }
}

/// Refits the rival model to the design (warm-started from the file's
/// `theta_hat` when its length fits) and scans for the largest `psi`.
pub fn verify_design(problem: &Problem, file: &DesignFile) -> CliResult<VerifyOutcome> {
    let design = file.design()?;
    if design.dim() != problem.space.dim() {
        return Err(CliError::field(
            "support",
            format!(
                "design points have {} coordinates, the design space has {}",
                design.dim(),
                problem.space.dim()
            ),
        ));
    }
    let params = problem.params(problem.algorithm)?;
    let gcfg = problem.global_search()?;
    let warm = (file.theta_hat.len() == problem.pair.parameter_space().dim()).then_some(file.theta_hat.as_slice());
    let fit = fit_parameters(&problem.pair, &design, warm, &params.fit_config())?;
    let report = check_optimality(&problem.pair, &design, &fit.theta_hat, &problem.space, &gcfg)?;
    Ok(VerifyOutcome {
        report,
        theta_hat: fit.theta_hat,
        eps: params.eps,
    })
}

pub fn cmd_verify(design: &Path, config: &Path) -> CliResult<VerifyOutcome> {
    let problem = config::load(config)?;
    let file = DesignFile::read(design)?;
    verify_design(&problem, &file)
}

pub fn parse_algorithms(list: &str) -> CliResult<Vec<Algorithm>> {
    let names: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(CliError::NoAlgorithms);
    }
    names.into_iter().map(str::parse).collect()
}

/// Runs each algorithm into `out/<name>/` and writes `out/comparison.csv`.
pub fn cmd_compare(config: &Path, algorithms: &[Algorithm], out: &Path) -> CliResult<Vec<ComparisonRow>> {
    if algorithms.is_empty() {
        return Err(CliError::NoAlgorithms);
    }
    let problem = config::load(config)?;
    output::ensure_dir(out)?;
    let mut rows = Vec::with_capacity(algorithms.len());
    for &alg in algorithms {
        let result = solve_problem(&problem, alg, &out.join(alg.name()))?;
        rows.push(ComparisonRow {
            algorithm: alg.name().to_string(),
            reached_accuracy: result.accuracy,
            t_value: result.t_value,
            runtime_seconds: result.runtime_seconds,
            iterations: result.iterations,
            support_size: result.design.support_size(),
        });
    }
    output::write_comparison(&out.join(COMPARISON_FILE), &rows)?;
    Ok(rows)
}
