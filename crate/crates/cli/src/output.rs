//! Result files: `design.json`, `history.csv`, `psi_curve.csv`, `comparison.csv`.

use std::fs;
use std::path::Path;

use discrim_core::{
    Design, DesignPoint, DesignSpace, IterationRecord, ModelPair, SolveResult,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DESIGN_FILE: &str = "design.json";
pub const HISTORY_FILE: &str = "history.csv";
pub const PSI_FILE: &str = "psi_curve.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DesignFile {
    /// Support points, one coordinate vector each.
    pub support: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub theta_hat: Vec<f64>,
    pub t_value: f64,
    pub accuracy: f64,
    pub iterations: usize,
    pub runtime_seconds: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_support_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stall: Option<String>,
}

impl DesignFile {
    pub fn from_result(result: &SolveResult, algorithm: &str, model: &str) -> Self {
        let (support, weights) = result
            .design
            .support()
            .map(|(p, w)| (p.coords().to_vec(), w))
            .unzip();
        Self {
            support,
            weights,
            theta_hat: result.theta_hat.clone(),
            t_value: result.t_value,
            accuracy: result.accuracy,
            iterations: result.iterations,
            runtime_seconds: result.runtime_seconds,
            converged: result.converged,
            algorithm: Some(algorithm.to_string()),
            model: Some(model.to_string()),
            min_support_gap: Some(result.min_support_gap),
            stall: result.stall.clone(),
        }
    }

    pub fn design(&self) -> CliResult<Design> {
        if self.support.len() != self.weights.len() {
            return Err(CliError::field(
                "weights",
                format!("{} weights for {} support points", self.weights.len(), self.support.len()),
            ));
        }
        let points = self
            .support
            .iter()
            .enumerate()
            .map(|(i, c)| {
                DesignPoint::new(c.clone()).map_err(|e| CliError::field(format!("support[{i}]"), e.to_string()))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Design::normalized(points, self.weights.clone()).map_err(|e| CliError::field("weights", e.to_string()))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

/// Shortest representation that reads back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_history(path: &Path, history: &[IterationRecord]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "kind",
        "iteration",
        "inner",
        "t_value",
        "t_lp",
        "accuracy",
        "n_theta",
        "n_candidates",
        "lp_seconds",
        "ls_seconds",
        "global_seconds",
        "elapsed_seconds",
    ])?;
    for r in history {
        w.write_record([
            r.kind.as_str().to_string(),
            r.iteration.to_string(),
            r.inner.to_string(),
            num(r.t_value),
            opt(r.t_lp),
            num(r.accuracy),
            r.n_theta.to_string(),
            r.n_candidates.to_string(),
            num(r.phase.lp),
            num(r.phase.ls),
            num(r.phase.global),
            num(r.elapsed),
        ])?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// `psi(x) = phi(x, theta_hat) - T` on an even grid of a one-dimensional box.
/// Returns `None` for other spaces.
pub fn psi_curve(
    pair: &ModelPair,
    space: &DesignSpace,
    theta_hat: &[f64],
    t_value: f64,
    n: usize,
) -> CliResult<Option<Vec<(f64, f64)>>> {
    let (lo, hi) = match space {
        DesignSpace::Box { lower, upper } if lower.len() == 1 => (lower[0], upper[0]),
        _ => return Ok(None),
    };
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let x = if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
            let phi = pair.squared_distance(&DesignPoint::scalar(x), theta_hat)?;
            Ok((x, phi - t_value))
        })
        .collect::<CliResult<Vec<_>>>()
        .map(Some)
}

pub fn write_psi_curve(path: &Path, curve: &[(f64, f64)]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["x", "psi"])?;
    for (x, psi) in curve {
        w.write_record([num(*x), num(*psi)])?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComparisonRow {
    pub algorithm: String,
    pub reached_accuracy: f64,
    pub t_value: f64,
    pub runtime_seconds: f64,
    pub iterations: usize,
    pub support_size: usize,
}

pub fn write_comparison(path: &Path, rows: &[ComparisonRow]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(["algorithm", "reached_accuracy", "t_value", "runtime_seconds", "iterations", "support_size"])?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_comparison(path: &Path) -> CliResult<Vec<ComparisonRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<_>, _>>()?)
}
