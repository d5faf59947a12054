//! Problem configuration files (TOML).
//!
//! ```toml
//! [model]
//! name = "mm_vs_modmm"
//! reference_params = { V = 1.0, K = 1.0, F = 0.1 }
//! # parameter_space = { lower = [0.001, 0.001], upper = [5.0, 5.0] }
//!
//! [design_space]
//! type = "box"            # or "lattice" with `levels = [[...], ...]`
//! lower = [0.001]
//! upper = [5.0]
//!
//! [initial_design]
//! points = [1.0, 2.0, 3.0, 4.0]   # scalars for 1-D spaces, arrays otherwise
//! weights = [0.25, 0.25, 0.25, 0.25]
//!
//! [algorithm]
//! name = "2adapt"         # 2adapt | disc | vdm
//! eps = 1e-5
//! [algorithm.global_search]
//! grid_per_dim = 64
//!
//! [output]
//! directory = "out/mm"
//! emit_psi_curve = true
//! psi_grid = 501
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use discrim_core::{
    AlgoParams, Design, DesignPoint, DesignSpace, GlobalSearchConfig, ModelPair, ParameterSpace,
    Registry, VdmStep,
};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Tolerance on the initial weight sum before renormalizing.
pub const WEIGHT_SUM_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub model: ModelSection,
    pub design_space: DesignSpaceSection,
    pub initial_design: InitialDesignSection,
    #[serde(default)]
    pub algorithm: AlgorithmSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub name: String,
    #[serde(default)]
    pub reference_params: BTreeMap<String, f64>,
    pub parameter_space: Option<BoundsSection>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DesignSpaceSection {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Lattice { levels: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl PointSpec {
    pub fn coords(&self) -> Vec<f64> {
        match self {
            PointSpec::Scalar(v) => vec![*v],
            PointSpec::Vector(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDesignSection {
    pub points: Vec<PointSpec>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    TwoAdapt,
    Disc,
    Vdm,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::TwoAdapt => "2adapt",
            Algorithm::Disc => "disc",
            Algorithm::Vdm => "vdm",
        }
    }
}

impl FromStr for Algorithm {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim() {
            "2adapt" => Ok(Algorithm::TwoAdapt),
            "disc" => Ok(Algorithm::Disc),
            "vdm" => Ok(Algorithm::Vdm),
            other => Err(CliError::UnknownAlgorithm(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSection {
    pub name: Option<String>,
    pub eps: Option<f64>,
    pub max_iter: Option<usize>,
    pub n_theta_starts: Option<usize>,
    pub lambda: Option<f64>,
    pub eps_sip: Option<f64>,
    pub max_iter_sip: Option<usize>,
    pub local_tol: Option<f64>,
    pub max_local_iters: Option<usize>,
    pub prune_threshold: Option<f64>,
    /// `harmonic` or `line_search`.
    pub vdm_step: Option<String>,
    #[serde(default)]
    pub global_search: GlobalSearchSection,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalSearchSection {
    pub grid_per_dim: Option<usize>,
    pub refine_top: Option<usize>,
    pub local_tol: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
    #[serde(default)]
    pub emit_psi_curve: bool,
    #[serde(default = "default_psi_grid")]
    pub psi_grid: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: None,
            emit_psi_curve: false,
            psi_grid: default_psi_grid(),
        }
    }
}

fn default_psi_grid() -> usize {
    501
}

/// A validated problem ready to hand to the solvers.
#[derive(Clone, Debug)]
pub struct Problem {
    pub model_name: String,
    pub pair: ModelPair,
    pub space: DesignSpace,
    pub initial: Design,
    pub algorithm: Algorithm,
    pub output: OutputSection,
    section: AlgorithmSection,
}

impl Problem {
    /// Defaults for `algorithm` with the config's overrides applied.
    pub fn params(&self, algorithm: Algorithm) -> CliResult<AlgoParams> {
        let s = &self.section;
        let mut p = match algorithm {
            Algorithm::Vdm => AlgoParams::vdm_defaults(),
            _ => AlgoParams::default(),
        };
        macro_rules! apply {
            ($($f:ident),*) => { $( if let Some(v) = s.$f { p.$f = v; } )* };
        }
        apply!(eps, max_iter, n_theta_starts, lambda, eps_sip, max_iter_sip, local_tol, max_local_iters, prune_threshold);
        if let Some(step) = &s.vdm_step {
            p.vdm_step = match step.as_str() {
                "harmonic" => VdmStep::Harmonic,
                "line_search" => VdmStep::LineSearch,
                other => {
                    return Err(CliError::field(
                        "algorithm.vdm_step",
                        format!("'{other}' is not one of harmonic, line_search"),
                    ))
                }
            };
        }
        p.validate()
            .map_err(|e| CliError::field("algorithm", e.to_string()))?;
        Ok(p)
    }

    pub fn global_search(&self) -> CliResult<GlobalSearchConfig> {
        let g = &self.section.global_search;
        let d = GlobalSearchConfig::default();
        let cfg = GlobalSearchConfig {
            grid_per_dim: g.grid_per_dim.unwrap_or(d.grid_per_dim),
            refine_top: g.refine_top.unwrap_or(d.refine_top),
            local_tol: g.local_tol.unwrap_or(d.local_tol),
        };
        cfg.validate()
            .map_err(|e| CliError::field("algorithm.global_search", e.to_string()))?;
        Ok(cfg)
    }

    pub fn eps(&self) -> CliResult<f64> {
        Ok(self.params(self.algorithm)?.eps)
    }
}

pub fn load(path: &Path) -> CliResult<Problem> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text).map_err(|e| match e {
        CliError::Parse { message, .. } => CliError::Parse {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

pub fn parse(text: &str) -> CliResult<Problem> {
    let cfg: ProblemConfig = toml::from_str(text).map_err(|e| CliError::Parse {
        path: PathBuf::from("<config>"),
        message: e.to_string(),
    })?;
    cfg.validate()
}

impl ProblemConfig {
    pub fn validate(self) -> CliResult<Problem> {
        let pair = Registry::default()
            .lookup(&self.model.name, &self.model.reference_params)
            .map_err(|e| match e {
                discrim_core::Error::UnknownModel(_) => CliError::field("model.name", e.to_string()),
                _ => CliError::field("model.reference_params", e.to_string()),
            })?;
        let pair = match &self.model.parameter_space {
            None => pair,
            Some(b) => {
                let space = ParameterSpace::new(b.lower.clone(), b.upper.clone())
                    .map_err(|e| CliError::field("model.parameter_space", e.to_string()))?;
                pair.with_parameter_space(space)
                    .map_err(|e| CliError::field("model.parameter_space", e.to_string()))?
            }
        };

        let space = match &self.design_space {
            DesignSpaceSection::Box { lower, upper } => DesignSpace::new_box(lower.clone(), upper.clone()),
            DesignSpaceSection::Lattice { levels } => DesignSpace::new_lattice(levels.clone()),
        }
        .map_err(|e| CliError::field("design_space", e.to_string()))?;

        let initial = initial_design(&self.initial_design, &space)?;
        let algorithm = match &self.algorithm.name {
            None => Algorithm::TwoAdapt,
            Some(name) => name
                .parse()
                .map_err(|e: CliError| CliError::field("algorithm.name", e.to_string()))?,
        };
        if self.output.emit_psi_curve && self.output.psi_grid < 2 {
            return Err(CliError::field("output.psi_grid", "must be at least 2"));
        }
        let problem = Problem {
            model_name: self.model.name.clone(),
            pair,
            space,
            initial,
            algorithm,
            output: self.output,
            section: self.algorithm,
        };
        problem.params(algorithm)?;
        problem.global_search()?;
        Ok(problem)
    }
}

fn initial_design(sec: &InitialDesignSection, space: &DesignSpace) -> CliResult<Design> {
    if sec.points.is_empty() {
        return Err(CliError::field("initial_design.points", "no points given"));
    }
    if sec.points.len() != sec.weights.len() {
        return Err(CliError::field(
            "initial_design.weights",
            format!("{} weights for {} points", sec.weights.len(), sec.points.len()),
        ));
    }
    if let Some((i, w)) = sec.weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0) || !w.is_finite()) {
        return Err(CliError::field(
            format!("initial_design.weights[{i}]"),
            format!("{w} is not a nonnegative number"),
        ));
    }
    let sum: f64 = sec.weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_SLACK {
        return Err(CliError::field(
            "initial_design.weights",
            format!("weights sum to {sum}, expected 1"),
        ));
    }
    let mut points = Vec::with_capacity(sec.points.len());
    for (i, p) in sec.points.iter().enumerate() {
        let field = format!("initial_design.points[{i}]");
        let point = DesignPoint::new(p.coords()).map_err(|e| CliError::field(&field, e.to_string()))?;
        if point.dim() != space.dim() {
            return Err(CliError::field(
                &field,
                format!("has {} coordinates, the design space has {}", point.dim(), space.dim()),
            ));
        }
        if !space.contains(&point) {
            return Err(CliError::field(&field, format!("{point} is outside the design space")));
        }
        points.push(point);
    }
    Design::normalized(points, sec.weights.clone())
        .map_err(|e| CliError::field("initial_design", e.to_string()))
}
