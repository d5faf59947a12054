//! T-optimal experimental designs for discriminating between two rival models.
//!
//! The main entry points are [`two_adapt_md`], which grows both the candidate
//! design points and a discretization of the rival model's parameter space,
//! and the [`vdm`] baseline. [`check_optimality`] scans the design space for
//! the largest directional derivative of a given design.

pub mod algorithms;
pub mod criterion;
pub mod design;
pub mod error;
pub mod global;
pub mod lp;
pub mod lsq;
pub mod model;
pub mod models;
pub mod sobol;

pub use algorithms::{
    blankenship_falk, check_optimality, disc_md, disc_md_on_space, two_adapt_md, vdm, AlgoParams, BfOutcome,
    DiscMdResult, IterationRecord, LsipProblem, OptimalityReport, PhaseTimes, RecordKind,
    SolveResult, VdmStep,
};
pub use criterion::{directional_derivative, squared_distance, squared_distances, t_value};
pub use design::{
    mix_designs, prune_design, Design, DesignPoint, DesignSpace, ParameterSpace,
    DEFAULT_PRUNE_THRESHOLD,
};
pub use error::{Error, Result};
pub use global::{maximize_distance, GlobalSearchConfig};
pub use lp::{solve_weight_lp, LpStatus, WeightLpInstance, WeightLpSolution};
pub use lsq::{fit_parameters, FitConfig, FitResult};
pub use model::{ModelError, ModelPair, ScalarModel, VectorModel, Vectorized};
pub use models::{registry_lookup, IntegratorTol, ModelParams, Registry};
pub use sobol::sobol_points;
