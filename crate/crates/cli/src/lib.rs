//! Command-line front end for `discrim-core`: config loading, solver
//! orchestration and result files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{
    cmd_compare, cmd_solve, cmd_verify, parse_algorithms, run_algorithm, solve_problem,
    verify_design, SolveOutcome, VerifyOutcome, EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK,
};
pub use config::{load, parse, Algorithm, Problem, ProblemConfig};
pub use error::{CliError, CliResult};
pub use output::{ComparisonRow, DesignFile};
