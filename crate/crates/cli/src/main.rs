use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use discrim_cli::{cmd_compare, cmd_solve, cmd_verify, parse_algorithms, CliResult, EXIT_ERROR, EXIT_OK};

#[derive(Parser)]
#[command(name = "discrim-opt", version, about = "T-optimal designs for discriminating two models")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a design and write design.json, history.csv and optionally psi_curve.csv.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// 2adapt, disc or vdm; overrides the config.
        #[arg(long)]
        algorithm: Option<String>,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a design for eps-T-optimality.
    Verify {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Run several algorithms on one problem and tabulate them.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma separated, e.g. `vdm,2adapt`.
        #[arg(long, default_value = "")]
        algorithms: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("DISCRIM_OPT_LOG", "error");
    env_logger::Builder::from_env(env).format_timestamp(None).init();
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Solve { config, algorithm, out } => {
            let outcome = cmd_solve(&config, algorithm.as_deref(), out.as_deref())?;
            let r = &outcome.result;
            println!("algorithm: {}", outcome.algorithm.name());
            println!("t_value: {}", r.t_value);
            println!("accuracy: {:e}", r.accuracy);
            println!("iterations: {}", r.iterations);
            println!("converged: {}", r.converged);
            if let Some(reason) = &r.stall {
                println!("stalled: {reason}");
            }
            println!("design: {}", r.design);
            println!("output: {}", outcome.out_dir.display());
            Ok(outcome.exit_code())
        }
        Command::Verify { design, config } => {
            let outcome = cmd_verify(&design, &config)?;
            print!("{}", outcome.summary());
            Ok(outcome.exit_code())
        }
        Command::Compare { config, algorithms, out } => {
            let algorithms = parse_algorithms(&algorithms)?;
            let rows = cmd_compare(&config, &algorithms, &out)?;
            println!("algorithm,reached_accuracy,t_value,runtime_seconds,iterations,support_size");
            for r in &rows {
                println!(
                    "{},{:e},{},{},{},{}",
                    r.algorithm, r.reached_accuracy, r.t_value, r.runtime_seconds, r.iterations, r.support_size
                );
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
