//! Batch driver for the numerical studies.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use strainlim::experiments::{
    run_checkerboard, run_crack, run_infsup, run_n_sweep, run_validate, ExperimentError, IterationParams, Table,
};
use strainlim::RegularizationParams;
use thiserror::Error;

use config::{ConfigError, Experiment, ExperimentConfig, TMode};

#[derive(Parser, Debug)]
#[command(name = "strainlim", version, about = "Mixed finite element studies for strain-limiting elasticity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convergence under mesh refinement for the smooth manufactured solution.
    Validate(CommonArgs),
    /// Errors at a fixed mesh as the regularization parameter grows.
    NSweep(CommonArgs),
    /// Notched specimen under increasing traction.
    Crack(CommonArgs),
    /// Linear mixed problem on the unstable quadrilateral pair.
    Infsup(CommonArgs),
    /// Decay of the checkerboard inf-sup quotient.
    Checkerboard(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Configuration file with `key = value` lines and `[experiment]` sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV and VTK files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Material(#[from] strainlim::material::MaterialError),
}

fn params(cfg: &ExperimentConfig) -> IterationParams {
    let mut p = IterationParams::new(cfg.tau, cfg.tol);
    p.linear_solver = cfg.linear_solver();
    p.max_outer = cfg.max_outer;
    p
}

fn run(experiment: Experiment, cfg: &ExperimentConfig, out: &Path) -> Result<Table, CliError> {
    let table = match experiment {
        Experiment::Validate => {
            let reg = RegularizationParams::new(cfg.n, cfg.t)?.with_linear_form(cfg.linear_form);
            run_validate(reg, &cfg.levels, &params(cfg))?
        }
        Experiment::NSweep => {
            let modes: &[bool] = match cfg.t_mode {
                TMode::One => &[false],
                TMode::EqualN => &[true],
                TMode::Both => &[false, true],
            };
            let mut table: Option<Table> = None;
            for &t_equals_n in modes {
                let part = run_n_sweep(&cfg.ns, t_equals_n, cfg.level, cfg.linear_form, &params(cfg))?;
                match table.as_mut() {
                    Some(t) => t.append(part),
                    None => table = Some(part),
                }
            }
            table.expect("at least one mode")
        }
        Experiment::Crack => {
            let reg = RegularizationParams::new(cfg.n, cfg.t)?.with_linear_form(cfg.linear_form);
            let vtk = cfg.vtk.then_some(out);
            run_crack(&cfg.forces, cfg.level as usize, reg, &params(cfg), vtk)?
        }
        Experiment::InfSup => {
            let mut table: Option<Table> = None;
            for &space in &cfg.stress {
                let part = run_infsup(&cfg.levels, space)?;
                match table.as_mut() {
                    Some(t) => t.append(part),
                    None => table = Some(part),
                }
            }
            table.expect("at least one stress space")
        }
        Experiment::Checkerboard => run_checkerboard(&cfg.n_interior, &cfg.exponents)?,
    };
    Ok(table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match &cli.command {
        Command::Validate(a) => (Experiment::Validate, a),
        Command::NSweep(a) => (Experiment::NSweep, a),
        Command::Crack(a) => (Experiment::Crack, a),
        Command::Infsup(a) => (Experiment::InfSup, a),
        Command::Checkerboard(a) => (Experiment::Checkerboard, a),
    };
    match execute(experiment, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some rows did not converge");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(experiment: Experiment, args: &CommonArgs) -> Result<bool, CliError> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(experiment, path)?,
        None => ExperimentConfig::defaults(experiment),
    };
    std::fs::create_dir_all(&args.out)?;
    let table = run(experiment, &cfg, &args.out)?;
    let path = args.out.join(format!("{}.csv", experiment.name()));
    table.write_csv(&path)?;
    print!("{}", table.to_csv());
    Ok(table.all_converged())
}
