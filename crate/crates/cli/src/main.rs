//! `representer`: sparse measure recovery from trigonometric moments.
//!
//! Every command prints an [`ExperimentReport`] as JSON and exits with 0 when
//! all of its checks pass, 1 when a check fails or a solver breaks down, and 2
//! on usage errors. `--tol` overrides the primary tolerance of the command
//! (duality gap, residual or drift, depending on the command).

mod commands;
mod experiments;
mod io;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Parser, Subcommand};
use representer::spline::DEFAULT_KNOT_GRID;

use report::{emit, to_json, ExperimentReport, UsageError};

#[derive(Parser)]
#[command(name = "representer", version, about = "Sparse atomic measures from linear moments: solve, sparsify, certify")]
struct Cli {
    /// Seed for the SplitMix64 generator; trial `i` uses `seed ^ i`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Omit wall-clock timing so repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_meta: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Basis pursuit over the torus.
    #[command(subcommand)]
    Bp(BpCmd),
    /// Closed-form solutions.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Nonnegative measures from moments.
    #[command(subcommand)]
    Moment(MomentCmd),
    /// Support reduction.
    #[command(subcommand)]
    Prune(PruneCmd),
    /// Spline interpolation with a sparse derivative.
    #[command(subcommand)]
    Spline(SplineCmd),
    /// Reproduction experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Subcommand)]
enum BpCmd {
    /// Minimum total-variation measure matching the moments.
    Solve {
        #[arg(long)]
        fc: usize,
        /// Moments: file path, JSON array, `{"f_c", "y"}` object or comma-separated values.
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        /// Refine positions off the grid.
        #[arg(long)]
        polish: bool,
    },
    /// Checks dual admissibility, extremality and the duality gap.
    Certify {
        #[arg(long)]
        measure: String,
        #[arg(long)]
        dual: String,
        #[arg(long)]
        y: String,
        /// Sample count for the sup-norm bound [default: 4096 f_c].
        #[arg(long)]
        n_check: Option<usize>,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// The comb solution for two opposite spikes at ±h/2.
    TwoSpike {
        #[arg(long)]
        fc: usize,
        #[arg(long)]
        h: f64,
        /// Emit the comb as CSV `(j, t_j, a_j)` instead of a report.
        #[arg(long)]
        table: bool,
    },
}

#[derive(Subcommand)]
enum MomentCmd {
    /// Toeplitz diagnosis and recovery.
    Recover {
        #[arg(long)]
        y: String,
        /// Force an atom at this position (full-rank moments).
        #[arg(long)]
        charge: Option<f64>,
    },
}

#[derive(Subcommand)]
enum PruneCmd {
    /// Drops atoms without changing the moments or increasing the mass.
    Atoms {
        /// JSON `{features: {rows, cols, data}, amplitudes, target}`.
        #[arg(long)]
        instance: String,
    },
    /// Lowers the rank of a PSD feasible point.
    Psd {
        /// JSON `{q, constraints, rhs}` with row-major matrices.
        #[arg(long)]
        instance: String,
    },
}

#[derive(Subcommand)]
enum SplineCmd {
    Solve {
        #[arg(long)]
        order: usize,
        /// CSV of `s,y` rows.
        #[arg(long)]
        samples: String,
        #[arg(long, default_value_t = DEFAULT_KNOT_GRID)]
        grid: usize,
        /// Write `(x, u(x))` samples of the fitted spline here.
        #[arg(long)]
        eval: Option<PathBuf>,
        #[arg(long, default_value_t = 1001)]
        eval_points: usize,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Oracle vs grid BP with polishing; `h = 1/(2 f_c)` runs the boundary case.
    TwoSpike {
        #[arg(long)]
        fc: usize,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        /// Write `<prefix>_dual.csv` and `<prefix>_atoms.csv`.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Random separated nonnegative measure, forward and back.
    ToeplitzRoundtrip {
        #[arg(long)]
        fc: usize,
        #[arg(long)]
        r: usize,
    },
    /// Pruning on random feature instances.
    PruneBench {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
}

enum Output {
    Report(ExperimentReport),
    Table(String, Vec<report::Check>),
}

fn run(cli: &Cli) -> Result<Output> {
    let tol = cli.tol;
    let report = match &cli.command {
        Command::Bp(BpCmd::Solve { fc, y, grid, polish }) => commands::bp_solve(&io::parse_moments(y, Some(*fc))?, *grid, *polish, tol)?,
        Command::Bp(BpCmd::Certify { measure, dual, y, n_check }) => commands::bp_certify(measure, dual, &io::parse_moments(y, None)?, tol, *n_check)?,
        Command::Oracle(OracleCmd::TwoSpike { fc, h, table: true }) => {
            let (csv, checks) = commands::oracle_table(*fc, *h)?;
            return Ok(Output::Table(csv, checks));
        }
        Command::Oracle(OracleCmd::TwoSpike { fc, h, table: false }) => commands::oracle_two_spike(*fc, *h)?,
        Command::Moment(MomentCmd::Recover { y, charge }) => commands::moment_recover(&io::parse_moments(y, None)?, *charge, tol)?,
        Command::Prune(PruneCmd::Atoms { instance }) => commands::prune_atoms(instance, tol)?,
        Command::Prune(PruneCmd::Psd { instance }) => commands::prune_psd(instance, tol)?,
        Command::Spline(SplineCmd::Solve { order, samples, grid, eval, eval_points }) => {
            commands::spline_solve(*order, samples, *grid, eval.as_deref(), *eval_points, tol)?
        }
        Command::Experiment(ExperimentCmd::TwoSpike { fc, h, grid, plot }) => experiments::two_spike(*fc, *h, *grid, tol, plot.as_deref())?,
        Command::Experiment(ExperimentCmd::ToeplitzRoundtrip { fc, r }) => experiments::toeplitz_roundtrip(*fc, *r, cli.seed, tol)?,
        Command::Experiment(ExperimentCmd::PruneBench { m, r, trials }) => experiments::prune_bench(*m, *r, *trials, cli.seed, tol)?,
    };
    Ok(Output::Report(report))
}

fn is_usage(err: &anyhow::Error) -> bool {
    use representer::Error as E;
    err.chain().any(|e| {
        e.is::<UsageError>()
            || matches!(
                e.downcast_ref::<E>(),
                Some(E::InvalidParameter(_) | E::DimensionMismatch { .. } | E::Precondition(_) | E::IndexOutOfRange { .. })
            )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli).and_then(|out| {
        let (text, checks) = match out {
            Output::Report(mut r) => {
                r.seed = cli.seed;
                if !cli.no_meta {
                    r.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
                }
                (to_json(&r)?, r.checks)
            }
            Output::Table(csv, checks) => (csv, checks),
        };
        emit(&text, cli.out.as_deref())?;
        Ok(checks)
    });
    match result {
        Ok(checks) => {
            let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
            for c in &failed {
                eprintln!("check failed: {} = {:e} > {:e}", c.name, c.value, c.tolerance);
            }
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_usage(&err) { 2 } else { 1 })
        }
    }
}
