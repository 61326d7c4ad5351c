//! Command-line front end: construct / design / bound / eval / simulate over
//! the JSON and CSV file formats.
//!
//! Exit codes: 0 on success, 1 on validation errors (bad flags, malformed or
//! invalid files, infeasible parameters), 2 on I/O errors. Every randomized
//! subcommand takes an explicit `--seed`, and repeated invocations with the
//! same inputs produce byte-identical primary outputs (only the
//! elapsed-seconds trace column varies).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use pilotseq::model::{
    read_beta_file, read_problem_file, read_set_file, write_set_file, Acceleration,
    BetaMatrixSpec, Constraint, FileError,
};
use pilotseq::{bounds, construct, metrics, mm, sim};

#[derive(Parser)]
#[command(name = "pilotseq", version, about = "Pilot sequence design for multi-cell networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the bound-achieving multi-cell set (K >= tau, positive definite B)
    Construct {
        #[arg(long)]
        tau: usize,
        /// Users per cell (K)
        #[arg(long)]
        users: usize,
        /// Number of cells (J)
        #[arg(long)]
        cells: usize,
        /// JSON file: full J x J matrix or {"toeplitz": b, "cells": J}
        #[arg(long, value_name = "FILE")]
        beta_matrix: PathBuf,
        /// Output sequence-set file
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Run the ETSC-MM optimizer on a problem config
    Design {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        /// Output sequence-set file
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Output per-iteration trace CSV
        #[arg(long, value_name = "FILE")]
        trace: PathBuf,
        /// RNG seed for the random initialization (overrides the config)
        #[arg(long)]
        seed: u64,
        /// Force the unimodular constraint regardless of the config
        #[arg(long)]
        unimodular: bool,
        /// Use SQUAREM acceleration regardless of the config
        #[arg(long)]
        accelerate: bool,
    },
    /// Print the Welch-type bound report for (tau, J, K, B)
    Bound {
        #[arg(long)]
        tau: usize,
        #[arg(long)]
        users: usize,
        #[arg(long)]
        cells: usize,
        #[arg(long, value_name = "FILE")]
        beta_matrix: PathBuf,
    },
    /// Evaluate a sequence set: ETSC, TSC, interference split, PAPR
    Eval {
        #[arg(long, value_name = "FILE")]
        set: PathBuf,
        #[arg(long, value_name = "FILE")]
        beta_matrix: PathBuf,
        /// Also write the per-user PAPR CCDF data file
        #[arg(long, value_name = "FILE")]
        papr_csv: Option<PathBuf>,
    },
    /// Monte-Carlo sum-MSE comparison of one or more sets
    Simulate {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        /// Base RNG seed for channel and noise draws
        #[arg(long)]
        seed: u64,
        /// Write the CSV here instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Validation(String),
    Io(String),
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        match &e {
            FileError::Io { .. } => CliError::Io(e.to_string()),
            FileError::Parse { .. } | FileError::Invalid { .. } => {
                CliError::Validation(e.to_string())
            }
        }
    }
}

impl From<pilotseq::Error> for CliError {
    fn from(e: pilotseq::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {}", path.display(), e))
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("PILOTSEQ_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: PILOTSEQ_THREADS must be a positive integer, got {threads:?}");
                return ExitCode::from(1);
            }
        }
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Construct {
            tau,
            users,
            cells,
            beta_matrix,
            out,
        } => cmd_construct(tau, users, cells, &beta_matrix, &out),
        Command::Design {
            config,
            out,
            trace,
            seed,
            unimodular,
            accelerate,
        } => cmd_design(&config, &out, &trace, seed, unimodular, accelerate),
        Command::Bound {
            tau,
            users,
            cells,
            beta_matrix,
        } => cmd_bound(tau, users, cells, &beta_matrix),
        Command::Eval {
            set,
            beta_matrix,
            papr_csv,
        } => cmd_eval(&set, &beta_matrix, papr_csv.as_deref()),
        Command::Simulate { config, seed, out } => cmd_simulate(&config, seed, out.as_deref()),
    }
}

fn check_cells(b_order: usize, cells: usize) -> Result<(), CliError> {
    if b_order != cells {
        return Err(CliError::Validation(format!(
            "beta matrix has order {b_order} but --cells is {cells}"
        )));
    }
    Ok(())
}

fn cmd_construct(
    tau: usize,
    users: usize,
    cells: usize,
    beta_path: &Path,
    out: &Path,
) -> Result<(), CliError> {
    let b = read_beta_file(beta_path)?;
    check_cells(b.order(), cells)?;
    let set = construct::optimal_multi_cell(tau, users, &b)?;
    write_set_file(&set, out)?;
    let etsc = metrics::etsc(&set, &b)?;
    let bound = bounds::new_extended_welch_bound(tau, users, &b)
        .expect("construction succeeded, so the bound applies");
    println!(
        "{}",
        serde_json::json!({
            "etsc": etsc,
            "bound": bound,
            "relativeGap": (etsc - bound) / bound,
            "setFile": out.display().to_string(),
        })
    );
    Ok(())
}

fn cmd_design(
    config: &Path,
    out: &Path,
    trace_path: &Path,
    seed: u64,
    unimodular: bool,
    accelerate: bool,
) -> Result<(), CliError> {
    let mut problem = read_problem_file(config)?;
    problem.optimizer.seed = seed;
    if unimodular {
        problem.constraint = Constraint::Unimodular;
    }
    if accelerate {
        problem.optimizer.acceleration = Acceleration::Squarem;
    }
    let (set, trace) = mm::solve(&problem)?;
    write_set_file(&set, out)?;
    mm::write_trace_csv(&trace, trace_path)?;
    println!(
        "{}",
        serde_json::json!({
            "finalEtsc": trace.final_objective(),
            "initialEtsc": trace.objectives[0],
            "iterations": trace.iterations(),
            "terminationReason": trace.termination_reason,
            "seed": trace.seed,
            "constraint": problem.constraint,
            "acceleration": problem.optimizer.acceleration,
            "setFile": out.display().to_string(),
            "traceFile": trace_path.display().to_string(),
        })
    );
    Ok(())
}

fn cmd_bound(tau: usize, users: usize, cells: usize, beta_path: &Path) -> Result<(), CliError> {
    let b = read_beta_file(beta_path)?;
    check_cells(b.order(), cells)?;
    let report = bounds::bound_report(tau, cells, users, &b);
    println!(
        "{}",
        serde_json::to_string(&report).expect("report serialization cannot fail")
    );
    Ok(())
}

fn cmd_eval(set_path: &Path, beta_path: &Path, papr_csv: Option<&Path>) -> Result<(), CliError> {
    let set = read_set_file(set_path)?;
    let b = read_beta_file(beta_path)?;
    let record = metrics::eval_record(&set, &b)?;
    if let Some(papr_path) = papr_csv {
        write_papr_ccdf(&record.papr_per_user_db, papr_path)?;
    }
    println!(
        "{}",
        serde_json::to_string(&record).expect("record serialization cannot fail")
    );
    Ok(())
}

/// CCDF data: for each observed PAPR level, the fraction of users strictly
/// above it.
fn write_papr_ccdf(papr_db: &[f64], path: &Path) -> Result<(), CliError> {
    let mut sorted = papr_db.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("PAPR values are finite"));
    let total = sorted.len() as f64;
    let mut body = String::from("paprDb,ccdf\n");
    for (i, v) in sorted.iter().enumerate() {
        let above = sorted.len() - 1 - i;
        let _ = writeln!(body, "{v},{}", above as f64 / total);
    }
    std::fs::write(path, body).map_err(|e| io_error(path, e))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SimulateFile {
    beta_matrix: BetaMatrixSpec,
    sigma_sq_grid: Vec<f64>,
    trials: usize,
    sets: Vec<SimSetRef>,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SimSetRef {
    label: String,
    path: PathBuf,
}

fn cmd_simulate(config_path: &Path, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let body = std::fs::read_to_string(config_path).map_err(|e| io_error(config_path, e))?;
    let file: SimulateFile = serde_json::from_str(&body)
        .map_err(|e| CliError::Validation(format!("{}: {}", config_path.display(), e)))?;
    if file.sets.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: at least one sequence-set entry is required",
            config_path.display()
        )));
    }
    let b = file
        .beta_matrix
        .build()
        .map_err(|e| CliError::Validation(format!("{}: {}", config_path.display(), e)))?;

    let mut csv = String::from("sigmaSq,setLabel,empiricalMse,stderr,analyticMse\n");
    for set_ref in &file.sets {
        let set = read_set_file(&set_ref.path)?;
        let config = sim::SimulationConfig {
            set,
            b: b.clone(),
            sigma_sq_grid: file.sigma_sq_grid.clone(),
            trials: file.trials,
            seed,
        };
        let report = sim::run_monte_carlo(&config)?;
        for point in &report.points {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                point.sigma_sq,
                set_ref.label,
                point.empirical_mean,
                point.standard_error,
                point.analytic
            );
        }
    }

    match out {
        Some(path) => std::fs::write(path, csv).map_err(|e| io_error(path, e))?,
        None => print!("{csv}"),
    }
    Ok(())
}
