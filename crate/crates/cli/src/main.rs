use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qkalman_core::decomposition::Ordering;
use qkalman_core::fixtures::{self, DEFAULT_GAMMA, DEFAULT_LAMBDA, DEFAULT_OMEGA};
use qkalman_core::io::{self, CheckReport, DecompositionReport, FileOptions, SystemFile};
use qkalman_core::model::{build_quadrature, check_physical_realizability};
use qkalman_core::pipeline::{decompose, CheckTolerances};
use qkalman_core::Error;

/// Kalman canonical decomposition of linear quantum systems.
#[derive(Parser)]
#[command(name = "qkalman", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a system file and write a JSON report.
    Decompose {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Relative rank threshold for the Gramian SVD.
        #[arg(long, value_name = "R")]
        tol: Option<f64>,
        /// Integration window of the Gramians.
        #[arg(long, num_args = 2, value_names = ["T0", "T1"], allow_negative_numbers = true)]
        horizon: Option<Vec<f64>>,
        /// Block order of the transformation.
        #[arg(long, value_parser = ["T", "Ttilde"])]
        ordering: Option<String>,
    },
    /// Check the physical realizability conditions of a system file.
    Check {
        input: PathBuf,
        /// Read the input as raw A, B, C (and optional D) matrices.
        #[arg(long)]
        debug_abcd: bool,
    },
    /// Write a built-in example system file.
    Example {
        #[arg(long)]
        name: String,
        #[arg(long, value_name = "W", default_value_t = DEFAULT_OMEGA, allow_negative_numbers = true)]
        omega: f64,
        #[arg(long, value_name = "L", default_value_t = DEFAULT_LAMBDA, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, value_name = "G", default_value_t = DEFAULT_GAMMA, allow_negative_numbers = true)]
        gamma: f64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Outcome {
    Success,
    CheckFailed,
}

fn exit_code(result: Result<Outcome, Error>) -> ExitCode {
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_input_error() { 1 } else { 2 })
        }
    }
}

fn run_decompose(
    input: &Path,
    out: &Path,
    tol: Option<f64>,
    horizon: Option<Vec<f64>>,
    ordering: Option<String>,
) -> Result<Outcome, Error> {
    let loaded = io::parse_system_file(input)?;
    let mut file_options = loaded.options;
    if let Some(r) = tol {
        file_options.rank_tol = Some(r);
    }
    if let Some(h) = horizon {
        file_options.horizon = [h[0], h[1]];
    }
    if let Some(o) = ordering {
        file_options.ordering = o.parse::<Ordering>()?;
    }
    let options = file_options.decompose_options()?;
    let dec = decompose(&loaded.model, &options)?;
    let report = DecompositionReport::new(&dec);
    io::write_json(out, &report)?;

    let dims = report.dims;
    println!("dims n1={} n2={} n3={}", dims.n1, dims.n2, dims.n3);
    for (name, ok) in &report.checks {
        println!("{:<24} {}", name, if *ok { "pass" } else { "FAIL" });
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(if report.pass {
        Outcome::Success
    } else {
        Outcome::CheckFailed
    })
}

fn run_check(input: &Path, debug_abcd: bool) -> Result<Outcome, Error> {
    let sys = if debug_abcd {
        io::parse_abcd_file(input)?
    } else {
        build_quadrature(&io::parse_system_file(input)?.model)
    };
    let tolerance = CheckTolerances::default().realizability;
    let report = CheckReport::new(&sys, &check_physical_realizability(&sys, tolerance), tolerance);
    print!("{}", io::to_json_string(&report)?);
    Ok(if report.pass {
        Outcome::Success
    } else {
        Outcome::CheckFailed
    })
}

fn run_example(name: &str, omega: f64, lambda: f64, gamma: f64, out: Option<&Path>) -> Result<Outcome, Error> {
    let model = fixtures::builtin_example(name, omega, lambda, gamma)?;
    let file = SystemFile::from_model(&model, FileOptions::default());
    match out {
        Some(path) => io::write_json(path, &file)?,
        None => print!("{}", io::to_json_string(&file)?),
    }
    Ok(Outcome::Success)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Decompose {
            input,
            out,
            tol,
            horizon,
            ordering,
        } => run_decompose(&input, &out, tol, horizon, ordering),
        Command::Check { input, debug_abcd } => run_check(&input, debug_abcd),
        Command::Example {
            name,
            omega,
            lambda,
            gamma,
            out,
        } => run_example(&name, omega, lambda, gamma, out.as_deref()),
    };
    exit_code(result)
}
