//! `dualsim` command line.
//!
//! Exit codes: 0 success, 1 usage / input error, 2 circuit parse error,
//! 3 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dualsim::dsl::{
    emit_combination_json, emit_json, parse, parse_matrix_json, parse_state_json, run,
    run_search, Backend, MeasurementSpec,
};
use dualsim::lcu::{decompose, reconstruction_error};
use dualsim::{Error, MeasurementScenario, ZenoSchedule};

#[derive(Parser)]
#[command(name = "dualsim", version, about = "Duality computer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a .dc circuit and print its JSON report.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = BackendArg::Pure)]
        backend: BackendArg,
        /// Initial state: JSON array of [re, im] amplitudes. Default |0…0⟩.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose a matrix into a positive combination of unitaries.
    Decompose {
        matrix: PathBuf,
        /// Maximum Frobenius reconstruction error.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// One-query search demo over n items.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        target: usize,
        #[arg(long, value_enum, default_value_t = ScenarioArg::Renorm)]
        scenario: ScenarioArg,
        /// Renormalization threshold (renorm only).
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        /// Zeno repeat count.
        #[arg(long)]
        zeno: Option<u32>,
        #[arg(long, default_value_t = 0)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Pure,
    Density,
    Mixed,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Pure => Backend::Pure,
            BackendArg::Density => Backend::Density,
            BackendArg::Mixed => Backend::Mixed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    None,
    Renorm,
    Ideal,
}

enum Failure {
    Usage(String),
    Parse(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Parse(_) => 2,
            Self::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Parse(m) | Self::Numerical(m) => m,
        }
    }
}

/// Library errors caused by bad user input rather than by the numerics.
fn classify(e: Error) -> Failure {
    match e {
        Error::BackendScenario { .. }
        | Error::NotSquare { .. }
        | Error::InvalidSearch(_)
        | Error::InvalidProbability(_)
        | Error::ZeroRepeats => Failure::Usage(e.to_string()),
        _ => Failure::Numerical(e.to_string()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_output(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            file,
            backend,
            input,
            out,
        } => {
            let ast = parse(&read(&file)?)
                .map_err(|e| Failure::Parse(format!("{}: {e}", file.display())))?;
            let input = match input {
                Some(path) => {
                    let s = parse_state_json(&read(&path)?)
                        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                    if s.dim() != ast.dim() || !s.is_normalized() {
                        return Err(Failure::Usage(format!(
                            "{}: input must be a unit vector of dimension {}",
                            path.display(),
                            ast.dim()
                        )));
                    }
                    Some(s)
                }
                None => None,
            };
            let report = run(&ast, backend.into(), input.as_ref()).map_err(classify)?;
            write_output(&emit_json(&report), out.as_deref())
        }
        Command::Decompose { matrix, tol } => {
            let a = parse_matrix_json(&read(&matrix)?)
                .map_err(|e| Failure::Usage(format!("{}: {e}", matrix.display())))?;
            let comb = decompose(&a).map_err(classify)?;
            let err = reconstruction_error(&a, &comb).map_err(classify)?;
            if err.is_nan() || err > tol {
                return Err(Failure::Numerical(format!(
                    "reconstruction error {err:e} exceeds tolerance {tol:e}"
                )));
            }
            write_output(&emit_combination_json(&comb), None)
        }
        Command::Search {
            n,
            target,
            scenario,
            eps,
            zeno,
            shots,
            seed,
        } => {
            let scenario = match scenario {
                ScenarioArg::None => MeasurementScenario::NoRenorm,
                ScenarioArg::Renorm => MeasurementScenario::threshold(eps).map_err(classify)?,
                ScenarioArg::Ideal => MeasurementScenario::RenormIdeal,
            };
            let zeno = zeno
                .map(ZenoSchedule::new)
                .transpose()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let measure = MeasurementSpec {
                scenario,
                shots,
                seed,
                zeno,
            };
            let report = run_search(n, target, measure).map_err(classify)?;
            write_output(&emit_json(&report), None)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
