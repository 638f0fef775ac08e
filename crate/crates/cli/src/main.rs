use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rfsense::algebra::lemma1_check;
use rfsense::experiment::{
    parse_scenario, psi_ladder, solve_point, solve_scene, sweep, trace_rows, write_results,
    write_trace, ResultRow, Scenario,
};
use rfsense::scene::generate_channels;
use rfsense::solver::{Mode, ReceiverKind, SolveError, SpOptions};

const EXIT_PARSE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

type WriteError = Box<dyn std::error::Error>;

#[derive(Parser)]
#[command(
    name = "rfsense",
    version,
    about = "Power allocation experiments for RF sensing networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CombinerArg {
    Mrc,
    Zf,
}

impl From<CombinerArg> for ReceiverKind {
    fn from(c: CombinerArg) -> Self {
        match c {
            CombinerArg::Mrc => ReceiverKind::Mrc,
            CombinerArg::Zf => ReceiverKind::Zf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Joint,
    Txonly,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Joint => Mode::Joint,
            ModeArg::Txonly => Mode::TxOnly,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file
    scenario: PathBuf,
    /// Channel seed; defaults to the scenario's [rng] seed, else 0
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one operating point
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "mrc")]
        combiner: CombinerArg,
        #[arg(long, value_enum, default_value = "joint")]
        mode: ModeArg,
        /// Common SINR demand for every target; the scenario's demands otherwise
        #[arg(long)]
        psi: Option<f64>,
    },
    /// Solve a ladder of common SINR demands
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        psi_from: f64,
        #[arg(long)]
        psi_to: f64,
        #[arg(long)]
        psi_step: f64,
        /// Combiners to run; zf is skipped in joint mode
        #[arg(long, value_enum, value_delimiter = ',', default_value = "mrc,zf")]
        combiner: Vec<CombinerArg>,
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "joint,txonly"
        )]
        mode: Vec<ModeArg>,
    },
    /// Per-iteration objective of the joint MRC solve
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        psi: Option<f64>,
    },
    /// Check whether the interference term is a posynomial for these channels
    Lemma1 {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// A failed command: message plus exit status.
struct Failure(String, u8);

impl From<SolveError> for Failure {
    fn from(err: SolveError) -> Self {
        let code = match &err {
            SolveError::Infeasible(_)
            | SolveError::StartInfeasible { .. }
            | SolveError::Signal(_) => EXIT_INFEASIBLE,
            SolveError::InvalidProblem(_) => EXIT_PARSE,
            SolveError::NumericalFailure(_) | SolveError::Algebra(_) => EXIT_NUMERICAL,
        };
        Failure(err.to_string(), code)
    }
}

fn io_failure(path: &Path, err: impl std::fmt::Display) -> Failure {
    Failure(format!("{}: {err}", path.display()), 1)
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    parse_scenario(path).map_err(|e| Failure(format!("{}: {e}", path.display()), EXIT_PARSE))
}

/// Runs `write` against `--out` or stdout.
fn emit(
    out: &Option<PathBuf>,
    write: impl FnOnce(&mut dyn Write) -> Result<(), WriteError>,
) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut file = File::create(path).map_err(|e| io_failure(path, e))?;
            write(&mut file).map_err(|e| io_failure(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(|e| Failure(format!("stdout: {e}"), 1))
        }
    }
}

fn summary(out: &Option<PathBuf>, text: &str) {
    // keep stdout clean when it carries the CSV
    if out.is_some() {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.6}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn write_rows(rows: &[ResultRow]) -> impl FnOnce(&mut dyn Write) -> Result<(), WriteError> + '_ {
    move |w| write_results(rows, w).map_err(Into::into)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let options = SpOptions::default();
    match cli.command {
        Command::Solve {
            common,
            combiner,
            mode,
            psi,
        } => {
            let scenario = load(&common.scenario)?;
            let seed = common.seed.unwrap_or(scenario.seed);
            let channels = generate_channels(&scenario.scene, seed);
            let (combiner, mode) = (combiner.into(), mode.into());
            let (row, alloc) = match psi {
                Some(psi) => solve_point(
                    &scenario.scene,
                    &channels,
                    psi,
                    combiner,
                    mode,
                    seed,
                    &options,
                )?,
                None => solve_scene(&scenario.scene, &channels, combiner, mode, seed, &options)?,
            };
            emit(&common.out, write_rows(std::slice::from_ref(&row)))?;
            summary(
                &common.out,
                &format!(
                    "{:?} after {} iterations: objective {:.6} ({:.4} dB)\n  p = [{}]\n  alpha = [{}]\n  sinr = [{}]",
                    row.termination,
                    row.iterations,
                    alloc.objective,
                    row.objective_db.unwrap_or(f64::NAN),
                    fmt_list(&alloc.powers),
                    fmt_list(&alloc.amplifications),
                    fmt_list(&alloc.sinrs),
                ),
            );
            Ok(())
        }
        Command::Sweep {
            common,
            psi_from,
            psi_to,
            psi_step,
            combiner,
            mode,
        } => {
            let scenario = load(&common.scenario)?;
            let seed = common.seed.unwrap_or(scenario.seed);
            let psis =
                psi_ladder(psi_from, psi_to, psi_step).map_err(|e| Failure(e, EXIT_PARSE))?;
            let configs: Vec<(ReceiverKind, Mode)> = mode
                .iter()
                .flat_map(|m| {
                    combiner
                        .iter()
                        .map(move |c| (ReceiverKind::from(*c), Mode::from(*m)))
                })
                .filter(|(c, m)| !(*c == ReceiverKind::Zf && *m == Mode::Joint))
                .collect();
            if configs.is_empty() {
                return Err(Failure("no runnable combiner/mode pair".into(), EXIT_PARSE));
            }
            let channels = generate_channels(&scenario.scene, seed);
            let rows = sweep(&scenario.scene, &channels, &psis, &configs, seed, &options)?;
            emit(&common.out, write_rows(&rows))?;
            let solved = rows.iter().filter(|r| r.is_solved()).count();
            summary(
                &common.out,
                &format!("{solved} of {} points solved", rows.len()),
            );
            Ok(())
        }
        Command::Trace { common, psi } => {
            let scenario = load(&common.scenario)?;
            let seed = common.seed.unwrap_or(scenario.seed);
            let channels = generate_channels(&scenario.scene, seed);
            let (row, alloc) = match psi {
                Some(psi) => solve_point(
                    &scenario.scene,
                    &channels,
                    psi,
                    ReceiverKind::Mrc,
                    Mode::Joint,
                    seed,
                    &options,
                )?,
                None => solve_scene(
                    &scenario.scene,
                    &channels,
                    ReceiverKind::Mrc,
                    Mode::Joint,
                    seed,
                    &options,
                )?,
            };
            let rows = trace_rows(&alloc.trace);
            emit(&common.out, |w| write_trace(&rows, w).map_err(Into::into))?;
            summary(
                &common.out,
                &format!("{:?} after {} iterations", row.termination, row.iterations),
            );
            Ok(())
        }
        Command::Lemma1 { scenario, seed } => {
            let parsed = load(&scenario)?;
            let seed = seed.unwrap_or(parsed.seed);
            let report = lemma1_check(&generate_channels(&parsed.scene, seed));
            println!("posynomial: {}", report.posynomial);
            for q in &report.violations {
                println!("violation {q}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(message, code)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
