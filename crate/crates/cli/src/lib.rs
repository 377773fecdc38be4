//! Batch runner: parses arguments, builds the trace, writes the CSV and
//! reports the verifiers' verdicts.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 a check failed.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use ivrsim::opponents::{build_family, default_family_specs, SpecError};
use ivrsim::verify::{analyze_defeat, check_priority, check_sublemma_equivalence, trace_checks, CheckReport};
use ivrsim::{build_b, parse_strategy_spec, Oracle, StrategySpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

/// Failures listed per failed check before eliding the rest.
const FAILURES_SHOWN: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpponentSource {
    BuiltinDefault,
    None,
    File(PathBuf),
}

impl FromStr for OpponentSource {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "builtin:default" => OpponentSource::BuiltinDefault,
            "none" => OpponentSource::None,
            path => OpponentSource::File(PathBuf::from(path)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub oracle: Oracle,
    pub opponents: OpponentSource,
    pub stages: u64,
    pub trace_out: Option<PathBuf>,
    pub verify: bool,
    pub summary: bool,
    /// Trailing window for the undefeated classification.
    pub window: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            oracle: Oracle::Seeded(42),
            opponents: OpponentSource::BuiltinDefault,
            stages: 10_000,
            trace_out: None,
            verify: false,
            summary: false,
            window: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    CannotRead { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    BadSpec { path: PathBuf, source: SpecError },
    #[error("invalid opponent: {0}")]
    BadOpponent(#[from] SpecError),
    #[error("cannot write trace {}: {source}", path.display())]
    CannotWrite { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

fn load_specs(source: &OpponentSource) -> Result<Vec<StrategySpec>, CliError> {
    match source {
        OpponentSource::BuiltinDefault => Ok(default_family_specs()),
        OpponentSource::None => Ok(Vec::new()),
        OpponentSource::File(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::CannotRead {
                path: path.clone(),
                source,
            })?;
            parse_strategy_spec(&text).map_err(|source| CliError::BadSpec {
                path: path.clone(),
                source,
            })
        }
    }
}

/// Writes `contents` to a sibling temporary file, then renames it over
/// `path`.
fn write_atomically(path: &Path, contents: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    let wrap = |source| CliError::CannotWrite {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(wrap)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        contents(&mut w).map_err(wrap)?;
        w.flush().map_err(wrap)?;
    }
    tmp.persist(path).map_err(|e| wrap(e.error))?;
    Ok(())
}

fn print_check(out: &mut dyn Write, report: &CheckReport) -> io::Result<()> {
    writeln!(out, "{report}")?;
    for failure in report.failures.iter().take(FAILURES_SHOWN) {
        writeln!(out, "  {failure}")?;
    }
    if report.failures.len() > FAILURES_SHOWN {
        writeln!(out, "  ... {} more", report.failures.len() - FAILURES_SHOWN)?;
    }
    Ok(())
}

/// Runs one experiment and returns the exit code it earns.
pub fn run_experiment(config: &RunConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let specs = load_specs(&config.opponents)?;
    let family = build_family(&specs, &config.oracle)?;
    let trace = build_b(&config.oracle, &family, config.stages);

    if let Some(path) = &config.trace_out {
        write_atomically(path, |w| {
            ivrsim::construction::write_trace_csv(&trace, w).map_err(io::Error::from)
        })?;
    }

    let mut passed = true;
    if config.verify {
        let mut reports = trace_checks(&trace);
        reports.push(check_priority(&trace, &family).expect("trace was built from this family"));
        for report in &reports {
            passed &= report.passed();
            print_check(out, report)?;
        }
    }

    if config.summary || config.verify {
        writeln!(
            out,
            "summary oracle={} opponents={} stages={} M_capital={}",
            config.oracle,
            family.len(),
            config.stages,
            trace.final_adversary_capital()
        )?;
        let defeat = analyze_defeat(&trace, &family, config.window).expect("trace was built from this family");
        for o in &defeat.opponents {
            let last = o.last_bet_stage.map_or("none".to_string(), |s| s.to_string());
            let fin = o.final_value.as_ref().map_or("div".to_string(), |v| v.to_string());
            writeln!(
                out,
                "opponent name={} status={} last_bet_stage={} sup_capital={} final={} window={}",
                o.name, o.status, last, o.sup_capital, fin, defeat.window
            )?;
        }
    }

    if config.verify {
        writeln!(out, "verify status={}", if passed { "pass" } else { "fail" })?;
    }
    Ok(if passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

/// Exhaustive comparison of the clause-2c rule with the integer predicate.
pub fn run_sublemma_sweep(bound_g: u64, bound_phi: u64, bound_n: u64, out: &mut dyn Write) -> io::Result<i32> {
    let report = check_sublemma_equivalence(bound_g, bound_phi, bound_n);
    writeln!(
        out,
        "checked {} cases with G<={bound_g} phi<={bound_phi} n<={bound_n}",
        report.cases
    )?;
    if report.verified() {
        writeln!(out, "verified 0 counterexamples")?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "found {} counterexamples", report.counterexamples.len())?;
    for c in report.counterexamples.iter().take(FAILURES_SHOWN) {
        writeln!(
            out,
            "  G={} phi={} n={} rule_follows_A={} predicate_follows_A={}",
            c.g, c.phi, c.n, c.rule_follows_a, c.oracle_follows_a
        )?;
    }
    Ok(EXIT_VERIFY_FAILED)
}

#[derive(Debug, Parser)]
#[command(name = "ivrsim", version, about = "Diagonalize against integer-valued martingales")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build B against an opponent family and optionally verify the trace.
    Run(RunArgs),
    /// Check the clause-2c rule against n·G < phi on a full grid.
    SublemmaSweep {
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        bound_g: u64,
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        bound_phi: u64,
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        bound_n: u64,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// periodic:<bits>, seed:<u64> or prefix:<bits>:<descriptor>
    #[arg(long, default_value = "seed:42")]
    oracle: Oracle,
    /// Spec file path, builtin:default or none
    #[arg(long, default_value = "builtin:default")]
    opponents: OpponentSource,
    #[arg(long, default_value_t = 10_000)]
    stages: u64,
    /// Write the per-stage CSV here
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    summary: bool,
    /// Stages at the end of the trace in which a wager counts as undefeated
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    window: Option<u64>,
}

impl From<RunArgs> for RunConfig {
    fn from(a: RunArgs) -> Self {
        RunConfig {
            oracle: a.oracle,
            opponents: a.opponents,
            stages: a.stages,
            trace_out: a.trace,
            verify: a.verify,
            summary: a.summary,
            window: a.window,
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = if code == EXIT_OK {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(args) => run_experiment(&args.into(), out),
        Command::SublemmaSweep {
            bound_g,
            bound_phi,
            bound_n,
        } => run_sublemma_sweep(bound_g, bound_phi, bound_n, out).map_err(CliError::from),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "ivrsim: {e}");
            e.exit_code()
        }
    }
}
