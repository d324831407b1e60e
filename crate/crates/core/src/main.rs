use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qrflab::group::GroupSpec;
use qrflab::scenario::{self, ReportFormat, RunOptions, ScenarioError, BUILTIN_SCENARIOS};
use qrflab::verify::{self, SuiteKind, SuiteSpec};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "qrflab", version, about = "Quantum reference frame transformations over finite groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(clap::Args)]
struct Common {
    /// Seed for randomized suites.
    #[arg(long)]
    seed: Option<u64>,
    /// Trial count for randomized suites.
    #[arg(long)]
    trials: Option<usize>,
    /// Tolerance for checks.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a builtin scenario.
    Run {
        scenario: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite, given as a suite file or a suite name.
    Verify {
        suite: String,
        /// Replace the suite's group; physical systems reset to its defaults.
        #[arg(long)]
        group: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// List builtin scenarios and suites.
    Examples,
}

fn emit(common: &Common, text: &str) -> Result<(), ExitCode> {
    match &common.out {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            ExitCode::from(EXIT_USAGE)
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn usage_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_USAGE)
}

fn run(arg: &str, common: &Common) -> Result<ExitCode, ExitCode> {
    let scenario = scenario::load_scenario(arg).map_err(usage_error)?;
    let options = RunOptions { seed: common.seed, trials: common.trials, tol: common.tol };
    let report = scenario::run_scenario(&scenario, &options).map_err(usage_error)?;
    let format = match common.format {
        Format::Human => ReportFormat::Human,
        Format::Machine => ReportFormat::Machine,
    };
    emit(common, &scenario::emit_report(&report, format))?;
    match report.first_failure() {
        None => Ok(ExitCode::SUCCESS),
        Some(failure @ ScenarioError::CheckFailure { .. }) => {
            eprintln!("{failure}");
            Ok(ExitCode::from(EXIT_CHECK_FAILED))
        }
        Some(other) => Err(usage_error(other)),
    }
}

fn load_suite(arg: &str) -> Result<SuiteSpec, ExitCode> {
    if SuiteKind::parse(arg).is_some() {
        return SuiteSpec::builtin_named(arg).map_err(usage_error);
    }
    let text = std::fs::read_to_string(arg).map_err(|e| usage_error(format!("cannot read {arg}: {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| usage_error(format!("parse error at line {}, column {}: {e}", e.line(), e.column())))
}

fn verify_cmd(arg: &str, group: Option<&str>, common: &Common) -> Result<ExitCode, ExitCode> {
    let mut spec = load_suite(arg)?;
    if let Some(g) = group {
        spec = spec.with_group(GroupSpec::named(g));
    }
    RunOptions { seed: common.seed, trials: common.trials, tol: common.tol }.apply_to_suite(&mut spec);
    let report = verify::run_suite(&spec).map_err(usage_error)?;
    let text = match common.format {
        Format::Human => report.to_string(),
        Format::Machine => report.to_json(),
    };
    emit(common, &text)?;
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(EXIT_CHECK_FAILED) })
}

fn examples() -> ExitCode {
    println!("scenarios:");
    for (name, _) in BUILTIN_SCENARIOS {
        println!("  {name}");
    }
    println!("suites:");
    for kind in SuiteKind::ALL {
        let s = SuiteSpec::builtin(kind);
        println!("  {:<13} group {}  frames {}  trials {}  seed {}", kind.name(), s.group, s.frames, s.trials, s.seed);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, common } => run(scenario, common),
        Command::Verify { suite, group, common } => verify_cmd(suite, group.as_deref(), common),
        Command::Examples => Ok(examples()),
    };
    result.unwrap_or_else(|code| code)
}
