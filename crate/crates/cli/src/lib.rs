//! Command-line driver for waffle-core: reads one JSON document describing a
//! graph of surfaces and churros, runs the requested stages and writes a
//! deterministic JSON report.
//!
//! Exit codes: 0 certificate (or completed stage), 2 obstruction,
//! 3 precondition failure (schema, non-filling, window too small),
//! 1 internal error or oracle disagreement.

pub mod figures;
pub mod input;
pub mod oracle;
pub mod pipeline;
pub mod settings;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use input::InputError;
use oracle::{run_oracle, Oracle};
use pipeline::{run_with, OutcomeKind, Report, Stage};
use settings::{load_config, Settings};

#[derive(Debug, Parser)]
#[command(name = "waffle", version, about = "Line patterns, waffles, clutching and groupings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Input document (JSON).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Directory for SVG figures of every window built.
    #[arg(long, global = true)]
    pub figures: Option<PathBuf>,
    /// Seed for sampled checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Configuration file (JSON: tolerances, seed, oracle sample sizes).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Include per-stage wall-clock times (makes reports non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Is each surface's curve system filling?
    CheckFilling,
    /// Cubulate each surface window.
    Cubulate,
    /// Strand lengths and clutching ratios per churro.
    Clutching,
    /// Cycle balance of the quotient graph.
    Balance,
    /// Augmentation and grouping certificate or obstruction.
    Group,
    /// Everything: filling, waffles, clutching, balance, grouping.
    Certify,
    /// Independent brute-force checks.
    Oracle {
        #[arg(value_enum)]
        which: Oracle,
    },
}

impl Command {
    fn stage(&self) -> Option<Stage> {
        Some(match self {
            Command::CheckFilling => Stage::CheckFilling,
            Command::Cubulate => Stage::Cubulate,
            Command::Clutching => Stage::Clutching,
            Command::Balance => Stage::Balance,
            Command::Group => Stage::Group,
            Command::Certify => Stage::Certify,
            Command::Oracle { .. } => return None,
        })
    }

    fn name(&self) -> String {
        match self {
            Command::Oracle { which } => format!("oracle {}", serde_json::to_value(which).unwrap().as_str().unwrap()),
            c => c.stage().unwrap().name().to_owned(),
        }
    }
}

fn input_failure(command: &str, errors: Vec<InputError>, settings: &Settings) -> Report {
    let message = errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
    Report::rejected(command, OutcomeKind::Precondition, json!({ "message": message, "errors": errors }), settings)
}

/// Runs a parsed command line and returns its report.
pub fn execute(cli: &Cli) -> Report {
    let command = cli.command.name();
    let mut settings = Settings { timing: cli.timing, ..Settings::default() };
    if let Some(path) = &cli.config {
        match load_config(path) {
            Ok(c) => settings = settings.with_config(&c),
            Err(e) => return input_failure(&command, e, &settings),
        }
    }
    if let Some(seed) = cli.seed {
        settings.seed = seed;
    }
    let spec = match &cli.input {
        Some(path) => match input::parse(path) {
            Ok(s) => Some(s),
            Err(e) => return input_failure(&command, e, &settings),
        },
        None => None,
    };
    if let Some(s) = &spec {
        settings = settings.with_input(&s.tolerances);
    }
    match (cli.command.stage(), spec) {
        (None, spec) => {
            let Command::Oracle { which } = cli.command else { unreachable!() };
            run_oracle(which, spec.as_ref(), &settings)
        }
        (Some(_), None) => Report::rejected(&command, OutcomeKind::Precondition, json!({ "message": "--input is required" }), &settings),
        (Some(stage), Some(spec)) => {
            let plan = Stage::plan(stage, &spec);
            let figures = cli.figures.clone();
            run_with(&spec, &command, &plan, &settings, |cx| match &figures {
                Some(dir) => figures::write_all(dir, cx),
                None => Ok(vec![]),
            })
        }
    }
}

/// Full CLI behaviour: parse arguments, run, emit the report; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { OutcomeKind::Precondition.exit_code() } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let report = execute(&cli);
    let text = report.to_json();
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(m) = written {
        eprintln!("waffle: cannot write report: {m}");
        return OutcomeKind::Internal.exit_code();
    }
    if let Some(d) = &report.outcome.diagnostic {
        if let Some(m) = d["message"].as_str() {
            eprintln!("waffle: {}: {m}", cli.command.name());
        }
    }
    report.exit_code()
}
