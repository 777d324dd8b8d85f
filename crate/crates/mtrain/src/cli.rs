//! `mtrain` command line.
//!
//! Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use mtrain_core::metrics::effectiveness_report;
use mtrain_core::{required_resources, validate_package, CoursePackage, ProcedureId};

use crate::package::parse_package;
use crate::report::{load_expected, load_times, render_table};
use crate::service::{serve, COURSEWARE_DIR_ENV};
use crate::simulate::{simulate_trainee, TraineePolicy};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "mtrain", version, about = "Interactive 3D maintenance-training courseware tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a course package and print the validation report.
    Validate { package: PathBuf },
    /// Summarize a course package: parts, procedures and required resources.
    Inspect { package: PathBuf },
    /// Host every package under a courseware directory over HTTP.
    Serve {
        #[arg(env = COURSEWARE_DIR_ENV)]
        dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
    /// Run a headless trainee through one procedure.
    Simulate {
        package: PathBuf,
        /// Defaults to the first procedure in the manifest.
        #[arg(long)]
        procedure: Option<String>,
        #[arg(long, value_enum, default_value_t = PolicyArg::Perfect)]
        policy: PolicyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.2)]
        error_rate: f64,
        /// Time charged for each trainee action.
        #[arg(long, default_value_t = 30.0)]
        step_seconds: f64,
        /// Print the full session log as JSON instead of a summary.
        #[arg(long)]
        json: bool,
    },
    /// Compute the effort-saved table from baseline and observed durations.
    Report {
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long)]
        observed: PathBuf,
        /// Printed percentages to compare against.
        #[arg(long)]
        expect: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Perfect,
    Random,
    ErrorProne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

type CmdResult = Result<u8, String>;

fn load(path: &Path) -> Result<CoursePackage, String> {
    parse_package(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn dispatch(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Validate { package } => validate(&package, out),
        Command::Inspect { package } => inspect(&package, out),
        Command::Serve { dir, bind } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            rt.block_on(serve(&dir, bind)).map_err(|e| e.to_string())?;
            Ok(EXIT_OK)
        }
        Command::Simulate { package, procedure, policy, seed, error_rate, step_seconds, json } => {
            let pkg = load(&package)?;
            let report = validate_package(&pkg);
            if !report.is_accepted() {
                return Err(format!("{} failed validation:\n{report}", package.display()));
            }
            let procedure = match procedure {
                Some(id) => ProcedureId::from(id),
                None => pkg.procedures[0].procedure_id.clone(),
            };
            let policy = match policy {
                PolicyArg::Perfect => TraineePolicy::Perfect,
                PolicyArg::Random => TraineePolicy::Random { seed },
                PolicyArg::ErrorProne => TraineePolicy::ErrorProne { seed, error_rate },
            };
            let run = simulate_trainee(&pkg, &procedure, policy, step_seconds).map_err(|e| e.to_string())?;
            let text = if json {
                serde_json::to_string_pretty(&run).map_err(|e| e.to_string())?
            } else {
                let m = &run.metrics;
                let task = m.task_minutes.map_or_else(|| "-".to_string(), |t| format!("{t:.2}"));
                format!(
                    "procedure:        {procedure}\nevents:           {}\ntraining minutes: {:.2}\ntask minutes:     {task}\nwrong attempts:   {}\nreplays:          {}",
                    run.session.event_log.len(),
                    m.training_minutes,
                    m.wrong_attempts,
                    m.replays,
                )
            };
            writeln!(out, "{text}").map_err(|e| e.to_string())?;
            Ok(EXIT_OK)
        }
        Command::Report { baseline, observed, expect, format } => {
            let baseline = load_times(&baseline).map_err(|e| e.to_string())?;
            let observed = load_times(&observed).map_err(|e| e.to_string())?;
            let expected = match expect {
                Some(path) => load_expected(&path).map_err(|e| e.to_string())?,
                None => Vec::new(),
            };
            let report = effectiveness_report(&baseline, &observed, &expected).map_err(|e| e.to_string())?;
            let text = match format {
                Format::Text => render_table(&report),
                Format::Json => serde_json::to_string_pretty(&report).map_err(|e| e.to_string())? + "\n",
            };
            write!(out, "{text}").map_err(|e| e.to_string())?;
            Ok(EXIT_OK)
        }
    }
}

fn validate(path: &Path, out: &mut dyn Write) -> CmdResult {
    let pkg = match parse_package(path) {
        Ok(pkg) => pkg,
        Err(e) => {
            writeln!(out, "{}: {e}", path.display()).map_err(|e| e.to_string())?;
            return Ok(EXIT_FAILURE);
        }
    };
    let report = validate_package(&pkg);
    writeln!(out, "{report}").map_err(|e| e.to_string())?;
    Ok(if report.is_accepted() { EXIT_OK } else { EXIT_FAILURE })
}

fn inspect(path: &Path, out: &mut dyn Write) -> CmdResult {
    let pkg = load(path)?;
    let mut s = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(s, "{} ({})", pkg.title, pkg.course_id);
    let _ = writeln!(s, "assembly {}: {}", pkg.assembly.assembly_id, pkg.assembly.name);
    for part in &pkg.assembly.parts {
        let _ = writeln!(s, "  {:<12} {}", part.part_number.as_str(), part.nomenclature);
    }
    for proc in &pkg.procedures {
        let _ = writeln!(s, "procedure {} ({:?}, {} steps)", proc.procedure_id, proc.direction, proc.steps.len());
        let res = required_resources(proc);
        let join = |v: Vec<String>| if v.is_empty() { "-".to_string() } else { v.join(", ") };
        let _ = writeln!(s, "  tools:       {}", join(res.tools.iter().map(ToString::to_string).collect()));
        let _ = writeln!(s, "  consumables: {}", join(res.consumables.clone()));
        let _ = writeln!(s, "  spares:      {}", join(res.spares.clone()));
        for step in &proc.steps {
            let _ = writeln!(s, "  {:>3}. {:?} {}  {}", step.index, step.action, step.part_number, step.callout_text);
        }
    }
    let report = validate_package(&pkg);
    let _ = writeln!(s, "{} asset(s); {report}", pkg.asset_index.len());
    write!(out, "{s}").map_err(|e| e.to_string())?;
    Ok(EXIT_OK)
}
