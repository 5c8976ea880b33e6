use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use escs::scenario::{
    emit_report, load_config, run_case, sweep, write_row_csv, write_summary_csv, EmitFormat,
    PolicySelection, ScenarioConfig, ScenarioError, REPORT_HEADER,
};

#[derive(Parser)]
#[command(name = "escs", version, about = "Collision severity prediction and path selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the configured grid and write reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the policy in the config file.
        #[arg(long)]
        policy: Option<PolicySelection>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// csv, plots or all.
        #[arg(long, default_value = "csv")]
        emit: EmitFormat,
    },
    /// Evaluate one case and print its report row.
    Case {
        #[arg(long)]
        v0: f64,
        #[arg(long)]
        occupants: u32,
        #[arg(long)]
        pedestrians: u32,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

enum Failure {
    Validation(String),
    Io(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

fn stdout_failure(e: io::Error) -> Failure {
    Failure::Io(format!("cannot write to standard output: {e}"))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            policy,
            out,
            emit,
        } => {
            let mut cfg = load_config(&config).map_err(ScenarioError::from)?;
            if let Some(p) = policy {
                cfg.policy = p;
            }
            let report = sweep(&cfg)?;
            let files = emit_report(&report, &cfg, &out, emit)?;
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_summary_csv(&mut lock, &report).map_err(stdout_failure)?;
            writeln!(lock, "wrote {} files to {}", files.len(), out.display())
                .map_err(stdout_failure)?;
            Ok(())
        }
        Command::Case {
            v0,
            occupants,
            pedestrians,
            config,
        } => {
            let cfg = match config {
                Some(path) => load_config(path).map_err(ScenarioError::from)?,
                None => ScenarioConfig::default(),
            };
            let row = run_case(&cfg, v0, occupants, pedestrians)?;
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            writeln!(lock, "{REPORT_HEADER}").map_err(stdout_failure)?;
            write_row_csv(&mut lock, &row).map_err(stdout_failure)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
