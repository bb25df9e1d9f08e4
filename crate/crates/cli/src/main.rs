//! `dfw`: config-driven front end for the dfw-core numerics.

mod commands;
mod config;
mod output;

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use config::CommandName;

#[derive(Parser, Debug)]
#[command(name = "dfw", version, about = "Distance-function wavelet numerics")]
struct Cli {
    #[arg(value_enum)]
    command: CommandName,
    /// JSON run configuration with a matching `command` field.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sample CSV files with header `x1,f` or `x1,x2,f`.
    #[arg(long, num_args = 1..)]
    data: Vec<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Print the full default config for the command and exit.
    #[arg(long)]
    print_defaults: bool,
}

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numeric(String),
}

impl Failure {
    pub fn validation(e: impl Display) -> Self {
        Failure::Validation(e.to_string())
    }

    pub fn numeric(e: impl Display) -> Self {
        Failure::Numeric(e.to_string())
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numeric(_) => 1,
        }
    }
}

impl Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "validation failed: {m}"),
            Failure::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("DFW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| Failure::validation(format!("DFW_THREADS must be a non-negative integer, got {raw:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(Failure::numeric)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let name = cli.command.as_str();
    if cli.print_defaults {
        println!("{}", serde_json::to_string_pretty(&config::defaults(cli.command)).expect("defaults serialise"));
        return Ok(());
    }
    configure_threads()?;
    let path = cli.config.as_ref().ok_or_else(|| Failure::validation("--config is required"))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::validation(format!("cannot read config {}: {e}", path.display())))?;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    let body = config::split_command(cli.command, doc)?;
    let start = Instant::now();
    let outcome = commands::dispatch(cli.command, body, &cli.data)?;
    let report = output::emit(&cli.out, name, outcome.config, outcome.diagnostics, &outcome.artifacts)?;
    let rows: usize = report.outputs.iter().map(|o| o.rows).sum();
    eprintln!(
        "dfw {name}: {} files, {rows} rows in {} ({:.3} s)",
        report.outputs.len() + 1,
        cli.out.display(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("dfw {}: {f}", cli.command.as_str());
            ExitCode::from(f.code())
        }
    }
}
