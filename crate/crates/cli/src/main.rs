mod args;
mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command, Format};
use commands::{execute, CliError, Limits, MAX_N_ENV};
use output::{round_value, write_csv, write_json, RunRecord};

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Bound(_) => "bound",
        Command::Spectrum(_) => "spectrum",
        Command::Irreducibility(_) => "irreducibility",
        Command::ModelMetrics(_) => "model-metrics",
        Command::Protocol(_) => "protocol",
        Command::Table2(_) => "table2",
        Command::Fig1(_) => "fig1",
    }
}

fn emit(cli: &Cli, record: &RunRecord, table: &output::Table) -> Result<(), CliError> {
    let io_err = |e: &dyn std::fmt::Display| CliError::Io(e.to_string());
    let mut sink: Box<dyn Write> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| io_err(&format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cli.format {
        Format::Json => write_json(record, &mut sink).map_err(|e| io_err(&e))?,
        Format::Csv => write_csv(table, &mut sink).map_err(|e| io_err(&e))?,
    }
    sink.flush().map_err(|e| io_err(&e))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let env_cap = std::env::var(MAX_N_ENV).ok();
    let limits = Limits::resolve(cli.allow_large, env_cap.as_deref())?;
    let out = execute(cli, limits)?;
    let record = RunRecord {
        command: command_name(&cli.command).to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        params: round_value(out.params),
        results: round_value(out.results),
        tolerances: round_value(out.tolerances),
    };
    emit(cli, &record, &out.table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if matches!(e, CliError::Usage(_)) {
                eprintln!("error: {e}");
            } else {
                let record = json!({"error": {"kind": e.kind(), "command": command_name(&cli.command), "message": e.to_string()}});
                eprintln!("{record}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
