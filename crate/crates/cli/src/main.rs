mod args;
mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::{log_line, CliError};

fn run(cli: Cli) -> Result<(), CliError> {
    let run_config = cli.run_config.as_deref();
    let command = &cli.command;
    match command {
        Command::Parse(a) => commands::parse(config::resolve_parse(run_config, command, a)?),
        Command::Novelty(a) => commands::novelty(config::resolve_novelty(run_config, command, a)?),
        Command::Report(a) => commands::report(config::resolve_report(run_config, command, a)?),
        Command::Simulate(a) => commands::simulate_cmd(config::resolve_simulate(run_config, command, a)?),
        Command::Plan(a) => commands::plan(config::resolve_plan(run_config, command, a)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = err.print();
                return ExitCode::SUCCESS;
            }
            let _ = err.print();
            let rendered = err.to_string();
            let first = rendered.lines().next().unwrap_or_default();
            eprintln!("{}", log_line("error", "usage", first.trim_start_matches("error: ")));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", log_line("error", err.kind(), err.message()));
            ExitCode::from(err.exit_code())
        }
    }
}
