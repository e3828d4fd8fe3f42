//! `eigentomo`: one subcommand per run, a JSON report on stdout, files by flag.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 for bad input.

mod args;
mod commands;
mod failure;
mod source;

use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use args::{Cli, Command, Global};
use failure::Failure;

#[derive(Serialize)]
struct Config<'a> {
    #[serde(flatten)]
    global: &'a Global,
    command: &'a Command,
}

#[derive(Serialize)]
struct Report<'a> {
    config: Config<'a>,
    status: &'static str,
    result: serde_json::Value,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.global.workers {
        if w == 0 {
            eprintln!("{}", Failure::BadInput("--workers must be positive".into()));
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("{}", Failure::BadInput(e.to_string()));
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli.command, &cli.global) {
        Ok(outcome) => {
            let report = Report {
                config: Config { global: &cli.global, command: &cli.command },
                status: if outcome.passed { "ok" } else { "failed" },
                result: outcome.result,
            };
            match serde_json::to_string_pretty(&report) {
                Ok(text) => println!("{text}"),
                Err(e) => {
                    eprintln!("cannot serialize report: {e}");
                    return ExitCode::from(2);
                }
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}
