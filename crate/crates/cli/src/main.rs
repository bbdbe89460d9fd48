use std::process::ExitCode;

use clap::Parser;
use exotic_vortex_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli.command);
    if let Some(report) = &outcome.report {
        println!("{}", serde_json::to_string_pretty(report).expect("JSON values always serialize"));
    }
    if let Some(message) = &outcome.message {
        eprintln!("error: {message}");
    }
    ExitCode::from(outcome.code)
}
