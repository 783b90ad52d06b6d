//! `vissm`: invariant checks, engine benchmarks, controlled studies and CSV forecasts.

mod args;
mod check;
mod commands;
mod config;
mod csv_io;
mod error;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Check(a) => commands::check(a),
        Command::Bench(a) => commands::bench(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Forecast(a) => commands::run_forecast(a),
    };
    if let Err(e) = result {
        eprintln!("vissm: {e}");
        std::process::exit(e.exit_code());
    }
}
