//! `siclab` — security analysis of encrypted control loops against
//! least-squares identification.
//!
//! Exit codes: 0 on success (including a "secure" verdict), 3 for an
//! unsecure verdict, 2 for any input or validation error. Data goes to
//! stdout (or `--output`), diagnostics to stderr.

mod cli;
mod commands;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let args = match cli::Cli::try_parse() {
        Ok(args) => args,
        Err(err) => {
            // clap renders help/version on stdout with success, usage
            // errors on stderr; keep the exit-code contract {0, 2}
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(args) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
