//! Command-line front end for `lens-torsion`: invariant tables, verification
//! sweeps, structural self-checks and closed-form tables, with JSON and CSV
//! output.

pub mod args;
pub mod commands;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::{Cli, Command};
pub use commands::{exit_code, EXIT_FAIL, EXIT_INVALID, EXIT_OK};

/// Parse `argv` and run the chosen subcommand; returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match &cli.command {
        Command::Compute(a) => commands::compute(a, out, err),
        Command::Verify(a) => commands::verify(a, out, err),
        Command::Selfcheck(a) => commands::selfcheck(a, out, err),
        Command::Oracle(a) => commands::oracle(a, out, err),
    }
}
