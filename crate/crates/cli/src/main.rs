use std::process::ExitCode;

use adia_cli::app::{configure_threads, execute, Cli};
use clap::error::ErrorKind;
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                // bad flags are configuration errors
                _ => ExitCode::from(1),
            };
        }
    };
    let threads = std::env::var("ADIA_THREADS").ok();
    match configure_threads(threads.as_deref()).and_then(|_| execute(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
