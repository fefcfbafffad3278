use std::process::ExitCode;

use clap::Parser;
use s2s2_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match s2s2_cli::run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
