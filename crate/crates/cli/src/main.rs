use std::process::ExitCode;

use clap::Parser;
use relaycap_cli::{emit, execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli).and_then(|run| emit(&run)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("relaycap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
