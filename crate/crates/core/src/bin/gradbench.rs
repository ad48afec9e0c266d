use std::process::ExitCode;

use clap::Parser;
use gradbench::cli::{dispatch, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli, &mut std::io::stdout().lock()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("gradbench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
