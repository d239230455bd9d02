use std::process::ExitCode;

use clap::Parser;
use grounded_cli::cli::Cli;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.run() {
        Ok(report) => {
            print!("{report}");
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &report) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::FAILURE;
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
