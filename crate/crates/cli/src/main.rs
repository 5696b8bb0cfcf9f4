use clap::Parser;
use std::process::ExitCode;
use subdom_cli::{load, run, Cli, RunError, SEED_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_seed = std::env::var(SEED_ENV).ok();
    let outcome = load(cli, env_seed.as_deref())
        .map_err(RunError::from)
        .and_then(|cfg| run(&cfg));
    match outcome {
        Ok(summary) => {
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
