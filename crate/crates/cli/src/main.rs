mod args;
mod commands;
mod error;
mod table;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::Status;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(cli.command) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => {
            eprintln!("warning: solver did not converge; outputs were written");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
