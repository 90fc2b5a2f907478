mod args;
mod commands;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use deltaprime::Error;

use crate::args::Cli;
use crate::commands::Outcome;

const THREADS_VAR: &str = "DELTAPRIME_THREADS";

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) | Error::NotResonant { .. } | Error::Io { .. } => 2,
        Error::NumericalFailure { .. } => 3,
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("{THREADS_VAR} must be a non-negative integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidInput(format!("cannot configure {n} threads: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };

    let result = configure_threads().and_then(|()| commands::run(&cli.command));
    match result {
        Ok(outcome) => {
            let text = match outcome {
                Outcome::Print(out) => out.render(cli.format),
                Outcome::Text(t) => t,
                Outcome::Silent => String::new(),
            };
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NumericalFailure {
                determinant: Some(d), ..
            } = &e
            {
                eprintln!("determinant estimate: {d:e}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
