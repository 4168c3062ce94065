mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};

/// Exit status 2: bad flags, configuration or inputs.
pub const EXIT_USAGE: u8 = 2;
/// Exit status 3: the run itself failed.
pub const EXIT_RUNTIME: u8 = 3;

/// A failed command and the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_USAGE, error: error.into() }
    }

    pub fn runtime(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_RUNTIME, error: error.into() }
    }
}

impl From<fcmstop_core::Error> for Failure {
    fn from(e: fcmstop_core::Error) -> Self {
        use fcmstop_core::Error as E;
        match e {
            E::Config(_)
            | E::Input(_)
            | E::Ingestion { .. }
            | E::Parse { .. }
            | E::Schema { .. }
            | E::IncompatibleVersion { .. } => {
                Self::usage(e)
            }
            _ => Self::runtime(e),
        }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

fn init_logging(cli: &Cli) {
    let level = if cli.quiet {
        "error"
    } else {
        match cli.verbose {
            0 => "info",
            1 => "debug",
            _ => "trace",
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(&cli);
    let result = match cli.command {
        Command::Calibrate(a) => commands::calibrate(&a),
        Command::Classify(a) => commands::classify(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Cost(a) => commands::cost(&a),
        Command::Synth(a) => commands::synth(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
