//! Command-line front end: argument parsing, report documents and rendering.

pub mod args;
pub mod commands;
pub mod render;
pub mod report;

use std::io::Write;

use args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERIC,
            message: message.into(),
        }
    }

    fn write(e: std::io::Error) -> Self {
        Self::data(format!("cannot write output: {e}"))
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<bookmaker::Error> for CliError {
    fn from(e: bookmaker::Error) -> Self {
        use bookmaker::Error::*;
        let code = match e {
            Usage(_) => EXIT_USAGE,
            Data(_) | ZeroMargin { .. } => EXIT_DATA,
            UndefinedCorrelation { .. } | OutOfCalibrationRange(_) | Numeric(_) => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Evaluate(a) => commands::evaluate(a, out),
        Command::Significance(a) => commands::significance(a, out),
        Command::Confidence(a) => commands::confidence(a, out),
        Command::Compare(a) => commands::compare(a, out),
        Command::Simulate(a) => commands::simulate(a, out),
    }
}
