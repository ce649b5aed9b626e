use std::fmt;
use std::io;

use crate::config::ConfigError;

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

/// How a scenario that ran to the end turned out.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Done(String),
    /// A check did not hold; artifacts are complete.
    Failed(String),
    /// The solver aborted; a forensic dump was written.
    BlowUp(String),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Done(_) => EXIT_OK,
            Outcome::Failed(_) => EXIT_FAILED,
            Outcome::BlowUp(_) => EXIT_BLOWUP,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            Outcome::Done(_) => "ok",
            Outcome::Failed(_) => "failed",
            Outcome::BlowUp(_) => "blow-up",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Outcome::Done(m) | Outcome::Failed(m) | Outcome::BlowUp(m) => m,
        }
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Io(io::Error),
    Core(thinns::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Io(_) | RunError::Core(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
            RunError::Core(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<thinns::Error> for RunError {
    fn from(e: thinns::Error) -> Self {
        RunError::Core(e)
    }
}
