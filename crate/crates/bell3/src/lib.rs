//! Command-line front end for the `bell3-core` library: file formats,
//! command implementations and the error classes that map to exit codes.
//!
//! Every command renders into a `String` so the binary stays a thin shell
//! and the output can be tested without spawning a process.

pub mod commands;
pub mod format;

use bell3_core::Error;

/// Failure classes of the command-line tool, one exit code each.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The computation is well posed but has no acceptable answer
    /// (dependent target set, no violation, failed expectation).
    #[error("{0}")]
    Domain(String),
    /// Malformed input: bad JSON, unknown names, out-of-range labels.
    #[error("{0}")]
    Parse(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    /// Parsed, but not a probability table.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    /// A valid table whose marginals depend on the remote setting.
    #[error("no-signaling check failed: {0}")]
    Signaling(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Parse(_) | CliError::Io { .. } => 2,
            CliError::InvalidDistribution(_) => 3,
            CliError::Signaling(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::WrongLength(_) | Error::NegativeProbability { .. } | Error::NotNormalized { .. } => {
                CliError::InvalidDistribution(msg)
            }
            Error::Signaling { .. } => CliError::Signaling(msg),
            Error::InvalidSetting(_)
            | Error::InvalidOutcome(_)
            | Error::InvalidFlatIndex(_)
            | Error::InvalidCglmpChoice { .. }
            | Error::InvalidWFamilyChoice
            | Error::InvalidTargets(_)
            | Error::OutOfUnitInterval { .. } => CliError::Parse(msg),
            _ => CliError::Domain(msg),
        }
    }
}
