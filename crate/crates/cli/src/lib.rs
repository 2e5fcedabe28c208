//! `trapctl`: design, simulate, tabulate, and verify control protocols
//! for scale-invariant expansions of harmonically trapped gases.
//!
//! Subcommands: `design`, `simulate`, `table`, `wigner`, `verify`,
//! `sweep`. All file outputs are plain text with deterministic 17-digit
//! floats, so repeated runs are byte-identical.

// `!(x > 0.0)` guards reject NaN inputs; the suggested `x <= 0.0` form
// does not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod figures;
pub mod format;
pub mod protocol_file;

use std::fmt;

use trapctl_core::ermakov::ErmakovError;
use trapctl_core::phasespace::PhaseSpaceError;
use trapctl_core::protocol::ProtocolError;
use trapctl_core::verify::VerifyError;

/// Stable exit codes: 0 success, 1 verification failure, 2 input/parse
/// error, 3 numeric failure.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, missing parameters, infeasible designs, unreadable
    /// or malformed files. Exit 2.
    Input(String),
    /// Integration blow-ups and other runtime numeric failures. Exit 3.
    Numeric(String),
    /// A verification gate reported `fail`. Exit 1.
    VerificationFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed => 1,
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "error: {msg}"),
            CliError::Numeric(msg) => write!(f, "numeric failure: {msg}"),
            CliError::VerificationFailed => write!(f, "verification failed"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("i/o: {e}"))
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ErmakovError> for CliError {
    fn from(e: ErmakovError) -> Self {
        match e {
            ErmakovError::InvalidSchedule(_) | ErmakovError::Domain(_) => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<PhaseSpaceError> for CliError {
    fn from(e: PhaseSpaceError) -> Self {
        match e {
            PhaseSpaceError::Domain(_) => CliError::Input(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Ermakov(inner) => inner.into(),
            VerifyError::PhaseSpace(inner) => inner.into(),
            VerifyError::Config(msg) => CliError::Input(msg),
            VerifyError::SampleOverflow { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

/// Run a parsed invocation; returns the process exit code.
pub fn run(cli: args::Cli) -> Result<i32, CliError> {
    commands::dispatch(cli)
}
