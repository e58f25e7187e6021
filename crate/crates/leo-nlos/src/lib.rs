//! Command line front end, CSV output and spectral estimation for
//! [`leo_nlos_core`].

// `!(x > 0.0)` style checks are there to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod periodogram;
pub mod schedule;
pub mod table;

pub use cli::run;

/// Exit status for bad input.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when a numerical method fails or a target cannot be met.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Model(#[from] leo_nlos_core::Error),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}
