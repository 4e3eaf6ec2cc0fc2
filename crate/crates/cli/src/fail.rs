//! Failure type carrying the process exit code.
//!
//! The documented code map: 0 success; 2 usage errors (argument parsing,
//! raised by clap before any work starts); 3 file-system failures; 4
//! invalid configuration or file contents, including infeasible code
//! parameters; 5 incompatible artifacts, such as a Q-table trained for a
//! different graph or an output directory holding another run's results.

use gldpc_core::alist::AlistError;
use gldpc_core::channel::ChannelError;
use gldpc_core::component::ComponentError;
use gldpc_core::config::ConfigError;
use gldpc_core::graph::GraphError;
use gldpc_core::harness::HarnessError;
use gldpc_core::rl::RlError;
use std::path::Path;

pub const IO: u8 = 3;
pub const VALIDATION: u8 = 4;
pub const INCOMPATIBLE: u8 = 5;

/// An error plus the exit code its class maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type CliResult<T> = Result<T, Failure>;

impl Failure {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self { code: IO, error: anyhow::anyhow!("{}: {source}", path.display()) }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Self { code: VALIDATION, error: anyhow::anyhow!(msg.into()) }
    }

    pub fn incompatible(msg: impl Into<String>) -> Self {
        Self { code: INCOMPATIBLE, error: anyhow::anyhow!(msg.into()) }
    }
}

fn rl_code(err: &RlError) -> u8 {
    match err {
        RlError::Io { .. } => IO,
        RlError::ShapeMismatch { .. }
        | RlError::ModeMismatch { .. }
        | RlError::AlreadyTrained { .. } => INCOMPATIBLE,
        _ => VALIDATION,
    }
}

impl From<HarnessError> for Failure {
    fn from(err: HarnessError) -> Self {
        let code = match &err {
            HarnessError::Io { .. } | HarnessError::ThreadPool(_) => IO,
            HarnessError::Rl(inner) => rl_code(inner),
            HarnessError::MissingPolicy(_)
            | HarnessError::PolicyGrid { .. }
            | HarnessError::PolicyTag { .. }
            | HarnessError::PolicyMode(..)
            | HarnessError::MismatchedGrids => INCOMPATIBLE,
            _ => VALIDATION,
        };
        Self { code, error: err.into() }
    }
}

impl From<RlError> for Failure {
    fn from(err: RlError) -> Self {
        Self { code: rl_code(&err), error: err.into() }
    }
}

macro_rules! validation_error {
    ($ty:ty) => {
        impl From<$ty> for Failure {
            fn from(err: $ty) -> Self {
                Self { code: VALIDATION, error: err.into() }
            }
        }
    };
}

validation_error!(ConfigError);
validation_error!(GraphError);
validation_error!(AlistError);
validation_error!(ComponentError);
validation_error!(ChannelError);
