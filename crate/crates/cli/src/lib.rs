//! Command-line front end for `funcboost`: curve tables in, coefficient
//! tables, model files, predictions, and cross-validation curves out.

pub mod commands;
pub mod model_file;
pub mod table;

/// Invalid or conflicting command-line flags (exit code 1).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}
