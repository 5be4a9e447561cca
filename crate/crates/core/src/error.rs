use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("position {position} is outside the schedule (length {length})")]
    OutOfSchedule { position: u64, length: u64 },

    #[error("array format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("enumeration needs {needed} cases but the budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}
