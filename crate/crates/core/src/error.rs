use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    /// A search or construction outgrew its configured limit. This is never
    /// reported as a negative answer.
    #[error("cap exceeded: {what} needs more than {limit}")]
    CapExceeded { what: &'static str, limit: usize },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn mismatch(msg: impl Into<String>) -> Self {
        Error::AlphabetMismatch(msg.into())
    }
}

/// Size limits for the exponential constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Subset-construction states.
    pub max_states: usize,
    /// Carrier size of any algebra built by exploration.
    pub max_carrier: usize,
    /// Total annotation bit-width of a cascade.
    pub max_width: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_states: 4096,
            max_carrier: 4096,
            max_width: 16,
        }
    }
}
