use thiserror::Error;

use crate::metric::Quadruple;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("invalid monoid: {0}")]
    InvalidSpec(String),
    #[error("{0} is not an element of the carrier")]
    NotInCarrier(String),
    #[error("unknown carrier element {0:?}")]
    UnknownElement(String),
    #[error("unknown builtin monoid {0:?}")]
    UnknownBuiltin(String),
    #[error("operation unsupported at ({r}, {s}): {reason}")]
    Unsupported { r: String, s: String, reason: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("no four-values completion for {0}")]
    AmalgamationFailure(Box<Quadruple>),
    #[error("unbound variable {0}")]
    UnboundVariable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
