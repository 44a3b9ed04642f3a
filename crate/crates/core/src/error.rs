use thiserror::Error;

use crate::cost_model::Key;

/// Everything that can go wrong inside the lab.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty-tree")]
    EmptyTree,
    #[error("null-link")]
    NullLink,
    #[error("rotate-root")]
    RotateRoot,
    #[error("key {key} outside universe 1..={n}")]
    KeyOutOfRange { key: Key, n: usize },
    #[error("universe size must be at least {min}, got {n}")]
    TooSmall { n: usize, min: usize },
    #[error("nothing-to-cut")]
    NothingToCut,
    #[error("cut would leave the top auxiliary tree empty")]
    NothingToKeep,
    #[error("bad-join")]
    BadJoin,
    #[error("k-too-large")]
    KTooLarge,
    #[error("working-set size {k} exceeds universe {n}")]
    SetLargerThanUniverse { k: usize, n: usize },
    #[error("degenerate-fit")]
    DegenerateFit,
    #[error("mismatched record sets: {0}")]
    Mismatch(String),
    #[error("structure invariant violated: {0}")]
    Invariant(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
