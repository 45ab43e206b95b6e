use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid hex profile: {0}")]
    Parse(String),

    #[error("invalid connection polynomial: {0}")]
    Polynomial(String),

    #[error("infeasible budgets: {needed} information bits requested but caps allow only {available} (deficit {deficit})", deficit = .needed - .available)]
    Infeasible { needed: usize, available: usize },

    #[error("list decoding found no nonzero codeword (list size {0})")]
    EmptySpectrum(usize),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
