use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid hypothesis statistics: |rho| = {rho_abs} must be < 1")]
    InvalidStats { rho_abs: f64 },

    #[error("degenerate channel: branch {branch} has zero direct-link gain")]
    DegenerateChannel { branch: usize },

    #[error("division by zero: denominator sample on branch {branch} is zero")]
    DivisionByZero { branch: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("every antenna pair is degenerate (eta = +inf for all pairs)")]
    AllPairsDegenerate,

    #[error("paired comparison mismatch: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
