use thiserror::Error;

/// Errors produced by design, decoding and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("quantizer boundary {index} out of range for {outputs} channel outputs")]
    BoundaryOutOfRange { index: usize, outputs: usize },

    #[error("exhaustive search over {candidates} candidates exceeds the limit of {limit}")]
    GuardExceeded { candidates: u128, limit: u128 },

    #[error("symbol {0} has zero probability under both inputs")]
    DegenerateSymbol(usize),

    #[error("design collapsed at iteration {iteration}: {detail}")]
    DesignCollapse { iteration: usize, detail: String },

    #[error("threshold bracket invalid: {0}")]
    Bracket(String),

    #[error("alist parse error at line {line}: {msg}")]
    Alist { line: usize, msg: String },

    #[error("decoder spec format error: {0}")]
    SpecFormat(String),

    #[error("unsupported decoder spec version {found} (expected {expected})")]
    SpecVersion { found: i64, expected: i64 },

    #[error("bit-width violation: {0}")]
    BitWidth(String),

    #[error("code/spec mismatch: {0}")]
    Incompatible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
