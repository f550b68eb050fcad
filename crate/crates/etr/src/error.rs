//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected} coordinates, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("expansion budget exceeded: value needs about {required_bits} bits, budget is {budget_bits}")]
    BudgetExceeded { required_bits: u64, budget_bits: u64 },

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("denominator vanished in component {component}")]
    DenominatorZero { component: String },

    #[error("malformed rational \"{text}\": {msg}")]
    Rational { text: String, msg: String },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("fragment violation: {0}")]
    Fragment(String),

    #[error("gadget certification failure: {0}")]
    GadgetCertification(String),

    #[error("witness out of constructed bound: {0}")]
    OutOfBound(String),

    #[error("grid point cap exceeded: {points} points, cap {cap}")]
    GridCap { points: usize, cap: usize },

    #[error("denominator vanishes at grid point {point}")]
    GridDenominatorZero { point: String },

    #[error("missing annotation for variable \"{0}\"")]
    MissingAnnotation(String),

    #[error("json: {0}")]
    Json(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
