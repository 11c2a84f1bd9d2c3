use thiserror::Error;

use crate::liouville::BasisTag;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("non-physical state: {0}")]
    NonPhysicalState(String),

    #[error("dimension mismatch: operator is {operator:?} ({operator_dim}), state is {state:?} ({state_dim})")]
    DimensionMismatch {
        operator: BasisTag,
        operator_dim: usize,
        state: BasisTag,
        state_dim: usize,
    },

    #[error("steady state is not unique (second-smallest singular value {sigma:e}, threshold {threshold:e})")]
    DegenerateSteadyState { sigma: f64, threshold: f64 },

    #[error("time {t} is not a point of the kernel grid (step {step}, last point {end})")]
    OffGrid { t: f64, step: f64, end: f64 },

    #[error("no closed form for {0}")]
    UncoveredSelector(String),

    #[error("zero bias: |f_L - f_R| = {0:e}")]
    ZeroBias(f64),

    #[error("coherence too small for a current/coherence ratio: |c| = {0:e}")]
    ZeroCoherence(f64),

    #[error("current too small for a KUR ratio: {0:e}")]
    ZeroCurrent(f64),

    #[error("concurrence does not change sign on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, EngineError>;
