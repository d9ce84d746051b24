use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{what} must be nonnegative, got {value}")]
    NegativeConcentration { what: &'static str, value: f64 },
    #[error("invalid parameter {name} = {value}: {why}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        why: &'static str,
    },
    #[error("growth law fails its hypothesis check: {0}")]
    Hypothesis(String),
    #[error("equation has no admissible interval: {0}")]
    Infeasible(String),
    #[error("internal consistency error: {0}")]
    Consistency(String),
    #[error("step size underflow at t = {t:.6e} (h = {h:.3e}); lower the tolerance or shrink the minimum step")]
    Stiffness { t: f64, h: f64 },
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, ModelError>;
