use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZenoError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParams { name: &'static str, reason: String },

    #[error("argument {value} outside the domain of {op}: {reason}")]
    Domain { op: &'static str, value: f64, reason: &'static str },

    #[error("beta has a pole at lambda = E_A = {0}; use the pole-safe density forms")]
    Pole(f64),

    #[error("quadrature did not converge in {op}: error estimate {error:e}")]
    Quadrature { op: &'static str, error: f64 },

    #[error("bound-state search failed: {0}")]
    RootSearch(String),

    #[error("closure check failed for {which}: residual {residual:e} exceeds {limit:e}")]
    Closure { which: String, residual: f64, limit: f64 },

    #[error("resolution budget exceeded: t = {t} needs {needed} quadrature nodes, budget is {budget}")]
    ResolutionBudget { t: f64, needed: usize, budget: usize },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("survival probability {p:e} at tau = {tau} is not in (0, 1]")]
    NonPositiveSurvival { tau: f64, p: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, ZenoError>;
