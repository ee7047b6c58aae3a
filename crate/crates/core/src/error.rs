use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} outside its domain (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("Heisenberg bound violated: FK - R^2 = {product} < 1/4")]
    HeisenbergViolation { product: f64 },

    #[error("operator coefficient A must be positive (got {a})")]
    NonPositiveA { a: f64 },

    #[error("C4/2F^2 = {target} is not reachable (infimum {infimum})")]
    Unreachable { target: f64, infimum: f64 },

    #[error("operation requires the peaked regime")]
    Regime,

    #[error("Wigner integral is not positive ({value:e}) at N = {n}")]
    QuadratureNonPositive { value: f64, n: u32 },

    #[error("large-N extrapolation not converged: spread {spread:e} > {tol:e}")]
    NotConverged { value: f64, spread: f64, tol: f64 },

    #[error("asymptotic regime violated: |beta| phi0 = {product} but N/2 = {half_n}")]
    AsymptoticRegimeViolation { product: f64, half_n: f64 },

    #[error("root finder failed: {0}")]
    NoRoot(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
