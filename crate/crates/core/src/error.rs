use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("explorer count {k} outside [{min}, {max}]")]
    CountOutOfRange { k: usize, min: usize, max: usize },

    #[error(
        "global regime with n = {n} exceeds the exact limit {limit}; a Monte Carlo estimate is required"
    )]
    EstimateRequired { n: usize, limit: usize },

    #[error("{operation} is only defined for the local observation regime; use {alternative}")]
    LocalOnly {
        operation: &'static str,
        alternative: &'static str,
    },

    #[error("no interior mixed equilibrium: pi = {pi} lies outside ({pi_lower}, {pi_bar}]")]
    NoInteriorMixedEquilibrium { pi: f64, pi_lower: f64, pi_bar: f64 },

    #[error("argument {x} outside the domain of the principal Lambert W branch")]
    LambertDomain { x: f64 },

    #[error("near-critical point: |1 - lambda*psi| = {gap:e} at lambda = {lambda}, z = {z}")]
    NearCritical { lambda: f64, z: f64, gap: f64 },

    #[error("population n = {n} too large for {what} (limit {limit})")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("replicate count {reps} too small (need at least {min})")]
    TooFewReplicates { reps: usize, min: usize },

    #[error("empty grid")]
    EmptyGrid,

    #[error("invalid strategy profile: {0}")]
    InvalidProfile(String),
}

impl Error {
    /// True for errors caused by a numerical domain restriction rather than a
    /// malformed request.
    pub fn is_numeric_domain(&self) -> bool {
        matches!(
            self,
            Error::EstimateRequired { .. }
                | Error::NoInteriorMixedEquilibrium { .. }
                | Error::LambertDomain { .. }
                | Error::NearCritical { .. }
                | Error::TooLarge { .. }
        )
    }
}
