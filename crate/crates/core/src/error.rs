use thiserror::Error;

/// Everything that can go wrong in the geometry and comparison routines.
///
/// Inequality violations found while *verifying* a comparison are not errors;
/// they are recorded in [`crate::triangle::ComparisonReport`]. The variants
/// here are raised when an operation cannot produce its result at all.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid warping function `{name}`: {reason}")]
    InvalidWarping { name: String, reason: String },

    #[error("height {t} lies outside the domain [0, {domain_max}]")]
    Domain { t: f64, domain_max: f64 },

    #[error("geodesic left the truncated domain at height {height} (domain_max {domain_max})")]
    Truncation { height: f64, domain_max: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("turning point inside the integration range: m({t}) = {m} <= nu = {nu}")]
    Branch { t: f64, m: f64, nu: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("no connecting geodesic found from ({0}, {1}) to ({2}, {3})")]
    Connectivity(f64, f64, f64, f64),

    #[error("comparison triangle (a={a}, b={b}, c={c}) is not realizable in this model: {reason}")]
    NotRealizable { a: f64, b: f64, c: f64, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("curvature ordering violated: {0}")]
    Ordering(String),

    #[error("comparison inequality violated: {0}")]
    ComparisonViolation(String),

    #[error("curve shortening left the domain: {0}")]
    ConvexityViolation(String),

    #[error("iteration did not converge: {0}")]
    Iteration(String),

    #[error("solver blew up: {0}")]
    Solver(String),

    #[error("invalid input table: {0}")]
    Table(String),

    #[error("invalid experiment configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
