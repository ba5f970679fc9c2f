use thiserror::Error;

/// Errors raised across the torus construction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("small denominator at tail mode {j} (weight index {weight}), time mode {k}: |k - Omega| = {distance:e} < {bound:e}")]
    SmallDenominator {
        j: usize,
        weight: f64,
        k: i64,
        distance: f64,
        bound: f64,
    },

    #[error("range iteration does not contract (step ratio {ratio:.3} at iteration {iteration})")]
    NoContraction { ratio: f64, iteration: usize },

    #[error("singular Hessian of the averaged nonlinearity (det = {det:e})")]
    SingularHessian { det: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("beta consistency violated: |beta| = {beta:e} > {tol:e}")]
    BetaNotSmall { beta: f64, tol: f64 },

    #[error("degenerate denominator {value:e} in {what}")]
    DegenerateDenominator { what: &'static str, value: f64 },

    #[error("integer vector {0:?} has no unimodular completion (gcd != 1)")]
    NoUnimodularCompletion(Vec<i64>),

    #[error("mass {m} outside the admissible interval ({lo}, {hi})")]
    MassOutOfRange { m: f64, lo: f64, hi: f64 },

    #[error("prefix length Q = {q} too small: |m - target| = {distance:e} > delta = {delta:e}")]
    PrefixTooShort { q: usize, distance: f64, delta: f64 },

    #[error("integration rejected: {0}")]
    StepRejection(String),

    #[error("frequency fit degenerate: {0}")]
    FitDegenerate(String),

    #[error("gradient oracle failure: {0}")]
    Oracle(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
