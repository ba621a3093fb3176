use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A truncation dimension is too small for the requested object.
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// Two operands do not share mode count or cutoffs.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A parameter lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The state's trace deficit exceeds the hard budget.
    #[error("trace deficit {deficit:.3e} exceeds budget {budget:.1e}")]
    TraceDeficit { deficit: f64, budget: f64 },

    /// A density matrix failed Hermiticity or positivity checks.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A quantity that must be real (or non-negative) is not, beyond tolerance.
    #[error("numeric integrity: {0}")]
    NumericIntegrity(String),

    /// The synthesized Gaussian reference does not reproduce the target moments.
    #[error("synthesis failure: {0}")]
    SynthesisFailure(String),

    /// Conditioning on a measurement outcome with (numerically) zero probability.
    #[error("conditioning error: outcome probability {0:.3e}")]
    Conditioning(f64),

    /// An iterative search exhausted its budget.
    #[error("no convergence after {evaluations} evaluations (best value {best:.6e})")]
    Convergence { evaluations: usize, best: f64 },

    /// The characteristic-function grid does not cover the support.
    #[error("grid coverage: boundary magnitude {0:.3e} above 1e-6")]
    GridCoverage(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
