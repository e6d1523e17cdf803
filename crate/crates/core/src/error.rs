use thiserror::Error;

/// Failures raised by the construction pipeline and its checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate input: all coefficients vanish")]
    DegenerateInput,
    #[error("form is not hyperbolic with respect to (1,0,0)")]
    NotHyperbolic,
    #[error("interlacing hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("perturbation did not produce a smooth hyperbolic form (eps = {eps:e})")]
    PerturbationFailed { eps: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("circle parameter is not real: {0}")]
    NonrealCircle(String),
    #[error("polynomial root solve failed: {0}")]
    SolveFailed(String),
    #[error("leading coefficient of f(0,u,1) vanishes")]
    LeadingZero,
    #[error("real intersection point of odd multiplicity")]
    RealSimplePoint,
    #[error("ambiguous orbit clustering: {0}")]
    AmbiguousOrbits(String),
    #[error("no vanishing form in eigenspace {ell}: smallest singular value {sigma:e}")]
    NoVanishingForm { ell: usize, sigma: f64 },
    #[error("Noether division residual {residual:e} exceeds tolerance for entry ({i},{j})")]
    NoetherResidual { i: usize, j: usize, residual: f64 },
    #[error("adjugate fit holdout residual {residual:e} exceeds tolerance")]
    AdjugateMismatch { residual: f64 },
    #[error("pencil violates the shift pattern: {0}")]
    PatternViolation(String),
    #[error("pencil diagonal is indefinite")]
    IndefiniteDiagonal,
    #[error("perturbation schedule did not converge: {0}")]
    ConvergenceFailed(String),
    #[error("weight product is not real (relative imaginary part {0:e})")]
    NotDihedral(f64),
    #[error("forward oracles disagree by {0:e}")]
    OracleDisagreement(f64),
    #[error("final verification error {0:e} exceeds tolerance")]
    FinalMismatch(f64),
}

impl Error {
    /// Errors that come from bad input rather than numerical trouble.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::DegenerateInput | Error::NotHyperbolic | Error::Precondition(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
