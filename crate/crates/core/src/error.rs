use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("boundary point at angle {angle} lies within {tolerance:e} of the spectrum")]
    BoundarySpectrumPoint { angle: f64, tolerance: f64 },

    #[error("zero {0} is not inside the open unit disc")]
    PoleInside(String),

    #[error("point {0} lies outside the closed unit disc")]
    OutsideDisc(String),

    #[error("subdivision budget of {budget} cells exhausted before reaching tolerance {tol:e}")]
    ResolutionExhausted { budget: usize, tol: f64 },

    #[error("boundary spectrum covers the whole circle")]
    EmptyComplement,

    #[error("adaptive quadrature stalled after {panels} panels (error estimate {error:e})")]
    QuadratureFailure { panels: usize, error: f64 },

    #[error("kernel diagonal undefined at boundary angle {0}: S_2 diverges")]
    UndefinedDiagonal(f64),

    #[error("basis pole hit at {0}")]
    PoleOnEvaluation(String),

    #[error("Hermitian eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("Clark root refinement failed for target phase {0}")]
    RootRefinementFailure(f64),

    #[error("operation requires a finite Blaschke product: {0}")]
    NotFiniteBlaschke(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
