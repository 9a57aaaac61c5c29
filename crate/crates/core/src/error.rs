use thiserror::Error;

/// Errors produced by the solvers and maps in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector has zero or non-finite norm")]
    ZeroVector,
    #[error("observation set is empty")]
    EmptyObservations,
    #[error("observation weight {0} is not a positive finite number above 1e-300")]
    InvalidWeight(f64),
    #[error("not enough constraints: need {needed}, got {got}")]
    TooFewConstraints { needed: usize, got: usize },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NonConvergence { sweeps: usize, off_norm: f64 },
    #[error("Mobius estimate is singular: |det(M)| = {0:e}")]
    SingularMobius(f64),
    #[error("vectors are antipodal; cross-product alignment is undefined")]
    AntipodalSingularity,
    #[error("point pair is collinear; use the degenerate two-point solver")]
    DegenerateFrame,
    #[error("axis predictions are parallel or vanishing")]
    DegenerateAxes,
    #[error("smallest eigenvalue is not simple: relative gap {0:e}")]
    EigGapTooSmall(f64),
    #[error("algebraic SU(2) parameters vanish: |alpha|^2 + |beta|^2 = {0:e}")]
    DegenerateAlgebraic(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
