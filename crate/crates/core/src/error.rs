use thiserror::Error;

use crate::numeric::{Rational, Vector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("basis rows are linearly dependent")]
    SingularBasis,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

/// Edge of the polyhedron along which the objective increases without bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnboundedRay {
    /// Basis the pivot loop stood on when no entering row existed.
    pub basis: Vec<usize>,
    pub vertex: Vector,
    pub direction: Vector,
    /// Parameter of the leg at which the ray was found.
    pub lambda: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("rows are linearly dependent")]
    DependentRows,
    #[error("polyhedron has no feasible basis")]
    NoFeasibleBasis,
    #[error("matrix is not integral")]
    NonIntegralMatrix,
    #[error("all subdeterminants vanish")]
    ZeroSubdeterminants,
    #[error("not a perfect matching: {0}")]
    NotPerfectMatching(String),
    #[error("basis is not feasible")]
    InfeasibleBasis,
    #[error("start basis is not feasible or not optimal for the start objective")]
    InfeasibleStart,
    #[error("objective is unbounded along an edge")]
    UnboundedDirection(Box<UnboundedRay>),
    #[error("segment is not in general position (tie at lambda = {0})")]
    DegenerateSegment(Rational),
    #[error("retries exhausted after {0} degenerate segments")]
    RetriesExhausted(usize),
    #[error("no coefficient exceeds 1/n")]
    NoLargeCoefficient,
    #[error("delta overestimated: result failed verification")]
    DeltaOverestimated,
    #[error("row {0} is zero")]
    ZeroRow(usize),
    #[error("polyhedron is not pointed")]
    NotPointed,
    #[error("point is not feasible")]
    InfeasiblePoint,
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("malformed instance: {0}")]
    Format(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
