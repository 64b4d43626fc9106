use thiserror::Error;

use crate::model::Variant;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("constraint set {{x | Ax >= b}} is empty")]
    InfeasibleConstraintSet,

    #[error("eta = {eta} must be strictly greater than {bound}")]
    EtaTooSmall { eta: f64, bound: f64 },

    #[error("gamma = {gamma} outside the admissible range [0, {upper})")]
    InvalidGamma { gamma: f64, upper: f64 },

    #[error("matrix is not symmetric (max |M - M^T| = {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("point violates constraint {row} (residual {residual:e})")]
    InfeasiblePoint { row: usize, residual: f64 },

    #[error("{m} constraints exceed the enumeration cap of {cap}")]
    TooManyConstraints { m: usize, cap: usize },

    #[error("face is empty")]
    EmptyFace,

    #[error("feasible region of the QP is empty")]
    InfeasibleRegion,

    #[error("active-set solver exceeded {limit} working-set changes")]
    CycleGuardExceeded { limit: usize },

    #[error("Hessian is not positive definite")]
    NotPositiveDefinite,

    #[error("decomposition variant {found:?} cannot drive this step (needs {expected:?})")]
    VariantMismatch { expected: Variant, found: Variant },

    #[error("trace needs at least 2 records, got {len}")]
    TraceTooShort { len: usize },

    #[error("no components supplied")]
    NoComponents,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}
