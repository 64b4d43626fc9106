//! Inertial DC algorithms for indefinite quadratic programs
//! `min ½xᵀQx + qᵀx` subject to `Ax >= b`.
//!
//! The crate covers problem construction ([`model`]), spectral bounds ([`spectral`]), the
//! polyhedral geometry of the feasible set ([`geometry`]), a primal active-set QP solver
//! ([`qp`]), the two inertial iterations ([`engine`]) and independent certificates
//! ([`certify`]).

pub mod certify;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod instances;
pub mod model;
pub mod nnls;
pub mod qp;
pub mod spectral;
pub mod worked_example;

pub use certify::{
    component_convergence_check, distance_to_component, kkt_certificate, qc_check,
    verify_strong_convexity, ComponentDescription, KktCertificate, PolyhedralPiece, QcOverall,
    QcReport, QcVerdict,
};
pub use engine::{diagnostics_check, run, Algorithm, SolveResult, SolveStatus, TraceRecord};
pub use error::{Error, Result};
pub use model::{
    build_problem, make_decomposition, objective, DcDecomposition, EtaPolicy, GammaSpec,
    InertialConfig, IqpProblem, Variant,
};
pub use qp::{solve_qp, QpSolution, QpSubproblem};
