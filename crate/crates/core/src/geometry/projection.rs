use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::geometry::{active_set, normal_cone_residual, DEFAULT_ACT_TOL};
use crate::model::IqpProblem;
use crate::qp::{solve_qp_warm, QpSubproblem, WarmStart};

/// Metric projection of `u` onto `C`, as the solution of `min ½‖x - u‖²` over `C`.
pub fn project_onto_c(p: &IqpProblem, u: &DVector<f64>) -> Result<DVector<f64>> {
    project_onto_c_warm(p, u, None)
}

pub fn project_onto_c_warm(
    p: &IqpProblem,
    u: &DVector<f64>,
    warm: Option<&WarmStart>,
) -> Result<DVector<f64>> {
    p.check_point(u)?;
    let sub = QpSubproblem::new(
        DMatrix::identity(p.n(), p.n()),
        -u,
        p.a().clone(),
        p.b().clone(),
    )?;
    Ok(solve_qp_warm(&sub, warm)?.x)
}

/// Distance of `u - proj` from `N_C(proj)`; zero iff `proj` is the projection of `u`
/// (given `proj ∈ C`).
pub fn projection_residual(p: &IqpProblem, u: &DVector<f64>, proj: &DVector<f64>) -> Result<f64> {
    let alpha = active_set(p, proj, DEFAULT_ACT_TOL)?;
    Ok(normal_cone_residual(p, &alpha, &(u - proj)).0)
}
