//! Polyhedral machinery for `C = {x | Ax >= b}`.
//!
//! Index sets (`alpha`) are zero-based row indices of `A`, kept sorted.
//!
//! The normal cone of `C` at a point of the pseudo-face `𝓕_α` is generated by the *negated*
//! active rows, `pos{-Aᵢᵀ : i ∈ α}`. This is the sign under which `Qx + q - Aᵀλ = 0, λ >= 0`
//! reads as `0 ∈ Qx + q + N_C(x)`.

pub mod projection;
pub mod simplex;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::IqpProblem;
use crate::nnls::nnls;
pub use projection::{project_onto_c, projection_residual};
pub use simplex::{lp_feasible, lp_minimize, Feasibility, LpOutcome};

pub const DEFAULT_ACT_TOL: f64 = 1e-9;
pub const ENUMERATION_CAP: usize = 20;
/// Optimal slack above which a pseudo-face counts as nonempty.
const SLACK_TOL: f64 = 1e-9;

/// A pseudo-face `𝓕_α = {x | A_α x = b_α, A_ᾱ x > b_ᾱ}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoFaceDescriptor {
    pub alpha: Vec<usize>,
    pub is_empty: bool,
    /// Set to `Some(0)` once the face's recession cone has been probed and found trivial.
    pub face_recession_dim_hint: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConeDescription {
    /// Conic hull of the generators; an empty list is the cone `{0}`.
    Normal { generators: Vec<DVector<f64>> },
    /// `{v | eq v = 0, ineq v >= 0}`. `direction` is a nonzero member with `‖v‖∞ = 1` when the
    /// cone is nontrivial.
    Recession {
        eq: DMatrix<f64>,
        ineq: DMatrix<f64>,
        bounded: bool,
        direction: Option<DVector<f64>>,
    },
}

impl ConeDescription {
    pub fn is_trivial(&self) -> bool {
        match self {
            ConeDescription::Normal { generators } => generators.iter().all(|g| g.amax() == 0.0),
            ConeDescription::Recession { bounded, .. } => *bounded,
        }
    }
}

pub fn complement(m: usize, alpha: &[usize]) -> Vec<usize> {
    (0..m).filter(|i| !alpha.contains(i)).collect()
}

fn check_alpha(p: &IqpProblem, alpha: &[usize]) -> Result<()> {
    if let Some(&bad) = alpha.iter().find(|&&i| i >= p.m()) {
        return Err(Error::DimensionMismatch {
            what: "constraint index",
            expected: p.m(),
            found: bad,
        });
    }
    Ok(())
}

/// Rows with `|Aᵢx - bᵢ| <= act_tol`.
pub fn active_set(p: &IqpProblem, x: &DVector<f64>, act_tol: f64) -> Result<Vec<usize>> {
    p.check_point(x)?;
    let r = p.residuals(x);
    if let Some((row, &residual)) = r
        .iter()
        .enumerate()
        .filter(|(_, v)| **v < -act_tol)
        .min_by(|a, b| a.1.total_cmp(b.1))
    {
        return Err(Error::InfeasiblePoint { row, residual });
    }
    Ok((0..p.m()).filter(|&i| r[i].abs() <= act_tol).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FaceStatus {
    /// `F_α = ∅`.
    EmptyFace,
    /// `F_α ≠ ∅` but `𝓕_α = ∅`.
    EmptyPseudoFace,
    Nonempty,
}

/// Maximizes `s` subject to `A_α x = b_α`, `A_ᾱ x >= b_ᾱ + s·1`, `s <= 1`.
fn classify(p: &IqpProblem, alpha: &[usize]) -> Result<FaceStatus> {
    let n = p.n();
    let rest = complement(p.m(), alpha);
    let mut aeq = DMatrix::zeros(alpha.len(), n + 1);
    let mut beq = DVector::zeros(alpha.len());
    for (r, &i) in alpha.iter().enumerate() {
        aeq.view_mut((r, 0), (1, n)).copy_from(&p.a().row(i));
        beq[r] = p.b()[i];
    }
    let mut aineq = DMatrix::zeros(rest.len() + 1, n + 1);
    let mut bineq = DVector::zeros(rest.len() + 1);
    for (r, &i) in rest.iter().enumerate() {
        aineq.view_mut((r, 0), (1, n)).copy_from(&p.a().row(i));
        aineq[(r, n)] = -1.0;
        bineq[r] = p.b()[i];
    }
    aineq[(rest.len(), n)] = -1.0;
    bineq[rest.len()] = -1.0;
    let mut c = DVector::zeros(n + 1);
    c[n] = -1.0;

    Ok(match lp_minimize(&c, &aeq, &beq, &aineq, &bineq)? {
        LpOutcome::Infeasible => FaceStatus::EmptyFace,
        LpOutcome::Unbounded => {
            return Err(Error::NumericalFailure(
                "slack LP reported unbounded".into(),
            ))
        }
        LpOutcome::Optimal { value, .. } => {
            let s = -value;
            if s > SLACK_TOL {
                FaceStatus::Nonempty
            } else if s >= -SLACK_TOL {
                FaceStatus::EmptyPseudoFace
            } else {
                FaceStatus::EmptyFace
            }
        }
    })
}

/// Describes one pseudo-face, deciding emptiness exactly at LP precision.
pub fn pseudo_face(p: &IqpProblem, alpha: &[usize]) -> Result<PseudoFaceDescriptor> {
    check_alpha(p, alpha)?;
    let mut alpha = alpha.to_vec();
    alpha.sort_unstable();
    alpha.dedup();
    let status = classify(p, &alpha)?;
    Ok(PseudoFaceDescriptor {
        alpha,
        is_empty: status != FaceStatus::Nonempty,
        face_recession_dim_hint: None,
    })
}

pub fn face_is_nonempty(p: &IqpProblem, alpha: &[usize]) -> Result<bool> {
    check_alpha(p, alpha)?;
    Ok(classify(p, alpha)? != FaceStatus::EmptyFace)
}

pub fn enumerate_pseudo_faces(p: &IqpProblem) -> Result<Vec<PseudoFaceDescriptor>> {
    enumerate_pseudo_faces_capped(p, ENUMERATION_CAP)
}

/// All nonempty pseudo-faces, ordered by the bitmask of `alpha`.
///
/// A superset of an index set with an empty face has an empty face too, so those subsets are
/// skipped without solving an LP.
pub fn enumerate_pseudo_faces_capped(
    p: &IqpProblem,
    cap: usize,
) -> Result<Vec<PseudoFaceDescriptor>> {
    let m = p.m();
    if m > cap {
        return Err(Error::TooManyConstraints { m, cap });
    }
    let total = 1usize << m;
    let mut face_empty = vec![false; total];
    let mut out = Vec::new();
    for mask in 0..total {
        let inherited = (0..m).any(|i| mask & (1 << i) != 0 && face_empty[mask & !(1 << i)]);
        if inherited {
            face_empty[mask] = true;
            continue;
        }
        let alpha: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        match classify(p, &alpha)? {
            FaceStatus::EmptyFace => face_empty[mask] = true,
            FaceStatus::EmptyPseudoFace => {}
            FaceStatus::Nonempty => out.push(PseudoFaceDescriptor {
                alpha,
                is_empty: false,
                face_recession_dim_hint: None,
            }),
        }
    }
    Ok(out)
}

pub fn normal_cone_generators(p: &IqpProblem, alpha: &[usize]) -> Result<ConeDescription> {
    check_alpha(p, alpha)?;
    let generators = alpha.iter().map(|&i| -p.a().row(i).transpose()).collect();
    Ok(ConeDescription::Normal { generators })
}

/// Distance from `w` to the cone `pos{-Aᵢᵀ : i ∈ alpha}` together with the recovered
/// coefficients (one per entry of `alpha`).
pub fn normal_cone_residual(
    p: &IqpProblem,
    alpha: &[usize],
    w: &DVector<f64>,
) -> (f64, DVector<f64>) {
    let g = p.a().select_rows(alpha).transpose();
    let fit = nnls(&g, &(-w));
    (fit.residual, fit.coeffs)
}

pub fn recession_cone(p: &IqpProblem, alpha: &[usize]) -> Result<ConeDescription> {
    check_alpha(p, alpha)?;
    if !face_is_nonempty(p, alpha)? {
        return Err(Error::EmptyFace);
    }
    let rest = complement(p.m(), alpha);
    let eq = p.a().select_rows(alpha);
    let ineq = p.a().select_rows(&rest);
    let direction = pinned_probe(p.n(), &eq, &ineq)?;
    Ok(ConeDescription::Recession {
        eq,
        ineq,
        bounded: direction.is_none(),
        direction,
    })
}

/// Looks for a nonzero `z` (first `nv` coordinates form `v`) with `eq z = 0`, `ineq z >= 0`.
///
/// A polyhedral cone has a nonzero member iff, after scaling, one has some `vⱼ = ±1` and
/// `‖v‖∞ <= 1`; the `2·nv` probes pin each coordinate in turn (j ascending, `+1` before `-1`).
/// Only `v` is pinned, so callers must ensure the cone is pointed in the remaining coordinates
/// or that those are determined by `v`.
pub(crate) fn pinned_probe(
    nv: usize,
    eq: &DMatrix<f64>,
    ineq: &DMatrix<f64>,
) -> Result<Option<DVector<f64>>> {
    let nz = eq.ncols().max(ineq.ncols()).max(nv);
    let eq_rows = eq.nrows() + 1;
    let ineq_rows = ineq.nrows() + 2 * nv;
    for j in 0..nv {
        for sign in [1.0, -1.0] {
            let mut aeq = DMatrix::zeros(eq_rows, nz);
            let mut beq = DVector::zeros(eq_rows);
            if eq.nrows() > 0 {
                aeq.view_mut((0, 0), (eq.nrows(), eq.ncols())).copy_from(eq);
            }
            aeq[(eq.nrows(), j)] = 1.0;
            beq[eq.nrows()] = sign;

            let mut aineq = DMatrix::zeros(ineq_rows, nz);
            let mut bineq = DVector::zeros(ineq_rows);
            if ineq.nrows() > 0 {
                aineq
                    .view_mut((0, 0), (ineq.nrows(), ineq.ncols()))
                    .copy_from(ineq);
            }
            for i in 0..nv {
                let r = ineq.nrows() + 2 * i;
                aineq[(r, i)] = 1.0;
                bineq[r] = -1.0;
                aineq[(r + 1, i)] = -1.0;
                bineq[r + 1] = -1.0;
            }
            if let Feasibility::Feasible(z) = lp_feasible(&aeq, &beq, &aineq, &bineq)? {
                return Ok(Some(z));
            }
        }
    }
    Ok(None)
}
