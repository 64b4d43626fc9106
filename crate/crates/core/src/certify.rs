//! Certificates that check solver output independently of how it was produced.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::TraceRecord;
use crate::error::{Error, Result};
use crate::geometry::simplex::lp_feasible;
use crate::geometry::{
    complement, enumerate_pseudo_faces_capped, pinned_probe, DEFAULT_ACT_TOL, ENUMERATION_CAP,
};
use crate::model::IqpProblem;
use crate::nnls::nnls;
use crate::qp::{solve_qp, QpSubproblem};

pub const KKT_TOL: f64 = 1e-6;
pub const STRONG_CONVEXITY_TOL: f64 = 1e-9;
pub const QC_WITNESS_TOL: f64 = 1e-8;
pub const DEFAULT_COMPONENT_THRESHOLD: f64 = 1e-6;
pub const OBJECTIVE_SPREAD_TOL: f64 = 1e-8;
const TAIL_LEN: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct KktCertificate {
    pub x: DVector<f64>,
    pub multipliers: DVector<f64>,
    /// `‖Qx + q - Aᵀλ‖₂`.
    pub stationarity_residual: f64,
    /// `max(0, maxᵢ(bᵢ - Aᵢx))`.
    pub feasibility_violation: f64,
    /// `maxᵢ |λᵢ(Aᵢx - bᵢ)|`.
    pub complementarity_violation: f64,
    pub is_kkt: bool,
}

pub fn kkt_certificate(p: &IqpProblem, x: &DVector<f64>) -> KktCertificate {
    kkt_certificate_with(p, x, DEFAULT_ACT_TOL)
}

/// Recovers `λ >= 0` by nonnegative least squares of `Qx + q` against the rows active at `x`
/// (those with `|Aᵢx - bᵢ| <= act_tol`); all other multipliers are zero.
pub fn kkt_certificate_with(p: &IqpProblem, x: &DVector<f64>, act_tol: f64) -> KktCertificate {
    let r = p.residuals(x);
    let support: Vec<usize> = (0..p.m()).filter(|&i| r[i].abs() <= act_tol).collect();
    let grad = p.gradient(x);
    let fit = nnls(&p.a().select_rows(&support).transpose(), &grad);
    let mut multipliers = DVector::zeros(p.m());
    for (c, &i) in support.iter().enumerate() {
        multipliers[i] = fit.coeffs[c];
    }
    let stationarity_residual = (&grad - p.a().transpose() * &multipliers).norm();
    let feasibility_violation = r
        .iter()
        .fold(0.0_f64, |acc, &v| if -v > acc { -v } else { acc });
    let complementarity_violation = r
        .iter()
        .zip(multipliers.iter())
        .fold(0.0_f64, |acc, (r, l)| acc.max((r * l).abs()));
    let is_kkt = stationarity_residual <= KKT_TOL
        && feasibility_violation <= KKT_TOL
        && complementarity_violation <= KKT_TOL;
    KktCertificate {
        x: x.clone(),
        multipliers,
        stationarity_residual,
        feasibility_violation,
        complementarity_violation,
        is_kkt,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrongConvexityReport {
    pub samples: usize,
    /// Smallest value of `f₂(y) - f₂(x) - ⟨∇f₂(x), y - x⟩ - (ρ/2)‖y - x‖²` seen.
    pub worst_slack: f64,
    /// `y - x` for the worst pair.
    pub witness: DVector<f64>,
    pub passed: bool,
}

/// Spot-checks the strong convexity inequality of `f₂(x) = ½xᵀQ₂x` with modulus `rho`.
///
/// Each coordinate axis is probed from the origin before `samples` seeded random pairs from
/// `[-1, 1]ⁿ`.
pub fn verify_strong_convexity(
    f2_matrix: &DMatrix<f64>,
    rho: f64,
    samples: usize,
    seed: u64,
) -> Result<StrongConvexityReport> {
    if samples == 0 {
        return Err(Error::InvalidConfig("need at least one sample".into()));
    }
    let n = f2_matrix.nrows();
    if f2_matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "Q₂ columns",
            expected: n,
            found: f2_matrix.ncols(),
        });
    }
    let f2 = |x: &DVector<f64>| 0.5 * x.dot(&(f2_matrix * x));
    let slack = |x: &DVector<f64>, y: &DVector<f64>| {
        let d = y - x;
        f2(y) - f2(x) - (f2_matrix * x).dot(&d) - 0.5 * rho * d.norm_squared()
    };

    let mut worst = (f64::INFINITY, DVector::zeros(n));
    let origin = DVector::zeros(n);
    for i in 0..n {
        let e = DVector::from_fn(n, |j, _| if j == i { 1.0 } else { 0.0 });
        let s = slack(&origin, &e);
        if s < worst.0 {
            worst = (s, e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let x = DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
        let y = DVector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
        let s = slack(&x, &y);
        if s < worst.0 {
            worst = (s, y - x);
        }
    }
    Ok(StrongConvexityReport {
        samples,
        worst_slack: worst.0,
        witness: worst.1,
        passed: worst.0 >= -STRONG_CONVEXITY_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcVerdict {
    /// The face is bounded, so the condition says nothing about it.
    SatisfiedVacuously,
    Satisfied,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcOverall {
    Holds,
    Fails,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QcFaceReport {
    pub alpha: Vec<usize>,
    pub verdict: QcVerdict,
    /// For a violation: `v ∈ 0⁺F ∖ {0}` with `‖v‖∞ = 1` and `Qv ∈ pos{Aᵢᵀ : i ∈ α}`.
    pub witness: Option<DVector<f64>>,
    /// Coefficients `μ >= 0` with `Qv = Σ μᵢ Aᵢᵀ` (ordered as `alpha`).
    pub witness_multipliers: Option<DVector<f64>>,
    /// `‖Qv - A_αᵀ μ‖₂` for the witness.
    pub witness_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QcReport {
    pub per_face: Vec<QcFaceReport>,
    pub overall: QcOverall,
}

impl QcReport {
    pub fn face(&self, alpha: &[usize]) -> Option<&QcFaceReport> {
        self.per_face.iter().find(|f| f.alpha == alpha)
    }
}

pub fn qc_check(p: &IqpProblem) -> Result<QcReport> {
    qc_check_capped(p, ENUMERATION_CAP)
}

/// Checks, for every unbounded pseudo-face, that no nonzero recession direction `v` of its
/// face has `Qv` in the negated normal cone `pos{Aᵢᵀ : i ∈ α}`.
pub fn qc_check_capped(p: &IqpProblem, cap: usize) -> Result<QcReport> {
    let faces = enumerate_pseudo_faces_capped(p, cap)?;
    let n = p.n();
    let mut per_face = Vec::with_capacity(faces.len());
    for face in faces {
        let alpha = face.alpha;
        let rest = complement(p.m(), &alpha);
        let a_alpha = p.a().select_rows(&alpha);
        let a_rest = p.a().select_rows(&rest);

        let bounded = pinned_probe(n, &a_alpha, &a_rest)?.is_none();
        if bounded {
            per_face.push(QcFaceReport {
                alpha,
                verdict: QcVerdict::SatisfiedVacuously,
                witness: None,
                witness_multipliers: None,
                witness_residual: None,
            });
            continue;
        }

        // Unknowns z = (v, μ): A_α v = 0, Qv - A_αᵀμ = 0, A_ᾱ v >= 0, μ >= 0.
        let k = alpha.len();
        let mut eq = DMatrix::zeros(k + n, n + k);
        eq.view_mut((0, 0), (k, n)).copy_from(&a_alpha);
        eq.view_mut((k, 0), (n, n)).copy_from(p.q_mat());
        eq.view_mut((k, n), (n, k))
            .copy_from(&(-a_alpha.transpose()));
        let mut ineq = DMatrix::zeros(rest.len() + k, n + k);
        ineq.view_mut((0, 0), (rest.len(), n)).copy_from(&a_rest);
        ineq.view_mut((rest.len(), n), (k, k))
            .copy_from(&DMatrix::identity(k, k));

        let report = match pinned_probe(n, &eq, &ineq)? {
            None => QcFaceReport {
                alpha,
                verdict: QcVerdict::Satisfied,
                witness: None,
                witness_multipliers: None,
                witness_residual: None,
            },
            Some(z) => {
                let v = z.rows(0, n).into_owned();
                let v = &v / v.amax();
                let fit = nnls(&a_alpha.transpose(), &(p.q_mat() * &v));
                QcFaceReport {
                    alpha,
                    verdict: QcVerdict::Violated,
                    witness: Some(v),
                    witness_multipliers: Some(fit.coeffs),
                    witness_residual: Some(fit.residual),
                }
            }
        };
        per_face.push(report);
    }
    let overall = if per_face.iter().any(|f| f.verdict == QcVerdict::Violated) {
        QcOverall::Fails
    } else {
        QcOverall::Holds
    };
    Ok(QcReport { per_face, overall })
}

/// Checks a violation witness directly against the problem data.
pub fn verify_qc_witness(p: &IqpProblem, alpha: &[usize], v: &DVector<f64>) -> bool {
    let rest = complement(p.m(), alpha);
    let a_alpha = p.a().select_rows(alpha);
    let unit = (v.amax() - 1.0).abs() <= QC_WITNESS_TOL;
    let in_cone = (&a_alpha * v).iter().all(|r| r.abs() <= QC_WITNESS_TOL)
        && (p.a().select_rows(&rest) * v)
            .iter()
            .all(|&r| r >= -QC_WITNESS_TOL);
    let fit = nnls(&a_alpha.transpose(), &(p.q_mat() * v));
    unit && in_cone && fit.residual <= QC_WITNESS_TOL
}

/// A polyhedron `{x | Aeq x = beq, Aineq x >= bineq}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralPiece {
    pub aeq: DMatrix<f64>,
    pub beq: DVector<f64>,
    pub aineq: DMatrix<f64>,
    pub bineq: DVector<f64>,
}

impl PolyhedralPiece {
    pub fn new(
        aeq: DMatrix<f64>,
        beq: DVector<f64>,
        aineq: DMatrix<f64>,
        bineq: DVector<f64>,
    ) -> Result<Self> {
        let n = aeq.ncols().max(aineq.ncols());
        if aeq.ncols() != n
            || aineq.ncols() != n
            || beq.len() != aeq.nrows()
            || bineq.len() != aineq.nrows()
        {
            return Err(Error::DimensionMismatch {
                what: "polyhedral piece",
                expected: n,
                found: aeq.ncols().min(aineq.ncols()),
            });
        }
        if !lp_feasible(&aeq, &beq, &aineq, &bineq)?.is_feasible() {
            return Err(Error::EmptyFace);
        }
        Ok(Self {
            aeq,
            beq,
            aineq,
            bineq,
        })
    }

    pub fn point(x: &DVector<f64>) -> Result<Self> {
        let n = x.len();
        Self::new(
            DMatrix::identity(n, n),
            x.clone(),
            DMatrix::zeros(0, n),
            DVector::zeros(0),
        )
    }

    pub fn dim(&self) -> usize {
        self.aeq.ncols()
    }

    /// Euclidean projection of `x` onto the piece.
    pub fn project(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                what: "point",
                expected: n,
                found: x.len(),
            });
        }
        let (ne, ni) = (self.aeq.nrows(), self.aineq.nrows());
        let mut a = DMatrix::zeros(ni + 2 * ne, n);
        let mut b = DVector::zeros(ni + 2 * ne);
        a.view_mut((0, 0), (ni, n)).copy_from(&self.aineq);
        b.rows_mut(0, ni).copy_from(&self.bineq);
        a.view_mut((ni, 0), (ne, n)).copy_from(&self.aeq);
        b.rows_mut(ni, ne).copy_from(&self.beq);
        a.view_mut((ni + ne, 0), (ne, n)).copy_from(&(-&self.aeq));
        b.rows_mut(ni + ne, ne).copy_from(&(-&self.beq));
        let sub = QpSubproblem::new(DMatrix::identity(n, n), -x, a, b)?;
        Ok(solve_qp(&sub)?.x)
    }
}

/// A connected component of the KKT set, described as a union of polyhedra.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDescription {
    pub name: String,
    pub pieces: Vec<PolyhedralPiece>,
}

pub fn distance_to_component(comp: &ComponentDescription, x: &DVector<f64>) -> Result<f64> {
    if comp.pieces.is_empty() {
        return Err(Error::NoComponents);
    }
    let mut best = f64::INFINITY;
    for piece in &comp.pieces {
        let proj = piece.project(x)?;
        best = best.min((x - proj).norm());
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentConvergenceReport {
    /// `distances[c][k]`: distance from `xᵏ` to component `c`.
    pub distances: Vec<Vec<f64>>,
    /// Component closest to the last iterate.
    pub closest: usize,
    pub final_distance: f64,
    /// Number of trailing records (at most 10) within the threshold of `closest`.
    pub tail_len: usize,
    /// Spread `max - min` of `f` over that tail.
    pub objective_spread: f64,
    pub converged: bool,
}

pub fn component_convergence_check(
    trace: &[TraceRecord],
    components: &[ComponentDescription],
) -> Result<ComponentConvergenceReport> {
    component_convergence_check_with(trace, components, DEFAULT_COMPONENT_THRESHOLD)
}

/// Tracks distances from the iterates to each component and decides whether the trace settles
/// on the one nearest its end, with a constant objective over the settled tail.
pub fn component_convergence_check_with(
    trace: &[TraceRecord],
    components: &[ComponentDescription],
    threshold: f64,
) -> Result<ComponentConvergenceReport> {
    if components.is_empty() {
        return Err(Error::NoComponents);
    }
    if trace.is_empty() {
        return Err(Error::TraceTooShort { len: 0 });
    }
    let distances = components
        .iter()
        .map(|c| {
            trace
                .iter()
                .map(|r| distance_to_component(c, &r.x))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let (closest, final_distance) = distances
        .iter()
        .map(|d| *d.last().unwrap())
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let tail_len = distances[closest]
        .iter()
        .rev()
        .take(TAIL_LEN)
        .take_while(|&&d| d <= threshold)
        .count();
    let tail = &trace[trace.len() - tail_len..];
    let objective_spread = if tail.is_empty() {
        f64::INFINITY
    } else {
        let hi = tail
            .iter()
            .map(|r| r.f_val)
            .fold(f64::NEG_INFINITY, f64::max);
        let lo = tail.iter().map(|r| r.f_val).fold(f64::INFINITY, f64::min);
        hi - lo
    };
    Ok(ComponentConvergenceReport {
        distances,
        closest,
        final_distance,
        tail_len,
        objective_spread,
        converged: final_distance <= threshold && objective_spread <= OBJECTIVE_SPREAD_TOL,
    })
}

/// Whether `x` satisfies the affine variational inequality `⟨Qx + q, u - x⟩ >= -tol` at each
/// of the given feasible points `u`.
pub fn avi_holds(p: &IqpProblem, x: &DVector<f64>, points: &[DVector<f64>], tol: f64) -> bool {
    let grad = p.gradient(x);
    points.iter().all(|u| grad.dot(&(u - x)) >= -tol)
}

/// Whether `x` satisfies the piece's constraints to within `tol`.
pub fn piece_contains(piece: &PolyhedralPiece, x: &DVector<f64>, tol: f64) -> bool {
    let eq_ok = piece.aeq.nrows() == 0 || (&piece.aeq * x - &piece.beq).amax() <= tol;
    let ineq_ok = piece.aineq.nrows() == 0 || (&piece.aineq * x - &piece.bineq).min() >= -tol;
    eq_ok && ineq_ok
}
