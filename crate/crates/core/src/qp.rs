//! Strictly convex QP over `{x | Ax >= b}` by a primal active-set method.
//!
//! Each iteration solves the equality-constrained problem on the working set through the
//! range-space equations `(A_W H⁻¹ A_Wᵀ) λ = b_W + A_W H⁻¹ g`, `x̂ = H⁻¹(A_Wᵀλ - g)`, using the
//! Cholesky factor of `H` computed once per subproblem. Blocking constraints are added by the
//! ratio test; a constraint with a negative multiplier is dropped once the step vanishes. Ties
//! on either side go to the lowest constraint index.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::geometry::simplex::{lp_feasible, Feasibility};
use crate::model::{DcDecomposition, IqpProblem, Variant};
use crate::spectral::asymmetry;

pub const FEAS_TOL: f64 = 1e-9;
pub const MULTIPLIER_TOL: f64 = 1e-10;
pub const KKT_TARGET: f64 = 1e-8;

/// `minimize ½xᵀHx + gᵀx subject to Ax >= b`, with `H` positive definite.
#[derive(Clone)]
pub struct QpSubproblem {
    h: DMatrix<f64>,
    g: DVector<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl std::fmt::Debug for QpSubproblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QpSubproblem")
            .field("h", &self.h)
            .field("g", &self.g)
            .field("a", &self.a)
            .field("b", &self.b)
            .finish()
    }
}

impl QpSubproblem {
    pub fn new(h: DMatrix<f64>, g: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = g.len();
        let dims = [
            ("H rows", n, h.nrows()),
            ("H columns", n, h.ncols()),
            ("A columns", n, a.ncols()),
            ("b entries", a.nrows(), b.len()),
        ];
        for (what, expected, found) in dims {
            if expected != found {
                return Err(Error::DimensionMismatch {
                    what,
                    expected,
                    found,
                });
            }
        }
        let asym = asymmetry(&h);
        if asym > crate::spectral::SYMMETRY_TOL {
            return Err(Error::NonSymmetric { asymmetry: asym });
        }
        let chol = h.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
        Ok(Self { h, g, a, b, chol })
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn g(&self) -> &DVector<f64> {
        &self.g
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn n(&self) -> usize {
        self.g.len()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.h * x)) + self.g.dot(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// One multiplier per constraint; zero off the final working set.
    pub multipliers: DVector<f64>,
    pub working_set: Vec<usize>,
    pub iterations: usize,
    /// Largest of the stationarity, primal, dual and complementarity violations.
    pub kkt_residual: f64,
}

/// A feasible starting point and the constraints to try as the initial working set.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub x: DVector<f64>,
    pub working_set: Vec<usize>,
}

pub fn solve_qp(sub: &QpSubproblem) -> Result<QpSolution> {
    solve_qp_warm(sub, None)
}

/// Solves the subproblem, starting from `warm` when its point is feasible and from a phase-one
/// LP vertex otherwise. Only warm constraints that are active at the start and linearly
/// independent of the ones already taken enter the initial working set.
pub fn solve_qp_warm(sub: &QpSubproblem, warm: Option<&WarmStart>) -> Result<QpSolution> {
    let n = sub.n();
    let m = sub.m();
    let start = warm.filter(|w| w.x.len() == n && min_residual(sub, &w.x) >= -FEAS_TOL);
    let (mut x, seed) = match start {
        Some(w) => (w.x.clone(), w.working_set.as_slice()),
        None => {
            let no_eq = DMatrix::zeros(0, n);
            match lp_feasible(&no_eq, &DVector::zeros(0), &sub.a, &sub.b)? {
                Feasibility::Feasible(x) => (x, &[][..]),
                Feasibility::Infeasible => return Err(Error::InfeasibleRegion),
            }
        }
    };

    let mut working = initial_working_set(sub, &x, seed);
    let limit = 10 * (m + n);
    let mut changes = 0usize;
    let mut iterations = 0usize;

    loop {
        iterations += 1;
        let (target, lambda) = equality_solve(sub, &working)?;
        let step = &target - &x;
        let step_tol = 1e-12 * (1.0 + x.amax());

        if step.amax() <= step_tol {
            if min_residual(sub, &target) >= -FEAS_TOL {
                x = target;
            }
            let drop = working
                .iter()
                .zip(lambda.iter())
                .filter(|(_, &l)| l < -MULTIPLIER_TOL)
                .map(|(&i, _)| i)
                .min();
            match drop {
                Some(i) => {
                    working.retain(|&j| j != i);
                    changes += 1;
                }
                None => {
                    let mut multipliers = DVector::zeros(m);
                    for (&i, &l) in working.iter().zip(lambda.iter()) {
                        multipliers[i] = l;
                    }
                    let kkt_residual = kkt_residual(sub, &x, &multipliers);
                    let scale = 1.0 + sub.g.amax() + (&sub.h * &x).amax() + sub.b.amax();
                    if kkt_residual > KKT_TARGET * scale {
                        return Err(Error::NumericalFailure(format!(
                            "active-set KKT residual {kkt_residual:e} above target"
                        )));
                    }
                    return Ok(QpSolution {
                        x,
                        multipliers,
                        working_set: working,
                        iterations,
                        kkt_residual,
                    });
                }
            }
        } else {
            let step_norm = step.norm();
            let slopes = &sub.a * &step;
            let slacks = &sub.a * &x - &sub.b;
            let mut blocking: Option<(usize, f64)> = None;
            for i in (0..m).filter(|i| !working.contains(i)) {
                let slope = slopes[i];
                if slope < -1e-14 * sub.a.row(i).norm() * step_norm {
                    let t = (slacks[i] / -slope).max(0.0);
                    if t < 1.0 && blocking.is_none_or(|(_, best)| t < best) {
                        blocking = Some((i, t));
                    }
                }
            }
            match blocking {
                Some((i, t)) => {
                    x += step * t;
                    working.push(i);
                    working.sort_unstable();
                    changes += 1;
                }
                None => x = target,
            }
        }

        if changes > limit {
            return Err(Error::CycleGuardExceeded { limit });
        }
    }
}

fn min_residual(sub: &QpSubproblem, x: &DVector<f64>) -> f64 {
    if sub.m() == 0 {
        return f64::INFINITY;
    }
    (&sub.a * x - &sub.b).min()
}

fn initial_working_set(sub: &QpSubproblem, x: &DVector<f64>, seed: &[usize]) -> Vec<usize> {
    let mut seed: Vec<usize> = seed.iter().copied().filter(|&i| i < sub.m()).collect();
    seed.sort_unstable();
    seed.dedup();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut working = Vec::new();
    for i in seed {
        let row = sub.a.row(i).transpose();
        if (row.dot(x) - sub.b[i]).abs() > FEAS_TOL || basis.len() == sub.n() {
            continue;
        }
        let mut r = row.clone();
        for q in &basis {
            r -= q * q.dot(&r);
        }
        if r.norm() > 1e-8 * row.norm() {
            basis.push(r.normalize());
            working.push(i);
        }
    }
    working
}

/// Minimizer of the objective on `{A_W x = b_W}` and its multipliers (in working-set order).
fn equality_solve(sub: &QpSubproblem, working: &[usize]) -> Result<(DVector<f64>, DVector<f64>)> {
    let hinv_g = sub.chol.solve(&sub.g);
    if working.is_empty() {
        return Ok((-hinv_g, DVector::zeros(0)));
    }
    let aw = sub.a.select_rows(working);
    let bw = DVector::from_iterator(working.len(), working.iter().map(|&i| sub.b[i]));
    let hinv_awt = sub.chol.solve(&aw.transpose());
    let schur = &aw * &hinv_awt;
    let rhs = bw + &aw * &hinv_g;
    let lambda = match schur.clone().cholesky() {
        Some(c) => c.solve(&rhs),
        None => schur.lu().solve(&rhs).ok_or_else(|| {
            Error::NumericalFailure("working-set rows are linearly dependent".into())
        })?,
    };
    let x = &hinv_awt * &lambda - hinv_g;
    Ok((x, lambda))
}

pub(crate) fn kkt_residual(sub: &QpSubproblem, x: &DVector<f64>, mult: &DVector<f64>) -> f64 {
    let stationarity = (&sub.h * x + &sub.g - sub.a.transpose() * mult).amax();
    let res = &sub.a * x - &sub.b;
    let primal = res.iter().fold(0.0_f64, |acc, &r| acc.max(-r));
    let dual = mult.iter().fold(0.0_f64, |acc, &l| acc.max(-l));
    let comp = res
        .iter()
        .zip(mult.iter())
        .fold(0.0_f64, |acc, (r, l)| acc.max((r * l).abs()));
    stationarity.max(primal).max(dual).max(comp)
}

/// The proximal subproblem `H = Q + ηI`, `g = q - η xᵏ - γ(xᵏ - xᵏ⁻¹)`, whose minimizer over
/// `C` is the next proximal iterate. The constant part of the surrogate is dropped.
pub fn build_indca2_subproblem(
    p: &IqpProblem,
    dc: &DcDecomposition,
    x_k: &DVector<f64>,
    x_km1: &DVector<f64>,
    gamma: f64,
) -> Result<QpSubproblem> {
    if dc.variant != Variant::ProximalB {
        return Err(Error::VariantMismatch {
            expected: Variant::ProximalB,
            found: dc.variant,
        });
    }
    p.check_point(x_k)?;
    p.check_point(x_km1)?;
    let n = p.n();
    let h = p.q_mat() + DMatrix::<f64>::identity(n, n) * dc.eta;
    let g = p.q_vec() - x_k * dc.eta - (x_k - x_km1) * gamma;
    QpSubproblem::new(h, g, p.a().clone(), p.b().clone())
}
