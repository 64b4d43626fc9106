#![allow(dead_code)]

use idca::IqpProblem;
use nalgebra::{DMatrix, DVector};

const FEAS_TOL: f64 = 1e-9;
const SIGN_TOL: f64 = 1e-9;

/// Minimizes `½xᵀHx + gᵀx` over `{Ax >= b}` for positive definite `H` by trying every subset of
/// rows as the active set: solve the equality-constrained KKT system by LU and keep the best
/// candidate that is primal feasible with nonnegative multipliers.
pub fn brute_force_qp(
    h: &DMatrix<f64>,
    g: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Option<DVector<f64>> {
    let (n, m) = (h.nrows(), a.nrows());
    assert!(m <= 16, "oracle is exponential in m");
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << m) {
        let rows: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let k = rows.len();
        if k > n {
            continue;
        }
        let mut kkt = DMatrix::zeros(n + k, n + k);
        let mut rhs = DVector::zeros(n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(h);
        rhs.rows_mut(0, n).copy_from(&(-g));
        for (c, &i) in rows.iter().enumerate() {
            for j in 0..n {
                kkt[(j, n + c)] = -a[(i, j)];
                kkt[(n + c, j)] = a[(i, j)];
            }
            rhs[n + c] = b[i];
        }
        let Some(sol) = kkt.clone().lu().solve(&rhs) else {
            continue;
        };
        if !sol.iter().all(|v| v.is_finite()) {
            continue;
        }
        // Near-singular systems can return garbage; keep only genuine solutions.
        if (&kkt * &sol - &rhs).amax() > 1e-9 * (1.0 + rhs.amax()) {
            continue;
        }
        let x = sol.rows(0, n).into_owned();
        let lambda = sol.rows(n, k);
        let scale = 1.0 + b.amax().max(x.amax());
        if (a * &x - b).min() < -FEAS_TOL * scale || lambda.iter().any(|&l| l < -SIGN_TOL * scale) {
            continue;
        }
        let value = 0.5 * x.dot(&(h * &x)) + g.dot(&x);
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, x));
        }
    }
    best.map(|(_, x)| x)
}

pub fn brute_force_projection(p: &IqpProblem, u: &DVector<f64>) -> DVector<f64> {
    let n = p.n();
    brute_force_qp(&DMatrix::identity(n, n), &(-u), p.a(), p.b()).expect("C is nonempty")
}

pub fn pt(x: f64, y: f64) -> DVector<f64> {
    DVector::from_vec(vec![x, y])
}
