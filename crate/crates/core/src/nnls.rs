//! Nonnegative least squares (Lawson–Hanson active set).

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub coeffs: DVector<f64>,
    /// `‖G c - r‖₂`.
    pub residual: f64,
}

/// Solves `min ‖G c - r‖₂ subject to c >= 0`.
pub fn nnls(g: &DMatrix<f64>, r: &DVector<f64>) -> NnlsSolution {
    let k = g.ncols();
    let mut x = DVector::<f64>::zeros(k);
    if k == 0 {
        return NnlsSolution {
            coeffs: x,
            residual: r.norm(),
        };
    }
    let tol = 1e-13 * (1.0 + g.norm() * r.norm());
    let mut passive = vec![false; k];
    let max_outer = 3 * k + 10;

    for _ in 0..max_outer {
        let w = g.transpose() * (r - g * &x);
        let candidate = (0..k)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(t) = candidate else { break };
        passive[t] = true;

        let mut inner = 0;
        loop {
            inner += 1;
            let s = passive_lstsq(g, r, &passive);
            let infeasible: Vec<usize> = (0..k).filter(|&j| passive[j] && s[j] <= 0.0).collect();
            if infeasible.is_empty() || inner > 3 * k {
                x = s.map(|v| v.max(0.0));
                break;
            }
            let alpha = infeasible
                .iter()
                .map(|&j| x[j] / (x[j] - s[j]))
                .fold(f64::INFINITY, f64::min);
            x += (s - &x) * alpha;
            for j in 0..k {
                if passive[j] && x[j] <= 1e-15 {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }

    let residual = (g * &x - r).norm();
    NnlsSolution {
        coeffs: x,
        residual,
    }
}

fn passive_lstsq(g: &DMatrix<f64>, r: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let sub = g.select_columns(&cols);
    let svd = sub.svd(true, true);
    let sol = svd
        .solve(r, 1e-12 * (1.0 + g.norm()))
        .unwrap_or_else(|_| DVector::zeros(cols.len()));
    let mut out = DVector::zeros(passive.len());
    for (i, &j) in cols.iter().enumerate() {
        out[j] = sol[i];
    }
    out
}
