//! Dense two-phase tableau simplex over free variables.
//!
//! Constraints are `Aeq x = beq` and `Aineq x >= bineq` with `x` unrestricted in sign. Each
//! free variable is split as `x = x⁺ - x⁻` and each inequality gets a surplus column, giving a
//! standard-form program that is driven to feasibility with one artificial per row. Entering and
//! leaving choices follow Bland's rule, so the method terminates without a perturbation scheme.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const WITNESS_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;

/// Outcome of a feasibility query.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(DVector<f64>),
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn witness(&self) -> Option<&DVector<f64>> {
        match self {
            Feasibility::Feasible(x) => Some(x),
            Feasibility::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: DVector<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// Decides whether `{x | Aeq x = beq, Aineq x >= bineq}` is nonempty.
///
/// The witness satisfies every constraint to within `1e-9` (scaled by the right-hand side
/// magnitude); a witness that misses this is reported as a numerical failure.
pub fn lp_feasible(
    aeq: &DMatrix<f64>,
    beq: &DVector<f64>,
    aineq: &DMatrix<f64>,
    bineq: &DVector<f64>,
) -> Result<Feasibility> {
    let mut lp = StandardForm::build(aeq, beq, aineq, bineq)?;
    if !lp.phase_one()? {
        return Ok(Feasibility::Infeasible);
    }
    let x = lp.primal();
    check_witness(&x, aeq, beq, aineq, bineq)?;
    Ok(Feasibility::Feasible(x))
}

/// Minimizes `cᵀx` over `{x | Aeq x = beq, Aineq x >= bineq}`.
pub fn lp_minimize(
    c: &DVector<f64>,
    aeq: &DMatrix<f64>,
    beq: &DVector<f64>,
    aineq: &DMatrix<f64>,
    bineq: &DVector<f64>,
) -> Result<LpOutcome> {
    let mut lp = StandardForm::build(aeq, beq, aineq, bineq)?;
    if c.len() != lp.n {
        return Err(Error::DimensionMismatch {
            what: "LP cost vector",
            expected: lp.n,
            found: c.len(),
        });
    }
    if !lp.phase_one()? {
        return Ok(LpOutcome::Infeasible);
    }
    if !lp.phase_two(c)? {
        return Ok(LpOutcome::Unbounded);
    }
    let x = lp.primal();
    let value = c.dot(&x);
    Ok(LpOutcome::Optimal { x, value })
}

fn check_witness(
    x: &DVector<f64>,
    aeq: &DMatrix<f64>,
    beq: &DVector<f64>,
    aineq: &DMatrix<f64>,
    bineq: &DVector<f64>,
) -> Result<()> {
    let scale = 1.0 + beq.amax().max(bineq.amax());
    let tol = WITNESS_TOL * scale;
    if aeq.nrows() > 0 {
        let r = aeq * x - beq;
        if r.amax() > tol {
            return Err(Error::NumericalFailure(format!(
                "LP witness misses an equality by {:e}",
                r.amax()
            )));
        }
    }
    if aineq.nrows() > 0 {
        let r = aineq * x - bineq;
        let worst = r.min();
        if worst < -tol {
            return Err(Error::NumericalFailure(format!(
                "LP witness misses an inequality by {:e}",
                -worst
            )));
        }
    }
    Ok(())
}

struct StandardForm {
    /// Number of original (free) variables.
    n: usize,
    rows: usize,
    /// Structural columns: x⁺, x⁻, surplus. Artificials follow.
    structural: usize,
    width: usize,
    tab: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
}

impl StandardForm {
    fn build(
        aeq: &DMatrix<f64>,
        beq: &DVector<f64>,
        aineq: &DMatrix<f64>,
        bineq: &DVector<f64>,
    ) -> Result<Self> {
        let n = aeq.ncols().max(aineq.ncols());
        if aeq.nrows() > 0 && aeq.ncols() != n || aineq.nrows() > 0 && aineq.ncols() != n {
            return Err(Error::DimensionMismatch {
                what: "LP constraint columns",
                expected: n,
                found: aeq.ncols().min(aineq.ncols()),
            });
        }
        if beq.len() != aeq.nrows() {
            return Err(Error::DimensionMismatch {
                what: "LP equality right-hand side",
                expected: aeq.nrows(),
                found: beq.len(),
            });
        }
        if bineq.len() != aineq.nrows() {
            return Err(Error::DimensionMismatch {
                what: "LP inequality right-hand side",
                expected: aineq.nrows(),
                found: bineq.len(),
            });
        }
        let neq = aeq.nrows();
        let nin = aineq.nrows();
        let rows = neq + nin;
        let structural = 2 * n + nin;
        let width = structural + rows + 1;
        let rhs_col = width - 1;
        let mut tab = vec![0.0; rows * width];

        for i in 0..rows {
            let row = &mut tab[i * width..(i + 1) * width];
            let (coeffs, rhs): (Vec<f64>, f64) = if i < neq {
                (aeq.row(i).iter().copied().collect(), beq[i])
            } else {
                let k = i - neq;
                row[2 * n + k] = -1.0;
                (aineq.row(k).iter().copied().collect(), bineq[k])
            };
            for (j, a) in coeffs.into_iter().enumerate() {
                row[j] = a;
                row[n + j] = -a;
            }
            row[rhs_col] = rhs;
            if rhs < 0.0 {
                row[..structural].iter_mut().for_each(|v| *v = -*v);
                row[rhs_col] = -rhs;
            }
            row[structural + i] = 1.0;
        }

        let basis = (0..rows).map(|i| structural + i).collect();
        Ok(Self {
            n,
            rows,
            structural,
            width,
            tab,
            cost: vec![0.0; width],
            basis,
        })
    }

    fn rhs(&self, i: usize) -> f64 {
        self.tab[i * self.width + self.width - 1]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.tab[i * self.width + j]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let piv = self.tab[pr * w + pc];
        for v in &mut self.tab[pr * w..(pr + 1) * w] {
            *v /= piv;
        }
        let pivot_row: Vec<f64> = self.tab[pr * w..(pr + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == pr {
                continue;
            }
            let factor = self.tab[i * w + pc];
            if factor != 0.0 {
                let row = &mut self.tab[i * w..(i + 1) * w];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                row[pc] = 0.0;
            }
        }
        let factor = self.cost[pc];
        if factor != 0.0 {
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            self.cost[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Runs Bland-rule simplex on the current cost row, allowing entry only from columns below
    /// `allowed`. Returns `false` if the objective is unbounded below.
    fn iterate(&mut self, allowed: usize) -> Result<bool> {
        let rhs_col = self.width - 1;
        for _ in 0..MAX_PIVOTS {
            let Some(enter) = (0..allowed).find(|&j| self.cost[j] < -PIVOT_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, enter);
                if a > PIVOT_TOL {
                    let ratio = self.tab[i * self.width + rhs_col] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((best, r)) => {
                            let tie = (ratio - r).abs() <= 1e-12 * (1.0 + r.abs());
                            if ratio < r && !tie || tie && self.basis[i] < self.basis[best] {
                                Some((i, ratio))
                            } else {
                                Some((best, r))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, enter),
                None => return Ok(false),
            }
        }
        Err(Error::NumericalFailure(
            "simplex pivot limit exceeded".to_string(),
        ))
    }

    /// Minimizes the sum of artificials. Returns whether the original system is feasible.
    fn phase_one(&mut self) -> Result<bool> {
        let w = self.width;
        self.cost.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.rows {
            for j in 0..self.structural {
                self.cost[j] -= self.tab[i * w + j];
            }
            self.cost[w - 1] -= self.rhs(i);
        }
        let scale = 1.0 + (0..self.rows).map(|i| self.rhs(i)).fold(0.0, f64::max);
        self.iterate(self.structural)?;
        let infeasibility = -self.cost[w - 1];
        if infeasibility > WITNESS_TOL * scale {
            return Ok(false);
        }

        // Pivot zero-level artificials out of the basis where a structural column allows it.
        // Rows with no such column are redundant and keep their artificial at zero.
        for i in 0..self.rows {
            if self.basis[i] >= self.structural {
                if let Some(j) = (0..self.structural).find(|&j| self.at(i, j).abs() > PIVOT_TOL) {
                    self.pivot(i, j);
                }
            }
        }
        Ok(true)
    }

    fn phase_two(&mut self, c: &DVector<f64>) -> Result<bool> {
        let w = self.width;
        self.cost.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n {
            self.cost[j] = c[j];
            self.cost[self.n + j] = -c[j];
        }
        for i in 0..self.rows {
            let bj = self.basis[i];
            let cb = self.cost[bj];
            if cb != 0.0 {
                for j in 0..w {
                    self.cost[j] -= cb * self.tab[i * w + j];
                }
            }
        }
        self.iterate(self.structural)
    }

    fn primal(&self) -> DVector<f64> {
        let mut x = DVector::zeros(self.n);
        for (i, &bj) in self.basis.iter().enumerate() {
            let v = self.rhs(i);
            if bj < self.n {
                x[bj] += v;
            } else if bj < 2 * self.n {
                x[bj - self.n] -= v;
            }
        }
        x
    }
}
