//! Seeded random instances with bounded feasible sets, for property tests and benchmarks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::Result;
use crate::geometry::{pinned_probe, project_onto_c};
use crate::model::IqpProblem;

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub problem: IqpProblem,
    /// A feasible starting point.
    pub x0: DVector<f64>,
}

fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 0.1 {
            return v / norm;
        }
    }
}

/// Rows of a perturbed simplex around the origin: `xᵢ >= -rᵢ` and `-Σxᵢ >= -r₀`, each row
/// tilted slightly.
fn simplex_rows<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<DVector<f64>> {
    let mut rows: Vec<DVector<f64>> = (0..n)
        .map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 }))
        .collect();
    rows.push(DVector::from_element(n, -1.0));
    for row in &mut rows {
        let jitter = DVector::from_fn(n, |_, _| rng.random_range(-0.1..0.1));
        *row += jitter;
        let norm = row.norm();
        *row /= norm;
    }
    rows
}

/// Random polytope `{x | Ax >= b}` around a random center, a random symmetric (generally
/// indefinite) `Q` with entries in `[-1, 1]`, and a random linear term.
///
/// `n` is drawn from `1..=n_max` and `m` from `n+1..=m_max` (so `m_max >= 2` is required and `n`
/// is capped at `m_max - 1`). Every row passes at distance between `0.5` and `1.5` from the
/// center, so `C` has nonempty interior; instances whose `C` turns out unbounded are redrawn.
pub fn random_bounded_instance<R: Rng + ?Sized>(
    rng: &mut R,
    n_max: usize,
    m_max: usize,
) -> Result<RandomInstance> {
    assert!(n_max >= 1 && m_max >= 2, "need n_max >= 1 and m_max >= 2");
    loop {
        let n = rng.random_range(1..=n_max.min(m_max - 1));
        let m = rng.random_range(n + 1..=m_max);
        let mut rows = simplex_rows(rng, n);
        while rows.len() < m {
            rows.push(unit_vector(rng, n));
        }
        let center = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
        let b = DVector::from_fn(m, |i, _| rows[i].dot(&center) - rng.random_range(0.5..1.5));

        if pinned_probe(n, &DMatrix::zeros(0, n), &a)?.is_some() {
            continue;
        }
        let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let q_mat = (&raw + raw.transpose()) * 0.5;
        let q_vec = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let problem = IqpProblem::new(q_mat, q_vec, a, b)?;

        let guess = &center + DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        let x0 = project_onto_c(&problem, &guess)?;
        return Ok(RandomInstance { problem, x0 });
    }
}

/// A random symmetric positive definite matrix `BᵀB + shift·I`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize, shift: f64) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    b.transpose() * &b + DMatrix::identity(n, n) * shift
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn instances_are_bounded_and_start_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let inst = random_bounded_instance(&mut rng, 6, 10).unwrap();
            let p = &inst.problem;
            assert!(p.n() <= 6 && p.m() <= 10 && p.m() > p.n());
            assert!(p.residuals(&inst.x0).min() >= -1e-9);
            assert!(pinned_probe(p.n(), &DMatrix::zeros(0, p.n()), p.a())
                .unwrap()
                .is_none());
        }
    }

    #[test]
    fn spd_has_positive_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_spd(&mut rng, 5, 0.5);
        let eig = crate::spectral::jacobi_eigenvalues(&h, 1e-12).unwrap();
        assert!(eig.iter().all(|&l| l >= 0.5 - 1e-9));
    }
}
