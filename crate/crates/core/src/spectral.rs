//! Extreme eigenvalues of dense symmetric matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetry tolerance on `max |M - Mᵀ|`.
pub const SYMMETRY_TOL: f64 = 1e-12;
pub const DEFAULT_JACOBI_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralMethod {
    Jacobi,
    Gershgorin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub method: SpectralMethod,
}

pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            what: "square matrix",
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL {
        return Err(Error::NonSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// Full eigenvalue set of a symmetric matrix by cyclic Jacobi rotations, unsorted.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops to `tol` times the Frobenius norm of
/// the input.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>, tol: f64) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "Jacobi tolerance {tol} must be > 0"
        )));
    }
    let n = m.nrows();
    let mut a = m.clone();
    let target = tol * m.norm();

    let off_norm = |a: &DMatrix<f64>| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                // Rotation angle annihilating a[p][q] (Rutishauser's stable form).
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }
    Ok((0..n).map(|i| a[(i, i)]).collect())
}

pub fn jacobi_extreme_eigenvalues(m: &DMatrix<f64>, tol: f64) -> Result<SpectralBounds> {
    let eig = jacobi_eigenvalues(m, tol)?;
    let lambda_min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SpectralBounds {
        lambda_min,
        lambda_max,
        method: SpectralMethod::Jacobi,
    })
}

/// Gershgorin disc enclosure of the spectrum.
pub fn gershgorin_bounds(m: &DMatrix<f64>) -> Result<SpectralBounds> {
    check_symmetric(m)?;
    let n = m.nrows();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
        lo = lo.min(m[(i, i)] - radius);
        hi = hi.max(m[(i, i)] + radius);
    }
    Ok(SpectralBounds {
        lambda_min: lo,
        lambda_max: hi,
        method: SpectralMethod::Gershgorin,
    })
}

pub fn spectral_bounds(m: &DMatrix<f64>, method: SpectralMethod) -> Result<SpectralBounds> {
    match method {
        SpectralMethod::Jacobi => jacobi_extreme_eigenvalues(m, DEFAULT_JACOBI_TOL),
        SpectralMethod::Gershgorin => gershgorin_bounds(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(n: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(n, n, v)
    }

    #[test]
    fn jacobi_examples() {
        let b = jacobi_extreme_eigenvalues(&mat(2, &[2.0, 0.0, 0.0, -2.0]), 1e-12).unwrap();
        assert_eq!((b.lambda_min, b.lambda_max), (-2.0, 2.0));

        for n in 1..6 {
            let b = jacobi_extreme_eigenvalues(&DMatrix::identity(n, n), 1e-12).unwrap();
            assert_eq!((b.lambda_min, b.lambda_max), (1.0, 1.0));
        }

        let b = jacobi_extreme_eigenvalues(&mat(2, &[0.0, 1.0, 1.0, 0.0]), 1e-12).unwrap();
        assert!((b.lambda_min + 1.0).abs() < 1e-14);
        assert!((b.lambda_max - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gershgorin_examples() {
        let b = gershgorin_bounds(&mat(2, &[2.0, 0.0, 0.0, -2.0])).unwrap();
        assert_eq!((b.lambda_min, b.lambda_max), (-2.0, 2.0));
        let b = gershgorin_bounds(&mat(2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert_eq!((b.lambda_min, b.lambda_max), (-1.0, 1.0));
        let b = gershgorin_bounds(&mat(1, &[1.0])).unwrap();
        assert_eq!((b.lambda_min, b.lambda_max), (1.0, 1.0));
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = mat(2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(
            jacobi_extreme_eigenvalues(&m, 1e-12),
            Err(Error::NonSymmetric { .. })
        ));
        assert!(matches!(
            gershgorin_bounds(&m),
            Err(Error::NonSymmetric { .. })
        ));
    }

    /// Real roots of a monic cubic via the trigonometric method (three real roots assumed).
    fn cubic_roots(a: f64, b: f64, c: f64) -> [f64; 3] {
        // x³ + a x² + b x + c
        let p = b - a * a / 3.0;
        let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
        let shift = -a / 3.0;
        if p.abs() < 1e-300 {
            let r = (-q).cbrt();
            return [r + shift; 3];
        }
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
        [
            m * theta.cos() + shift,
            m * (theta - two_pi_3).cos() + shift,
            m * (theta - 2.0 * two_pi_3).cos() + shift,
        ]
    }

    fn char_poly_eigs(m: &DMatrix<f64>) -> Vec<f64> {
        match m.nrows() {
            1 => vec![m[(0, 0)]],
            2 => {
                let tr = m[(0, 0)] + m[(1, 1)];
                let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
                let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
                vec![tr / 2.0 - disc, tr / 2.0 + disc]
            }
            3 => {
                let tr = m.trace();
                let det = m.determinant();
                let mut minors = 0.0;
                for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                    minors += m[(i, i)] * m[(j, j)] - m[(i, j)] * m[(j, i)];
                }
                cubic_roots(-tr, minors, -det).to_vec()
            }
            _ => unreachable!(),
        }
    }

    fn sym_matrix(max_n: usize) -> impl Strategy<Value = DMatrix<f64>> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(-5.0..5.0f64, n * n).prop_map(move |v| {
                let m = DMatrix::from_row_slice(n, n, &v);
                (&m + m.transpose()) * 0.5
            })
        })
    }

    proptest! {
        #[test]
        fn gershgorin_contains_jacobi(m in sym_matrix(8)) {
            let j = jacobi_extreme_eigenvalues(&m, 1e-12).unwrap();
            let g = gershgorin_bounds(&m).unwrap();
            prop_assert!(g.lambda_min <= j.lambda_min + 1e-12);
            prop_assert!(g.lambda_max >= j.lambda_max - 1e-12);
            prop_assert!(j.lambda_min <= j.lambda_max);
        }

        #[test]
        fn jacobi_matches_characteristic_polynomial(m in sym_matrix(3)) {
            let mut jac = jacobi_eigenvalues(&m, 1e-12).unwrap();
            let mut cp = char_poly_eigs(&m);
            jac.sort_by(f64::total_cmp);
            cp.sort_by(f64::total_cmp);
            for (a, b) in jac.iter().zip(&cp) {
                prop_assert!((a - b).abs() <= 1e-8, "{jac:?} vs {cp:?}");
            }
        }
    }
}
