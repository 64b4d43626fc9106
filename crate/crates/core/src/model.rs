//! Problem data, DC decompositions and inertial configuration.
//!
//! The problem is `minimize ½xᵀQx + qᵀx subject to Ax >= b`. Its objective is split as
//! `f = f₁ - f₂` with `f₁ = ½xᵀQ₁x + qᵀx + δ_C` and `f₂ = ½xᵀQ₂x`, where the split is one of
//!
//! * [`Variant::ProjectionA`]: `Q₁ = ηI`, `Q₂ = ηI - Q`, requiring `η > λmax(Q)`;
//! * [`Variant::ProximalB`]: `Q₁ = Q + ηI`, `Q₂ = ηI`, requiring `η > -λmin(Q)`.

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::simplex::{lp_feasible, Feasibility};
use crate::spectral::{self, SpectralMethod};

/// Validated problem data. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct IqpProblem {
    q_mat: DMatrix<f64>,
    q_vec: DVector<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    symmetrized: bool,
}

impl IqpProblem {
    /// Validates and wraps the data. An asymmetric `Q` is replaced by `(Q + Qᵀ)/2` and flagged;
    /// an empty constraint set is rejected.
    pub fn new(
        q_mat: DMatrix<f64>,
        q_vec: DVector<f64>,
        a: DMatrix<f64>,
        b: DVector<f64>,
    ) -> Result<Self> {
        let n = q_vec.len();
        if n == 0 {
            return Err(Error::DimensionMismatch {
                what: "dimension n",
                expected: 1,
                found: 0,
            });
        }
        let dims = [
            ("Q rows", n, q_mat.nrows()),
            ("Q columns", n, q_mat.ncols()),
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
        if a.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                what: "constraint count m",
                expected: 1,
                found: 0,
            });
        }
        let finite = q_mat
            .iter()
            .chain(q_vec.iter())
            .chain(a.iter())
            .chain(b.iter());
        if finite.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("problem data must be finite".into()));
        }

        let symmetrized = spectral::asymmetry(&q_mat) > 0.0;
        let q_mat = if symmetrized {
            warn!("Q is not symmetric; using (Q + Qᵀ)/2");
            (&q_mat + q_mat.transpose()) * 0.5
        } else {
            q_mat
        };

        let no_eq = DMatrix::zeros(0, n);
        match lp_feasible(&no_eq, &DVector::zeros(0), &a, &b)? {
            Feasibility::Feasible(_) => {}
            Feasibility::Infeasible => return Err(Error::InfeasibleConstraintSet),
        }

        Ok(Self {
            q_mat,
            q_vec,
            a,
            b,
            symmetrized,
        })
    }

    pub fn n(&self) -> usize {
        self.q_vec.len()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    /// The (symmetric) quadratic term `Q`.
    pub fn q_mat(&self) -> &DMatrix<f64> {
        &self.q_mat
    }

    /// The linear term `q`.
    pub fn q_vec(&self) -> &DVector<f64> {
        &self.q_vec
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    /// Whether the supplied `Q` was asymmetric and has been replaced by its symmetric part.
    pub fn was_symmetrized(&self) -> bool {
        self.symmetrized
    }

    /// Constraint residuals `Ax - b`.
    pub fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x - &self.b
    }

    /// `Qx + q`.
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.q_mat * x + &self.q_vec
    }

    pub fn check_point(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                what: "point",
                expected: self.n(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

/// Builds a problem from row-major entry arrays.
pub fn build_problem(
    n: usize,
    m: usize,
    q_entries: &[f64],
    q_vec: &[f64],
    a_entries: &[f64],
    b_entries: &[f64],
) -> Result<IqpProblem> {
    let lens = [
        ("Q entries", n * n, q_entries.len()),
        ("q entries", n, q_vec.len()),
        ("A entries", m * n, a_entries.len()),
        ("b entries", m, b_entries.len()),
    ];
    for (what, expected, found) in lens {
        if expected != found {
            return Err(Error::DimensionMismatch {
                what,
                expected,
                found,
            });
        }
    }
    IqpProblem::new(
        DMatrix::from_row_slice(n, n, q_entries),
        DVector::from_column_slice(q_vec),
        DMatrix::from_row_slice(m, n, a_entries),
        DVector::from_column_slice(b_entries),
    )
}

/// `½xᵀQx + qᵀx`.
pub fn objective(p: &IqpProblem, x: &DVector<f64>) -> Result<f64> {
    p.check_point(x)?;
    Ok(objective_unchecked(p, x))
}

pub(crate) fn objective_unchecked(p: &IqpProblem, x: &DVector<f64>) -> f64 {
    0.5 * x.dot(&(p.q_mat() * x)) + p.q_vec().dot(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `Q₁ = ηI`, `Q₂ = ηI - Q`; drives the projection algorithm.
    ProjectionA,
    /// `Q₁ = Q + ηI`, `Q₂ = ηI`; drives the proximal algorithm.
    ProximalB,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaPolicy {
    /// Spectral bound plus one.
    Auto,
    Explicit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcDecomposition {
    pub variant: Variant,
    pub eta: f64,
    pub rho: f64,
    pub lambda_min_q: f64,
    pub lambda_max_q: f64,
}

impl DcDecomposition {
    /// Smallest η admissible for the variant (exclusive).
    pub fn eta_bound(variant: Variant, lambda_min_q: f64, lambda_max_q: f64) -> f64 {
        match variant {
            Variant::ProjectionA => lambda_max_q.max(0.0),
            Variant::ProximalB => (-lambda_min_q).max(0.0),
        }
    }

    pub fn q1(&self, p: &IqpProblem) -> DMatrix<f64> {
        let eye = DMatrix::<f64>::identity(p.n(), p.n()) * self.eta;
        match self.variant {
            Variant::ProjectionA => eye,
            Variant::ProximalB => p.q_mat() + eye,
        }
    }

    pub fn q2(&self, p: &IqpProblem) -> DMatrix<f64> {
        let eye = DMatrix::<f64>::identity(p.n(), p.n()) * self.eta;
        match self.variant {
            Variant::ProjectionA => eye - p.q_mat(),
            Variant::ProximalB => eye,
        }
    }
}

pub fn make_decomposition(
    p: &IqpProblem,
    variant: Variant,
    eta_policy: EtaPolicy,
) -> Result<DcDecomposition> {
    make_decomposition_with(p, variant, eta_policy, SpectralMethod::Jacobi)
}

/// As [`make_decomposition`], choosing how the spectrum of `Q` is bounded. Gershgorin bounds
/// overestimate the spectral spread, which only shrinks ρ and the admissible γ range.
pub fn make_decomposition_with(
    p: &IqpProblem,
    variant: Variant,
    eta_policy: EtaPolicy,
    method: SpectralMethod,
) -> Result<DcDecomposition> {
    let spec = spectral::spectral_bounds(p.q_mat(), method)?;
    let bound = DcDecomposition::eta_bound(variant, spec.lambda_min, spec.lambda_max);
    let eta = match eta_policy {
        EtaPolicy::Auto => bound + 1.0,
        EtaPolicy::Explicit(eta) => {
            if !eta.is_finite() || eta <= bound {
                return Err(Error::EtaTooSmall { eta, bound });
            }
            eta
        }
    };
    let rho = match variant {
        Variant::ProjectionA => eta - spec.lambda_max,
        Variant::ProximalB => eta + spec.lambda_min,
    };
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::EtaTooSmall { eta, bound });
    }
    Ok(DcDecomposition {
        variant,
        eta,
        rho,
        lambda_min_q: spec.lambda_min,
        lambda_max_q: spec.lambda_max,
    })
}

/// How the inertial weight γ is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSpec {
    Absolute(f64),
    /// `θ · ρ/2` with `θ ∈ [0, 1)`.
    Fraction(f64),
}

impl Default for GammaSpec {
    fn default() -> Self {
        GammaSpec::Fraction(0.9)
    }
}

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100_000;
pub const DEFAULT_DIVERGENCE_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertialConfig {
    pub gamma: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub divergence_norm_cap: f64,
    /// `(ρ - γ)/2`.
    pub alpha: f64,
    /// `α - γ/2`.
    pub alpha1: f64,
}

impl InertialConfig {
    pub fn new(dc: &DcDecomposition, gamma: GammaSpec, tol: f64, max_iter: usize) -> Result<Self> {
        let upper = dc.rho / 2.0;
        let g = match gamma {
            GammaSpec::Absolute(g) => g,
            GammaSpec::Fraction(theta) => {
                if !(0.0..1.0).contains(&theta) {
                    return Err(Error::InvalidGamma {
                        gamma: theta * upper,
                        upper,
                    });
                }
                theta * upper
            }
        };
        if !(0.0..upper).contains(&g) {
            return Err(Error::InvalidGamma { gamma: g, upper });
        }
        if tol.is_nan() || tol < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tolerance {tol} must be >= 0"
            )));
        }
        if max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive".into()));
        }
        let alpha = (dc.rho - g) / 2.0;
        Ok(Self {
            gamma: g,
            tol,
            max_iter,
            divergence_norm_cap: DEFAULT_DIVERGENCE_CAP,
            alpha,
            alpha1: alpha - g / 2.0,
        })
    }

    pub fn with_divergence_cap(mut self, cap: f64) -> Result<Self> {
        if cap.is_nan() || cap <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "divergence cap {cap} must be > 0"
            )));
        }
        self.divergence_norm_cap = cap;
        Ok(self)
    }

    /// Checks that `gamma` is admissible for `dc`; used when a config is reused.
    pub fn validate_for(&self, dc: &DcDecomposition) -> Result<()> {
        let upper = dc.rho / 2.0;
        if !(0.0..upper).contains(&self.gamma) {
            return Err(Error::InvalidGamma {
                gamma: self.gamma,
                upper,
            });
        }
        Ok(())
    }
}
