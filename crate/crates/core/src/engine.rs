//! Inertial DC iterations for the IQP.
//!
//! Both algorithms start from `x⁻¹ = x⁰`, form the inertial term `dᵏ = γ(xᵏ - xᵏ⁻¹)` and compute
//! `xᵏ⁺¹` from a strongly convex subproblem:
//!
//! * [`Algorithm::InDca1`] projects `(1 + γ/η)xᵏ - (γ/η)xᵏ⁻¹ - (Qxᵏ + q)/η` onto `C`;
//! * [`Algorithm::InDca2`] minimizes `½xᵀ(Q + ηI)x + (q - ηxᵏ - dᵏ)ᵀx` over `C`.
//!
//! The loop stops once `‖xᵏ⁺¹ - xᵏ‖ <= Tol` and `‖dᵏ‖ <= Tol` both hold and returns `xᵏ`.

use log::{debug, warn};
use nalgebra::{DMatrix, DVector};

use crate::certify::{kkt_certificate_with, KktCertificate};
use crate::error::{Error, Result};
use crate::geometry::{active_set, normal_cone_residual, DEFAULT_ACT_TOL};
use crate::model::{objective_unchecked, DcDecomposition, InertialConfig, IqpProblem, Variant};
use crate::qp::{build_indca2_subproblem, solve_qp_warm, QpSolution, QpSubproblem, WarmStart};

/// Absolute tolerance used by [`diagnostics_check`].
pub const DIAGNOSTIC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Inertial projection DCA.
    InDca1,
    /// Inertial proximal DCA.
    InDca2,
}

impl Algorithm {
    pub fn variant(self) -> Variant {
        match self {
            Algorithm::InDca1 => Variant::ProjectionA,
            Algorithm::InDca2 => Variant::ProximalB,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    /// `xᵏ`.
    pub x: DVector<f64>,
    /// The inertial term `dᵏ⁻¹` that produced `xᵏ` (zero for `k = 0`).
    pub d: DVector<f64>,
    pub f_val: f64,
    /// `‖xᵏ - xᵏ⁻¹‖`.
    pub step_norm: f64,
    /// `f(xᵏ) + α‖xᵏ - xᵏ⁻¹‖²`.
    pub energy: f64,
    /// Distance of the step's optimality inclusion from holding (zero for `k = 0`).
    pub inclusion_residual: f64,
    pub active: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    ToleranceReached,
    MaxIterReached,
    /// `‖xᵏ‖` passed the divergence cap: the objective may be unbounded below on `C`, or the
    /// qualification condition may fail.
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub trace: Vec<TraceRecord>,
    pub status: SolveStatus,
    pub final_point: DVector<f64>,
    pub final_objective: f64,
    pub kkt: KktCertificate,
    /// Set when the supplied starting point was outside `C` and got projected.
    pub start_projected: bool,
}

impl SolveResult {
    /// Number of iterations performed (trace length minus the initial record).
    pub fn iterations(&self) -> usize {
        self.trace.len() - 1
    }
}

fn check_variant(dc: &DcDecomposition, expected: Variant) -> Result<()> {
    if dc.variant != expected {
        return Err(Error::VariantMismatch {
            expected,
            found: dc.variant,
        });
    }
    Ok(())
}

/// The point whose projection onto `C` is the next projection-DCA iterate.
pub fn indca1_anchor(
    p: &IqpProblem,
    dc: &DcDecomposition,
    x_k: &DVector<f64>,
    x_km1: &DVector<f64>,
    gamma: f64,
) -> DVector<f64> {
    let ratio = gamma / dc.eta;
    x_k * (1.0 + ratio) - x_km1 * ratio - p.gradient(x_k) / dc.eta
}

fn indca1_solve(
    p: &IqpProblem,
    dc: &DcDecomposition,
    x_k: &DVector<f64>,
    x_km1: &DVector<f64>,
    gamma: f64,
    warm: Option<&WarmStart>,
) -> Result<QpSolution> {
    check_variant(dc, Variant::ProjectionA)?;
    p.check_point(x_k)?;
    p.check_point(x_km1)?;
    let u = indca1_anchor(p, dc, x_k, x_km1, gamma);
    let sub = QpSubproblem::new(
        DMatrix::identity(p.n(), p.n()),
        -u,
        p.a().clone(),
        p.b().clone(),
    )?;
    solve_qp_warm(&sub, warm)
}

fn indca2_solve(
    p: &IqpProblem,
    dc: &DcDecomposition,
    x_k: &DVector<f64>,
    x_km1: &DVector<f64>,
    gamma: f64,
    warm: Option<&WarmStart>,
) -> Result<QpSolution> {
    let sub = build_indca2_subproblem(p, dc, x_k, x_km1, gamma)?;
    solve_qp_warm(&sub, warm)
}

/// One projection-DCA step.
pub fn indca1_step(
    p: &IqpProblem,
    dc: &DcDecomposition,
    x_k: &DVector<f64>,
    x_km1: &DVector<f64>,
    gamma: f64,
) -> Result<DVector<f64>> {
    Ok(indca1_solve(p, dc, x_k, x_km1, gamma, None)?.x)
}

/// One proximal-DCA step.
pub fn indca2_step(
    p: &IqpProblem,
    dc: &DcDecomposition,
    x_k: &DVector<f64>,
    x_km1: &DVector<f64>,
    gamma: f64,
) -> Result<DVector<f64>> {
    Ok(indca2_solve(p, dc, x_k, x_km1, gamma, None)?.x)
}

/// Residual of the step inclusion
/// `γ(xᵏ - xᵏ⁻¹) ∈ η(xᵏ⁺¹ - xᵏ) + (Qz + q) + N_C(xᵏ⁺¹)`, where `z = xᵏ` for the projection
/// variant and `z = xᵏ⁺¹` for the proximal one.
pub fn inclusion_residual(
    p: &IqpProblem,
    dc: &DcDecomposition,
    x_next: &DVector<f64>,
    x_k: &DVector<f64>,
    x_km1: &DVector<f64>,
    gamma: f64,
) -> Result<f64> {
    let alpha = active_set(p, x_next, DEFAULT_ACT_TOL)?;
    let linearized = match dc.variant {
        Variant::ProjectionA => p.gradient(x_k),
        Variant::ProximalB => p.gradient(x_next),
    };
    let w = (x_k - x_km1) * gamma - (x_next - x_k) * dc.eta - linearized;
    Ok(normal_cone_residual(p, &alpha, &w).0)
}

/// Runs the chosen algorithm from `x0` (projected onto `C` first if it lies outside).
pub fn run(
    p: &IqpProblem,
    dc: &DcDecomposition,
    cfg: &InertialConfig,
    x0: &DVector<f64>,
    algo: Algorithm,
) -> Result<SolveResult> {
    check_variant(dc, algo.variant())?;
    cfg.validate_for(dc)?;
    p.check_point(x0)?;

    let feasible = p.residuals(x0).min() >= -DEFAULT_ACT_TOL;
    let x0 = if feasible {
        x0.clone()
    } else {
        warn!("starting point lies outside C; projecting it");
        crate::geometry::project_onto_c(p, x0)?
    };
    let gamma = cfg.gamma;
    let n = p.n();

    let f0 = objective_unchecked(p, &x0);
    let mut working = active_set(p, &x0, DEFAULT_ACT_TOL)?;
    let mut trace = vec![TraceRecord {
        k: 0,
        x: x0.clone(),
        d: DVector::zeros(n),
        f_val: f0,
        step_norm: 0.0,
        energy: f0,
        inclusion_residual: 0.0,
        active: working.clone(),
    }];

    let mut x_prev = x0.clone();
    let mut x = x0;
    let mut status = SolveStatus::MaxIterReached;
    let mut final_point = None;

    for k in 0..cfg.max_iter {
        let d = (&x - &x_prev) * gamma;
        let warm = WarmStart {
            x: x.clone(),
            working_set: working,
        };
        let sol = match algo {
            Algorithm::InDca1 => indca1_solve(p, dc, &x, &x_prev, gamma, Some(&warm))?,
            Algorithm::InDca2 => indca2_solve(p, dc, &x, &x_prev, gamma, Some(&warm))?,
        };
        let x_next = sol.x;
        let step_norm = (&x_next - &x).norm();
        let f_val = objective_unchecked(p, &x_next);
        let active = active_set(p, &x_next, DEFAULT_ACT_TOL)?;
        let inclusion = inclusion_residual(p, dc, &x_next, &x, &x_prev, gamma)?;
        let d_norm = d.norm();
        trace.push(TraceRecord {
            k: k + 1,
            x: x_next.clone(),
            d,
            f_val,
            step_norm,
            energy: f_val + cfg.alpha * step_norm * step_norm,
            inclusion_residual: inclusion,
            active: active.clone(),
        });
        debug!("k={} f={f_val:.12e} step={step_norm:.3e}", k + 1);

        if x_next.norm() > cfg.divergence_norm_cap {
            status = SolveStatus::Diverged;
            final_point = Some(x_next);
            break;
        }
        if step_norm <= cfg.tol && d_norm <= cfg.tol {
            status = SolveStatus::ToleranceReached;
            final_point = Some(x.clone());
            break;
        }
        working = sol.working_set;
        x_prev = std::mem::replace(&mut x, x_next);
    }

    if status == SolveStatus::Diverged {
        warn!(
            "iterates left the ball of radius {:e}",
            cfg.divergence_norm_cap
        );
    }
    let final_point = final_point.unwrap_or(x);
    let final_objective = objective_unchecked(p, &final_point);
    let row_scale = (0..p.m()).map(|i| p.a().row(i).norm()).fold(0.0, f64::max);
    let act_tol = DEFAULT_ACT_TOL.max(10.0 * cfg.tol * row_scale);
    let kkt = kkt_certificate_with(p, &final_point, act_tol);
    Ok(SolveResult {
        trace,
        status,
        final_point,
        final_objective,
        kkt,
        start_projected: !feasible,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    /// `max_k [E_{k+1} - E_k + α₁‖xᵏ - xᵏ⁻¹‖²]`; nonpositive up to rounding when the energy
    /// decreases as it should.
    pub max_decrease_slack: f64,
    /// Index `k` attaining `max_decrease_slack`.
    pub worst_step: usize,
    /// `α₁ Σ ‖xᵏ⁺¹ - xᵏ‖²` over the whole trace.
    pub partial_sum: f64,
    /// `f(x⁰) - min_k f(xᵏ)`.
    pub sum_bound: f64,
    pub last_step_norm: f64,
}

impl DiagnosticsReport {
    pub fn energy_decrease_ok(&self) -> bool {
        self.max_decrease_slack <= DIAGNOSTIC_TOL
    }

    pub fn summability_ok(&self) -> bool {
        self.partial_sum <= self.sum_bound + DIAGNOSTIC_TOL
    }

    pub fn passed(&self) -> bool {
        self.energy_decrease_ok() && self.summability_ok()
    }
}

/// Re-derives energies from the iterates and checks the descent and summability estimates.
///
/// Objective values and step lengths are recomputed from `trace[k].x`, so a trace whose points
/// were altered after the fact is judged on the altered points.
pub fn diagnostics_check(
    p: &IqpProblem,
    trace: &[TraceRecord],
    cfg: &InertialConfig,
    dc: &DcDecomposition,
) -> Result<DiagnosticsReport> {
    if trace.len() < 2 {
        return Err(Error::TraceTooShort { len: trace.len() });
    }
    cfg.validate_for(dc)?;
    let f: Vec<f64> = trace.iter().map(|r| objective_unchecked(p, &r.x)).collect();
    let mut steps = vec![0.0];
    steps.extend(trace.windows(2).map(|w| (&w[1].x - &w[0].x).norm()));
    let energy: Vec<f64> = f
        .iter()
        .zip(&steps)
        .map(|(f, s)| f + cfg.alpha * s * s)
        .collect();

    let (worst_step, max_decrease_slack) = (0..trace.len() - 1)
        .map(|k| {
            (
                k,
                energy[k + 1] - energy[k] + cfg.alpha1 * steps[k] * steps[k],
            )
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("trace has at least two records");
    let partial_sum = cfg.alpha1 * steps.iter().map(|s| s * s).sum::<f64>();
    let f_min = f.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DiagnosticsReport {
        max_decrease_slack,
        worst_step,
        partial_sum,
        sum_bound: f[0] - f_min,
        last_step_norm: *steps.last().unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_decomposition, EtaPolicy, GammaSpec};
    use crate::worked_example::example_problem;

    fn pt(x: f64, y: f64) -> DVector<f64> {
        DVector::from_vec(vec![x, y])
    }

    fn setup(variant: Variant) -> (IqpProblem, DcDecomposition) {
        let p = example_problem();
        let dc = make_decomposition(&p, variant, EtaPolicy::Explicit(3.0)).unwrap();
        (p, dc)
    }

    const G: f64 = 1.0 / 3.0;

    #[test]
    fn indca1_step_examples() {
        let (p, dc) = setup(Variant::ProjectionA);
        for t in [0.0, 0.5, 1.0, 10.0] {
            let x = pt(0.25 + t, 0.25 + t);
            let next = indca1_step(&p, &dc, &x, &x, G).unwrap();
            assert!((&next - &x).amax() < 1e-12, "t={t}");
        }
        let x = pt(0.25, 0.125);
        let next = indca1_step(&p, &dc, &x, &x, G).unwrap();
        assert!((&next - pt(0.25, 5.0 / 24.0)).amax() < 1e-12);
        let x = pt(1.0, 0.0);
        let next = indca1_step(&p, &dc, &x, &x, G).unwrap();
        assert!((&next - pt(1.0 / 3.0, 0.0)).amax() < 1e-12);
        assert!(inclusion_residual(&p, &dc, &next, &x, &x, G).unwrap() < 1e-12);
    }

    #[test]
    fn indca2_step_examples() {
        let (p, dc) = setup(Variant::ProximalB);
        let x = pt(0.25, 0.0);
        let next = indca2_step(&p, &dc, &x, &x, G).unwrap();
        assert!((&next - &x).amax() < 1e-12);
        // H = diag(5, 1), g = (-3, 0): the free minimizer (3/5, 0) is feasible.
        let x = pt(1.0, 0.0);
        let next = indca2_step(&p, &dc, &x, &x, G).unwrap();
        assert!((&next - pt(0.6, 0.0)).amax() < 1e-12);
        assert!(inclusion_residual(&p, &dc, &next, &x, &x, G).unwrap() < 1e-12);

        let x = pt(0.5, 0.5);
        let next = indca2_step(&p, &dc, &x, &x, 0.0).unwrap();
        assert!((&next - &x).amax() < 1e-12);
    }

    #[test]
    fn steps_reject_wrong_variant() {
        let (p, dc) = setup(Variant::ProximalB);
        let x = pt(1.0, 0.0);
        assert!(matches!(
            indca1_step(&p, &dc, &x, &x, G),
            Err(Error::VariantMismatch { .. })
        ));
        let cfg = InertialConfig::new(&dc, GammaSpec::Absolute(G), 1e-8, 100).unwrap();
        assert!(matches!(
            run(&p, &dc, &cfg, &x, Algorithm::InDca1),
            Err(Error::VariantMismatch { .. })
        ));
    }

    #[test]
    fn run_rejects_gamma_outside_range() {
        let (p, dc) = setup(Variant::ProjectionA);
        let mut cfg = InertialConfig::new(&dc, GammaSpec::Absolute(G), 1e-8, 100).unwrap();
        cfg.gamma = 0.5;
        assert!(matches!(
            run(&p, &dc, &cfg, &pt(1.0, 0.0), Algorithm::InDca1),
            Err(Error::InvalidGamma { .. })
        ));
    }

    #[test]
    fn run_case_two_stops_at_kkt_point() {
        let (p, dc) = setup(Variant::ProjectionA);
        let cfg = InertialConfig::new(&dc, GammaSpec::Absolute(G), 1e-8, 100).unwrap();
        let res = run(&p, &dc, &cfg, &pt(0.25, 0.0), Algorithm::InDca1).unwrap();
        assert_eq!(res.status, SolveStatus::ToleranceReached);
        assert_eq!(res.iterations(), 1);
        assert!((&res.final_point - pt(0.25, 0.0)).amax() < 1e-12);
        assert!(res.kkt.is_kkt);
        let last = res.trace.last().unwrap();
        assert!(last.step_norm <= cfg.tol && last.d.norm() <= cfg.tol);
    }

    #[test]
    fn run_projects_infeasible_start() {
        let (p, dc) = setup(Variant::ProjectionA);
        let cfg = InertialConfig::new(&dc, GammaSpec::Absolute(G), 1e-8, 1000).unwrap();
        let res = run(&p, &dc, &cfg, &pt(0.0, 0.0), Algorithm::InDca1).unwrap();
        assert!(res.start_projected);
        assert!((&res.trace[0].x - pt(0.25, 0.0)).amax() < 1e-12);
    }

    #[test]
    fn max_iter_and_divergence() {
        let (p, dc) = setup(Variant::ProjectionA);
        let cfg = InertialConfig::new(&dc, GammaSpec::Absolute(G), 0.0, 2).unwrap();
        let res = run(&p, &dc, &cfg, &pt(0.25, 0.125), Algorithm::InDca1).unwrap();
        assert_eq!(res.status, SolveStatus::MaxIterReached);
        assert_eq!(res.trace.len(), 3);

        // f = -x² on x >= 0 is unbounded below; iterates run away.
        let q = crate::model::build_problem(1, 1, &[-1.0], &[0.0], &[1.0], &[0.0]).unwrap();
        let dc = make_decomposition(&q, Variant::ProjectionA, EtaPolicy::Auto).unwrap();
        let cfg = InertialConfig::new(&dc, GammaSpec::default(), 1e-8, 100_000)
            .unwrap()
            .with_divergence_cap(1e6)
            .unwrap();
        let res = run(
            &q,
            &dc,
            &cfg,
            &DVector::from_vec(vec![1.0]),
            Algorithm::InDca1,
        )
        .unwrap();
        assert_eq!(res.status, SolveStatus::Diverged);
    }

    #[test]
    fn diagnostics_on_traces() {
        let (p, dc) = setup(Variant::ProjectionA);
        let cfg = InertialConfig::new(&dc, GammaSpec::Absolute(G), 1e-8, 1000).unwrap();
        let res = run(&p, &dc, &cfg, &pt(0.25, 0.125), Algorithm::InDca1).unwrap();
        let rep = diagnostics_check(&p, &res.trace, &cfg, &dc).unwrap();
        assert!(rep.passed(), "{rep:?}");

        let fixed = run(&p, &dc, &cfg, &pt(0.5, 0.5), Algorithm::InDca1).unwrap();
        let rep = diagnostics_check(&p, &fixed.trace, &cfg, &dc).unwrap();
        assert!(rep.partial_sum < 1e-30, "{}", rep.partial_sum);
        assert!(rep.max_decrease_slack.abs() < 1e-15);

        let mut corrupted = res.trace.clone();
        corrupted[2].x += pt(1.0, 1.0);
        let rep = diagnostics_check(&p, &corrupted, &cfg, &dc).unwrap();
        assert!(!rep.energy_decrease_ok());

        assert_eq!(
            diagnostics_check(&p, &res.trace[..1], &cfg, &dc),
            Err(Error::TraceTooShort { len: 1 })
        );
    }
}
