//! The two-variable indefinite example and a harness that replays its five starting cases.
//!
//! The problem is `min x₁² - x₂²` subject to `x₁ - x₂ >= 0`, `x₁ + x₂ >= 0`, `x₁ >= 1/4`.
//! Its KKT set splits into the rays `F₁ = {(t, t)}` and `F₂ = {(t, -t)}` for `t >= 1/4` plus
//! the isolated point `(1/4, 0)`.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::certify::{component_convergence_check, ComponentDescription, PolyhedralPiece};
use crate::engine::{run, Algorithm, SolveResult, SolveStatus};
use crate::error::Result;
use crate::model::{
    build_problem, make_decomposition, DcDecomposition, EtaPolicy, GammaSpec, InertialConfig,
    IqpProblem, Variant,
};

pub const ETA: f64 = 3.0;
pub const GAMMA: f64 = 1.0 / 3.0;
pub const TOL: f64 = 1e-8;
/// Matching tolerance for the listed iterates.
pub const ITERATE_TOL: f64 = 1e-9;
/// Upper bound on the limit of the third case, `97/384`.
pub const CASE3_LIMIT_BOUND: f64 = 97.0 / 384.0;

pub fn example_problem() -> IqpProblem {
    build_problem(
        2,
        3,
        &[2.0, 0.0, 0.0, -2.0],
        &[0.0, 0.0],
        &[1.0, -1.0, 1.0, 1.0, 1.0, 0.0],
        &[0.0, 0.0, 0.25],
    )
    .expect("example data is valid")
}

/// `min ½‖x‖²` over the square `[lo, hi]²`, written as `x >= lo`, `-x >= -hi`.
pub fn box_problem(lo: f64, hi: f64) -> IqpProblem {
    build_problem(
        2,
        4,
        &[1.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0],
        &[1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0],
        &[lo, lo, -hi, -hi],
    )
    .expect("box data is valid")
}

fn ray(direction: f64) -> ComponentDescription {
    let piece = PolyhedralPiece::new(
        DMatrix::from_row_slice(1, 2, &[1.0, -direction]),
        DVector::from_element(1, 0.0),
        DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
        DVector::from_element(1, 0.25),
    )
    .expect("ray is nonempty");
    ComponentDescription {
        name: if direction > 0.0 { "F1" } else { "F2" }.to_string(),
        pieces: vec![piece],
    }
}

/// The three connected components of the example's KKT set: `F1`, `F2`, and `P = {(1/4, 0)}`.
pub fn example_components() -> Vec<ComponentDescription> {
    let point = PolyhedralPiece::point(&DVector::from_vec(vec![0.25, 0.0])).expect("point piece");
    vec![
        ray(1.0),
        ray(-1.0),
        ComponentDescription {
            name: "P".to_string(),
            pieces: vec![point],
        },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct CaseReport {
    pub name: String,
    pub x0: DVector<f64>,
    pub result: SolveResult,
    pub checks: Vec<Check>,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone)]
pub struct ReproductionReport {
    pub cases: Vec<CaseReport>,
    pub runtime: Duration,
}

impl ReproductionReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(CaseReport::passed)
    }

    pub fn checks(&self) -> impl Iterator<Item = (&str, &Check)> {
        self.cases
            .iter()
            .flat_map(|c| c.checks.iter().map(move |k| (c.name.as_str(), k)))
    }
}

fn pt(x: f64, y: f64) -> DVector<f64> {
    DVector::from_vec(vec![x, y])
}

fn check(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        label: label.into(),
        passed,
        detail: detail.into(),
    }
}

fn fmt_point(x: &DVector<f64>) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.12}")).collect();
    format!("({})", parts.join(", "))
}

/// Compares `trace[k].x` against each listed iterate.
fn prefix_checks(result: &SolveResult, expected: &[DVector<f64>]) -> Vec<Check> {
    expected
        .iter()
        .enumerate()
        .map(|(k, want)| match result.trace.get(k) {
            Some(rec) => {
                let err = (&rec.x - want).amax();
                check(
                    format!("x{k} = {}", fmt_point(want)),
                    err <= ITERATE_TOL,
                    format!("got {} (error {err:.2e})", fmt_point(&rec.x)),
                )
            }
            None => check(
                format!("x{k} = {}", fmt_point(want)),
                false,
                format!("trace has only {} records", result.trace.len()),
            ),
        })
        .collect()
}

fn status_check(result: &SolveResult) -> Check {
    check(
        "reaches tolerance",
        result.status == SolveStatus::ToleranceReached,
        format!(
            "{:?} after {} iterations",
            result.status,
            result.iterations()
        ),
    )
}

fn final_point_check(result: &SolveResult, want: &DVector<f64>) -> Check {
    let err = (&result.final_point - want).amax();
    check(
        format!("final point {}", fmt_point(want)),
        err <= ITERATE_TOL,
        format!("got {} (error {err:.2e})", fmt_point(&result.final_point)),
    )
}

fn iteration_count_check(result: &SolveResult, want: usize) -> Check {
    check(
        format!("stops after {want} iterations"),
        result.iterations() == want,
        format!("{} iterations", result.iterations()),
    )
}

fn component_check(
    result: &SolveResult,
    components: &[ComponentDescription],
    want: &str,
) -> Result<Check> {
    let rep = component_convergence_check(&result.trace, components)?;
    let name = &components[rep.closest].name;
    Ok(check(
        format!("converges to component {want}"),
        rep.converged && name == want,
        format!(
            "closest {name} at distance {:.2e}, objective spread {:.2e}",
            rep.final_distance, rep.objective_spread
        ),
    ))
}

/// The configuration all cases share: `η = 3`, `γ = 1/3`, `Tol = 1e-8`.
pub fn example_config(p: &IqpProblem) -> Result<(DcDecomposition, InertialConfig)> {
    let dc = make_decomposition(p, Variant::ProjectionA, EtaPolicy::Explicit(ETA))?;
    let cfg = InertialConfig::new(&dc, GammaSpec::Absolute(GAMMA), TOL, 100_000)?;
    Ok((dc, cfg))
}

/// Replays the five cases with the projection algorithm and checks each listed iterate.
pub fn reproduce_example() -> Result<ReproductionReport> {
    let start = Instant::now();
    let p = example_problem();
    let (dc, cfg) = example_config(&p)?;
    let components = example_components();
    let solve = |x0: &DVector<f64>| run(&p, &dc, &cfg, x0, Algorithm::InDca1);
    let mut cases = Vec::new();

    for (label, sign) in [("F1", 1.0), ("F2", -1.0)] {
        for t in [0.0, 1.0] {
            let x0 = pt(0.25 + t, sign * (0.25 + t));
            let result = solve(&x0)?;
            let mut checks = prefix_checks(&result, &[x0.clone(), x0.clone()]);
            checks.push(status_check(&result));
            checks.push(iteration_count_check(&result, 1));
            checks.push(final_point_check(&result, &x0));
            cases.push(CaseReport {
                name: format!("case 1 ({label}, t = {t})"),
                x0,
                result,
                checks,
            });
        }
    }

    let x0 = pt(0.25, 0.0);
    let result = solve(&x0)?;
    let mut checks = prefix_checks(&result, &[x0.clone(), x0.clone()]);
    checks.push(status_check(&result));
    checks.push(iteration_count_check(&result, 1));
    checks.push(final_point_check(&result, &x0));
    checks.push(check(
        "certified KKT",
        result.kkt.is_kkt,
        format!(
            "stationarity {:.2e}, multipliers {}",
            result.kkt.stationarity_residual,
            fmt_point(&result.kkt.multipliers)
        ),
    ));
    cases.push(CaseReport {
        name: "case 2".into(),
        x0,
        result,
        checks,
    });

    let x0 = pt(0.25, 0.125);
    let result = solve(&x0)?;
    let t3 = 109.0 / 432.0;
    let mut checks = prefix_checks(
        &result,
        &[x0.clone(), pt(0.25, 5.0 / 24.0), pt(0.25, 0.25), pt(t3, t3)],
    );
    checks.push(status_check(&result));
    let t: Vec<f64> = result.trace.iter().map(|r| r.x[0]).collect();
    let recurrence_err = (3..t.len().saturating_sub(1))
        .map(|k| (t[k + 1] - (10.0 / 9.0) * t[k] + t[k - 1] / 9.0).abs())
        .fold(0.0, f64::max);
    checks.push(check(
        "t(k+1) = 10/9 t(k) - 1/9 t(k-1) for k >= 3",
        t.len() > 4 && recurrence_err <= ITERATE_TOL,
        format!(
            "max deviation {recurrence_err:.2e} over {} steps",
            t.len().saturating_sub(4)
        ),
    ));
    let fp = &result.final_point;
    checks.push(check(
        "final point on F1 with t <= 97/384",
        (fp[0] - fp[1]).abs() <= ITERATE_TOL && fp[0] <= CASE3_LIMIT_BOUND + ITERATE_TOL,
        format!("final {}", fmt_point(fp)),
    ));
    checks.push(component_check(&result, &components, "F1")?);
    cases.push(CaseReport {
        name: "case 3".into(),
        x0,
        result,
        checks,
    });

    let x0 = pt(1.0, 0.0);
    let result = solve(&x0)?;
    let target = pt(0.25, 0.0);
    let mut checks = prefix_checks(
        &result,
        &[
            x0.clone(),
            pt(1.0 / 3.0, 0.0),
            target.clone(),
            target.clone(),
        ],
    );
    checks.push(status_check(&result));
    checks.push(final_point_check(&result, &target));
    checks.push(check(
        "certified KKT",
        result.kkt.is_kkt,
        format!("stationarity {:.2e}", result.kkt.stationarity_residual),
    ));
    checks.push(component_check(&result, &components, "P")?);
    cases.push(CaseReport {
        name: "case 4".into(),
        x0,
        result,
        checks,
    });

    let x0 = pt(1.0, 0.125);
    let result = solve(&x0)?;
    let target = pt(0.25, 0.25);
    let mut checks = prefix_checks(
        &result,
        &[
            x0.clone(),
            pt(1.0 / 3.0, 5.0 / 24.0),
            target.clone(),
            target.clone(),
            target.clone(),
        ],
    );
    checks.push(status_check(&result));
    checks.push(iteration_count_check(&result, 4));
    checks.push(final_point_check(&result, &target));
    cases.push(CaseReport {
        name: "case 5".into(),
        x0,
        result,
        checks,
    });

    Ok(ReproductionReport {
        cases,
        runtime: start.elapsed(),
    })
}
