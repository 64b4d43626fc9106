//! Problem files, trace export and flag parsing for the `idca` binary.

pub mod problem_file;
pub mod trace_csv;

use idca::{EtaPolicy, GammaSpec};

pub use problem_file::{parse_number, parse_problem, parse_vector, ParseError, ProblemFile};
pub use trace_csv::write_trace;

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    /// QC fails, a certificate is negative, or a reproduction check mismatches.
    pub const CHECK_FAILED: u8 = 1;
    /// Bad flags, unreadable or malformed input.
    pub const USAGE: u8 = 2;
    /// Divergence or a numerical breakdown inside a solver.
    pub const NUMERICAL: u8 = 3;
}

/// Shortest decimal that parses back to the same double, in exponent form for very small or
/// very large magnitudes.
pub fn fmt_number(v: f64) -> String {
    let mag = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&mag) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// `auto` or a number.
pub fn parse_eta(text: &str) -> Result<EtaPolicy, String> {
    if text == "auto" {
        return Ok(EtaPolicy::Auto);
    }
    parse_number(text)
        .map(EtaPolicy::Explicit)
        .ok_or_else(|| format!("expected `auto` or a number, found {text:?}"))
}

/// A number, or `frac:θ` for `θ·ρ/2`.
pub fn parse_gamma(text: &str) -> Result<GammaSpec, String> {
    let (value, spec): (_, fn(f64) -> GammaSpec) = match text.strip_prefix("frac:") {
        Some(theta) => (theta, GammaSpec::Fraction),
        None => (text, GammaSpec::Absolute),
    };
    parse_number(value)
        .map(spec)
        .ok_or_else(|| format!("expected a number or `frac:<θ>`, found {text:?}"))
}

/// Whether an error from the core stems from bad input rather than a numerical breakdown.
pub fn is_input_error(err: &idca::Error) -> bool {
    use idca::Error::*;
    matches!(
        err,
        DimensionMismatch { .. }
            | InfeasibleConstraintSet
            | EtaTooSmall { .. }
            | InvalidGamma { .. }
            | InfeasiblePoint { .. }
            | TooManyConstraints { .. }
            | NoComponents
            | InvalidConfig(_)
    )
}
