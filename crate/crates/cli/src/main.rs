use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use idca::certify::{component_convergence_check, distance_to_component, ComponentDescription};
use idca::model::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use idca::worked_example::reproduce_example;
use idca::{
    kkt_certificate, make_decomposition, qc_check, run, Algorithm, EtaPolicy, GammaSpec,
    InertialConfig, KktCertificate, QcOverall, QcVerdict, SolveStatus,
};
use idca_cli::{
    exit, fmt_number, parse_eta, parse_gamma, parse_problem, parse_vector, write_trace, ProblemFile,
};
use log::info;
use nalgebra::DVector;

#[derive(Parser)]
#[command(
    name = "idca",
    version,
    about = "Inertial DC algorithms for indefinite quadratic programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    /// Inertial projection DCA.
    Indca1,
    /// Inertial proximal DCA.
    Indca2,
}

#[derive(Subcommand)]
enum Command {
    /// Run an inertial DCA from a starting point and report the limit.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "indca1")]
        algo: AlgoArg,
        /// `auto` or a number above the spectral bound.
        #[arg(long, default_value = "auto", value_parser = parse_eta)]
        eta: EtaPolicy,
        /// Inertial weight: a number in [0, ρ/2) or `frac:θ` meaning θ·ρ/2.
        #[arg(long, default_value = "frac:0.9", value_parser = parse_gamma)]
        gamma: GammaSpec,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Name of a `start` in the file, or a comma-separated vector. Defaults to the first
        /// start in the file, else the origin.
        #[arg(long)]
        x0: Option<String>,
        /// Write the per-iteration trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Comma-separated component names (or `all`) to check convergence against.
        #[arg(long)]
        components: Option<String>,
    },
    /// Check the qualification condition on every unbounded pseudo-face.
    Qc { file: PathBuf },
    /// Certify whether a point is a KKT point.
    Certify {
        file: PathBuf,
        /// Name of a `start` in the file, or a comma-separated vector.
        #[arg(long)]
        x: String,
        /// Comma-separated component names (or `all`) to measure distances to.
        #[arg(long)]
        components: Option<String>,
    },
    /// Replay the built-in two-variable example and compare against its known iterates.
    Reproduce,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: exit::USAGE,
            message: message.into(),
        }
    }
}

impl From<idca::Error> for Failure {
    fn from(err: idca::Error) -> Self {
        let code = if idca_cli::is_input_error(&err) {
            exit::USAGE
        } else {
            exit::NUMERICAL
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

fn load(path: &Path) -> Result<ProblemFile, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    parse_problem(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn resolve_point(file: &ProblemFile, spec: &str) -> Result<DVector<f64>, Failure> {
    let x = match file.start(spec) {
        Some(x) => x.clone(),
        None => parse_vector(spec).ok_or_else(|| {
            Failure::usage(format!("{spec:?} is neither a start name nor a vector"))
        })?,
    };
    if x.len() != file.problem.n() {
        return Err(Failure::usage(format!(
            "point has {} entries, the problem has n = {}",
            x.len(),
            file.problem.n()
        )));
    }
    Ok(x)
}

fn resolve_components(
    file: &ProblemFile,
    names: &str,
) -> Result<Vec<ComponentDescription>, Failure> {
    if names == "all" {
        if file.components.is_empty() {
            return Err(Failure::usage("the file declares no components"));
        }
        return Ok(file.components.clone());
    }
    names
        .split(',')
        .map(|name| {
            file.component(name.trim())
                .cloned()
                .ok_or_else(|| Failure::usage(format!("unknown component {name:?}")))
        })
        .collect()
}

fn fmt_vec(x: &DVector<f64>) -> String {
    let parts: Vec<String> = x.iter().map(|&v| fmt_number(v)).collect();
    format!("({})", parts.join(", "))
}

fn fmt_indices(alpha: &[usize]) -> String {
    let parts: Vec<String> = alpha.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

fn print_kkt(cert: &KktCertificate) {
    println!(
        "KKT: {} (stationarity {:.3e}, feasibility {:.3e}, complementarity {:.3e})",
        cert.is_kkt,
        cert.stationarity_residual,
        cert.feasibility_violation,
        cert.complementarity_violation
    );
    println!("multipliers: {}", fmt_vec(&cert.multipliers));
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    path: &Path,
    algo: AlgoArg,
    eta: EtaPolicy,
    gamma: GammaSpec,
    tol: f64,
    max_iter: usize,
    x0: Option<&str>,
    trace_out: Option<&Path>,
    components: Option<&str>,
) -> Result<u8, Failure> {
    let file = load(path)?;
    let p = &file.problem;
    let algo = match algo {
        AlgoArg::Indca1 => Algorithm::InDca1,
        AlgoArg::Indca2 => Algorithm::InDca2,
    };
    let x0 = match x0 {
        Some(spec) => resolve_point(&file, spec)?,
        None => file
            .starts
            .first()
            .map(|(_, x)| x.clone())
            .unwrap_or_else(|| DVector::zeros(p.n())),
    };
    let components = components
        .map(|names| resolve_components(&file, names))
        .transpose()?;

    let dc = make_decomposition(p, algo.variant(), eta)?;
    let cfg = InertialConfig::new(&dc, gamma, tol, max_iter)?;
    info!("eta = {}, rho = {}, gamma = {}", dc.eta, dc.rho, cfg.gamma);
    let result = run(p, &dc, &cfg, &x0, algo)?;

    if let Some(out) = trace_out {
        let f = File::create(out)
            .map_err(|e| Failure::usage(format!("cannot create {}: {e}", out.display())))?;
        write_trace(&mut BufWriter::new(f), p.n(), &result.trace)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", out.display())))?;
    }

    if result.start_projected {
        println!("note: starting point was outside C and has been projected");
    }
    println!("eta: {}  rho: {}  gamma: {}", dc.eta, dc.rho, cfg.gamma);
    println!(
        "status: {:?} after {} iterations",
        result.status,
        result.iterations()
    );
    println!("final point: {}", fmt_vec(&result.final_point));
    println!("objective: {}", result.final_objective);
    print_kkt(&result.kkt);

    if let Some(comps) = components {
        let rep = component_convergence_check(&result.trace, &comps)?;
        println!(
            "component: {} (distance {:.3e}, objective spread {:.3e}, converged {})",
            comps[rep.closest].name, rep.final_distance, rep.objective_spread, rep.converged
        );
    }

    Ok(match result.status {
        SolveStatus::ToleranceReached => exit::SUCCESS,
        SolveStatus::MaxIterReached => exit::CHECK_FAILED,
        SolveStatus::Diverged => {
            eprintln!("error: iterates diverged");
            exit::NUMERICAL
        }
    })
}

fn cmd_qc(path: &Path) -> Result<u8, Failure> {
    let file = load(path)?;
    let report = qc_check(&file.problem)?;
    for face in &report.per_face {
        let verdict = match face.verdict {
            QcVerdict::SatisfiedVacuously => "satisfied (bounded face)",
            QcVerdict::Satisfied => "satisfied",
            QcVerdict::Violated => "VIOLATED",
        };
        print!("alpha = {:<12} {verdict}", fmt_indices(&face.alpha));
        if let (Some(v), Some(mu)) = (&face.witness, &face.witness_multipliers) {
            print!("  witness v = {}  mu = {}", fmt_vec(v), fmt_vec(mu));
        }
        println!();
    }
    println!("QC: {:?}", report.overall);
    Ok(match report.overall {
        QcOverall::Holds => exit::SUCCESS,
        QcOverall::Fails => exit::CHECK_FAILED,
    })
}

fn cmd_certify(path: &Path, x: &str, components: Option<&str>) -> Result<u8, Failure> {
    let file = load(path)?;
    let x = resolve_point(&file, x)?;
    let cert = kkt_certificate(&file.problem, &x);
    println!("point: {}", fmt_vec(&x));
    print_kkt(&cert);
    if let Some(names) = components {
        for comp in resolve_components(&file, names)? {
            println!(
                "distance to {}: {:.3e}",
                comp.name,
                distance_to_component(&comp, &x)?
            );
        }
    }
    Ok(if cert.is_kkt {
        exit::SUCCESS
    } else {
        exit::CHECK_FAILED
    })
}

fn cmd_reproduce() -> Result<u8, Failure> {
    let report = reproduce_example()?;
    for case in &report.cases {
        println!("{} from {}", case.name, fmt_vec(&case.x0));
        for check in &case.checks {
            let tag = if check.passed { "PASS" } else { "FAIL" };
            println!("  {tag}  {:<48} {}", check.label, check.detail);
        }
    }
    let passed = report.passed();
    println!(
        "{} in {:.3} s",
        if passed {
            "all checks passed"
        } else {
            "some checks FAILED"
        },
        report.runtime.as_secs_f64()
    );
    Ok(if passed {
        exit::SUCCESS
    } else {
        exit::CHECK_FAILED
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("IDCA_LOG", "warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve {
            file,
            algo,
            eta,
            gamma,
            tol,
            max_iter,
            x0,
            trace,
            components,
        } => cmd_solve(
            file,
            *algo,
            *eta,
            *gamma,
            *tol,
            *max_iter,
            x0.as_deref(),
            trace.as_deref(),
            components.as_deref(),
        ),
        Command::Qc { file } => cmd_qc(file),
        Command::Certify {
            file,
            x,
            components,
        } => cmd_certify(file, x, components.as_deref()),
        Command::Reproduce => cmd_reproduce(),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(fail) => {
            eprintln!("error: {}", fail.message);
            ExitCode::from(fail.code)
        }
    }
}
