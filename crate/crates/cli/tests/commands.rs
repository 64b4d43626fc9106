use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn idca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_idca"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn problem(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "problems", name]
        .iter()
        .collect();
    path.to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no {key:?} line in:\n{text}"))
        .trim()
}

fn point(text: &str) -> Vec<f64> {
    text.trim_matches(|c| c == '(' || c == ')')
        .split(", ")
        .map(|v| v.parse().unwrap())
        .collect()
}

#[test]
fn solve_case3_stays_below_the_limit_bound() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = idca(&[
        "solve",
        &problem("example.iqp"),
        "--algo",
        "indca1",
        "--eta",
        "3",
        "--gamma",
        "1/3",
        "--x0",
        "case3",
        "--trace",
        trace.to_str().unwrap(),
        "--components",
        "F1,F2,P",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    let x = point(field(&text, "final point:"));
    assert!((x[0] - x[1]).abs() <= 1e-9);
    assert!(x[0] <= 97.0 / 384.0 + 1e-9);
    assert!(field(&text, "component:").starts_with("F1"));

    let iterations: usize = field(&text, "status: ToleranceReached after")
        .trim_end_matches(" iterations")
        .parse()
        .unwrap();
    let csv = fs::read_to_string(&trace).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(
        rows[0],
        "k,x1,x2,step_norm,d_norm,f,energy,inclusion_residual,active_set"
    );
    assert_eq!(rows.len() - 1, iterations + 1);
    assert!(!csv.contains('\r'));
    assert_eq!(rows[1], "0,0.25,0.125,0,0,0.046875,0.046875,0,3");
}

#[test]
fn solve_case4_ends_at_the_isolated_kkt_point() {
    let out = idca(&[
        "solve",
        &problem("example.iqp"),
        "--eta",
        "3",
        "--gamma",
        "1/3",
        "--x0",
        "1,0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let x = point(field(&text, "final point:"));
    assert!((x[0] - 0.25).abs() <= 1e-9 && x[1].abs() <= 1e-9);
    assert!(field(&text, "KKT:").starts_with("true"));
}

#[test]
fn inertial_fraction_must_be_below_one() {
    let out = idca(&["solve", &problem("example.iqp"), "--gamma", "frac:2.0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));
}

#[test]
fn qc_on_example_and_box() {
    let out = idca(&["qc", &problem("example.iqp")]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let face1 = text
        .lines()
        .find(|l| l.starts_with("alpha = {1} "))
        .unwrap();
    assert!(face1.contains("VIOLATED") && face1.contains("witness v = (1, 1)"));
    assert!(text.contains("QC: Fails"));

    let out = idca(&["qc", &problem("box.iqp")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("QC: Holds"));
}

#[test]
fn qc_refuses_more_than_twenty_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.iqp");
    let rows: Vec<String> = (0..21).map(|i| format!("1 {i}")).collect();
    let text = format!(
        "n 2\nm 21\nQ 1 0 0 1\nq 0 0\nA {}\nb {}\n",
        rows.join("  "),
        vec!["0"; 21].join(" ")
    );
    fs::write(&path, text).unwrap();
    let out = idca(&["qc", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn reproduce_passes() {
    let out = idca(&["reproduce"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(!text.contains("FAIL"));
    assert!(text.contains("all checks passed"));
}

#[test]
fn certify_reports_kkt_and_distances() {
    let out = idca(&[
        "certify",
        &problem("example.iqp"),
        "--x",
        "case2",
        "--components",
        "all",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(field(&text, "multipliers:") == "(0, 0, 0.5)");
    assert!(field(&text, "distance to P:").starts_with("0.000e0"));

    let out = idca(&["certify", &problem("example.iqp"), "--x", "1,0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.iqp");
    fs::write(&path, "n 1\nm 1\nQ one\n").unwrap();
    let out = idca(&["qc", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let out = idca(&["qc", "/nonexistent/file.iqp"]);
    assert_eq!(out.status.code(), Some(2));
    let out = idca(&["solve"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unbounded_objective_is_reported_as_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ray.iqp");
    fs::write(&path, "n 1\nm 1\nQ -1\nq 0\nA 1\nb 0\nstart s 1\n").unwrap();
    let out = idca(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("Diverged"));
}
