use std::process::{Command, Output};

use metric_lj::inner_solver::SolveResultJson;
use metric_lj::mve_oracle::OracleResultJson;
use metric_lj::outer_certificate::JohnCertificateJson;
use metric_lj::sandwich_analysis::SandwichReportJson;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metric-lj"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_john_n6() {
    let o = run(&["verify-john", "--n", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let cert: JohnCertificateJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(cert.n, 6);
    assert_eq!(cert.num_contacts, 32);
    assert!(cert.identity_residual <= 1e-12);
    assert!(cert.barycenter_residual <= 1e-12);
    assert!(cert.nontrivial_identity_residual.is_none());

    let o = run(&["verify-john", "--n", "6", "--verbose"]);
    let cert: JohnCertificateJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(cert.nontrivial_barycenter_residual.unwrap() > 0.1);
}

#[test]
fn outer_n4() {
    let o = run(&["outer", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["radius"].as_f64().unwrap() - 1.224745).abs() < 1e-6);
    assert!((v["shrink_factor"].as_f64().unwrap() - 4.242641).abs() < 1e-6);
    assert!((v["inscribed_radius"].as_f64().unwrap() - 0.2886751).abs() < 1e-7);
}

#[test]
fn table_csv_converges() {
    let o = run(&["table", "--n-list", "10,100,1000", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "n,alpha,n_beta,n2_gamma,delta,lambda1,lambda2,lambda3,logvol,kkt"
    );
    assert_eq!(lines.len(), 4);
    let alpha: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let n: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(n, ["10", "100", "1000"]);
    let errs: Vec<f64> = alpha.iter().map(|a| (a - 0.3660254).abs()).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2]);
    assert!(errs[2] < 1e-4);
}

#[test]
fn table_json_is_solve_results() {
    let o = run(&["table", "--n-list", "7,3"]);
    let rows: Vec<SolveResultJson> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), [7, 3]);
}

#[test]
fn json_round_trips() {
    let o = run(&["inner", "--n", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let r: SolveResultJson = serde_json::from_str(&stdout(&o)).unwrap();
    let e = r.inner.to_ellipsoid().unwrap();
    assert_eq!(e.n, 8);
    assert!(r.kkt_residual <= 1e-10);
    assert_eq!(r.active, [true, true]);

    let o = run(&["sandwich", "--n", "5", "--samples", "500"]);
    assert_eq!(o.status.code(), Some(0));
    let s: SandwichReportJson = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(s.contact_triangle.len(), 10);
    assert!(s.r_lower <= s.r_upper);

    let o = run(&["oracle-compare", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let oracle: OracleResultJson = serde_json::from_value(v["oracle"].clone()).unwrap();
    assert_eq!(oracle.ellipsoid.a.len(), 36);
    assert!(v["log_det_diff"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn output_is_reproducible() {
    let args = [
        "sandwich",
        "--n",
        "6",
        "--samples",
        "3000",
        "--seed",
        "7",
        "--format",
        "csv",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("sample_index,min_slack_constraint_kind,min_slack\n"));
    assert_eq!(text.lines().count(), 3001);
    let c = run(&[
        "sandwich",
        "--n",
        "6",
        "--samples",
        "3000",
        "--seed",
        "8",
        "--format",
        "csv",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("contacts.json");
    let o = run(&["contacts", "--n", "7", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout(&run(&["contacts", "--n", "7"])));
    let v: Value = serde_json::from_str(&written).unwrap();
    assert_eq!(v["p"].as_array().unwrap().len(), 21);
    assert!(v["triangle_residual"].as_f64().unwrap().abs() <= 1e-9);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["inner"]).status.code(), Some(1));
    assert_eq!(
        run(&["inner", "--n", "5", "--frobnicate"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["verify-john", "--n", "17"]).status.code(), Some(1));
    assert_eq!(run(&["oracle-compare", "--n", "6"]).status.code(), Some(1));
    assert_eq!(run(&["contacts", "--n", "5000"]).status.code(), Some(1));
    assert_eq!(run(&["inner", "--n", "20000"]).status.code(), Some(1));
    let o = run(&["inner", "--n", "5", "--max-iter", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
