//! Drives the compiled binary: documented examples, exit codes, schema
//! validity, JSON round trips and output determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde::de::DeserializeOwned;
use serde_json::Value;
use typeb::manifest::parse_csv_comment;
use typeb::output::{CheckDoc, CltDoc, MomentsDoc};

fn typeb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_typeb"))
        .args(args)
        .env("TYPEB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Non-comment CSV lines split on commas.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "schema", &format!("{name}.schema.json")].iter().collect();
    let text = std::fs::read_to_string(path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

/// Validates `text` against the named schema and checks that the typed
/// document re-serializes to the same JSON value.
fn validate_and_round_trip<T: DeserializeOwned + serde::Serialize>(name: &str, text: &str) -> T {
    let value: Value = serde_json::from_str(text).unwrap();
    let validator = schema(name);
    let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}\n{text}");
    let doc: T = serde_json::from_value(value.clone()).unwrap();
    assert_eq!(serde_json::to_value(&doc).unwrap(), value);
    doc
}

#[test]
fn sixth_q_moment_symbolic_rows() {
    let out = typeb(&["moments", "--family", "q", "--order", "6", "--symbolic"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], ["e1", "e2", "coeff"]);
    let body: Vec<(String, String, String)> = rows[1..].iter().map(|r| (r[0].clone(), r[1].clone(), r[2].clone())).collect();
    let want: Vec<(String, String, String)> =
        [(0, 5), (1, 6), (2, 3), (3, 1)].iter().map(|(e, c)| (e.to_string(), String::new(), c.to_string())).collect();
    assert_eq!(body, want);
}

#[test]
fn second_type_b_moment_is_one_plus_rho() {
    let out = typeb(&["moments", "--family", "typeB", "--order", "2", "--symbolic", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: MomentsDoc = validate_and_round_trip("moments", &stdout(&out));
    let terms: Vec<(u32, Option<u32>, i64)> = doc.terms.unwrap().iter().map(|t| (t.e1, t.e2, t.coeff)).collect();
    assert_eq!(terms, vec![(0, Some(0), 1), (0, Some(1), 1)]);
    assert_eq!(doc.variables, ["q", "rho"]);
    assert_eq!(doc.family, "typeB");
}

#[test]
fn qt_moment_at_the_origin_is_one() {
    let out = typeb(&["moments", "--family", "qt", "--order", "4", "--q", "0", "--t", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv_rows(&stdout(&out)), vec![vec!["value".to_owned()], vec!["1".to_owned()]]);
}

#[test]
fn numeric_moments_use_fifteen_significant_digits() {
    // 2 + q at q = 1/3
    let out = typeb(&["moments", "--family", "q", "--order", "4", "--q", "0.3333333333333333"]);
    assert_eq!(csv_rows(&stdout(&out))[1], ["2.33333333333333"]);
    let json = typeb(&["moments", "--family", "typeB", "--order", "4", "--q", "0.5", "--rho", "0.3", "--format", "json"]);
    let doc: MomentsDoc = validate_and_round_trip("moments", &stdout(&json));
    // three pairings of four points: two disjoint blocks, one crossing
    // pair, and one nesting pair whose inner block costs q^2 when negative
    let (q, r) = (0.5f64, 0.3f64);
    let direct = (1.0 + r) * (1.0 + r) * (1.0 + q) + (1.0 + r) * (1.0 + r * q * q);
    assert!((doc.value.unwrap() - direct).abs() < 1e-14);
}

#[test]
fn boundary_covariances_use_the_degenerate_limits() {
    let minus = typeb(&["moments", "--family", "typeB", "--order", "4", "--q", "0.5", "--rho=-1"]);
    assert_eq!(csv_rows(&stdout(&minus))[1], ["0"]);
    let plus = typeb(&["moments", "--family", "typeB", "--order", "4", "--q", "0.5", "--rho", "1"]);
    assert_eq!(csv_rows(&stdout(&plus))[1], ["10"]);
}

#[test]
fn bad_flags_exit_with_two() {
    for args in [
        &["moments", "--family", "q", "--order", "4", "--bogus"][..],
        &["moments", "--family", "zeta", "--order", "4"],
        &["moments", "--family", "typeB", "--order", "4", "--q", "0.5"],
        &["moments", "--family", "typeB", "--order", "4", "--q", "0.5", "--rho", "0.1", "--t", "0.2"],
        &["moments", "--family", "q", "--order", "4", "--q", "1.5"],
        &["clt", "--k", "4", "--q", "1.2", "--rho", "0.3", "--Ns", "5"],
        &["clt", "--k", "4", "--q", "0.2", "--rho", "0.3", "--Ns", "0"],
        &["clt", "--k", "4", "--q", "0.2", "--rho", "0.3"],
        &["check", "fock", "--alpha", "0.6", "--q", "0.3", "--d", "2", "--M", "0"],
        &["check", "hypotheses", "--rho", "0.4", "--nmax", "9"],
        &["check", "psd", "--n", "9", "--d", "1", "--alpha", "0.5", "--q", "0.5"],
    ] {
        assert_eq!(typeb(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn capacity_refusals_exit_with_three() {
    assert_eq!(typeb(&["moments", "--family", "q", "--order", "40", "--symbolic"]).status.code(), Some(3));
    assert_eq!(typeb(&["check", "psd", "--n", "7", "--d", "3", "--alpha", "0.5", "--q", "0.5"]).status.code(), Some(3));
}

#[test]
fn second_order_clt_rows_are_exact() {
    let out = typeb(&["clt", "--k", "2", "--q", "0.5", "--rho", "0.3", "--Ns", "3,10,40", "--seeds", "3", "--exact-expectation"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0], ["seed", "N", "moment", "limit", "abs_error", "expected_moment"]);
    assert_eq!(rows.len(), 1 + 9);
    for r in &rows[1..] {
        let m: f64 = r[2].parse().unwrap();
        assert!((m - 1.3).abs() < 1e-15);
        assert!(r[4].parse::<f64>().unwrap() < 1e-15);
        assert!((r[5].parse::<f64>().unwrap() - 1.3).abs() < 1e-15);
    }
}

#[test]
fn clt_rows_are_seed_major_and_expectation_is_seed_free() {
    let out = typeb(&["clt", "--k", "4", "--q", "0.5", "--rho", "0.3", "--Ns", "4,9", "--seeds", "5,2", "--exact-expectation"]);
    let rows = csv_rows(&stdout(&out));
    let keys: Vec<(&str, &str)> = rows[1..].iter().map(|r| (r[0].as_str(), r[1].as_str())).collect();
    assert_eq!(keys, [("5", "4"), ("5", "9"), ("2", "4"), ("2", "9")]);
    assert_eq!(rows[1][5], rows[3][5]);
    assert_eq!(rows[2][5], rows[4][5]);
    // the expected column at N = 9 lies between the N = 4 value and the limit
    let e4: f64 = rows[1][5].parse().unwrap();
    let e9: f64 = rows[2][5].parse().unwrap();
    let limit: f64 = rows[1][3].parse().unwrap();
    assert!((e4 - limit).abs() > (e9 - limit).abs());
}

#[test]
fn clt_limit_at_zero_covariance_is_two_plus_q() {
    let out = typeb(&["clt", "--k", "4", "--q", "0.25", "--rho", "0", "--Ns", "5", "--seeds", "1"]);
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[1][3].parse::<f64>().unwrap(), 2.25);
}

#[test]
fn oversized_clt_rows_are_skipped_not_fatal() {
    let out = typeb(&["clt", "--k", "12", "--q", "0.5", "--rho", "0.3", "--Ns", "2,300", "--seeds", "1", "--method", "full"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert!(rows[1][2].parse::<f64>().is_ok());
    assert_eq!(rows[2][2], "SKIPPED(100000000)");
    assert_eq!(rows[2][4], "");
}

#[test]
fn clt_json_validates_and_round_trips() {
    let out = typeb(&[
        "clt", "--k", "4", "--q", "-0.3", "--rho", "0.6", "--Ns", "3,200", "--seeds", "0..2", "--method", "class", "--format", "json",
        "--exact-expectation",
    ]);
    let doc: CltDoc = validate_and_round_trip("clt", &stdout(&out));
    assert_eq!(doc.rows.len(), 4);
    assert_eq!(doc.manifest.seeds, [0, 1]);
    assert!(doc.manifest.wall_time_seconds.is_some());
    assert_eq!(doc.manifest.parameters["method"], "class");

    let skipped = typeb(&["clt", "--k", "8", "--q", "0.3", "--rho", "0.6", "--Ns", "500", "--seeds", "1", "--format", "json"]);
    let doc: CltDoc = validate_and_round_trip("clt", &stdout(&skipped));
    assert_eq!(doc.rows[0].moment, None);
    assert_eq!(doc.rows[0].skipped.as_deref(), Some("10000000000"));
}

#[test]
fn csv_output_is_byte_identical_across_runs_and_thread_counts() {
    let args = ["clt", "--k", "6", "--q", "0.5", "--rho", "0.3", "--Ns", "3,7", "--seeds", "4", "--exact-expectation"];
    let a = typeb(&args);
    let b = typeb(&args);
    let c = Command::new(env!("CARGO_BIN_EXE_typeb")).args(args).env("TYPEB_THREADS", "1").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let manifest = parse_csv_comment(&stdout(&a));
    assert_eq!(manifest["seeds"], "0,1,2,3");
    assert_eq!(manifest["Ns"], "3,7");
    assert_eq!(manifest["k"], "6");
}

#[test]
fn output_file_carries_the_manifest() {
    let dir = std::env::temp_dir().join(format!("typeb-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("q6.csv");
    let out = typeb(&["moments", "--family", "q", "--order", "6", "--symbolic", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let manifest = parse_csv_comment(&text);
    assert_eq!(manifest["subcommand"], "moments");
    assert_eq!(manifest["family"], "q");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn psd_check_passes_and_reports_the_eigenvalue() {
    let out = typeb(&["check", "psd", "--n", "2", "--d", "2", "--alpha", "0.5", "--q", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("PASS") && !text.contains("FAIL"), "{text}");
    let json = typeb(&["check", "psd", "--n", "2", "--d", "2", "--alpha", "0.5", "--q", "0.5", "--format", "json"]);
    let doc: CheckDoc = validate_and_round_trip("check", &stdout(&json));
    // With Pi0 = I every group element acts through its underlying
    // permutation, so P = A I + B S with S the flip of the two factors:
    // A = 1 + alpha + alpha q^2 + alpha^2 q^2 and B = q (1 + alpha)^2.
    let (alpha, q) = (0.5f64, 0.5f64);
    let a = 1.0 + alpha + alpha * q * q + alpha * alpha * q * q;
    let b = q * (1.0 + alpha) * (1.0 + alpha);
    let min = doc.items[0].value;
    assert!((min - (a - b)).abs() < 1e-12, "{min}");
}

#[test]
fn strict_positivity_fails_at_the_degenerate_corner() {
    let out = typeb(&["check", "psd", "--n", "2", "--d", "1", "--alpha", "1", "--q", "-1", "--strict"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn fock_check_passes() {
    let out = typeb(&["check", "fock", "--alpha", "0.6", "--q", "0.3", "--d", "2", "--M", "5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: CheckDoc = validate_and_round_trip("check", &stdout(&out));
    let comm = doc.items.iter().find(|i| i.name == "commutation").unwrap();
    assert!(comm.pass && comm.value <= 1e-10);
}

#[test]
fn hypotheses_pass_for_symmetric_tables() {
    let out = typeb(&["check", "hypotheses", "--rho", "0.4", "--seed", "7", "--nmax", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for h in ["H1", "H2", "H3", "H4", "H5"] {
        assert!(text.lines().any(|l| l.starts_with(h) && l.contains("PASS")), "{h}\n{text}");
    }
}

#[test]
fn ordered_tables_fail_the_commutation_hypothesis() {
    let out = typeb(&["check", "hypotheses", "--rho", "0.4", "--seed", "7", "--nmax", "3", "--r-mode", "ordered", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: CheckDoc = validate_and_round_trip("check", &stdout(&out));
    assert!(!doc.pass);
    let failing: Vec<&str> = doc.items.iter().filter(|i| !i.pass).map(|i| i.name.as_str()).collect();
    assert_eq!(failing, ["H5"]);
}
