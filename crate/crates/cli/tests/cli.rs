//! End-to-end runs of the `fgw` binary against golden files in
//! `tests/golden`. Set `FGW_BLESS=1` to rewrite the golden files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn fgw(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fgw"));
    cmd.args(args).env_remove("FGW_THREADS");
    if let Some(t) = threads {
        cmd.env("FGW_THREADS", t);
    }
    cmd.output().expect("fgw runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Runs `args`, checks the exit code, and compares stdout with the golden
/// file `name`.
fn check(name: &str, args: &[&str], code: i32) -> String {
    let out = fgw(args, None);
    assert_eq!(out.status.code(), Some(code), "{args:?}\nstderr: {}", stderr(&out));
    let text = stdout(&out);
    let path = golden_path(name);
    if std::env::var_os("FGW_BLESS").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(text, want, "output of {args:?} differs from {name}");
    text
}

fn json(text: &str) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    assert!(v.is_array());
    v
}

#[test]
fn convolve_spheres_with_oracle() {
    let v = json(&check(
        "convolve_oracle.json",
        &["convolve", "--k", "2", "--n", "2", "--m", "2", "--oracle"],
        0,
    ));
    assert_eq!(v[0]["product"], serde_json::json!({"0": "12", "2": "2", "4": "1"}));
    assert_eq!(v[0]["oracle_match"], true);
    assert_eq!(v[0]["mass_conserved"], true);
}

#[test]
fn convolve_literals_csv() {
    let text = check(
        "convolve_literals.csv",
        &["convolve", "--f", "1,1/2", "--g", "0,1", "--format", "csv"],
        0,
    );
    assert_eq!(
        text.lines().next().unwrap(),
        "k,f,g,l,coefficient,mass_conserved,oracle_match"
    );
}

#[test]
fn convolve_k3() {
    check(
        "convolve_k3.json",
        &["--k", "3", "convolve", "--n", "3", "--m", "2", "--oracle"],
        0,
    );
}

#[test]
fn norms_lorentz() {
    let v = json(&check(
        "norms_p2_s1.json",
        &["norms", "--p", "2", "--s", "1", "--radial", "1,1"],
        0,
    ));
    let norm = v[0]["norm"].as_f64().unwrap();
    assert!((norm - 5f64.sqrt()).abs() < 1e-11);
}

#[test]
fn norms_weak_csv() {
    check(
        "norms_weak.csv",
        &[
            "norms", "--p", "1.5", "--s", "inf", "--radial", "2,1/3,1", "--format", "csv",
        ],
        0,
    );
}

#[test]
fn search_restricted() {
    check(
        "search_restricted.json",
        &[
            "search",
            "--radial",
            "1,1",
            "--family",
            "sphere-unions",
            "--radius",
            "4",
        ],
        0,
    );
}

#[test]
fn search_weak_random() {
    check(
        "search_weak.json",
        &[
            "search",
            "--radial",
            "1,1/2",
            "--estimator",
            "weak",
            "--family",
            "random-subsets",
            "--radius",
            "3",
            "--budget",
            "20",
            "--seed",
            "5",
        ],
        0,
    );
}

#[test]
fn verify_lemma1_example() {
    let v = json(&check(
        "verify_lemma1.json",
        &[
            "verify",
            "lemma1",
            "--k",
            "2",
            "--radius",
            "4",
            "--k-max",
            "6",
            "--family",
            "sphere-unions",
        ],
        0,
    ));
    assert_eq!(v[0]["status"], "pass");
}

#[test]
fn verify_oracle_csv() {
    check(
        "verify_oracle.csv",
        &["verify", "oracle", "--n-max", "3", "--format", "csv"],
        0,
    );
}

#[test]
fn verify_majorization() {
    check(
        "verify_majorization.json",
        &["verify", "majorization", "--n-max", "5"],
        0,
    );
}

#[test]
fn verify_r22() {
    check(
        "verify_r22.json",
        &["verify", "r22", "--radius", "4", "--n-max", "4"],
        0,
    );
}

#[test]
fn verify_pk() {
    check("verify_pk.json", &["verify", "pk", "--k-max", "4", "--radius", "5"], 0);
}

#[test]
fn verify_qn_small() {
    check("verify_qn.json", &["verify", "qn", "--n-max", "3", "--radius", "5"], 0);
}

#[test]
fn verify_qn_violation_prints_witness() {
    let out = fgw(&["verify", "qn", "--n-max", "4", "--radius", "6"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("violation: qn n=4,alpha=-0.5: lhs=108 rhs=81 witness=x=aaaaaa"));
}

#[test]
fn verify_thm1_single() {
    check(
        "verify_thm1.json",
        &[
            "verify",
            "thm1",
            "--radial",
            "1,1/2",
            "--family",
            "sphere-unions",
            "--radius",
            "4",
        ],
        0,
    );
}

#[test]
fn verify_thm3_small() {
    check(
        "verify_thm3.json",
        &["verify", "thm3", "--samples", "5", "--radius", "4"],
        0,
    );
}

#[test]
fn verify_thm4_single() {
    check(
        "verify_thm4.json",
        &["verify", "thm4", "--radial", "1,2,1", "--p", "1.5"],
        0,
    );
}

#[test]
fn verify_thm5_pair() {
    check("verify_thm5.json", &["verify", "thm5", "--s", "2", "--t", "2"], 0);
}

#[test]
fn verify_all_quick() {
    check(
        "verify_all_quick.csv",
        &["verify", "all", "--quick", "--format", "csv"],
        0,
    );
}

#[test]
fn conjecture_table() {
    let v = json(&check(
        "conjecture.json",
        &[
            "conjecture",
            "--radial",
            "1,1",
            "--radial",
            "0,0,1",
            "--s-grid",
            "1,2",
            "--radius",
            "4",
        ],
        0,
    ));
    assert_eq!(v[0]["status"], "informational");
}

#[test]
fn output_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("fgw-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("norms.json");
    let out = fgw(
        &[
            "norms",
            "--p",
            "2",
            "--s",
            "1",
            "--radial",
            "1,1",
            "--output",
            path.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let want = std::fs::read_to_string(golden_path("norms_p2_s1.json")).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), want);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_and_budget_errors_exit_2() {
    let cases: [&[&str]; 7] = [
        &["--bogus"],
        &["norms", "--p", "2", "--radial", "1,x"],
        &["verify", "lemma1", "--family", "exhaustive", "--radius", "3"],
        &["--k", "1", "norms", "--p", "2", "--radial", "1"],
        &["--cap", "50", "convolve", "--n", "3", "--m", "3", "--oracle"],
        &["convolve"],
        &["verify", "thm5", "--s", "2"],
    ];
    for args in cases {
        let out = fgw(args, None);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).is_empty());
    }
}

#[test]
fn reports_identical_across_thread_counts() {
    let runs: [&[&str]; 4] = [
        &[
            "verify",
            "lemma1",
            "--family",
            "random-subsets",
            "--radius",
            "3",
            "--budget",
            "50",
            "--seed",
            "9",
        ],
        &["verify", "thm3", "--samples", "8", "--radius", "4", "--seed", "3"],
        &[
            "search", "--radial", "1,1,1", "--family", "greedy", "--radius", "3", "--budget", "6",
        ],
        &[
            "verify",
            "r22",
            "--family",
            "random-subsets",
            "--radius",
            "3",
            "--budget",
            "40",
            "--format",
            "csv",
        ],
    ];
    for args in runs {
        let base = fgw(args, Some("1"));
        assert_eq!(base.status.code(), Some(0), "{args:?}: {}", stderr(&base));
        for t in ["2", "4"] {
            let other = fgw(args, Some(t));
            assert_eq!(other.stdout, base.stdout, "{args:?} with FGW_THREADS={t}");
        }
        let mut flagged = vec!["--threads", "3"];
        flagged.extend_from_slice(args);
        assert_eq!(fgw(&flagged, Some("1")).stdout, base.stdout);
    }
}
