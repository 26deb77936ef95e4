//! Golden-file tests pinning the CLI's JSON/CSV schema and exit codes.
//!
//! Regenerate goldens with UPDATE_GOLDEN=1 after an intentional schema
//! change and review the diff.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_designforge")
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn run(args: &[&str]) -> (String, i32) {
    let out = Command::new(bin())
        .args(args)
        .env("DESIGNFORGE_THREADS", "1")
        .output()
        .expect("binary runs");
    (String::from_utf8(out.stdout).expect("utf-8 stdout"), out.status.code().unwrap_or(-1))
}

fn check_golden(name: &str, args: &[&str], expect_code: i32) {
    let (stdout, code) = run(args);
    assert_eq!(code, expect_code, "exit code for {args:?}\nstdout: {stdout}");
    let path = golden_path(name);
    if std::env::var("UPDATE_GOLDEN").is_ok() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &stdout).unwrap();
        return;
    }
    let golden = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden {path:?} ({e}); run with UPDATE_GOLDEN=1"));
    assert_eq!(stdout, golden, "schema drift for {args:?}");
}

#[test]
fn golden_bound_swap() {
    check_golden("bound_swap.json", &["bound", "swap", "--q", "2", "--k", "2", "-m", "10", "-l", "3"], 0);
}

#[test]
fn golden_bound_tpe() {
    check_golden(
        "bound_tpe.json",
        &["bound", "tpe", "--q", "2", "--k", "2", "-P", "2", "-l", "8,8", "-m", "24,24"],
        0,
    );
}

#[test]
fn golden_bound_swap_guard_violation() {
    // k² ≥ 2q^m: report emitted, exit code 2, flag named in warnings
    let (stdout, code) = run(&["bound", "swap", "--k", "100", "--q", "2", "-m", "4", "-l", "1"]);
    assert_eq!(code, 2);
    assert!(stdout.contains("k^2_lt_2q^m"), "missing hypothesis flag: {stdout}");
    let v: serde_json::Value = serde_json::from_str(&stdout).expect("complete JSON on exit 2");
    assert_eq!(v["command"], "bound");
    check_golden(
        "bound_swap_guard.json",
        &["bound", "swap", "--k", "100", "--q", "2", "-m", "4", "-l", "1"],
        2,
    );
}

#[test]
fn golden_bound_rel_crosstwirl() {
    check_golden(
        "bound_rel_crosstwirl.json",
        &["bound", "rel-crosstwirl", "--q", "2", "--k", "2", "-m", "60,60", "-l", "20,20"],
        0,
    );
}

#[test]
fn golden_plan_d1() {
    let (stdout, code) = run(&["plan", "-D", "1", "-M", "1024", "-K", "2", "--q", "2", "--eps", "0.5"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["results"]["ell"], 22);
    assert_eq!(v["results"]["leaf_count"], 4);
    check_golden("plan_d1.json", &["plan", "-D", "1", "-M", "1024", "-K", "2", "--q", "2", "--eps", "0.5"], 0);
}

#[test]
fn golden_norms_y() {
    let (stdout, code) = run(&["norms", "--kind", "Y", "--q", "2", "--k", "2", "-m", "3", "-l", "1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["results"]["norm_y"].is_number());
    assert!(v["results"]["norm_d"].is_number());
    assert!(v["results"]["norm_k"].is_number());
    check_golden("norms_y.json", &["norms", "--kind", "Y", "--q", "2", "--k", "2", "-m", "3", "-l", "1"], 0);
}

#[test]
fn golden_dump_gram_csv() {
    check_golden("dump_gram.csv", &["dump", "--kind", "gram", "--k", "2", "--dim", "2"], 0);
}

#[test]
fn plan_csv_schedule() {
    let (stdout, code) =
        run(&["plan", "-D", "1", "-M", "1024", "-K", "2", "--q", "2", "--eps", "0.5", "--csv"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("layer,path,kind,num_qudits,s_set_ids"));
    assert_eq!(stdout.lines().count(), 8, "1 root + 2 mid + 4 leaves + header");
}

#[test]
fn parse_errors_exit_one() {
    let (_, code) = run(&["bound", "swap", "--q", "2", "--k", "2", "-m", "abc", "-l", "1"]);
    assert_eq!(code, 1);
    let (_, code) = run(&["norms", "--kind", "Z", "--q", "2", "--k", "2", "-m", "3", "-l", "1"]);
    assert_eq!(code, 1);
}

#[test]
fn plan_region_budget_flag() {
    let (stdout, code) = run(&[
        "plan", "-D", "1", "-M", "1024", "-K", "2", "--q", "2", "--eps", "0.5", "--region-ids",
        &(100..200).map(|i| i.to_string()).collect::<Vec<_>>().join(","),
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["results"]["region_comm_budget"]["boundary_count"], 2);
    // D=1 interior interval: 10·ℓ·log2(2) = 220
    assert_eq!(v["results"]["region_comm_budget"]["ebits"], 220.0);
}
