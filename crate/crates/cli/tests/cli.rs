use std::path::Path;
use std::process::{Command, Output};

use lorentz_core::gallery::parse_item;
use lorentz_core::lab::format_number;
use lorentz_core::norms::quasinorm;
use lorentz_core::{ExponentPair, QuadratureSpec};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lorentz-lab")).args(args).env_remove("LORENTZ_LAB_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn norm_examples() {
    let cases = [
        ("u_radial(r=1,alpha=1,n=2,p=2)", "inf", "0.5"),
        ("power_singularity(r=1,n=1,p=2)", "inf", "1.414213562373"),
        ("u_radial(r=1,alpha=1,n=2,p=2)", "1", "INFINITE(LOG_EXPONENT_TEST)"),
    ];
    for (id, q, want) in cases {
        let o = lab(&["norm", id, "--p", "2", "--q", q]);
        assert_eq!(code(&o), 0);
        assert_eq!(stdout(&o).trim(), want);
    }
}

#[test]
fn norm_matches_library_call() {
    let id = "u_radial(r=1,alpha=0.5,n=2,p=3)";
    let item = parse_item(id).unwrap();
    let direct = quasinorm(
        &item.function_profile().unwrap().unwrap(),
        &ExponentPair::new(3.0, 5.0).unwrap(),
        &QuadratureSpec::default().with_rel_tol(1e-9).unwrap(),
    )
    .unwrap();
    let o = lab(&["norm", id, "--p", "3", "--q", "5", "--quad-rel-tol", "1e-9"]);
    assert_eq!(stdout(&o).trim(), format_number(direct.finite().unwrap()));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["norm", "nosuch(r=1)", "--p", "2", "--q", "1"][..],
        &["norm", "up(n=2,p=4)", "--p", "0.5", "--q", "1"],
        &["witness", "--p", "2", "--q1", "2", "--q2", "2"],
        &["verify", "bogus"],
        &["sweep", "u_radial", "--grid", "alpha=0.5,x"],
        &["sweep", "u_radial", "--grid", "beta=1"],
        &["gallery", "--format", "xml"],
    ] {
        assert_eq!(code(&lab(args)), 2, "{args:?}");
    }
}

#[test]
fn witness_examples() {
    let o = lab(&["witness", "--p", "2", "--q1", "2", "--q2", "inf"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("alpha = 0.5\n"), "{text}");
    assert!(text.contains("closed form at q2 = 1.0\n"));
    let o = lab(&["witness", "--p", "2", "--q1", "1", "--q2", "2", "--format", "json", "--no-timestamp"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["closed_form_q2"], "0.707106781187");
    assert_eq!(doc["split"], true);
    assert!(doc.get("generated_at").is_none());
}

#[test]
fn verify_writes_reports_and_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = || lab(&["verify", "morrey1d", "--seed", "7", "--out-dir", out, "--no-timestamp", "--format", "json"]);
    let (a, b) = (run(), run());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["summary"]["fail"], 0);
    assert_eq!(doc["summary"]["pass"], 12);
    let jsonl = std::fs::read_to_string(Path::new(out).join("morrey1d.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 12);
    let csv = std::fs::read_to_string(Path::new(out).join("morrey1d.csv")).unwrap();
    assert!(csv.starts_with("check_id,params,lhs,rhs,margin,verdict\n"));
}

#[test]
fn seed_env_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lorentz-lab"))
        .args(["verify", "poincare", "--seed", "1", "--format", "json", "--out-dir", dir.path().to_str().unwrap()])
        .env("LORENTZ_LAB_SEED", "99")
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["config"]["seed"], 99);
    assert!(doc["generated_at"].is_u64());
}

#[test]
fn verify_all_fails_only_on_boundary_head_growth() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["verify", "all", "--seed", "42", "--out-dir", dir.path().to_str().unwrap(), "--no-timestamp"]);
    assert_eq!(code(&o), 1);
    let fails: Vec<String> = stdout(&o).lines().filter(|l| l.starts_with("FAIL ")).map(String::from).collect();
    assert!(!fails.is_empty());
    assert!(fails.iter().all(|l| l.starts_with("FAIL inclusion.head_growth ")), "{fails:?}");
}

#[test]
fn sweep_tables() {
    let o = lab(&["sweep", "u_radial", "--grid", "alpha=0.25,0.5,1", "--grid", "q=1,2,4,inf", "--grid", "p=2", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 12);
    for row in &rows {
        let cells: Vec<&str> = row.rsplitn(3, ',').collect();
        assert_eq!(cells[1].starts_with("INFINITE"), cells[0] == "INFINITE", "{row}");
    }
    let o = lab(&["sweep", "up", "--grid", "q=inf", "--functional", "gradient", "--format", "csv"]);
    assert_eq!(stdout(&o).lines().count(), 2);
    let o = lab(&["sweep", "v", "--grid", "r=0.5,1,2", "--grid", "q=4", "--functional", "poincare-ratio", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let ratios: Vec<f64> = doc["rows"].as_array().unwrap().iter().map(|r| r["value"].as_str().unwrap().parse().unwrap()).collect();
    assert_eq!(ratios.len(), 3);
    assert!(ratios.iter().all(|r| ((r - ratios[0]) / ratios[0]).abs() < 1e-3), "{ratios:?}");
}

#[test]
fn gallery_lists_items_and_output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gallery.csv");
    let o = lab(&["gallery", "--format", "csv", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().count() > 10);
    assert!(text.contains("\"u_radial(r=1,alpha=1,n=2,p=2)\",2,3.14159265359,2.0,0.5,-"));
    for line in text.lines().skip(1) {
        let id = line.split('"').nth(1).unwrap();
        assert_eq!(parse_item(id).unwrap().id(), id);
    }
}
