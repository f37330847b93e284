use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcm-spectra"))
        .args(args)
        .env_remove("MCM_SPECTRA_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gldim_leuschke_e6() {
    let o = run(&["gldim", "--quiver", "catalog:e6_curve", "--set", "R,M1,B"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3\n");
}

#[test]
fn gldim_infinite_is_success() {
    let o = run(&["gldim", "--quiver", "catalog:e6_curve", "--set", "R,B,X"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "infinite\n");
}

#[test]
fn gldim_unknown_exits_2() {
    let o = run(&[
        "gldim", "--quiver", "catalog:e6_curve", "--set", "R,M1,B", "--max-levels", "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o), "unknown\n");
    assert!(String::from_utf8_lossy(&o.stderr).contains("--max-levels 2"));
}

#[test]
fn resolve_prints_terms_and_pd() {
    let o = run(&[
        "resolve", "--quiver", "catalog:e6_curve", "--set", "R,M1,B", "--simple", "M1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "terms: M1 | R+B | 2*M1 | B\npd: 3\n");
}

#[test]
fn duplicate_set_entries_collapse() {
    let o = run(&["gldim", "--quiver", "catalog:e6_curve", "--set", "R,M1,B,M1,R"]);
    assert_eq!(stdout(&o), "3\n");
}

#[test]
fn knit_json_is_deterministic() {
    let args = [
        "knit", "--quiver", "catalog:e6_curve", "--set", "R,B,X", "--target", "X", "--format",
        "json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["middle"], serde_json::json!({"B": 1, "R": 1, "X": 1}));
    assert_eq!(v["kernel"], serde_json::json!({"M2": 1, "N1": 1}));
}

#[test]
fn unknown_label_lists_valid_ones() {
    let o = run(&["gldim", "--quiver", "catalog:e6_curve", "--set", "R,Q"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("Q") && err.contains("M1"), "{err}");
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["gldim", "--quiver", "catalog:e6_curve"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        run(&["spectrum", "--quiver", "catalog:e6_curve", "--resume"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn spectrum_csv_c85() {
    let o = run(&["spectrum", "--quiver", "catalog:cyclic_surface(8,5)", "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "gldim,count\n2,1\n3,72\n4,8\n5,8\ninfinite,166\nunknown,0\n"
    );
}

#[test]
fn spectrum_jobs_from_env() {
    let o = Command::new(env!("CARGO_BIN_EXE_mcm-spectra"))
        .args(["spectrum", "--quiver", "catalog:e6_curve", "--format", "json"])
        .env("MCM_SPECTRA_JOBS", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["infinite_count"], 75);
    assert_eq!(v["histogram"]["3"], 34);
}

#[test]
fn spectrum_checkpoint_resume_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("cp.json");
    let dump = dir.path().join("dump.csv");
    let cp_s = cp.to_str().unwrap();
    let dump_s = dump.to_str().unwrap();
    let o = run(&[
        "spectrum", "--quiver", "catalog:e6_curve", "--checkpoint", cp_s, "--range", "1..50",
        "--dump-per-subset", dump_s,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&[
        "spectrum", "--quiver", "catalog:e6_curve", "--checkpoint", cp_s, "--resume",
        "--dump-per-subset", dump_s, "--format", "md",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let md = stdout(&o);
    assert!(md.contains("| 3 | 34 |") && md.contains("| infinite | 75 |"), "{md}");
    let lines = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(lines.lines().count(), 1 + 127);

    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cp).unwrap()).unwrap();
    doc["quiver_id"] = "0000".into();
    std::fs::write(&cp, doc.to_string()).unwrap();
    let o = run(&["spectrum", "--quiver", "catalog:e6_curve", "--checkpoint", cp_s, "--resume"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("0000"));
}

#[test]
fn validate_and_catalog() {
    let o = run(&["catalog", "list"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "e8_curve"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e7.json");
    let o = run(&["catalog", "emit", "e7_curve"]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&path, &o.stdout).unwrap();
    let p = path.to_str().unwrap();
    let o = run(&["validate", "--quiver", p]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // The emitted curve has no formal zero; it is added on load.
    let o = run(&["gldim", "--quiver", p, "--set", "R,M1,Y1,A,D"]);
    assert_eq!(stdout(&o), "3\n");

    let mut doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    doc["arrows"].as_array_mut().unwrap().pop();
    std::fs::write(&path, doc.to_string()).unwrap();
    let o = run(&["validate", "--quiver", p]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("mesh"), "{}", stdout(&o));
}
