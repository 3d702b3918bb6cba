//! End-to-end runs of the binary: exit codes, documents, geometry.

use std::path::Path;
use std::process::{Command, Output};

use simplexforge_cli::document::{ResultDocument, SimplexRecord, Status};
use simplexforge_cli::SCHEMA;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_simplexforge"));
    c.env_remove("SIMPLEXFORGE_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn load(p: &Path) -> ResultDocument {
    ResultDocument::from_json(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn assert_schema_valid(p: &Path) {
    let schema: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
    let errors: Vec<String> = validator.iter_errors(&doc).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{}: {errors:#?}", p.display());
}

#[test]
fn construct_disk_succeeds_with_the_closed_form_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("disk.json");
    let o = run(&["construct", "--body", "lp:2:2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = load(&out);
    assert_eq!(doc.status, Status::Ok);
    assert_eq!(doc.simplices.len(), 1);
    assert!((doc.simplices[0].diameter - 3f64.sqrt()).abs() < 1e-6);
    assert_schema_valid(&out);
    // the document re-verifies against the re-parsed body
    let o = run(&["verify", "--input", out.to_str().unwrap(), "--summary"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("check,verdict"));
    assert_eq!(csv.matches(",pass,").count(), 2);
}

#[test]
fn construct_cone_refuses_at_level_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cone.json");
    let o = run(&["construct", "--body", "cone:lp:2:2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let doc = load(&out);
    assert_eq!(doc.status, Status::Negative);
    let err = doc.error.as_ref().unwrap();
    assert_eq!(err.kind, "PreconditionViolated");
    assert_eq!(err.level, Some(3));
    let two = doc.verdicts.iter().find(|v| v.name.starts_with("2-intersection")).unwrap();
    let s3 = 3f64.sqrt();
    assert!((two.value.unwrap() - 2.0 * (s3 - 1.0) / s3).abs() < 1e-9);
    assert!(doc.traces.contains_key("construction"));
    assert_schema_valid(&out);
}

#[test]
fn usage_errors_exit_two() {
    let o = run(&["construct", "--body", "lp:0.5:2"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("p < 1") && err.contains("position 3"), "{err}");
    assert_eq!(run(&["construct"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["search", "--body", "lp:2:2", "--restarts", "0"]).status.code(), Some(2));
    assert_eq!(run(&["construct", "--body", "seg"]).status.code(), Some(2));
    assert_eq!(run(&["construct", "--body", "smoothed:cone:lp:2:2:0.1"]).status.code(), Some(2));
    assert_eq!(run(&["construct", "--body", "lp:2:2", "--export", "svg"]).status.code(), Some(2));
    assert_eq!(run(&["construct", "--body", "lp:2:2", "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn io_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing_dir = dir.path().join("nope").join("doc.json");
    let o = run(&["construct", "--body", "lp:2:2", "--out", missing_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["verify", "--input", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let spec = format!("profile:{}:lp:2:2", dir.path().join("absent.json").display());
    assert_eq!(run(&["check", "--body", &spec]).status.code(), Some(3));
}

#[test]
fn seed_flag_wins_over_environment() {
    let seed_of = |o: Output| {
        assert_eq!(o.status.code(), Some(0));
        let doc = ResultDocument::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
        doc.input.seed
    };
    let args = ["search", "--body", "lp:2:2", "--restarts", "2"];
    assert_eq!(seed_of(bin().args(args).output().unwrap()), 0);
    assert_eq!(seed_of(bin().args(args).env("SIMPLEXFORGE_SEED", "5").output().unwrap()), 5);
    let mut with_flag = args.to_vec();
    with_flag.extend(["--seed", "7"]);
    assert_eq!(seed_of(bin().args(&with_flag).env("SIMPLEXFORGE_SEED", "5").output().unwrap()), 7);
}

#[test]
fn repeated_runs_are_byte_identical_up_to_timing() {
    let dir = tempfile::tempdir().unwrap();
    let mut docs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("s{i}.json"));
        let o = run(&["search", "--body", "lp:1.5:3", "--restarts", "4", "--seed", "11", "--out", out.to_str().unwrap()]);
        assert!(o.status.code().unwrap() <= 1);
        assert_schema_valid(&out);
        docs.push(load(&out));
    }
    assert_eq!(docs[0].determinism_hash, docs[1].determinism_hash);
    assert_eq!(docs[0].determinism_hash, docs[0].compute_hash());
    let strip = |d: &ResultDocument| {
        let mut d = d.clone();
        d.timing.elapsed_seconds = 0.0;
        d.paths = Default::default();
        d.to_json()
    };
    assert_eq!(strip(&docs[0]), strip(&docs[1]));
}

#[test]
fn check_reports_fail_and_degenerate() {
    let o = run(&["check", "--body", "cone:lp:2:2", "--summary"]);
    assert_eq!(o.status.code(), Some(1));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.contains("\"intersection property\",pass"));
    assert!(csv.contains("\"2-intersection (necessary condition)\",fail"));
    let o = run(&["check", "--body", "lp:1:2", "--summary"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stdout).unwrap().contains(",degenerate,"));
    let o = run(&["check", "--body", "lp:2:3", "--sample"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn lower_bound_for_the_square_is_four() {
    let o = run(&["search", "--body", "lp:inf:2", "--lower-bound", "--k", "5", "--restarts", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = ResultDocument::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(doc.residuals["lower_bound"], Some(4.0));
    assert_eq!(doc.simplices[0].vertices.len(), 4);
}

#[test]
fn export_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("disk.json");
    let o = run(&["construct", "--body", "lp:2:2", "--out", out.to_str().unwrap(), "--export", "svg"]);
    assert_eq!(o.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("disk.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("class=\"simplex\""));
    assert_eq!(load(&out).paths.geometry.as_deref(), dir.path().join("disk.svg").to_str());

    // a four-dimensional result has no planar picture
    let out4 = dir.path().join("ball4.json");
    assert_eq!(run(&["construct", "--body", "lp:2:4", "--out", out4.to_str().unwrap()]).status.code(), Some(0));
    let o = run(&["export", "--input", out4.to_str().unwrap(), "--export", "svg", "--out", dir.path().join("x.svg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported dimension"));

    // the doubled cone with T* as a mesh
    let s3 = 3f64.sqrt();
    let z = (s3 - 1.0) / s3;
    let mut doc = load(&out);
    doc.input.body = Some("cone:lp:2:2".into());
    doc.simplices = vec![SimplexRecord {
        label: "T*".into(),
        body: "cone:lp:2:2".into(),
        vertices: vec![vec![-0.5, -0.5 / s3, z], vec![0.5, -0.5 / s3, z], vec![0.0, 1.0 / s3, z]],
        diameter: 1.0,
        claims_equilateral: true,
        claims_inscribed: true,
    }];
    let cone_doc = dir.path().join("cone.json");
    std::fs::write(&cone_doc, doc.to_json()).unwrap();
    let obj = dir.path().join("cone.obj");
    let o = run(&["export", "--input", cone_doc.to_str().unwrap(), "--export", "obj", "--out", obj.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(obj).unwrap();
    assert!(text.contains("o body") && text.contains("o simplex_T_"));
    assert_eq!(run(&["verify", "--input", cone_doc.to_str().unwrap()]).status.code(), Some(0));
}
