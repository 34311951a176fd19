use std::process::{Command, Output};

use orbitlab_core::report::{Report, Status};

fn orbitlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbitlab")).args(args).env_remove("ORBITLAB_SEED").output().unwrap()
}

fn report(o: &Output) -> Report {
    Report::from_json(&String::from_utf8_lossy(&o.stdout)).expect("json report on stdout")
}

#[test]
fn atlas_json_and_csv() {
    let o = orbitlab(&["atlas", "--pairs", "O3_Sp4,U2_U22"]);
    assert!(o.status.success());
    let r = report(&o);
    assert_eq!(r.schema, "orbitlab/1");
    assert_eq!(r.records.len(), 6);
    let o = orbitlab(&["atlas", "--format", "csv", "--pairs", "O3_Sp4"]);
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("pair,k,dim_Ok"));
    assert_eq!(lines.last().unwrap(), "O3_Sp4,2,9,10,6,-6,9,6,true");
}

#[test]
fn check_suite_passes() {
    let o = orbitlab(&["check", "degree"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(report(&o).records.iter().all(|r| r.status == Status::Pass));
}

#[test]
fn tightened_tolerance_fails_with_exit_one() {
    let o = orbitlab(&["check", "homogeneity", "--pairs", "O3_Sp4", "--samples", "2000", "--tol", "homogeneity_slope=1e-9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!report(&o).passed());
}

#[test]
fn configuration_errors_exit_two() {
    assert_eq!(orbitlab(&["atlas", "--pairs", "O9_Sp2"]).status.code(), Some(2));
    assert_eq!(orbitlab(&["limit", "--pairs", "U1_U11", "--weight", "1", "--t-min", "0.5"]).status.code(), Some(2));
    assert_eq!(orbitlab(&["limit", "--pairs", "U1_U11", "--weight", "1", "--phi", "nope"]).status.code(), Some(2));
    assert_eq!(orbitlab(&["check", "nosuch"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_orbitlab")).args(["check", "degree"]).env("ORBITLAB_SEED", "abc").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_orbitlab")).args(["check", "degree"]).env("ORBITLAB_SEED", "77").output().unwrap();
    assert_eq!(report(&o).config.seed, 77);
    let o = Command::new(env!("CARGO_BIN_EXE_orbitlab")).args(["check", "degree", "--seed", "5"]).env("ORBITLAB_SEED", "77").output().unwrap();
    assert_eq!(report(&o).config.seed, 5);
}

#[test]
fn integrate_and_replay() {
    let dir = std::env::temp_dir().join(format!("orbitlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let a = dir.join("a.json");
    let o = orbitlab(&["integrate", "--pairs", "U1_U11", "--t-grid", "0.5,1,2", "--out", a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = Report::from_json(&std::fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(r.records.len(), 2);
    let o = orbitlab(&["replay", a.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(report(&o).canonical_json(), r.canonical_json());
    // the embedded config, run as a file, rewrites the same report to its output path
    let c = dir.join("c.json");
    std::fs::write(&c, serde_json::to_string(&r.config).unwrap()).unwrap();
    std::fs::remove_file(&a).unwrap();
    assert!(orbitlab(&["run", c.to_str().unwrap()]).status.success());
    let again = Report::from_json(&std::fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(again.canonical_json(), r.canonical_json());
    let _ = std::fs::remove_dir_all(&dir);
}
