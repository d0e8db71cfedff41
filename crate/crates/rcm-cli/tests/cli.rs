use std::path::Path;
use std::process::Command;

use rcm_cli::config::{MethodName, SCHEMA_VERSION};
use rcm_cli::{run, CliError, ExperimentConfig, Overrides, Task};

fn rcm(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rcm")).current_dir(dir).args(args).env_remove("RCM_THREADS").output().unwrap()
}

const TAU_AT_ZERO: &str = r#"
task = "tau"
lambda = 0.0
replicas = 200
seed = 5

[model]
kind = "BooleanBall"
d = 2

[radii]
r_max = 1.5
steps = 12
"#;

#[test]
fn config_round_trip_is_identity() {
    let text = r#"
version = 1
task = "lambda-c"
seed = 17
replicas = 300
lambdas = [3.0, 3.5, 4.0]
ladder = [6.0, 9.0, 12.0]

[model]
kind = "SpreadOutBall"
dimension = 3
spread = 1.5

[region]
side = 12.0
boundary = "Free"

[critical]
method = "chi"
chi_exponent = 1.2
fractions = [0.5]

[output]
dir = "results"
prefix = "run1"
"#;
    let a = ExperimentConfig::parse(text).unwrap();
    assert_eq!(a.task, Some(Task::LambdaC));
    assert_eq!(a.critical.method, MethodName::Chi);
    let b = ExperimentConfig::parse(&a.to_toml()).unwrap();
    assert_eq!(a, b);
    let c = ExperimentConfig::parse(&ExperimentConfig::default().to_toml()).unwrap();
    assert_eq!(c, ExperimentConfig::default());
}

#[test]
fn missing_dimension_is_a_field_level_config_error() {
    let e = ExperimentConfig::parse("[model]\nkind = \"Gaussian\"\n").unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert!(e.to_string().contains("dimension"), "{e}");
    let e = ExperimentConfig::parse("replicas = 10\nreplica = 3\n").unwrap_err();
    assert!(e.to_string().contains("replica"), "{e}");
    let e = ExperimentConfig::parse(&format!("version = {}\n", SCHEMA_VERSION + 1)).unwrap_err();
    assert!(e.to_string().contains("version"));
}

#[test]
fn binary_exits_two_on_missing_dimension() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "lambda = 0.4\n[model]\nkind = \"BooleanBall\"\n").unwrap();
    let out = rcm(dir.path(), &["chi", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("missing field `dimension`"), "{err}");
}

#[test]
fn tau_at_zero_intensity_is_the_connection_function() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tau.toml"), TAU_AT_ZERO).unwrap();
    let out = rcm(dir.path(), &["tau", "--config", "tau.toml", "--out-dir", "o"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("o/tau.csv")).unwrap();
    let cf = rcm::model::ConnectionFunction::boolean(2);
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let phi = if f[0] == 0.0 { 1.0 } else { cf.phi_radial(f[0]) };
        assert!((f[1] - phi).abs() <= 3.0 * f[2] + 1e-12, "{line}");
        rows += 1;
    }
    // The grid also carries the breakpoints of the model.
    assert!(rows >= 13);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/tau.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["code_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(json["config"]["seed"], 5);
    assert_eq!(json["config"]["model"]["dimension"], 2);
    assert!(dir.path().join("o/tau.gp").exists());
    // Only the renamed files remain.
    assert_eq!(std::fs::read_dir(dir.path().join("o")).unwrap().count(), 3);
}

#[test]
fn runs_are_deterministic_given_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::parse(&TAU_AT_ZERO.replace("lambda = 0.0", "lambda = 0.5")).unwrap();
    let read = |sub: &str, seed: u64| {
        let over = Overrides { seed: Some(seed), out_dir: Some(dir.path().join(sub)), smoke: false };
        run(Task::Tau, cfg.clone(), &over).unwrap();
        std::fs::read_to_string(dir.path().join(sub).join("tau.csv")).unwrap()
    };
    assert_eq!(read("a", 3), read("b", 3));
    assert_ne!(read("a", 3), read("c", 4));
}

#[test]
fn task_mismatch_and_missing_model_are_config_errors() {
    let cfg = ExperimentConfig::parse(TAU_AT_ZERO).unwrap();
    let e = run(Task::Chi, cfg, &Overrides::default()).unwrap_err();
    assert!(matches!(e, CliError::Config(_)));
    let e = run(Task::Fourier, ExperimentConfig::default(), &Overrides::default()).unwrap_err();
    assert!(e.to_string().contains("model"), "{e}");
}

#[test]
fn fourier_and_diagrams_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::parse("lambda = 0.5\n[model]\nkind = \"Gaussian\"\ndimension = 9\n").unwrap();
    let over = Overrides { out_dir: Some(dir.path().to_path_buf()), ..Default::default() };
    let s = run(Task::Fourier, cfg.clone(), &over).unwrap();
    assert_eq!(s.files.len(), 3);
    let csv = std::fs::read_to_string(dir.path().join("fourier.csv")).unwrap();
    let first: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 1.0).abs() < 1e-12);
    let s = run(Task::Diagrams, cfg, &over).unwrap();
    assert!(s.message.contains("f₂"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("diagrams.json")).unwrap()).unwrap();
    let t = &json["result"]["triangles"];
    assert!(t["triangle"].as_f64().unwrap() <= t["open"].as_f64().unwrap());
}

#[test]
fn verify_smoke_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcm(dir.path(), &["verify", "--smoke", "--seed", "11", "--threads", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_to_string(dir.path().join("out/verify.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some("true")));
}

#[test]
fn unknown_task_is_rejected_by_the_parser() {
    let dir = tempfile::tempdir().unwrap();
    let out = rcm(dir.path(), &["percolate"]);
    assert_eq!(out.status.code(), Some(2));
}
