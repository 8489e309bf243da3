use std::path::Path;
use std::process::{Command, Output};

use mauplink_cli::output::CSV_HEADER;
use mauplink_cli::ExperimentSpec;

fn mauplink(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mauplink"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = r#"{
    "n_antennas": 6,
    "span": 4.0,
    "saa_samples": 10,
    "eval_samples": 300,
    "n_starts": 2,
    "max_iterations": 50
}"#;

#[test]
fn default_config_is_a_loadable_spec() {
    let dir = tempfile::tempdir().unwrap();
    let out = mauplink(&["default-config"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        ExperimentSpec::parse(&text).unwrap(),
        ExperimentSpec::default()
    );
}

#[test]
fn optimize_writes_results_sidecar_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = mauplink(
        &[
            "optimize",
            "--config",
            &config,
            "--out",
            "res",
            "--receivers",
            "zf,mmse-sic",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let res = dir.path().join("res");
    let csv = std::fs::read_to_string(res.join("optimize.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("ma,zf,6,4,"));
    assert!(lines[4].starts_with("fpa,mmse-sic,6,4,"));

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(res.join("optimize.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["generator"], mauplink::GENERATOR_NAME);
    assert_eq!(meta["spec"]["saa_samples"], 10);
    assert_eq!(meta["row_wall_times"].as_array().unwrap().len(), 4);

    for receiver in ["zf", "mmse-sic"] {
        let trace = std::fs::read_to_string(res.join(format!("trace_{receiver}.csv"))).unwrap();
        let values: Vec<f64> = trace
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert!(!values.is_empty());
        assert!(values.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn seed_flag_changes_results_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let run = |seed: &str, out: &str| {
        let o = mauplink(
            &[
                "eval",
                "--config",
                &config,
                "--out",
                out,
                "--seed",
                seed,
                "--receivers",
                "mmse",
            ],
            dir.path(),
        );
        assert!(o.status.success());
        std::fs::read_to_string(dir.path().join(out).join("eval.csv")).unwrap()
    };
    let (a, b, c) = (run("5", "a"), run("5", "b"), run("6", "c"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.lines().nth(1).unwrap().ends_with(",5"));
}

#[test]
fn eval_takes_positions_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = mauplink(
        &[
            "eval",
            "--positions",
            "0,0.8,1.6,2.4,3.2,4.0",
            "--receivers",
            "zf",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("o/eval.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("given,zf,6,6,"), "{row}");
    assert!(row.contains("0.00000000000;0.800000000000;1.60000000000;2.40000000000"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let typo = write_config(dir.path(), r#"{"n_antenas": 6}"#);
    assert_eq!(
        mauplink(&["optimize", "--config", &typo], dir.path())
            .status
            .code(),
        Some(2)
    );

    let wrong_kind = write_config(dir.path(), r#"{"sweep_kind": "antennas"}"#);
    assert_eq!(
        mauplink(&["sweep-span", "--config", &wrong_kind], dir.path())
            .status
            .code(),
        Some(2)
    );

    let infeasible = write_config(
        dir.path(),
        r#"{"sweep_kind": "span", "sweep_values": [3.0]}"#,
    );
    let out = mauplink(&["sweep-span", "--config", &infeasible], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("span"));

    let squeezed = write_config(dir.path(), r#"{"n_antennas": 12, "span": 5.0}"#);
    assert_eq!(
        mauplink(&["optimize", "--config", &squeezed], dir.path())
            .status
            .code(),
        Some(3)
    );

    let out = mauplink(
        &["grad-check", "--out", "gc", "--receivers", "zf"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("gc/grad_check.json").exists());

    assert_eq!(
        mauplink(&["optimize", "--receivers", "zero-forcing"], dir.path())
            .status
            .code(),
        Some(2)
    );
}
