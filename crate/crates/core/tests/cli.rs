//! End-to-end tests of the installed binary: argument handling, preset and
//! path resolution, report formats, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_accelperf"))
}

fn stdout(out: &Output) -> &str {
    std::str::from_utf8(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> &str {
    std::str::from_utf8(&out.stderr).unwrap()
}

#[test]
fn list_presets_names_devices_and_scenarios() {
    let out = bin().arg("list-presets").output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["devices:", "gaudi2", "a100", "scenarios:", "fig7c", "rm1", "llama31-8b-attn"] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
}

#[test]
fn run_uses_the_scenario_default_device() {
    let out = bin().args(["run", "fig9"]).output().unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("# scenario = fig9\n"), "got:\n{text}");
    assert!(text.contains("# device = gaudi2\n"));
    assert!(text.contains("# device_sha256 = "));
    assert!(text.contains("vector_bytes,fraction,direction,"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    for format in ["csv", "json"] {
        let run = || {
            bin()
                .args(["run", "fig7c", "--format", format])
                .output()
                .unwrap()
        };
        let (a, b) = (run(), run());
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{format} output differs between runs");
    }
}

#[test]
fn json_output_is_well_formed() {
    let out = bin()
        .args(["run", "fig8c", "--format", "json", "--device", "a100"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(doc["metadata"]["scenario"], "fig8c");
    assert_eq!(doc["metadata"]["device"], "a100");
    assert!(!doc["rows"].as_array().unwrap().is_empty());
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let to_file = bin()
        .args(["run", "fig9", "--out", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    let to_stdout = bin().args(["run", "fig9"]).output().unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}

#[test]
fn compare_appends_ratio_columns_and_a_geomean_row() {
    let out = bin()
        .args([
            "compare",
            "fig9",
            "--device-a",
            "gaudi2",
            "--device-b",
            "a100",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for column in ["utilization_a", "utilization_b", "utilization_ratio"] {
        assert!(text.contains(column), "missing column {column}");
    }
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("geomean,"), "last row: {last}");
    assert!(text.contains("# device_a = gaudi2\n"));
    assert!(text.contains("# device_b = a100\n"));
}

#[test]
fn arguments_accept_explicit_paths() {
    let device_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/devices/a100.toml");
    let dir = tempfile::tempdir().unwrap();
    let scenario_path = dir.path().join("probe.toml");
    std::fs::write(
        &scenario_path,
        "name = \"probe\"\nkind = \"gather_sweep\"\ndescription = \"path probe\"\n\n[axes]\nvector_bytes = [64, 256]\n",
    )
    .unwrap();
    let out = bin()
        .args([
            "run",
            scenario_path.to_str().unwrap(),
            "--device",
            device_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("# device = a100\n"));
}

#[test]
fn spec_dir_resolves_names_before_failing() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("local-gather.toml"),
        "name = \"local-gather\"\nkind = \"gather_sweep\"\ndescription = \"override dir probe\"\ndevice = \"gaudi2\"\n\n[axes]\nvector_bytes = [128]\n",
    )
    .unwrap();

    let found = bin()
        .args(["run", "local-gather"])
        .env("ACCELPERF_SPEC_DIR", dir.path())
        .output()
        .unwrap();
    assert!(found.status.success(), "stderr: {}", stderr(&found));
    assert!(stdout(&found).starts_with("# scenario = local-gather\n"));

    // Without the override directory the same name is unknown.
    let missing = bin().args(["run", "local-gather"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).contains("error:"));
}

#[test]
fn model_and_usage_errors_exit_one() {
    let unknown = bin().args(["run", "no-such-sweep"]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(1));
    assert!(stderr(&unknown).contains("no-such-sweep"));

    // A scenario without a default device needs --device.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nodev.toml");
    std::fs::write(
        &path,
        "name = \"nodev\"\nkind = \"gather_sweep\"\ndescription = \"no device\"\n\n[axes]\nvector_bytes = [64]\n",
    )
    .unwrap();
    let nodev = bin().args(["run", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(nodev.status.code(), Some(1));
    assert!(stderr(&nodev).contains("--device"), "stderr: {}", stderr(&nodev));
}

#[test]
fn io_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent").join("report.csv");
    let out = bin()
        .args(["run", "fig9", "--out", missing.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error:"));
}
