use std::path::Path;
use std::process::{Command, Output};

fn subchan(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subchan"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn ramp_writes_one_table_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let run = subchan(&["run-ramp"], dir.path());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(dir.path().join("ramp_up_500C_0.01s.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "time,U,c_f_quasisteady,c_f_brunone");
    let tables = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("ramp_"))
        .count();
    assert_eq!(tables, 18);
    assert_eq!(manifest(dir.path())["scenario"], "ramp");
}

#[test]
fn unknown_config_key_is_reported_with_its_location() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "[pipe]\ndiameter = 0.01\nbogus_key = 1\n").unwrap();
    let run = subchan(&["run-pipe", "--config", config.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(run.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&run.stderr).unwrap();
    assert_eq!(err["error"]["category"], "config");
    assert!(err["error"]["message"].as_str().unwrap().contains("bogus_key"), "{err}");
    assert_eq!(err["error"]["line"], 3);
}

#[test]
fn out_of_range_case_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(subchan(&["run-lofa", "--case", "3"], dir.path()).status.code(), Some(2));
}

#[test]
fn gen_table_writes_both_orientations() {
    let dir = tempfile::tempdir().unwrap();
    let run = subchan(&["gen-table", "--calibration", "2.5e5"], dir.path());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert!(names.iter().any(|n| n.starts_with("nu_ratio_aided")), "{names:?}");
    assert!(names.iter().any(|n| n.starts_with("nu_ratio_opposed")), "{names:?}");
}

#[test]
fn repeated_runs_produce_identical_outputs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let run = subchan(&["run-pipe", "--seed-check"], dir.path());
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }
    let (ma, mb) = (manifest(a.path()), manifest(b.path()));
    assert_eq!(ma["config_hash"], mb["config_hash"]);
    assert_eq!(ma["outputs"], mb["outputs"]);
    assert_eq!(ma["determinism_check"], mb["determinism_check"]);
    for name in ["pipe_corrections_on.csv", "pipe_corrections_off.csv", "pipe_summary.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let run = subchan(&["verify"], dir.path());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stdout));
    assert!(dir.path().join("verify.csv").exists());
}
