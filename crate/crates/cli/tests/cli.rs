use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cbshell"))
}

fn cfg(id: u32) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../scenarios/experiment{id}.cfg"))
}

#[test]
fn oracle_only_run_writes_into_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", cfg(4).to_str().unwrap(), "--oracle-only"])
        .env("CBSHELL_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["experiment4_oracle_tube_inflation.csv", "experiment4_oracle_tube_wall_profile.csv", "experiment4_manifest.toml"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn run_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", cfg(3).to_str().unwrap(), "--technique", "2", "--dt", "1e-4", "--threads", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(dir.path().join("experiment3_manifest.toml")).unwrap();
    assert!(manifest.contains("technique = 2"), "{manifest}");
    assert!(manifest.contains("dt_mode = \"1e-4\""), "{manifest}");
    assert!(manifest.contains("threads = 1"), "{manifest}");
    let probes = std::fs::read_to_string(dir.path().join("experiment3_probes.csv")).unwrap();
    assert!(probes.starts_with("time_s,traction_Pa,stretch_11"));
}

#[test]
fn verify_passes_on_equibiaxial_square() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["verify", cfg(3).to_str().unwrap(), "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.starts_with("criterion 4 PASS"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("experiment3_verify.csv")).unwrap();
    assert!(csv.starts_with("criterion,check,measured,bound,limit,passed\n"));
}

#[test]
fn bad_inputs_are_rejected() {
    let out = bin().args(["run", "/nonexistent.cfg"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent.cfg"));
    let out = bin().args(["run", cfg(1).to_str().unwrap(), "--technique", "4"]).output().unwrap();
    assert!(!out.status.success());
    let out = bin().args(["run", cfg(1).to_str().unwrap(), "--dt", "-3"]).output().unwrap();
    assert!(!out.status.success());
}
