use std::path::PathBuf;

use cbshell::config::ScenarioConfig;
use cbshell::constitutive::Technique;
use cbshell::dynamics::TimeStep;
use cbshell::error::Error;
use cbshell::output::{vtk_string, ProbeTable};
use cbshell::runner::{run_to_directory, RunOptions};
use cbshell::scenarios::{build_experiment, default_config, Scenario};
use cbshell::tensor::Vec3;

fn shipped(id: u32) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../scenarios/experiment{id}.cfg"))
}

#[test]
fn shipped_configs_equal_defaults() {
    for id in 1..=5 {
        let cfg = ScenarioConfig::load(&shipped(id)).unwrap();
        assert_eq!(cfg, default_config(id).unwrap(), "experiment{id}.cfg");
    }
}

#[test]
fn round_trip_is_a_fixed_point() {
    for id in 1..=5 {
        let cfg = default_config(id).unwrap();
        let text = cfg.to_toml_string();
        let again = ScenarioConfig::from_toml_str(&text, "again").unwrap();
        assert_eq!(cfg, again);
        assert_eq!(text, again.to_toml_string());
        assert_eq!(cfg.hash(), again.hash());
    }
}

#[test]
fn poisson_ratio_above_half_names_the_field() {
    let text = std::fs::read_to_string(shipped(1))
        .unwrap()
        .replace("poisson_ratio = 0.0", "poisson_ratio = 0.6");
    let err = ScenarioConfig::from_toml_str(&text, "bad").unwrap_err();
    assert!(err.to_string().contains("poisson_ratio"), "{err}");
}

#[test]
fn non_positive_thickness_is_a_domain_error() {
    let text = std::fs::read_to_string(shipped(4))
        .unwrap()
        .replace("wall_thickness_m = 0.0025", "wall_thickness_m = 0.0");
    let err = ScenarioConfig::from_toml_str(&text, "bad").unwrap_err();
    assert!(matches!(err, Error::Domain { .. }), "{err}");
}

#[test]
fn unknown_key_is_rejected() {
    let text = std::fs::read_to_string(shipped(3))
        .unwrap()
        .replace("[material]", "[material]\ncolour = \"red\"");
    let err = ScenarioConfig::from_toml_str(&text, "bad").unwrap_err().to_string();
    assert!(err.contains("colour"), "{err}");
}

#[test]
fn zero_step_probe_table_is_header_only() {
    let s = build_experiment(4).unwrap();
    let t = ProbeTable::new(&s.probe_header());
    assert_eq!(t.to_csv_string(), "time_s,pressure_Pa,inner_radius_m,axial_stretch\n");
}

#[test]
fn vtk_of_undeformed_mesh_uses_reference_points() {
    let s = build_experiment(4).unwrap();
    let m = s.model().unwrap();
    let text = vtk_string(&m, "t");
    let n = m.mesh.nodes.len();
    let lines: Vec<&str> = text.lines().collect();
    let start = lines.iter().position(|l| l.starts_with("POINTS")).unwrap() + 1;
    for (k, node) in m.mesh.nodes.iter().enumerate() {
        let xyz: Vec<f64> = lines[start + k].split(' ').map(|v| v.parse().unwrap()).collect();
        assert_eq!(Vec3::new(xyz[0], xyz[1], xyz[2]), node.ref_position);
    }
    assert!(text.contains(&format!("CELLS {} {}", m.mesh.elements.len(), 10 * m.mesh.elements.len())));
    for (e, el) in m.mesh.elements.iter().enumerate() {
        let ids: Vec<String> = el.nodes.iter().map(|i| i.to_string()).collect();
        assert_eq!(lines[start + n + 1 + e], format!("9 {}", ids.join(" ")));
    }
}

#[test]
fn vtk_of_translated_mesh_shifts_only_points() {
    let s = build_experiment(3).unwrap();
    let m = s.model().unwrap();
    let mut moved = m.clone();
    let shift = Vec3::new(0.5, -0.25, 2.0);
    for n in &mut moved.mesh.nodes {
        n.position += shift;
    }
    let (a, b) = (vtk_string(&m, "t"), vtk_string(&moved, "t"));
    let cut = |s: &str| s[s.find("CELLS").unwrap()..s.find("VECTORS").unwrap()].to_string();
    assert_eq!(cut(&a), cut(&b));
    assert_ne!(a, b);
    let first = |s: &str| s.lines().nth(5).unwrap().to_string();
    let p: Vec<f64> = first(&b).split(' ').map(|v| v.parse().unwrap()).collect();
    let r = m.mesh.nodes[0].ref_position + shift;
    assert!((Vec3::new(p[0], p[1], p[2]) - r).norm() < 1e-15);
}

fn short_tube() -> Scenario {
    let mut cfg = default_config(4).unwrap();
    cfg.solver.end_time_s = 2e-3;
    Scenario::from_config(cfg).unwrap()
}

fn run_once(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let opts = RunOptions {
        out_dir: dir.to_path_buf(),
        technique: Some(Technique::Technique1),
        dt: Some(TimeStep::Auto),
        threads: Some(2),
        oracle_only: false,
    };
    let report = run_to_directory(&short_tube(), &opts).unwrap();
    report
        .files
        .iter()
        .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "vtk"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p).unwrap()))
        .collect()
}

#[test]
fn fixed_threads_give_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (x, y) = (run_once(a.path()), run_once(b.path()));
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn manifest_is_written_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        out_dir: dir.path().to_path_buf(),
        technique: None,
        dt: Some(TimeStep::Fixed(2e-3)),
        threads: Some(1),
        oracle_only: false,
    };
    // twenty times the stable step
    let mut cfg = default_config(4).unwrap();
    cfg.solver.end_time_s = 0.07;
    assert!(run_to_directory(&Scenario::from_config(cfg).unwrap(), &opts).is_err());
    let text = std::fs::read_to_string(dir.path().join("experiment4_manifest.toml")).unwrap();
    assert!(text.contains("status = \"failed"), "{text}");
}

#[test]
fn oracle_only_writes_curves_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        out_dir: dir.path().to_path_buf(),
        oracle_only: true,
        ..Default::default()
    };
    let report = run_to_directory(&build_experiment(1).unwrap(), &opts).unwrap();
    let names: Vec<String> = report
        .files
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["experiment1_oracle_elastica.csv", "experiment1_manifest.toml"]);
    let csv = std::fs::read_to_string(dir.path().join(&names[0])).unwrap();
    assert!(csv.starts_with("moment_N_m,tip_axial_m,tip_transverse_m\n"));
}
