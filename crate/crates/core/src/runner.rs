//! Running a scenario: FE simulation with probe sampling, oracle curves and
//! the output directory layout.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::GeometryConfig;
use crate::constitutive::Technique;
use crate::dynamics::{Model, TimeStep};
use crate::error::{Error, Result};
use crate::oracles::{self, OracleCurve};
use crate::output::{pressure_band_table, write_vtk, ProbeTable, RunManifest};
use crate::scenarios::{Probes, Scenario};

/// Pressure at which the wall stress profile is sampled (Pa).
pub const PROFILE_PRESSURE_PA: f64 = 13_330.0;

/// Through-thickness stations of the wall profile.
pub const PROFILE_ZETAS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// FE wall stresses at the first sample where the pressure reached
/// [`PROFILE_PRESSURE_PA`]; rows `(ζ, r, σ_rr, σ_θθ, σ_zz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WallProfile {
    pub pressure: f64,
    pub rows: Vec<[f64; 5]>,
}

/// Outcome of one FE run. `status` holds the solver error when the run
/// stopped early; probes hold everything sampled up to that point.
#[derive(Debug)]
pub struct Simulation {
    pub technique: Technique,
    pub probes: ProbeTable,
    pub model: Model,
    pub profile: Option<WallProfile>,
    pub initial_dt: f64,
    pub wall_clock_s: f64,
    pub status: std::result::Result<(), Error>,
}

impl Simulation {
    pub fn completed(&self) -> bool {
        self.status.is_ok()
    }
}

/// Runs the FE model; `Err` only when the model cannot be built.
pub fn simulate(scenario: &Scenario, technique: Technique, dt: Option<TimeStep>) -> Result<Simulation> {
    let mut model = scenario.model_with(technique, dt)?;
    let initial_dt = model.dt;
    let mut probes = ProbeTable::new(&scenario.probe_header());
    let mut profile = None;
    let wants_profile = matches!(scenario.probes, Probes::Cylinder { .. });
    let start = Instant::now();
    let status = model.run(|m| {
        let row = scenario.probe_row(m)?;
        if wants_profile && profile.is_none() && row[1] >= PROFILE_PRESSURE_PA {
            profile = Some(WallProfile {
                pressure: row[1],
                rows: scenario.wall_profile(m, &PROFILE_ZETAS)?,
            });
        }
        probes.push(row);
        Ok(())
    });
    Ok(Simulation {
        technique,
        probes,
        model,
        profile,
        initial_dt,
        wall_clock_s: start.elapsed().as_secs_f64(),
        status,
    })
}

fn tube_radii(scenario: &Scenario) -> Option<(f64, f64)> {
    match scenario.config.geometry {
        GeometryConfig::Cylinder {
            inner_radius_m,
            wall_thickness_m,
            ..
        } => Some((inner_radius_m, inner_radius_m + wall_thickness_m)),
        _ => None,
    }
}

/// Thick-walled tube oracle for a cylinder scenario at pressure `p`.
pub fn tube_oracle(scenario: &Scenario, p: f64, samples: usize) -> Result<oracles::CylinderSolution> {
    let (ri, ro) = tube_radii(scenario).ok_or_else(|| Error::Domain {
        field: "geometry.kind".into(),
        message: "the tube oracle needs a cylinder geometry".into(),
    })?;
    oracles::cylinder_inflation(&scenario.config.material.law, ri, ro, p, samples)
}

fn peak_load(scenario: &Scenario) -> f64 {
    scenario
        .config
        .load
        .segments
        .iter()
        .map(|s| s.start.abs().max(s.end.abs()))
        .fold(0.0, f64::max)
}

/// Analytical reference curves of a scenario, independent of the FE run.
pub fn oracle_curves(scenario: &Scenario) -> Result<Vec<OracleCurve>> {
    const N: usize = 41;
    let peak = peak_load(scenario);
    let grid = |hi: f64| (0..N).map(move |i| hi * i as f64 / (N - 1) as f64);
    let mut out = Vec::new();
    match &scenario.probes {
        Probes::Cantilever {
            length,
            bending_stiffness,
            ..
        } => {
            let ms: Vec<f64> = grid(peak).collect();
            let mut ax = Vec::with_capacity(N);
            let mut tr = Vec::with_capacity(N);
            for &m in &ms {
                let (a, t) = oracles::elastica(m, *bending_stiffness, *length)?;
                ax.push(a);
                tr.push(t);
            }
            out.push(OracleCurve {
                name: "elastica".into(),
                abscissa: ("moment_N_m".into(), ms),
                ordinates: vec![("tip_axial_m".into(), ax), ("tip_transverse_m".into(), tr)],
            });
        }
        Probes::PlateWithHole { .. } => {}
        Probes::Square { thickness, .. } => {
            let ls: Vec<f64> = grid(0.25).map(|d| 1.0 + d).collect();
            let mut t11 = Vec::with_capacity(N);
            let mut t22 = Vec::with_capacity(N);
            for &l in &ls {
                let (a, b) = oracles::biaxial_point(&scenario.config.material.law, l, l, *thickness)?;
                t11.push(a);
                t22.push(b);
            }
            out.push(OracleCurve {
                name: "equal_stretch_tensions".into(),
                abscissa: ("stretch".into(), ls),
                ordinates: vec![("tension_11_N_per_m".into(), t11), ("tension_22_N_per_m".into(), t22)],
            });
        }
        Probes::Cylinder { .. } => {
            let ps: Vec<f64> = grid(peak).collect();
            let mut ri = Vec::with_capacity(N);
            let mut lz = Vec::with_capacity(N);
            for &p in &ps {
                let s = tube_oracle(scenario, p, 1)?;
                ri.push(s.inner_radius);
                lz.push(s.axial_stretch);
            }
            out.push(OracleCurve {
                name: "tube_inflation".into(),
                abscissa: ("pressure_Pa".into(), ps),
                ordinates: vec![("inner_radius_m".into(), ri), ("axial_stretch".into(), lz)],
            });
            let s = tube_oracle(scenario, PROFILE_PRESSURE_PA, 11)?;
            out.push(OracleCurve {
                name: "tube_wall_profile".into(),
                abscissa: ("radius_m".into(), s.profile.iter().map(|w| w.radius).collect()),
                ordinates: vec![
                    ("sigma_rr_Pa".into(), s.profile.iter().map(|w| w.sigma_rr).collect()),
                    ("sigma_tt_Pa".into(), s.profile.iter().map(|w| w.sigma_tt).collect()),
                    ("sigma_zz_Pa".into(), s.profile.iter().map(|w| w.sigma_zz).collect()),
                ],
            });
        }
    }
    for c in &out {
        c.validate()?;
    }
    Ok(out)
}

/// Command-line style run settings.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub technique: Option<Technique>,
    pub dt: Option<TimeStep>,
    pub threads: Option<usize>,
    pub oracle_only: bool,
}

/// Files written by [`run_to_directory`].
#[derive(Debug, Clone)]
pub struct RunReport {
    pub manifest: RunManifest,
    pub files: Vec<PathBuf>,
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Domain {
                field: "threads".into(),
                message: "must be >= 1".into(),
            });
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Domain {
        field: "threads".into(),
        message: e.to_string(),
    })
}

/// Runs a scenario and writes probes, oracle curves, snapshots and the
/// manifest into `opts.out_dir`. The manifest is written even when the
/// solver fails; the solver error is then returned after it.
pub fn run_to_directory(scenario: &Scenario, opts: &RunOptions) -> Result<RunReport> {
    let pool = thread_pool(opts.threads)?;
    pool.install(|| run_inner(scenario, opts, pool.current_num_threads()))
}

fn run_inner(scenario: &Scenario, opts: &RunOptions, threads: usize) -> Result<RunReport> {
    let cfg = &scenario.config;
    let dir = &opts.out_dir;
    let stem = cfg.name.clone();
    let path = |suffix: &str| dir.join(format!("{stem}_{suffix}"));
    let technique = opts.technique.unwrap_or(cfg.technique.selector);
    let dt = opts.dt.unwrap_or(cfg.solver.dt.0);
    let mut files = Vec::new();
    let mut manifest = RunManifest {
        experiment: cfg.experiment,
        name: cfg.name.clone(),
        config_hash: cfg.hash(),
        technique: technique.number(),
        dt_mode: match dt {
            TimeStep::Auto => "auto".into(),
            TimeStep::Fixed(v) => format!("{v:e}"),
        },
        initial_dt_s: 0.0,
        safety_factor: cfg.solver.safety_factor,
        end_time_s: cfg.solver.end_time_s,
        damping_per_s: cfg.solver.damping_per_s,
        threads,
        wall_clock_s: 0.0,
        steps: 0,
        final_time_s: 0.0,
        status: "ok".into(),
    };
    let start = Instant::now();
    let result = (|| -> Result<()> {
        for curve in oracle_curves(scenario)? {
            let p = path(&format!("oracle_{}.csv", curve.name));
            ProbeTable::from(&curve).write_csv(&p)?;
            files.push(p);
        }
        if opts.oracle_only {
            return Ok(());
        }
        let sim = simulate(scenario, technique, Some(dt))?;
        manifest.initial_dt_s = sim.initial_dt;
        manifest.steps = sim.model.step;
        manifest.final_time_s = sim.model.time;
        let p = path("probes.csv");
        sim.probes.write_csv(&p)?;
        files.push(p);
        let p = path("final.vtk");
        write_vtk(&p, &sim.model, &format!("{} t = {:e} s", cfg.name, sim.model.time))?;
        files.push(p);
        let p = path("pressure_band.csv");
        pressure_band_table(&sim.model).write_csv(&p)?;
        files.push(p);
        if let Some(profile) = &sim.profile {
            let mut t = ProbeTable::new(&["zeta", "radius_m", "sigma_rr_Pa", "sigma_tt_Pa", "sigma_zz_Pa"]);
            for r in &profile.rows {
                t.push(r.to_vec());
            }
            let p = path("wall_profile.csv");
            t.write_csv(&p)?;
            files.push(p);
        }
        sim.status
    })();
    manifest.wall_clock_s = start.elapsed().as_secs_f64();
    if let Err(e) = &result {
        manifest.status = format!("failed: {e}");
    }
    let p = path("manifest.toml");
    manifest.write(&p)?;
    files.push(p);
    result.map(|_| RunReport { manifest, files })
}

/// Default output directory: `$CBSHELL_OUT_DIR` or `./cbshell-out`.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os("CBSHELL_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new("cbshell-out").to_path_buf())
}
