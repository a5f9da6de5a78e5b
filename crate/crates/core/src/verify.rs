//! Acceptance checks: FE runs against oracles, constitutive property
//! sweeps and the fiber-frame study. Failures are report entries, not errors.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::SegmentConfig;
use crate::constitutive::{constant_tensor_for, technique2_update, GaussPointState, Technique};
use crate::dynamics::TimeStep;
use crate::error::{Error, Result};
use crate::geometry::{update_fiber_frame, update_fiber_frame_fixed_axis, Frame};
use crate::kinematics::green_lagrange;
use crate::materials::{closed_energy, prepare_strain, stress_response, MaterialModel};
use crate::oracles;
use crate::output::ProbeTable;
use crate::runner::{simulate, tube_oracle, Simulation};
use crate::scenarios::{build_experiment, Probes, Scenario};
use crate::tensor::{push_forward_stress, push_forward_tangent, rotation_matrix, Mat3, SymTensor, Tangent66, Vec3};

/// Default seed of the random property sweeps; `CBSHELL_SEED` overrides it.
pub const DEFAULT_SEED: u64 = 0x5eed_cb5e;

pub fn seed_from_env() -> u64 {
    std::env::var("CBSHELL_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// Tolerance of one named check. `relative` is the pass limit of the
/// measured quantity, `absolute` the floor of its denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSpec {
    pub name: &'static str,
    pub relative: f64,
    pub absolute: f64,
    pub samples: usize,
}

impl ToleranceSpec {
    pub const fn new(name: &'static str, relative: f64, absolute: f64, samples: usize) -> Self {
        ToleranceSpec {
            name,
            relative,
            absolute,
            samples,
        }
    }

    /// `|a − b| / max(|b|, absolute)`.
    pub fn relative_error(&self, a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(self.absolute)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    Below,
    AtLeast,
    Above,
}

impl Bound {
    fn holds(self, measured: f64, limit: f64) -> bool {
        match self {
            Bound::AtMost => measured <= limit,
            Bound::Below => measured < limit,
            Bound::AtLeast => measured >= limit,
            Bound::Above => measured > limit,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Bound::AtMost => "<=",
            Bound::Below => "<",
            Bound::AtLeast => ">=",
            Bound::Above => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: Bound,
    pub limit: f64,
    pub passed: bool,
    pub note: String,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, bound: Bound, limit: f64) -> Self {
        let passed = measured.is_finite() && bound.holds(measured, limit);
        Check {
            name: name.into(),
            measured,
            bound,
            limit,
            passed,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// A check that could not be evaluated.
    pub fn failed(name: impl Into<String>, note: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            measured: f64::NAN,
            bound: Bound::AtMost,
            limit: 0.0,
            passed: false,
            note: note.into(),
        }
    }

    pub fn describe(&self) -> String {
        let mut s = format!(
            "{} = {:.4e} ({} {:.4e}) {}",
            self.name,
            self.measured,
            self.bound.symbol(),
            self.limit,
            if self.passed { "ok" } else { "FAIL" }
        );
        if !self.note.is_empty() {
            let _ = write!(s, " [{}]", self.note);
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub tables: Vec<(String, ProbeTable)>,
    pub wall_clock_s: f64,
    pub tolerance: Option<ToleranceSpec>,
}

impl CriterionReport {
    fn new(id: u32, title: &'static str) -> Self {
        CriterionReport {
            id,
            title,
            tolerance: criterion_tolerance(id),
            checks: Vec::new(),
            tables: Vec::new(),
            wall_clock_s: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// One-line verdict naming the failed checks.
    pub fn summary_line(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let mut s = format!(
            "criterion {} {}: {} ({} checks, {:.1} s)",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            self.checks.len(),
            self.wall_clock_s
        );
        if !failed.is_empty() {
            let _ = write!(s, "; failed: {}", failed.join(", "));
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = self.summary_line();
        s.push('\n');
        for c in &self.checks {
            let _ = writeln!(s, "  {}", c.describe());
        }
        s
    }
}

/// Aggregated report.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub criteria: Vec<CriterionReport>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed())
    }

    pub fn to_text(&self) -> String {
        self.criteria.iter().map(|c| c.to_text()).collect()
    }

    /// `criterion,check,measured,bound,limit,passed` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("criterion,check,measured,bound,limit,passed\n");
        for c in &self.criteria {
            for k in &c.checks {
                let _ = writeln!(
                    s,
                    "{},{},{:e},{},{:e},{}",
                    c.id,
                    k.name.replace(',', ";"),
                    k.measured,
                    k.bound.symbol(),
                    k.limit,
                    k.passed
                );
            }
        }
        s
    }
}

pub const CRITERION_TITLES: [&str; 7] = [
    "fiber-frame robustness over a full rotation",
    "cantilever elastica",
    "plate with hole: technique agreement, peak strain, volume",
    "equibiaxial square: tensions, 2D vs 3D, anisotropy",
    "pressurized tube: oracle, wall profile, volume, loading rate, time step",
    "constitutive property sweep",
    "technique distinctness under large strain",
];

/// Headline tolerance of each criterion.
pub fn criterion_tolerance(id: u32) -> Option<ToleranceSpec> {
    Some(match id {
        1 => ToleranceSpec::new("min dot of tracked frame axis", 0.9, 0.0, 12),
        2 => ToleranceSpec::new("tip displacement / L", 0.05, 0.0, 8),
        3 => ToleranceSpec::new("pairwise probe displacement", 0.05, 1e-12, 3),
        4 => ToleranceSpec::new("membrane tension vs oracle", 0.02, 1e-12, 0),
        5 => ToleranceSpec::new("r_i and lambda_z vs tube oracle", 0.03, 0.0, 0),
        6 => ToleranceSpec::new("stress vs FD(W)", 1e-5, 1e-8, 100),
        7 => ToleranceSpec::new("technique divergence", 0.10, 1e-300, 2000),
        _ => return None,
    })
}

/// Runs one acceptance criterion (1 to 7).
pub fn run_acceptance(id: u32) -> CriterionReport {
    let start = Instant::now();
    let mut r = match id {
        1 => fiber_frame_robustness(),
        2 => with_scenario(2, 1, cantilever),
        3 => with_scenario(3, 2, plate_with_hole),
        4 => with_scenario(4, 3, equibiaxial_square),
        5 => tube_criterion(),
        6 => constitutive_suite(seed_from_env(), 100, PushForward::reference()),
        7 => technique_distinctness(),
        _ => {
            let mut r = CriterionReport::new(id, "unknown criterion");
            r.checks.push(Check::failed("criterion id", format!("no criterion {id}")));
            r
        }
    };
    r.wall_clock_s = start.elapsed().as_secs_f64();
    r
}

pub fn run_all() -> Report {
    Report {
        criteria: (1..=7).map(run_acceptance).collect(),
    }
}

fn with_scenario(id: u32, experiment: u32, f: fn(&Scenario, &mut CriterionReport)) -> CriterionReport {
    let mut r = CriterionReport::new(id, CRITERION_TITLES[id as usize - 1]);
    match build_experiment(experiment) {
        Ok(s) => f(&s, &mut r),
        Err(e) => r.checks.push(Check::failed("scenario", e.to_string())),
    }
    r
}

/// FE-vs-oracle comparison for a scenario loaded from a config file,
/// dispatched on its experiment number.
pub fn verify_scenario(scenario: &Scenario) -> CriterionReport {
    let start = Instant::now();
    let exp = scenario.config.experiment;
    let id = match exp {
        1 => 2,
        2 => 3,
        3 => 4,
        _ => 5,
    };
    let mut r = CriterionReport::new(id, CRITERION_TITLES[id as usize - 1]);
    match exp {
        1 => cantilever(scenario, &mut r),
        2 => plate_with_hole(scenario, &mut r),
        3 => equibiaxial_square(scenario, &mut r),
        4 => tube_inflation_checks(scenario, &mut r),
        _ => tube_rate_checks(scenario, &mut r),
    }
    r.wall_clock_s = start.elapsed().as_secs_f64();
    r
}

// ---------------------------------------------------------------- frames

/// Frame updates per sampled increment: the update runs at solver-step
/// granularity while the history is sampled every 30°.
pub const FRAME_SUBSTEPS: usize = 30;

/// Fiber-frame update along rotations about in-plane axes, sampled every 30°.
pub fn fiber_frame_robustness() -> CriterionReport {
    let mut r = CriterionReport::new(1, CRITERION_TITLES[0]);
    let step = 30f64.to_radians();
    let n = 12;
    let axes = [
        Vec3::x(),
        Vec3::y(),
        Vec3::new(1.0, 1.0, 0.0).normalize(),
        Vec3::new(0.3, -0.8, 0.0).normalize(),
    ];
    let mut worst: f64 = 1.0;
    let mut table = ProbeTable::new(&["axis", "angle_deg", "dot_e1", "dot_e2", "dot_e1_fixed_axis"]);
    for (k, axis) in axes.iter().enumerate() {
        let mut frame = Frame::global();
        for i in 1..=n * FRAME_SUBSTEPS {
            let angle = step * i as f64 / FRAME_SUBSTEPS as f64;
            let rot = rotation_matrix(&(axis * angle));
            let d = rot * Vec3::z();
            frame = match update_fiber_frame(&d, &frame) {
                Ok(f) => f,
                Err(e) => {
                    r.checks.push(Check::failed(format!("update about axis {k}"), e.to_string()));
                    return r;
                }
            };
            if i % FRAME_SUBSTEPS != 0 {
                continue;
            }
            let (d1, d2) = (frame.e1.dot(&(rot * Vec3::x())), frame.e2.dot(&(rot * Vec3::y())));
            worst = worst.min(d1);
            let fixed = update_fiber_frame_fixed_axis(&d, &Vec3::x())
                .map(|f| f.e1.dot(&(rot * Vec3::x())))
                .unwrap_or(f64::NAN);
            table.push(vec![k as f64, angle.to_degrees(), d1, d2, fixed]);
        }
    }
    r.checks.push(
        Check::new("min e1 dot (R e1 initial)", worst, Bound::Above, 0.9)
            .with_note(format!("{FRAME_SUBSTEPS} updates per 30° sample")),
    );
    // negative control: about y the director sweeps the x-z plane and the
    // cross product with the fixed x axis changes sign past 90°
    let mut first_flip = f64::NAN;
    let mut min_dot: f64 = 1.0;
    for i in 1..=n {
        let angle = step * i as f64;
        let rot = rotation_matrix(&(Vec3::y() * angle));
        let d = rot * Vec3::z();
        if let Ok(f) = update_fiber_frame_fixed_axis(&d, &Vec3::x()) {
            let dot = f.e1.dot(&(rot * Vec3::x()));
            min_dot = min_dot.min(dot);
            if dot < 0.0 && first_flip.is_nan() {
                first_flip = angle.to_degrees();
            }
        }
    }
    r.checks.push(
        Check::new("fixed-axis variant min e1 dot", min_dot, Bound::Below, 0.0)
            .with_note(format!("first flip at {first_flip}°")),
    );
    r.checks.push(Check::new("fixed-axis first flip angle (deg)", first_flip, Bound::Above, 90.0));
    r.tables.push(("fiber_frames".into(), table));
    r
}

// ------------------------------------------------------------- cantilever

fn cantilever(scenario: &Scenario, r: &mut CriterionReport) {
    let (length, ei, tip) = match scenario.probes {
        Probes::Cantilever {
            length,
            bending_stiffness,
            tip_node,
        } => (length, bending_stiffness, tip_node),
        _ => {
            r.checks.push(Check::failed("scenario", "not a cantilever"));
            return;
        }
    };
    let mut s = scenario.clone();
    s.config.solver.output_stride = s.config.solver.output_stride.min(50);
    let sim = match simulate(&s, s.config.technique.selector, None) {
        Ok(sim) => sim,
        Err(e) => {
            r.checks.push(Check::failed("model", e.to_string()));
            return;
        }
    };
    if let Err(e) = &sim.status {
        r.checks.push(Check::failed("run completed", e.to_string()));
    }
    let rows = &sim.probes.rows;
    let tol = criterion_tolerance(2).expect("known criterion");
    let mut table = ProbeTable::new(&[
        "moment_N_m",
        "fe_axial_m",
        "fe_transverse_m",
        "oracle_axial_m",
        "oracle_transverse_m",
        "error_over_L",
    ]);
    for k in 1..=tol.samples {
        let m = k as f64 * 0.25 * PI * ei / length;
        let Some(i) = rows.iter().position(|row| row[1] >= m * (1.0 - 1e-12)) else {
            r.checks.push(Check::failed(format!("M_{k}"), "load level not reached"));
            continue;
        };
        let (ux, uz) = if i == 0 {
            (rows[0][2], rows[0][3])
        } else {
            let (a, b) = (&rows[i - 1], &rows[i]);
            let w = if b[1] > a[1] { (m - a[1]) / (b[1] - a[1]) } else { 1.0 };
            (a[2] + w * (b[2] - a[2]), a[3] + w * (b[3] - a[3]))
        };
        let (ox, oz) = match oracles::elastica(m, ei, length) {
            Ok(v) => v,
            Err(e) => {
                r.checks.push(Check::failed(format!("M_{k}"), e.to_string()));
                continue;
            }
        };
        let err = ((ux - ox).powi(2) + (uz - oz).powi(2)).sqrt() / length;
        table.push(vec![m, ux, uz, ox, oz, err]);
        r.checks.push(
            Check::new(format!("tip error / L at {}°", 45 * k), err, Bound::AtMost, tol.relative)
                .with_note(format!("FE ({ux:.3}, {uz:.3}) m, elastica ({ox:.3}, {oz:.3}) m")),
        );
    }
    if sim.completed() {
        let n = &sim.model.mesh.nodes[tip];
        let root = Vec3::new(0.0, n.ref_position.y, 0.0);
        let gap = (n.position - root).norm() / length;
        r.checks.push(Check::new("full-circle tip-to-root gap / L", gap, Bound::AtMost, tol.relative));
    }
    r.tables.push(("elastica".into(), table));
}

// ------------------------------------------------------- plate with hole

fn displacement_at(table: &ProbeTable, row: usize, probe: &str) -> Vec3 {
    let col = |c: &str| table.column(&format!("{probe}_{c}_m")).map(|v| v[row]).unwrap_or(f64::NAN);
    Vec3::new(col("ux"), col("uy"), 0.0)
}

fn plate_with_hole(scenario: &Scenario, r: &mut CriterionReport) {
    let sims: Vec<Result<Simulation>> = {
        let (a, (b, c)) = rayon::join(
            || simulate(scenario, Technique::Technique1, None),
            || {
                rayon::join(
                    || simulate(scenario, Technique::Technique2, None),
                    || simulate(scenario, Technique::Technique3, None),
                )
            },
        );
        vec![a, b, c]
    };
    let peak = scenario.config.load.segments.iter().map(|s| s.end).fold(0.0, f64::max);
    let mut finals: Vec<Option<(Simulation, usize)>> = Vec::new();
    for (k, s) in sims.into_iter().enumerate() {
        let t = k + 1;
        match s {
            Err(e) => {
                r.checks.push(Check::failed(format!("technique {t} model"), e.to_string()));
                finals.push(None);
            }
            Ok(sim) => {
                let reached = sim.completed() && sim.probes.rows.last().is_some_and(|row| row[1] >= peak * (1.0 - 1e-9));
                if !reached {
                    let reason = match &sim.status {
                        Err(e) => e.to_string(),
                        Ok(()) => "peak load not reached".into(),
                    };
                    let load = sim.probes.rows.last().map_or(0.0, |row| row[1]);
                    r.checks.push(Check::failed(
                        format!("technique {t} reaches peak load"),
                        format!("stopped at {load:.4e} Pa of {peak:.4e} Pa: {reason}"),
                    ));
                    finals.push(None);
                } else {
                    let last = sim.probes.rows.len() - 1;
                    finals.push(Some((sim, last)));
                }
            }
        }
    }
    let tol = criterion_tolerance(3).expect("known criterion");
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let name = format!("T{} vs T{} max relative probe difference", i + 1, j + 1);
        match (&finals[i], &finals[j]) {
            (Some((a, ra)), Some((b, rb))) => {
                let mut worst: f64 = 0.0;
                let mut note = String::new();
                for p in ["a", "b", "c"] {
                    let (ua, ub) = (displacement_at(&a.probes, *ra, p), displacement_at(&b.probes, *rb, p));
                    let d = (ua - ub).norm() / ua.norm().max(ub.norm()).max(tol.absolute);
                    let _ = write!(note, "{}: {:.1}% ", p.to_uppercase(), 100.0 * d);
                    worst = worst.max(d);
                }
                r.checks.push(Check::new(name, worst, Bound::AtMost, tol.relative).with_note(note.trim_end()));
            }
            _ => r.checks.push(Check::failed(name, "a technique did not reach the peak load")),
        }
    }
    let configured = scenario.config.technique.selector.number() as usize - 1;
    if let Some((sim, row)) = &finals[configured] {
        let gl = sim.probes.column("max_green_lagrange").map(|v| v[*row]).unwrap_or(f64::NAN);
        r.checks.push(Check::new("max Green-Lagrange strain", gl, Bound::AtLeast, 4.0));
        let dv = sim.model.volume_change().abs() * 100.0;
        r.checks.push(Check::new("|volume change| (%)", dv, Bound::AtMost, 1.0));
    } else {
        r.checks.push(Check::failed("max Green-Lagrange strain", "configured technique did not finish"));
        r.checks.push(Check::failed("|volume change| (%)", "configured technique did not finish"));
    }
    for (k, f) in finals.iter().enumerate() {
        if let Some((sim, _)) = f {
            r.tables.push((format!("technique{}_probes", k + 1), sim.probes.clone()));
        }
    }
}

// ------------------------------------------------------ equibiaxial square

/// Linear interpolation of `ys(x)` on a grid increasing in `xs`.
fn interp(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let i = xs.iter().position(|&v| v >= x)?;
    if i == 0 {
        return (xs[0] == x).then_some(ys[0]);
    }
    let w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    Some(ys[i - 1] + w * (ys[i] - ys[i - 1]))
}

fn equibiaxial_square(scenario: &Scenario, r: &mut CriterionReport) {
    let law = scenario.config.material.law;
    let (c1, c2, c3, c4) = match law {
        MaterialModel::Guccione3D { c1, c2, c3, c4 } | MaterialModel::Guccione2D { c1, c2, c3, c4 } => (c1, c2, c3, c4),
        _ => {
            r.checks.push(Check::failed("material", "equibiaxial criterion needs a Guccione model"));
            return;
        }
    };
    let mut s3 = scenario.clone();
    s3.config.material.law = MaterialModel::Guccione3D { c1, c2, c3, c4 };
    let mut s2 = scenario.clone();
    s2.config.material.law = MaterialModel::Guccione2D { c1, c2, c3, c4 };
    let (a, b) = rayon::join(
        || simulate(&s3, s3.config.technique.selector, None),
        || simulate(&s2, s2.config.technique.selector, None),
    );
    let (sim3, sim2) = match (a, b) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => {
            r.checks.push(Check::failed("model", e.to_string()));
            return;
        }
    };
    for (name, sim) in [("3D", &sim3), ("2D", &sim2)] {
        if let Err(e) = &sim.status {
            r.checks.push(Check::failed(format!("{name} run completed"), e.to_string()));
        }
    }
    let peak = scenario.config.load.segments.iter().map(|s| s.end).fold(0.0, f64::max);
    let tol = criterion_tolerance(4).expect("known criterion");
    for (name, sim) in [("3D", &sim3), ("2D", &sim2)] {
        let mut worst: f64 = 0.0;
        let mut n = 0;
        for row in sim.probes.rows.iter().filter(|row| row[1] >= 0.05 * peak) {
            worst = worst.max(tol.relative_error(row[6], row[8])).max(tol.relative_error(row[7], row[9]));
            n += 1;
        }
        r.checks.push(
            Check::new(format!("{name} Guccione tension error vs oracle"), worst, Bound::AtMost, tol.relative)
                .with_note(format!("{n} samples")),
        );
    }
    // strains of both models at equal load
    let col = |sim: &Simulation, c: &str| sim.probes.column(c).unwrap_or_default();
    let (load3, load2) = (col(&sim3, "traction_Pa"), col(&sim2, "traction_Pa"));
    let mut worst: f64 = 0.0;
    for (c, label) in [("green_11", "E11"), ("green_22", "E22")] {
        let (e3, e2) = (col(&sim3, c), col(&sim2, c));
        for (k, &p) in load3.iter().enumerate() {
            if p < 0.05 * peak {
                continue;
            }
            if let Some(v) = interp(&load2, &e2, p) {
                worst = worst.max((v - e3[k]).abs() / e3[k].abs().max(1e-12));
            }
        }
        let _ = label;
    }
    r.checks.push(Check::new("2D vs 3D Guccione strain difference at equal load", worst, Bound::AtMost, 0.05));
    // anisotropy ordering on the T(E) curves of the 3D model
    let (e11, e22) = (col(&sim3, "green_11"), col(&sim3, "green_22"));
    let (t11, t22) = (col(&sim3, "tension_11_N_per_m"), col(&sim3, "tension_22_N_per_m"));
    let hi = e11.iter().cloned().fold(0.0, f64::max).min(e22.iter().cloned().fold(0.0, f64::max));
    let mut margin = f64::INFINITY;
    for k in 1..=20 {
        let e = hi * k as f64 / 20.0;
        if let (Some(a), Some(b)) = (interp(&e11, &t11, e), interp(&e22, &t22, e)) {
            margin = margin.min((a - b) / a.abs().max(1e-12));
        }
    }
    let ordering = if c2 > c3 { margin } else { -margin };
    r.checks.push(
        Check::new("relative T11 - T22 at equal strain", ordering, Bound::Above, 0.0)
            .with_note(format!("C2 = {c2}, C3 = {c3}; strains up to {hi:.3}")),
    );
    r.tables.push(("guccione3d_probes".into(), sim3.probes.clone()));
    r.tables.push(("guccione2d_probes".into(), sim2.probes.clone()));
}

// ------------------------------------------------------------------ tube

/// Largest relative error of `(r_i, λ_z)` against the tube oracle over the
/// samples with pressure above 5% of `peak`.
fn tube_oracle_error(scenario: &Scenario, probes: &ProbeTable, peak: f64) -> Result<(f64, usize)> {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for row in probes.rows.iter().filter(|row| row[1] >= 0.05 * peak) {
        let o = tube_oracle(scenario, row[1], 1)?;
        let e = ((row[2] - o.inner_radius) / o.inner_radius)
            .abs()
            .max(((row[3] - o.axial_stretch) / o.axial_stretch).abs());
        worst = worst.max(e);
        n += 1;
    }
    Ok((worst, n))
}

fn peak_of(segments: &[SegmentConfig]) -> f64 {
    segments.iter().map(|s| s.end.max(s.start)).fold(0.0, f64::max)
}

fn push_oracle_gate(r: &mut CriterionReport, label: &str, scenario: &Scenario, sim: &Simulation) {
    if let Err(e) = &sim.status {
        r.checks.push(Check::failed(format!("{label} run completed"), e.to_string()));
    }
    let peak = peak_of(&scenario.config.load.segments);
    match tube_oracle_error(scenario, &sim.probes, peak) {
        Ok((e, n)) => r.checks.push(
            Check::new(format!("{label} r_i and lambda_z error vs tube oracle"), e, Bound::AtMost, 0.03)
                .with_note(format!("{n} samples")),
        ),
        Err(e) => r.checks.push(Check::failed(format!("{label} tube oracle"), e.to_string())),
    }
    let dv = sim.model.volume_change().abs() * 100.0;
    r.checks.push(Check::new(format!("{label} |volume change| (%)"), dv, Bound::AtMost, 1.0));
}

fn tube_inflation_checks(scenario: &Scenario, r: &mut CriterionReport) {
    let sim = match simulate(scenario, scenario.config.technique.selector, None) {
        Ok(s) => s,
        Err(e) => {
            r.checks.push(Check::failed("model", e.to_string()));
            return;
        }
    };
    r.checks.push(
        Check::new("initial auto dt (s)", sim.initial_dt, Bound::AtMost, 1e-4)
            .with_note("band [1e-6, 1e-4] s"),
    );
    r.checks.push(Check::new("initial auto dt lower bound (s)", sim.initial_dt, Bound::AtLeast, 1e-6));
    push_oracle_gate(r, "ramp", scenario, &sim);
    match &sim.profile {
        None => r.checks.push(Check::failed("wall profile", "profile pressure not reached")),
        Some(p) => {
            let in_plane = p.rows.iter().map(|q| q[3].abs().max(q[4].abs())).fold(0.0, f64::max);
            let normal = p.rows.iter().map(|q| q[2].abs()).fold(0.0, f64::max);
            r.checks.push(Check::new(
                "FE max |sigma_rr| / max in-plane stress",
                normal / in_plane.max(1e-300),
                Bound::Below,
                0.02,
            ));
            match tube_oracle(scenario, p.pressure, 11) {
                Ok(o) => {
                    let (inner, outer) = (o.profile[0].sigma_rr, o.profile[o.profile.len() - 1].sigma_rr);
                    r.checks.push(Check::new(
                        "oracle sigma_rr at inner wall / (-P)",
                        inner / -p.pressure,
                        Bound::AtLeast,
                        1.0 - 1e-6,
                    ));
                    r.checks.push(Check::new("oracle |sigma_rr| at outer wall / P", outer.abs() / p.pressure, Bound::AtMost, 1e-6));
                    let fe_inner_max = |k: usize| p.rows.iter().all(|q| q[k] <= p.rows[0][k]);
                    let or_inner_max = |f: fn(&oracles::WallSample) -> f64| {
                        o.profile.iter().all(|w| f(w) <= f(&o.profile[0]))
                    };
                    let agree = fe_inner_max(3) && fe_inner_max(4) && or_inner_max(|w| w.sigma_tt) && or_inner_max(|w| w.sigma_zz);
                    r.checks.push(
                        Check::new("hoop and axial stress maximal at inner wall (FE and oracle)", agree as u8 as f64, Bound::AtLeast, 1.0)
                            .with_note(format!(
                                "FE hoop {:.0}..{:.0} Pa, oracle hoop {:.0}..{:.0} Pa",
                                p.rows[0][3],
                                p.rows[p.rows.len() - 1][3],
                                o.profile[0].sigma_tt,
                                o.profile[o.profile.len() - 1].sigma_tt
                            )),
                    );
                    let mut t = ProbeTable::new(&["zeta", "radius_m", "sigma_rr_Pa", "sigma_tt_Pa", "sigma_zz_Pa"]);
                    for q in &p.rows {
                        t.push(q.to_vec());
                    }
                    r.tables.push(("fe_wall_profile".into(), t));
                }
                Err(e) => r.checks.push(Check::failed("oracle wall profile", e.to_string())),
            }
        }
    }
    r.tables.push(("experiment4_probes".into(), sim.probes.clone()));
}

/// Peak-to-peak of the inner radius for `t ≥ from`.
pub fn peak_to_peak(probes: &ProbeTable, from: f64) -> f64 {
    let (lo, hi) = probes
        .rows
        .iter()
        .filter(|row| row[0] >= from)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), row| (lo.min(row[2]), hi.max(row[2])));
    hi - lo
}

fn tube_rate_checks(scenario: &Scenario, r: &mut CriterionReport) {
    let Some(fast_segments) = scenario.config.load.alternate_segments.clone() else {
        r.checks.push(Check::failed("alternate load history", "load.alternate_segments is missing"));
        return;
    };
    let fast = scenario.with_segments(&fast_segments);
    let technique = scenario.config.technique.selector;
    let (a, b) = rayon::join(|| simulate(scenario, technique, None), || simulate(&fast, technique, None));
    let (slow, quick) = match (a, b) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => {
            r.checks.push(Check::failed("model", e.to_string()));
            return;
        }
    };
    push_oracle_gate(r, "slow ramp", scenario, &slow);
    if let Err(e) = &quick.status {
        r.checks.push(Check::failed("fast ramp run completed", e.to_string()));
    }
    let dv = quick.model.volume_change().abs() * 100.0;
    r.checks.push(Check::new("fast ramp |volume change| (%)", dv, Bound::AtMost, 1.0));
    let hold = scenario.config.load.segments[0].duration_s.max(fast_segments[0].duration_s);
    let (p_slow, p_fast) = (peak_to_peak(&slow.probes, hold), peak_to_peak(&quick.probes, hold));
    r.checks.push(
        Check::new("slow / fast peak-to-peak r_i during hold", p_slow / p_fast.max(1e-300), Bound::Below, 1.0)
            .with_note(format!("slow {p_slow:.3e} m, fast {p_fast:.3e} m, t >= {hold} s")),
    );
    r.tables.push(("experiment5_slow_probes".into(), slow.probes.clone()));
    r.tables.push(("experiment5_fast_probes".into(), quick.probes.clone()));
}

fn tube_criterion() -> CriterionReport {
    let mut r = CriterionReport::new(5, CRITERION_TITLES[4]);
    let (a, b) = rayon::join(|| build_experiment(4), || build_experiment(5));
    match (a, b) {
        (Ok(s4), Ok(s5)) => {
            let mut r5 = CriterionReport::new(5, "");
            rayon::join(|| tube_inflation_checks(&s4, &mut r), || tube_rate_checks(&s5, &mut r5));
            r.checks.extend(r5.checks);
            r.tables.extend(r5.tables);
        }
        (Err(e), _) | (_, Err(e)) => r.checks.push(Check::failed("scenario", e.to_string())),
    }
    r
}

// ------------------------------------------------------- constitutive suite

type StressPush = fn(&Mat3, f64, &SymTensor) -> Result<SymTensor>;
type TangentPush = fn(&Mat3, f64, &Tangent66) -> Result<Tangent66>;

/// Push-forward implementations under test; swapping in a corrupted one
/// must make the suite fail.
#[derive(Clone, Copy)]
pub struct PushForward {
    pub stress: StressPush,
    pub tangent: TangentPush,
}

impl PushForward {
    pub fn reference() -> Self {
        PushForward {
            stress: push_forward_stress,
            tangent: push_forward_tangent,
        }
    }
}

/// `ratio · F_si S_ij F_rj` by explicit summation.
pub fn naive_push_stress(f: &Mat3, ratio: f64, s: &SymTensor) -> SymTensor {
    let mut out = Mat3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            let mut acc = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    acc += f[(a, i)] * s.get(i, j) * f[(b, j)];
                }
            }
            out[(a, b)] = ratio * acc;
        }
    }
    SymTensor::from_mat3(&out)
}

/// `ratio · F_mi F_nj C_ijrs F_pr F_qs` by explicit summation.
pub fn naive_push_tangent(f: &Mat3, ratio: f64, c: &Tangent66) -> Tangent66 {
    let full = c.to_full();
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for m in 0..3 {
        for n in 0..3 {
            for p in 0..3 {
                for q in 0..3 {
                    let mut acc = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            for k in 0..3 {
                                for l in 0..3 {
                                    acc += f[(m, i)] * f[(n, j)] * full[i][j][k][l] * f[(p, k)] * f[(q, l)];
                                }
                            }
                        }
                    }
                    out[m][n][p][q] = ratio * acc;
                }
            }
        }
    }
    Tangent66::from_full(&out)
}

pub fn suite_models() -> Vec<MaterialModel> {
    vec![
        MaterialModel::LinearElastic {
            youngs_modulus: 1.2e7,
            poisson_ratio: 0.3,
        },
        MaterialModel::MooneyRivlin { c1: 0.1724e6, c2: 0.0483e6 },
        MaterialModel::Guccione2D {
            c1: 2000.0,
            c2: 30.0,
            c3: 10.0,
            c4: 5.0,
        },
        MaterialModel::Guccione3D {
            c1: 10_000.0,
            c2: 30.0,
            c3: 10.0,
            c4: 15.0,
        },
    ]
}

/// Random in-plane-dominated lamina strain with moderate shears.
pub fn random_strain(rng: &mut ChaCha8Rng) -> SymTensor {
    SymTensor::new(
        rng.gen_range(-0.15..0.35),
        rng.gen_range(-0.15..0.35),
        0.0,
        rng.gen_range(-0.1..0.1),
        rng.gen_range(-0.05..0.05),
        rng.gen_range(-0.05..0.05),
    )
}

fn max_abs6(a: &[f64; 6]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// FD and closure checks on `samples` random strains per model, plus the
/// push-forward comparison against explicit summation.
pub fn constitutive_suite(seed: u64, samples: usize, push: PushForward) -> CriterionReport {
    let mut r = CriterionReport::new(6, CRITERION_TITLES[5]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reduced = [0usize, 1, 3, 4, 5];
    for model in suite_models() {
        let name = model.name();
        let (mut s_err, mut d_err, mut s33, mut row33, mut det_err): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut n = 0;
        let mut attempts = 0;
        let mut failure = None;
        while n < samples && attempts < 20 * samples {
            attempts += 1;
            let e = random_strain(&mut rng);
            let Ok(prepared) = prepare_strain(&model, &e) else { continue };
            let Ok((s, Some(d))) = stress_response(&model, &prepared, true) else { continue };
            let x = e.to_engineering();
            let energy = |x: &[f64; 6]| closed_energy(&model, &SymTensor::from_engineering(x));
            let s_vec = s.to_engineering();
            // PK2 tensor components pair with engineering strains
            let s_tensor = [s.0[0], s.0[1], s.0[2], s.0[3], s.0[4], s.0[5]];
            let mut s_fd = [0.0; 6];
            let mut d_fd = [[0.0; 6]; 6];
            let mut ok = true;
            for &i in &reduced {
                let h = 1e-6;
                let (mut xp, mut xm) = (x, x);
                xp[i] += h;
                xm[i] -= h;
                match (energy(&xp), energy(&xm)) {
                    (Ok(a), Ok(b)) => s_fd[i] = (a - b) / (2.0 * h),
                    _ => ok = false,
                }
                let resp = |x: &[f64; 6]| -> Result<SymTensor> {
                    let p = prepare_strain(&model, &SymTensor::from_engineering(x))?;
                    Ok(stress_response(&model, &p, false)?.0)
                };
                match (resp(&xp), resp(&xm)) {
                    (Ok(a), Ok(b)) => {
                        for &j in &reduced {
                            d_fd[j][i] = (a.0[j] - b.0[j]) / (2.0 * h);
                        }
                    }
                    _ => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let _ = s_vec;
            let s_scale = max_abs6(&s_tensor).max(1e-8 * model_modulus(&model));
            let mut d_scale: f64 = 0.0;
            for &i in &reduced {
                s_err = s_err.max((s_tensor[i] - s_fd[i]).abs() / s_scale);
                for &j in &reduced {
                    d_scale = d_scale.max(d.0[(i, j)].abs());
                }
            }
            for &i in &reduced {
                for &j in &reduced {
                    d_err = d_err.max((d.0[(i, j)] - d_fd[i][j]).abs() / d_scale);
                }
            }
            s33 = s33.max(s.0[2].abs() / s_scale);
            for k in 0..6 {
                row33 = row33.max(d.0[(2, k)].abs().max(d.0[(k, 2)].abs()) / d_scale);
            }
            if matches!(model, MaterialModel::MooneyRivlin { .. } | MaterialModel::Guccione3D { .. }) {
                let c = prepared.strain.to_mat3() * 2.0 + Mat3::identity();
                det_err = det_err.max((c.determinant() - 1.0).abs());
            }
            n += 1;
            if n == samples {
                break;
            }
        }
        if n < samples {
            failure = Some(format!("only {n} admissible samples"));
        }
        let note = format!("{n} samples");
        if let Some(f) = failure {
            r.checks.push(Check::failed(format!("{name} sample count"), f));
        }
        r.checks.push(Check::new(format!("{name} S vs FD(W)"), s_err, Bound::AtMost, 1e-5).with_note(note.clone()));
        r.checks.push(Check::new(format!("{name} tangent vs FD(S)"), d_err, Bound::AtMost, 1e-4).with_note(note.clone()));
        r.checks.push(Check::new(format!("{name} |S33| / |S|"), s33, Bound::AtMost, 1e-12));
        r.checks.push(Check::new(format!("{name} 33 row and column of tangent"), row33, Bound::AtMost, 1e-12));
        if matches!(model, MaterialModel::MooneyRivlin { .. } | MaterialModel::Guccione3D { .. }) {
            r.checks.push(Check::new(format!("{name} |det(2E + I) - 1|"), det_err, Bound::AtMost, 1e-10));
        }
    }
    // push-forwards on random deformation gradients and tensors
    let (mut ps, mut pt): (f64, f64) = (0.0, 0.0);
    for _ in 0..samples {
        let mut f = Mat3::identity();
        for v in f.iter_mut() {
            *v += rng.gen_range(-0.4..0.4);
        }
        if f.determinant() < 0.2 {
            continue;
        }
        let ratio = rng.gen_range(0.5..1.5);
        let s = SymTensor::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let mut c = nalgebra::Matrix6::zeros();
        for i in 0..6 {
            for j in i..6 {
                let v = rng.gen_range(-1.0..1.0);
                c[(i, j)] = v;
                c[(j, i)] = v;
            }
        }
        let c = Tangent66(c);
        match ((push.stress)(&f, ratio, &s), (push.tangent)(&f, ratio, &c)) {
            (Ok(a), Ok(b)) => {
                let (na, nb) = (naive_push_stress(&f, ratio, &s), naive_push_tangent(&f, ratio, &c));
                ps = ps.max(a.sub(&na).max_abs_component() / na.max_abs_component().max(1e-300));
                pt = pt.max((b.0 - nb.0).amax() / nb.0.amax().max(1e-300));
            }
            _ => {
                ps = f64::INFINITY;
                pt = f64::INFINITY;
            }
        }
    }
    r.checks.push(Check::new("push_forward_stress vs explicit summation", ps, Bound::AtMost, 1e-10));
    r.checks.push(Check::new("push_forward_tangent vs explicit summation", pt, Bound::AtMost, 1e-10));
    r.checks[0].note = format!("seed {seed}; {}", r.checks[0].note);
    r
}

fn model_modulus(model: &MaterialModel) -> f64 {
    match *model {
        MaterialModel::LinearElastic { youngs_modulus, .. } => youngs_modulus,
        MaterialModel::MooneyRivlin { c1, c2 } => c1 + c2,
        MaterialModel::Guccione2D { c1, .. } | MaterialModel::Guccione3D { c1, .. } => c1,
    }
}

// ------------------------------------------------- technique distinctness

/// Uniaxial incompressible stretch path of the plate-with-hole material up
/// to the peak strain of that experiment: Technique 1's total push-forward
/// applied to the constant tensor against Technique 2's accumulation.
pub fn technique_distinctness() -> CriterionReport {
    let mut r = CriterionReport::new(7, CRITERION_TITLES[6]);
    let model = match build_experiment(2) {
        Ok(s) => s.config.material.law,
        Err(e) => {
            r.checks.push(Check::failed("scenario", e.to_string()));
            return r;
        }
    };
    let c = match constant_tensor_for(&model, 0.499) {
        Ok(c) => c,
        Err(e) => {
            r.checks.push(Check::failed("constant tensor", e.to_string()));
            return r;
        }
    };
    let target_strain: f64 = 4.0;
    let lambda_max = (1.0 + 2.0 * target_strain).sqrt();
    let steps = 2000;
    let mut state = GaussPointState::new(Mat3::identity(), Frame::global());
    let mut prev = 1.0f64;
    let mut table = ProbeTable::new(&["stretch", "green_11", "sigma11_total_constant_Pa", "sigma11_incremental_Pa"]);
    let mut divergence = 0.0;
    for k in 1..=steps {
        let l = 1.0 + (lambda_max - 1.0) * k as f64 / steps as f64;
        let f_of = |l: f64| Mat3::from_diagonal(&Vec3::new(l, 1.0 / l.sqrt(), 1.0 / l.sqrt()));
        let f_step = f_of(l / prev);
        let de = green_lagrange(&f_step);
        let inc = match technique2_update(&mut state, &de, &c, &f_step) {
            Ok(s) => s.0[0],
            Err(e) => {
                r.checks.push(Check::failed("technique 2 path", e.to_string()));
                return r;
            }
        };
        prev = l;
        let f = f_of(l);
        let e = green_lagrange(&f);
        let total = match push_forward_stress(&f, 1.0, &c.contract(&e)) {
            Ok(s) => s.0[0],
            Err(e) => {
                r.checks.push(Check::failed("total push-forward", e.to_string()));
                return r;
            }
        };
        if k % (steps / 20) == 0 {
            table.push(vec![l, e.0[0], total, inc]);
        }
        divergence = (total - inc).abs() / inc.abs().max(1e-300);
    }
    r.checks.push(
        Check::new("relative divergence of sigma11 at E11 = 4", divergence, Bound::Above, 0.10)
            .with_note("constant tensor pushed forward from the initial state vs accumulated increments"),
    );
    r.tables.push(("distinctness".into(), table));
    r
}

/// Default explicit step of experiment 4, for diagnostics.
pub fn experiment4_initial_dt() -> Result<f64> {
    let s = build_experiment(4)?;
    Ok(s.model_with(s.config.technique.selector, Some(TimeStep::Auto))?.dt)
}

impl From<Error> for Check {
    fn from(e: Error) -> Self {
        Check::failed("error", e.to_string())
    }
}
