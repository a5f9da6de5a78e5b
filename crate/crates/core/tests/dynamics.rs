use std::f64::consts::PI;

use cbshell::constitutive::{ConstitutiveSetup, Technique};
use cbshell::dynamics::{lumped_mass, Constraints, LoadSchedule, LoadTarget, Model, SolverConfig, TimeStep, DOFS_PER_NODE};
use cbshell::geometry::{Configuration, Mesh};
use cbshell::materials::MaterialModel;
use cbshell::scenarios::{build_experiment, grid_index, structured_mesh};
use cbshell::tensor::Vec3;

const E: f64 = 1.0e7;
const RHO: f64 = 1000.0;

fn elastic(nu: f64) -> MaterialModel {
    MaterialModel::LinearElastic {
        youngs_modulus: E,
        poisson_ratio: nu,
    }
}

fn plate(nx: usize, ny: usize, lx: f64, ly: f64, h: f64) -> Mesh {
    structured_mesh(nx, ny, h, |u, v| (Vec3::new(u * lx, v * ly, 0.0), Vec3::z())).unwrap()
}

fn solver(dt: TimeStep, end: f64) -> SolverConfig {
    SolverConfig {
        time_step: dt,
        safety_factor: 0.8,
        end_time: end,
        output_stride: 1,
        damping: 0.0,
        dt_refresh_interval: 0,
        rotary_inertia_scale: None,
    }
}

fn model(mesh: Mesh, constraints: Constraints, loads: Vec<LoadSchedule>, nu: f64, dt: TimeStep, end: f64) -> Model {
    let setup = ConstitutiveSetup::new(Technique::Technique2, elastic(nu), nu).unwrap();
    Model::new(mesh, setup, RHO, constraints, loads, solver(dt, end)).unwrap()
}

fn total_mass(mesh: &Mesh) -> [f64; 3] {
    let m = lumped_mass(mesh, RHO, None).unwrap();
    let mut t = [0.0; 3];
    for i in 0..mesh.nodes.len() {
        for (c, tc) in t.iter_mut().enumerate() {
            *tc += m.block(i)[c];
        }
    }
    t
}

#[test]
fn single_element_mass_is_rho_a_h() {
    let mesh = plate(1, 1, 2.0, 0.5, 0.1);
    let expected = RHO * 2.0 * 0.5 * 0.1;
    for m in total_mass(&mesh) {
        assert!((m - expected).abs() <= 1e-10 * expected, "{m} vs {expected}");
    }
}

#[test]
fn tube_mass_matches_integrated_and_analytic_volume() {
    let s = build_experiment(4).unwrap();
    let rho = s.config.material.density_kg_per_m3;
    let m = lumped_mass(&s.mesh, rho, None).unwrap();
    let total: f64 = (0..s.mesh.nodes.len()).map(|i| m.block(i)[0]).sum();
    let integrated = rho * s.mesh.volume(Configuration::Reference);
    assert!((total - integrated).abs() <= 1e-3 * integrated);
    let (ri, ro, l) = (0.0125, 0.015, 0.04);
    let analytic = rho * 0.25 * PI * (ro * ro - ri * ri) * l;
    assert!((total - analytic).abs() <= 1e-3 * analytic, "{total} vs {analytic}");
}

#[test]
fn unloaded_model_stays_at_rest() {
    let mut m = model(plate(2, 2, 1.0, 1.0, 0.05), Constraints::free(25), vec![], 0.3, TimeStep::Auto, 1.0);
    for _ in 0..200 {
        m.step_central_difference().unwrap();
    }
    for n in &m.mesh.nodes {
        assert!(n.displacement().norm() <= 1e-20);
        assert!((n.director - n.ref_director).norm() <= 1e-15);
    }
    assert!(m.f_int.0.iter().all(|&f| f.abs() <= 1e-12));
}

#[test]
fn uniform_body_force_gives_rigid_acceleration() {
    let mesh = plate(2, 2, 1.0, 1.0, 0.05);
    let masses = lumped_mass(&mesh, RHO, None).unwrap();
    let total: f64 = (0..mesh.nodes.len()).map(|i| masses.block(i)[0]).sum();
    let nodes: Vec<(usize, f64)> = (0..mesh.nodes.len()).map(|i| (i, masses.block(i)[0] / total)).collect();
    // cap-force load along z with a fixed radial distance acts as a dead force
    let target = LoadTarget::CapForce {
        nodes,
        radius_nodes: vec![0],
        axis: Vec3::z(),
        sector: 1.0,
    };
    let force = 10.0;
    let r0 = -0.5 * 0.05;
    let value = force / (PI * r0 * r0);
    let load = LoadSchedule {
        segments: vec![cbshell::dynamics::RampSegment {
            start: value,
            end: value,
            duration: 1.0,
        }],
        target,
    };
    let mut m = model(mesh, Constraints::free(25), vec![load], 0.3, TimeStep::Fixed(1e-5), 1.0);
    for _ in 0..100 {
        m.step_central_difference().unwrap();
    }
    let a = force / total;
    // leapfrog velocities live at t − Δt/2
    let t_half = m.time - 0.5 * m.dt;
    for n in &m.mesh.nodes {
        let v = n.velocity.z;
        assert!((v - a * t_half).abs() <= 1e-9 * a * t_half, "{v} vs {}", a * t_half);
        assert!(n.velocity.x.abs() < 1e-14 && n.velocity.y.abs() < 1e-14);
    }
    for s in m.gauss.iter().flatten() {
        assert!(s.sigma.max_abs_component() <= 1e-10 * E);
    }
}

#[test]
fn free_mesh_conserves_momentum() {
    let mut m = model(plate(2, 1, 1.0, 0.5, 0.05), Constraints::free(15), vec![], 0.3, TimeStep::Auto, 1.0);
    for (i, n) in m.mesh.nodes.iter_mut().enumerate() {
        let s = i as f64;
        n.velocity = Vec3::new((0.7 * s).sin(), (1.3 * s).cos(), (0.4 * s).sin()) * 1e-2;
    }
    let p0 = m.linear_momentum();
    let scale: f64 = m
        .mesh
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| m.mass.block(i)[0] * n.velocity.norm())
        .sum();
    let mut prev = p0;
    for _ in 0..500 {
        m.step_central_difference().unwrap();
        let p = m.linear_momentum();
        assert!((p - prev).norm() <= 1e-10 * scale, "{:e}", (p - prev).norm() / scale);
        prev = p;
    }
}

#[test]
fn constrained_dofs_hold_zero() {
    let s = build_experiment(2).unwrap();
    let mut m = s.model().unwrap();
    for _ in 0..300 {
        m.step_central_difference().unwrap();
        for (i, n) in m.mesh.nodes.iter().enumerate() {
            let u = n.displacement();
            for c in 0..3 {
                if m.constraints.is_fixed(i, c) {
                    assert_eq!(u[c], 0.0);
                }
            }
            for q in 0..2 {
                if m.constraints.is_fixed(i, 3 + q) {
                    assert_eq!(n.angular_velocity[q], 0.0);
                }
            }
        }
    }
}

/// A wide element behaves like a quadratic bar along its short side once
/// the rotary inertia is large enough to keep rotation modes out of the
/// spectrum; that bar's exact limit is `√(2/3) L_min / c`.
#[test]
fn single_element_step_is_near_bar_bound() {
    let setup = ConstitutiveSetup::new(Technique::Technique2, elastic(0.0), 0.0).unwrap();
    let mut cfg = solver(TimeStep::Auto, 1.0);
    cfg.rotary_inertia_scale = Some(1e4);
    let m = Model::new(plate(1, 1, 1.0, 10.0, 0.05), setup, RHO, Constraints::free(9), vec![], cfg).unwrap();
    let dt = m.critical_time_step().unwrap() / m.solver.safety_factor;
    let bar = 0.5 * (RHO / E).sqrt();
    let r = dt / bar;
    assert!((r - 1.0).abs() <= 0.2, "dt / bar bound = {r}");
}

#[test]
fn refining_halves_the_step() {
    let coarse = model(plate(2, 2, 1.0, 1.0, 0.02), Constraints::free(25), vec![], 0.3, TimeStep::Auto, 1.0);
    let fine = model(plate(4, 4, 1.0, 1.0, 0.02), Constraints::free(81), vec![], 0.3, TimeStep::Auto, 1.0);
    let r = fine.dt / coarse.dt;
    assert!((r - 0.5).abs() <= 0.25 * 0.5, "ratio {r}");
}

/// Only `u_x` of the `x = L` row is free; uniform motion of that row is an
/// eigenmode with `k = 7 E h W / (3 L)` and `m = ρ h W L / 6`.
#[test]
fn axial_spring_mode_frequency() {
    let (l, w, h) = (1.0, 0.5, 0.05);
    let mesh = plate(1, 1, l, w, h);
    let mut c = Constraints::free(9);
    for i in 0..9 {
        for d in 0..DOFS_PER_NODE {
            c.fix(i, d);
        }
    }
    let row: Vec<usize> = (0..3).map(|j| grid_index(1, 2, j)).collect();
    for &i in &row {
        c.0[i][0] = false;
    }
    let omega = (14.0 * E / (RHO * l * l)).sqrt();
    let dt = 0.1 / omega;
    let mut m = model(mesh, c, vec![], 0.0, TimeStep::Fixed(dt), 1.0);
    let amp = 1e-6;
    for &i in &row {
        m.mesh.nodes[i].position.x += amp;
    }
    let tip = row[1];
    let mut crossings = Vec::new();
    let mut prev = m.mesh.nodes[tip].displacement().x;
    while crossings.len() < 7 {
        m.step_central_difference().unwrap();
        let u = m.mesh.nodes[tip].displacement().x;
        if prev > 0.0 && u <= 0.0 || prev < 0.0 && u >= 0.0 {
            crossings.push(m.time - dt * u / (u - prev));
        }
        prev = u;
    }
    let period = (crossings[6] - crossings[0]) / 3.0;
    let measured = 2.0 * PI / period;
    assert!((measured / omega - 1.0).abs() <= 0.02, "{measured} vs {omega}");
}

fn strain_energy(m: &Model) -> f64 {
    let pts = m.gauss_points();
    let mut w = 0.0;
    for states in &m.gauss {
        for (g, s) in pts.iter().zip(states) {
            let (a, e) = (&s.pk2.0, &s.strain.0);
            let density = a[0] * e[0] + a[1] * e[1] + a[2] * e[2] + 2.0 * (a[3] * e[3] + a[4] * e[4] + a[5] * e[5]);
            w += 0.5 * density * s.ref_jacobian.determinant() * g.weight;
        }
    }
    w
}

#[test]
fn undamped_vibration_energy_drift() {
    let (l, w, h) = (1.0, 0.25, 0.05);
    let mesh = plate(2, 1, l, w, h);
    let mut c = Constraints::free(mesh.nodes.len());
    for j in 0..3 {
        c.fix_all(grid_index(2, 0, j));
    }
    let mut m = model(mesh, c, vec![], 0.0, TimeStep::Auto, 1.0);
    let dt = 0.5 * m.critical_time_step().unwrap() / m.solver.safety_factor;
    m.dt = dt;
    m.solver.time_step = TimeStep::Fixed(dt);
    for n in &mut m.mesh.nodes {
        let x = n.ref_position.x / l;
        n.velocity.z = 1e-3 * x * x;
    }
    m.compute_forces(false).unwrap();
    let e0 = m.kinetic_energy();
    let mut worst: f64 = 0.0;
    for k in 0..10_000 {
        let ke_before = m.kinetic_energy();
        m.step_central_difference().unwrap();
        if k % 10 == 0 {
            // the strain energy is evaluated at the start of the step, between
            // the two half-step kinetic energies
            let total = 0.5 * (ke_before + m.kinetic_energy()) + strain_energy(&m);
            worst = worst.max((total - e0).abs() / e0);
        }
    }
    assert!(worst < 0.02, "energy drift {worst}");
}
