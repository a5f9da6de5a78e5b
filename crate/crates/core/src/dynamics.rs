//! Explicit central-difference dynamics for the shell mesh.
//!
//! Each node carries five DOFs: three translations and two rotations about
//! the fiber axes `e1ᶠ`, `e2ᶠ`. A rotation vector `θ1 e1ᶠ + θ2 e2ᶠ` moves
//! the director by `δŶ = −θ1 e2ᶠ + θ2 e1ᶠ`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constitutive::{update_gauss_point, ConstitutiveSetup, GaussPointState, Technique};
use crate::error::{Error, Result};
use crate::geometry::{
    area_ratio, build_lamina_frame, checked_geometry, interpolate_geometry, shape_functions, update_fiber_frame,
    Configuration, GaussPoint, Mesh, ShapeValues, ShellElement, ShellNode, EDGE_NODES, NODE_PARENT_COORDS,
};
use crate::materials::small_strain_tangent;
use crate::tensor::{inv3, rotation_matrix, Mat3, SymTensor, Tangent66, Vec3};

pub const DOFS_PER_NODE: usize = 5;
const ELEMENT_DOFS: usize = 9 * DOFS_PER_NODE;

/// Flat nodal vector in 5-slot blocks `(u_x, u_y, u_z, θ1, θ2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DofVector(pub Vec<f64>);

impl DofVector {
    pub fn zeros(nodes: usize) -> Self {
        DofVector(vec![0.0; nodes * DOFS_PER_NODE])
    }

    pub fn node_count(&self) -> usize {
        self.0.len() / DOFS_PER_NODE
    }

    pub fn block(&self, node: usize) -> &[f64] {
        &self.0[node * DOFS_PER_NODE..(node + 1) * DOFS_PER_NODE]
    }

    pub fn block_mut(&mut self, node: usize) -> &mut [f64] {
        &mut self.0[node * DOFS_PER_NODE..(node + 1) * DOFS_PER_NODE]
    }

    pub fn translation(&self, node: usize) -> Vec3 {
        let b = self.block(node);
        Vec3::new(b[0], b[1], b[2])
    }

    pub fn fill(&mut self, v: f64) {
        self.0.iter_mut().for_each(|x| *x = v);
    }
}

/// Homogeneous (zero-valued) DOF constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraints(pub Vec<[bool; DOFS_PER_NODE]>);

impl Constraints {
    pub fn free(nodes: usize) -> Self {
        Constraints(vec![[false; DOFS_PER_NODE]; nodes])
    }

    pub fn fix(&mut self, node: usize, dof: usize) {
        self.0[node][dof] = true;
    }

    pub fn fix_all(&mut self, node: usize) {
        self.0[node] = [true; DOFS_PER_NODE];
    }

    pub fn is_fixed(&self, node: usize, dof: usize) -> bool {
        self.0[node][dof]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSegment {
    pub start: f64,
    pub end: f64,
    pub duration: f64,
}

/// Where a scalar load value is applied.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadTarget {
    /// Pressure (Pa) on the face `ζ = zeta` of each element, acting along
    /// `g1 × g2` of the current face.
    FollowerPressure { elements: Vec<usize>, zeta: f64 },
    /// Nominal traction (Pa, per reference cross-section) on element edges
    /// `(element, edge)`, along a fixed direction.
    EdgeTension { edges: Vec<(usize, usize)>, direction: Vec3 },
    /// Dead edge pressure: like tension, but pushing against the edge's
    /// outward in-plane normal in the reference configuration.
    EdgePressure { edges: Vec<(usize, usize)> },
    /// Total moment (N·m) about a fixed axis, split over nodes by weight.
    TipMoment { nodes: Vec<(usize, f64)>, axis: Vec3 },
    /// Closed-end cap force `p · sector · π r_i²` along `axis`, where `r_i`
    /// is the current mean inner radius measured at `radius_nodes`.
    CapForce {
        nodes: Vec<(usize, f64)>,
        radius_nodes: Vec<usize>,
        axis: Vec3,
        sector: f64,
    },
}

/// Piecewise-linear ramp of a scalar load; holds the last value afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSchedule {
    pub segments: Vec<RampSegment>,
    pub target: LoadTarget,
}

impl LoadSchedule {
    pub fn ramp(peak: f64, duration: f64, target: LoadTarget) -> Self {
        LoadSchedule {
            segments: vec![RampSegment {
                start: 0.0,
                end: peak,
                duration,
            }],
            target,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::Domain {
                field: "load.segments".into(),
                message: "at least one segment is required".into(),
            });
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration > 0.0) || !s.start.is_finite() || !s.end.is_finite() {
                return Err(Error::Domain {
                    field: format!("load.segments[{i}]"),
                    message: "duration must be > 0 and values finite".into(),
                });
            }
            if i > 0 {
                let prev = self.segments[i - 1].end;
                if (prev - s.start).abs() > 1e-12 * prev.abs().max(s.start.abs()).max(1.0) {
                    return Err(Error::Domain {
                        field: format!("load.segments[{i}].start"),
                        message: format!("schedule must be continuous ({prev} then {})", s.start),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let mut t0 = 0.0;
        for s in &self.segments {
            if t <= t0 + s.duration {
                let r = ((t - t0) / s.duration).clamp(0.0, 1.0);
                return s.start + r * (s.end - s.start);
            }
            t0 += s.duration;
        }
        self.segments.last().map_or(0.0, |s| s.end)
    }

    /// Inverse of [`value_at`](Self::value_at) on the first monotone stretch
    /// that reaches `v`.
    pub fn time_of_value(&self, v: f64) -> Option<f64> {
        let mut t0 = 0.0;
        for s in &self.segments {
            let (lo, hi) = if s.start <= s.end { (s.start, s.end) } else { (s.end, s.start) };
            if v >= lo && v <= hi && s.end != s.start {
                return Some(t0 + s.duration * (v - s.start) / (s.end - s.start));
            }
            t0 += s.duration;
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub time_step: TimeStep,
    pub safety_factor: f64,
    pub end_time: f64,
    pub output_stride: usize,
    /// Mass-proportional damping coefficient (1/s).
    pub damping: f64,
    /// Steps between automatic time-step re-estimates (0 disables).
    pub dt_refresh_interval: usize,
    /// Multiplier on `m h²/12`; `None` picks `max(1, (ℓ/h)²)`.
    pub rotary_inertia_scale: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            time_step: TimeStep::Auto,
            safety_factor: 0.8,
            end_time: 1.0,
            output_stride: 100,
            damping: 0.0,
            dt_refresh_interval: 200,
            rotary_inertia_scale: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: String| Error::Domain {
            field: field.into(),
            message,
        };
        if let TimeStep::Fixed(dt) = self.time_step {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(bad("solver.dt", format!("must be > 0, got {dt}")));
            }
        }
        if !(self.safety_factor > 0.0 && self.safety_factor <= 1.0) {
            return Err(bad("solver.safety_factor", format!("must lie in (0, 1], got {}", self.safety_factor)));
        }
        if !(self.end_time > 0.0 && self.end_time.is_finite()) {
            return Err(bad("solver.end_time_s", format!("must be > 0, got {}", self.end_time)));
        }
        if self.output_stride == 0 {
            return Err(bad("solver.output_stride", "must be >= 1".into()));
        }
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return Err(bad("solver.damping_per_s", format!("must be >= 0, got {}", self.damping)));
        }
        if let Some(s) = self.rotary_inertia_scale {
            if !(s > 0.0) {
                return Err(bad("solver.rotary_inertia_scale", format!("must be > 0, got {s}")));
            }
        }
        Ok(())
    }
}

/// Smallest nodal spacing along element edges in the reference state.
pub fn min_nodal_spacing(mesh: &Mesh) -> f64 {
    let mut l = f64::INFINITY;
    for el in &mesh.elements {
        for edge in EDGE_NODES.iter() {
            for k in 0..2 {
                let a = mesh.nodes[el.nodes[edge[k]]].ref_position;
                let b = mesh.nodes[el.nodes[edge[k + 1]]].ref_position;
                l = l.min((a - b).norm());
            }
        }
    }
    l
}

/// Row-sum lumped translational masses and scaled rotary inertias.
pub fn lumped_mass(mesh: &Mesh, density: f64, rotary_inertia_scale: Option<f64>) -> Result<DofVector> {
    if !(density > 0.0) {
        return Err(Error::Domain {
            field: "material.density_kg_per_m3".into(),
            message: format!("must be > 0, got {density}"),
        });
    }
    let pts = mesh.rule.points();
    let mut m = vec![0.0; mesh.nodes.len()];
    for el in &mesh.elements {
        let me = element_nodal_mass(mesh, el, density, &pts);
        for (a, &n) in el.nodes.iter().enumerate() {
            m[n] += me[a];
        }
    }
    let scale = rotary_inertia_scale.unwrap_or_else(|| {
        let h = mesh.nodes.iter().map(|n| n.ref_thickness).sum::<f64>() / mesh.nodes.len() as f64;
        (min_nodal_spacing(mesh) / h).powi(2).max(1.0)
    });
    let mut out = DofVector::zeros(mesh.nodes.len());
    for (i, node) in mesh.nodes.iter().enumerate() {
        let b = out.block_mut(i);
        b[0] = m[i];
        b[1] = m[i];
        b[2] = m[i];
        let inertia = m[i] * node.ref_thickness * node.ref_thickness / 12.0 * scale;
        b[3] = inertia;
        b[4] = inertia;
    }
    Ok(out)
}

/// One element's share `ρ ∫ N_a dV` of the lumped translational mass.
fn element_nodal_mass(mesh: &Mesh, el: &ShellElement, density: f64, pts: &[GaussPoint]) -> [f64; 9] {
    let mut m = [0.0; 9];
    for gp in pts {
        let (_, j) = interpolate_geometry(el, &mesh.nodes, gp.xi, gp.eta, gp.zeta, Configuration::Reference);
        let dv = j.determinant() * gp.weight;
        let sf = shape_functions(gp.xi, gp.eta);
        for (a, ma) in m.iter_mut().enumerate() {
            *ma += density * sf.n[a] * dv;
        }
    }
    m
}

/// Gradient operators of one Gauss point: for each node the spatial
/// gradients of the translational and rotational interpolants.
struct PointOperator {
    grad_t: [Vec3; 9],
    grad_r: [Vec3; 9],
    dv: f64,
}

fn point_operator(el: &ShellElement, nodes: &[ShellNode], gp: &GaussPoint, sf: &ShapeValues, j: &Mat3) -> Result<PointOperator> {
    let j_inv = inv3(j)?;
    let mut grad_t = [Vec3::zeros(); 9];
    let mut grad_r = [Vec3::zeros(); 9];
    for (a, &n) in el.nodes.iter().enumerate() {
        let half = 0.5 * nodes[n].thickness;
        grad_t[a] = j_inv * Vec3::new(sf.dn_dxi[a], sf.dn_deta[a], 0.0);
        grad_r[a] = j_inv * Vec3::new(sf.dn_dxi[a] * gp.zeta * half, sf.dn_deta[a] * gp.zeta * half, sf.n[a] * half);
    }
    Ok(PointOperator {
        grad_t,
        grad_r,
        dv: j.determinant() * gp.weight,
    })
}

/// Director variation vectors `v_1 = −e2ᶠ`, `v_2 = e1ᶠ`.
#[inline]
fn rotation_vectors(node: &ShellNode) -> [Vec3; 2] {
    [-node.fiber_frame.e2, node.fiber_frame.e1]
}

/// Updates the Gauss states of one element to the current geometry and
/// returns its internal force `∫ Bᵀσ dV` in 5-DOF node blocks.
#[allow(clippy::too_many_arguments)]
pub fn internal_force(
    element_index: usize,
    el: &ShellElement,
    nodes: &[ShellNode],
    gauss_points: &[GaussPoint],
    shapes: &[ShapeValues],
    states: &mut [GaussPointState],
    setup: &ConstitutiveSetup,
    with_tangent: bool,
) -> Result<[f64; ELEMENT_DOFS]> {
    let mut f = [0.0; ELEMENT_DOFS];
    for ((gp, sf), state) in gauss_points.iter().zip(shapes).zip(states.iter_mut()) {
        let (_, j) = checked_geometry(element_index, el, nodes, gp, Configuration::Current)?;
        let frame = build_lamina_frame(&j)?;
        let sigma_l = update_gauss_point(state, setup, &j, &frame, with_tangent)?;
        let r = frame.matrix();
        let sigma = r * sigma_l.to_mat3() * r.transpose();
        let op = point_operator(el, nodes, gp, sf, &j)?;
        for (a, &n) in el.nodes.iter().enumerate() {
            let ft = sigma * op.grad_t[a] * op.dv;
            let fr = sigma * op.grad_r[a] * op.dv;
            let v = rotation_vectors(&nodes[n]);
            let b = &mut f[a * DOFS_PER_NODE..(a + 1) * DOFS_PER_NODE];
            b[0] += ft.x;
            b[1] += ft.y;
            b[2] += ft.z;
            b[3] += v[0].dot(&fr);
            b[4] += v[1].dot(&fr);
        }
    }
    Ok(f)
}

/// Consistent nodal forces of a follower pressure on face `ζ = zeta`.
pub fn follower_pressure_force(el: &ShellElement, nodes: &[ShellNode], zeta: f64, p: f64, surface: &[GaussPoint]) -> [f64; ELEMENT_DOFS] {
    let mut f = [0.0; ELEMENT_DOFS];
    for gp in surface {
        let (_, j) = interpolate_geometry(el, nodes, gp.xi, gp.eta, zeta, Configuration::Current);
        let g1: Vec3 = j.row(0).transpose();
        let g2: Vec3 = j.row(1).transpose();
        let nda = g1.cross(&g2) * (p * gp.weight);
        let sf = shape_functions(gp.xi, gp.eta);
        for (a, &n) in el.nodes.iter().enumerate() {
            let ft = nda * sf.n[a];
            let fr = ft * (zeta * 0.5 * nodes[n].thickness);
            let v = rotation_vectors(&nodes[n]);
            let b = &mut f[a * DOFS_PER_NODE..(a + 1) * DOFS_PER_NODE];
            b[0] += ft.x;
            b[1] += ft.y;
            b[2] += ft.z;
            b[3] += v[0].dot(&fr);
            b[4] += v[1].dot(&fr);
        }
    }
    f
}

/// `∫ N_i h₀ ds` for the three nodes of a reference edge.
pub fn edge_weights(el: &ShellElement, nodes: &[ShellNode], edge: usize) -> [f64; 3] {
    let local = EDGE_NODES[edge];
    let mut w = [0.0; 3];
    for (s, ws) in crate::geometry::gauss_legendre(3) {
        let n = [0.5 * s * (s - 1.0), 1.0 - s * s, 0.5 * s * (s + 1.0)];
        let dn = [s - 0.5, -2.0 * s, s + 0.5];
        let mut dx = Vec3::zeros();
        let mut h = 0.0;
        for k in 0..3 {
            let node = &nodes[el.nodes[local[k]]];
            dx += dn[k] * node.ref_position;
            h += n[k] * node.ref_thickness;
        }
        let ds = dx.norm();
        for k in 0..3 {
            w[k] += ws * n[k] * h * ds;
        }
    }
    w
}

/// Outward in-plane unit normal of a reference edge at its midpoint.
fn edge_outward_normal(el: &ShellElement, nodes: &[ShellNode], edge: usize) -> Vec3 {
    let local = EDGE_NODES[edge];
    let tangent = nodes[el.nodes[local[2]]].ref_position - nodes[el.nodes[local[0]]].ref_position;
    let centre = nodes[el.nodes[8]].ref_position;
    let mid = nodes[el.nodes[local[1]]].ref_position;
    let normal = nodes[el.nodes[local[1]]].ref_director.cross(&tangent).normalize();
    if normal.dot(&(mid - centre)) >= 0.0 {
        normal
    } else {
        -normal
    }
}

/// The assembled explicit model.
#[derive(Debug, Clone)]
pub struct Model {
    pub mesh: Mesh,
    pub setup: ConstitutiveSetup,
    pub density: f64,
    pub gauss: Vec<Vec<GaussPointState>>,
    pub constraints: Constraints,
    pub loads: Vec<LoadSchedule>,
    pub solver: SolverConfig,
    pub mass: DofVector,
    pub f_int: DofVector,
    pub f_ext: DofVector,
    pub time: f64,
    pub step: usize,
    pub dt: f64,
    dt_prev: f64,
    gauss_points: Vec<GaussPoint>,
    shapes: Vec<ShapeValues>,
    surface_points: Vec<GaussPoint>,
    characteristic_length: f64,
    reference_volume: f64,
}

impl Model {
    pub fn new(
        mut mesh: Mesh,
        setup: ConstitutiveSetup,
        density: f64,
        constraints: Constraints,
        loads: Vec<LoadSchedule>,
        solver: SolverConfig,
    ) -> Result<Self> {
        solver.validate()?;
        mesh.validate()?;
        for l in &loads {
            l.validate()?;
        }
        if constraints.0.len() != mesh.nodes.len() {
            return Err(Error::InvalidMesh(format!(
                "constraint table has {} rows for {} nodes",
                constraints.0.len(),
                mesh.nodes.len()
            )));
        }
        mesh.align_fiber_frames_with_xi()?;
        let gauss_points = mesh.rule.points();
        let shapes = gauss_points.iter().map(|g| shape_functions(g.xi, g.eta)).collect();
        let mut gauss = Vec::with_capacity(mesh.elements.len());
        for (e, el) in mesh.elements.iter().enumerate() {
            let mut states = Vec::with_capacity(gauss_points.len());
            for gp in &gauss_points {
                let (_, j) = checked_geometry(e, el, &mesh.nodes, gp, Configuration::Reference)?;
                states.push(GaussPointState::new(j, build_lamina_frame(&j)?));
            }
            gauss.push(states);
        }
        let mass = lumped_mass(&mesh, density, solver.rotary_inertia_scale)?;
        let n = mesh.nodes.len();
        let characteristic_length = mesh
            .nodes
            .iter()
            .map(|a| (a.ref_position - mesh.nodes[0].ref_position).norm())
            .fold(0.0, f64::max)
            .max(min_nodal_spacing(&mesh));
        let reference_volume = mesh.volume(Configuration::Reference);
        let surface_points = mesh.rule.surface_points();
        let mut model = Model {
            mesh,
            setup,
            density,
            gauss,
            constraints,
            loads,
            solver,
            mass,
            f_int: DofVector::zeros(n),
            f_ext: DofVector::zeros(n),
            time: 0.0,
            step: 0,
            dt: 0.0,
            dt_prev: 0.0,
            gauss_points,
            shapes,
            surface_points,
            characteristic_length,
            reference_volume,
        };
        model.dt = match solver.time_step {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Auto => model.critical_time_step()?,
        };
        Ok(model)
    }

    pub fn technique(&self) -> Technique {
        self.setup.technique
    }

    /// Stable step `safety · 2/ω_max` from element eigenvalues at the
    /// current state.
    pub fn critical_time_step(&self) -> Result<f64> {
        let omega = critical_frequency(self)?;
        Ok(self.solver.safety_factor * 2.0 / omega)
    }

    /// Updates every Gauss point to the current geometry and assembles the
    /// internal and external force vectors at the current time.
    pub fn compute_forces(&mut self, with_tangent: bool) -> Result<()> {
        let nodes = &self.mesh.nodes;
        let setup = &self.setup;
        let (pts, shapes) = (&self.gauss_points, &self.shapes);
        let element_forces: Vec<Result<[f64; ELEMENT_DOFS]>> = self
            .mesh
            .elements
            .par_iter()
            .zip(self.gauss.par_iter_mut())
            .enumerate()
            .map(|(e, (el, states))| internal_force(e, el, nodes, pts, shapes, states, setup, with_tangent))
            .collect();
        self.f_int.fill(0.0);
        for (el, fe) in self.mesh.elements.iter().zip(element_forces) {
            let fe = fe?;
            scatter(&mut self.f_int, el, &fe);
        }
        self.f_ext = self.external_force(self.time);
        Ok(())
    }

    pub fn external_force(&self, t: f64) -> DofVector {
        let nodes = &self.mesh.nodes;
        let mut f = DofVector::zeros(nodes.len());
        for load in &self.loads {
            let value = load.value_at(t);
            match &load.target {
                LoadTarget::FollowerPressure { elements, zeta } => {
                    for &e in elements {
                        let el = &self.mesh.elements[e];
                        let fe = follower_pressure_force(el, nodes, *zeta, value, &self.surface_points);
                        scatter(&mut f, el, &fe);
                    }
                }
                LoadTarget::EdgeTension { edges, direction } => {
                    for &(e, edge) in edges {
                        let el = &self.mesh.elements[e];
                        let w = edge_weights(el, nodes, edge);
                        for k in 0..3 {
                            let b = f.block_mut(el.nodes[EDGE_NODES[edge][k]]);
                            for c in 0..3 {
                                b[c] += value * w[k] * direction[c];
                            }
                        }
                    }
                }
                LoadTarget::EdgePressure { edges } => {
                    for &(e, edge) in edges {
                        let el = &self.mesh.elements[e];
                        let w = edge_weights(el, nodes, edge);
                        let normal = edge_outward_normal(el, nodes, edge);
                        for k in 0..3 {
                            let b = f.block_mut(el.nodes[EDGE_NODES[edge][k]]);
                            for c in 0..3 {
                                b[c] -= value * w[k] * normal[c];
                            }
                        }
                    }
                }
                LoadTarget::TipMoment { nodes: list, axis } => {
                    for &(n, w) in list {
                        // θ = θ1 e1ᶠ + θ2 e2ᶠ, so the conjugate moments are m·e1ᶠ and m·e2ᶠ
                        let m = axis * (value * w);
                        let b = f.block_mut(n);
                        b[3] += m.dot(&nodes[n].fiber_frame.e1);
                        b[4] += m.dot(&nodes[n].fiber_frame.e2);
                    }
                }
                LoadTarget::CapForce {
                    nodes: list,
                    radius_nodes,
                    axis,
                    sector,
                } => {
                    let r = inner_radius(nodes, radius_nodes, axis);
                    let total = value * sector * std::f64::consts::PI * r * r;
                    for &(n, w) in list {
                        let b = f.block_mut(n);
                        for c in 0..3 {
                            b[c] += total * w * axis[c];
                        }
                    }
                }
            }
        }
        f
    }

    /// One leapfrog step: forces at `t`, half-step velocities, positions
    /// and directors at `t + Δt`.
    pub fn step_central_difference(&mut self) -> Result<()> {
        let refresh = self.solver.time_step == TimeStep::Auto
            && self.solver.dt_refresh_interval > 0
            && self.step > 0
            && self.step.is_multiple_of(self.solver.dt_refresh_interval);
        let tangent_needed = refresh && self.setup.technique == Technique::Technique1;
        self.compute_forces(tangent_needed)?;
        if refresh {
            self.dt = self.critical_time_step()?;
        }
        let dt = self.dt;
        let h = 0.5 * (self.dt_prev + dt);
        let c = self.solver.damping;
        let n_nodes = self.mesh.nodes.len();
        for i in 0..n_nodes {
            let m = self.mass.block(i).to_vec();
            let fi = self.f_int.block(i).to_vec();
            let fe = self.f_ext.block(i).to_vec();
            let fixed = self.constraints.0[i];
            let node = &mut self.mesh.nodes[i];
            let mut v = [
                node.velocity.x,
                node.velocity.y,
                node.velocity.z,
                node.angular_velocity[0],
                node.angular_velocity[1],
            ];
            for k in 0..DOFS_PER_NODE {
                if fixed[k] || m[k] <= 0.0 {
                    v[k] = 0.0;
                    continue;
                }
                let a = (fe[k] - fi[k]) / m[k];
                v[k] = ((1.0 - 0.5 * c * h) * v[k] + h * a) / (1.0 + 0.5 * c * h);
            }
            node.velocity = Vec3::new(v[0], v[1], v[2]);
            node.position += dt * node.velocity;
            let frame = node.fiber_frame;
            let w = (v[3] * frame.e1 + v[4] * frame.e2) * dt;
            let omega_global = v[3] * frame.e1 + v[4] * frame.e2;
            node.director = (rotation_matrix(&w) * node.director).normalize();
            node.prev_fiber_frame = frame;
            node.fiber_frame = update_fiber_frame(&node.director, &frame)?;
            node.angular_velocity = [omega_global.dot(&node.fiber_frame.e1), omega_global.dot(&node.fiber_frame.e2)];
        }
        self.update_thickness()?;
        self.dt_prev = dt;
        self.time += dt;
        self.step += 1;
        self.check_stability()
    }

    fn check_stability(&self) -> Result<()> {
        let limit = 1e3 * self.characteristic_length;
        for n in &self.mesh.nodes {
            let u = n.displacement().norm();
            if !u.is_finite() || u > limit || !n.director.iter().all(|x| x.is_finite()) {
                return Err(Error::Instability {
                    step: self.step,
                    time: self.time,
                });
            }
        }
        Ok(())
    }

    /// Fiber lengths: incompressible models use `h₀ / (area ratio)` at the
    /// node, compressible ones the element-mean Gauss thickness stretch.
    pub fn update_thickness(&mut self) -> Result<()> {
        let adj = self.mesh.node_elements();
        let incompressible = self.setup.model.is_incompressible();
        let element_stretch: Vec<f64> = self
            .gauss
            .iter()
            .map(|s| s.iter().map(|g| g.thickness_stretch).sum::<f64>() / s.len() as f64)
            .collect();
        let mut h = vec![0.0; self.mesh.nodes.len()];
        for (i, list) in adj.iter().enumerate() {
            let mut acc = 0.0;
            for &(e, a) in list {
                let h0 = self.mesh.nodes[i].ref_thickness;
                acc += if incompressible {
                    let (xi, eta) = NODE_PARENT_COORDS[a];
                    crate::geometry::update_fiber_length(h0, area_ratio(&self.mesh.elements[e], &self.mesh.nodes, xi, eta))?
                } else {
                    crate::geometry::update_fiber_length_compressible(h0, element_stretch[e])?
                };
            }
            h[i] = acc / list.len() as f64;
        }
        for (node, h) in self.mesh.nodes.iter_mut().zip(h) {
            node.thickness = h;
        }
        Ok(())
    }

    /// Advances until `end_time`, calling `observer` at step 0, every
    /// `output_stride` steps and at the final step.
    pub fn run<F: FnMut(&Model) -> Result<()>>(&mut self, mut observer: F) -> Result<()> {
        observer(self)?;
        while self.time < self.solver.end_time - 1e-12 * self.solver.end_time {
            if self.time + self.dt > self.solver.end_time {
                self.dt = (self.solver.end_time - self.time).max(1e-300);
            }
            self.step_central_difference()?;
            if self.step.is_multiple_of(self.solver.output_stride) || self.time >= self.solver.end_time * (1.0 - 1e-12) {
                observer(self)?;
            }
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.mesh.volume(Configuration::Current)
    }

    /// Relative Gauss-integrated volume change.
    pub fn volume_change(&self) -> f64 {
        self.volume() / self.reference_volume - 1.0
    }

    pub fn reference_volume(&self) -> f64 {
        self.reference_volume
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.mesh
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let m = self.mass.block(i);
                0.5 * m[0] * n.velocity.norm_squared()
                    + 0.5 * m[3] * (n.angular_velocity[0].powi(2) + n.angular_velocity[1].powi(2))
            })
            .sum()
    }

    pub fn linear_momentum(&self) -> Vec3 {
        self.mesh
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| n.velocity * self.mass.block(i)[0])
            .sum()
    }

    /// Element-mean pressure band `−tr(σ)/3`.
    pub fn pressure_bands(&self) -> Vec<f64> {
        self.gauss
            .iter()
            .map(|s| s.iter().map(|g| crate::oracles::pressure_band(&g.sigma)).sum::<f64>() / s.len() as f64)
            .collect()
    }

    /// Largest Green–Lagrange component over all Gauss points.
    pub fn max_green_lagrange(&self) -> f64 {
        self.gauss
            .iter()
            .flatten()
            .map(|g| g.strain.max_abs_component())
            .fold(0.0, f64::max)
    }

    /// Global Cauchy stress at a Gauss point.
    pub fn global_stress(&self, element: usize, point: usize) -> Result<SymTensor> {
        let gp = &self.gauss_points[point];
        let (_, j) = interpolate_geometry(
            &self.mesh.elements[element],
            &self.mesh.nodes,
            gp.xi,
            gp.eta,
            gp.zeta,
            Configuration::Current,
        );
        let r = build_lamina_frame(&j)?.matrix();
        Ok(SymTensor::from_mat3(&(r * self.gauss[element][point].sigma.to_mat3() * r.transpose())))
    }

    pub fn gauss_points(&self) -> &[GaussPoint] {
        &self.gauss_points
    }
}

/// Mean of `(radial distance − h/2)` about `axis` over the given nodes.
pub fn inner_radius(nodes: &[ShellNode], ids: &[usize], axis: &Vec3) -> f64 {
    let a = axis.normalize();
    let sum: f64 = ids
        .iter()
        .map(|&i| {
            let p = nodes[i].position;
            (p - p.dot(&a) * a).norm() - 0.5 * nodes[i].thickness
        })
        .sum();
    sum / ids.len().max(1) as f64
}

fn scatter(f: &mut DofVector, el: &ShellElement, fe: &[f64; ELEMENT_DOFS]) {
    for (a, &n) in el.nodes.iter().enumerate() {
        let b = f.block_mut(n);
        for k in 0..DOFS_PER_NODE {
            b[k] += fe[a * DOFS_PER_NODE + k];
        }
    }
}

fn engineering(g: &Mat3) -> [f64; 6] {
    [
        g[(0, 0)],
        g[(1, 1)],
        g[(2, 2)],
        g[(0, 1)] + g[(1, 0)],
        g[(1, 2)] + g[(2, 1)],
        g[(0, 2)] + g[(2, 0)],
    ]
}

/// Element stiffness `∫ Bᵀ D B dV` plus the translational initial-stress
/// term, at the current geometry.
pub fn element_stiffness(model: &Model, element: usize) -> Result<DMatrix<f64>> {
    let el = &model.mesh.elements[element];
    let nodes = &model.mesh.nodes;
    let mut k = DMatrix::zeros(ELEMENT_DOFS, ELEMENT_DOFS);
    let fallback: Tangent66 = match model.setup.technique {
        Technique::Technique1 => small_strain_tangent(&model.setup.model)?,
        _ => model.setup.constant_tensor,
    };
    for (p, (gp, sf)) in model.gauss_points.iter().zip(&model.shapes).enumerate() {
        let (_, j) = checked_geometry(element, el, nodes, gp, Configuration::Current)?;
        let r = build_lamina_frame(&j)?.matrix();
        let op = point_operator(el, nodes, gp, sf, &j)?;
        let state = &model.gauss[element][p];
        let d = match (model.setup.technique, state.tangent) {
            (Technique::Technique1, Some(t)) => t,
            _ => fallback,
        };
        let mut b = DMatrix::zeros(6, ELEMENT_DOFS);
        for (a, &n) in el.nodes.iter().enumerate() {
            let gt = r.transpose() * op.grad_t[a];
            let gr = r.transpose() * op.grad_r[a];
            for c in 0..3 {
                let v = r.transpose().column(c).into_owned();
                let col = engineering(&(v * gt.transpose()));
                for s in 0..6 {
                    b[(s, a * DOFS_PER_NODE + c)] = col[s];
                }
            }
            let rv = rotation_vectors(&nodes[n]);
            for q in 0..2 {
                let v = r.transpose() * rv[q];
                let col = engineering(&(v * gr.transpose()));
                for s in 0..6 {
                    b[(s, a * DOFS_PER_NODE + 3 + q)] = col[s];
                }
            }
        }
        let dm = DMatrix::from_fn(6, 6, |i, jj| d.0[(i, jj)]);
        k += b.transpose() * dm * &b * op.dv;
        let sigma = r * state.sigma.to_mat3() * r.transpose();
        for a in 0..9 {
            for bb in 0..9 {
                let g = op.grad_t[a].dot(&(sigma * op.grad_t[bb])) * op.dv;
                for c in 0..3 {
                    k[(a * DOFS_PER_NODE + c, bb * DOFS_PER_NODE + c)] += g;
                }
            }
        }
    }
    Ok(k)
}

/// Largest natural frequency over all elements (rad/s).
pub fn critical_frequency(model: &Model) -> Result<f64> {
    let omegas: Vec<Result<f64>> = (0..model.mesh.elements.len())
        .into_par_iter()
        .map(|e| {
            let k = element_stiffness(model, e)?;
            let el = &model.mesh.elements[e];
            // the element's own mass share keeps the element bound an upper
            // bound of the assembled spectrum
            let me = element_nodal_mass(&model.mesh, el, model.density, &model.gauss_points);
            let mut inv_sqrt = vec![0.0; ELEMENT_DOFS];
            for (a, &n) in el.nodes.iter().enumerate() {
                let global = model.mass.block(n);
                for c in 0..DOFS_PER_NODE {
                    let m = me[a] * global[c] / global[0];
                    inv_sqrt[a * DOFS_PER_NODE + c] = if m > 0.0 { 1.0 / m.sqrt() } else { 0.0 };
                }
            }
            let a = DMatrix::from_fn(ELEMENT_DOFS, ELEMENT_DOFS, |i, j| k[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
            let eig = SymmetricEigen::new(a);
            let lam = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !(lam > 0.0) || !lam.is_finite() {
                return Err(Error::NonPositiveStiffness { element: e });
            }
            Ok(lam.sqrt())
        })
        .collect();
    let mut w = 0.0f64;
    for o in omegas {
        w = w.max(o?);
    }
    Ok(w)
}

/// Bar bound `L_min / c_d` with the dilatational wave speed of the
/// small-strain tangent.
pub fn wave_speed_bound(model: &Model) -> Result<f64> {
    let d = small_strain_tangent(&model.setup.model)?;
    let c = (d.0[(0, 0)].max(d.0[(1, 1)]) / model.density).sqrt();
    Ok(min_nodal_spacing(&model.mesh) / c)
}

/// Convenience: translational displacement of a node.
pub fn node_displacement(model: &Model, node: usize) -> Vec3 {
    model.mesh.nodes[node].displacement()
}
