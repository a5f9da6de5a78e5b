//! The five benchmark experiments: meshes, constraints, loads and probes.
//!
//! Dimensions and material constants in the defaults are representative
//! values, not reference data.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::config::{
    DtSetting, GeometryConfig, LoadConfig, LoadKind, MaterialConfig, ScenarioConfig, SegmentConfig, SolverSection,
    TechniqueConfig, SCHEMA_VERSION,
};
use crate::constitutive::{technique1_update, ConstitutiveSetup, GaussPointState, Technique};
use crate::dynamics::{inner_radius, Constraints, LoadSchedule, LoadTarget, Model, RampSegment, TimeStep};
use crate::error::{Error, Result};
use crate::geometry::{
    build_lamina_frame, interpolate_geometry, Configuration, GaussRule, Mesh, ShellElement, ShellNode,
};
use crate::kinematics::deformation_gradient_lamina;
use crate::materials::MaterialModel;
use crate::oracles;
use crate::tensor::Vec3;

/// Node index in a `(2nx + 1) × (2ny + 1)` structured grid.
#[inline]
pub fn grid_index(nx: usize, i: usize, j: usize) -> usize {
    j * (2 * nx + 1) + i
}

/// Structured 9-node mesh; `map(u, v)` returns mid-surface position and
/// director for `u, v ∈ [0, 1]`. ξ follows `u`, η follows `v`.
pub fn structured_mesh<F: Fn(f64, f64) -> (Vec3, Vec3)>(nx: usize, ny: usize, thickness: f64, map: F) -> Result<Mesh> {
    let (gx, gy) = (2 * nx + 1, 2 * ny + 1);
    let mut nodes = Vec::with_capacity(gx * gy);
    for j in 0..gy {
        for i in 0..gx {
            let (p, d) = map(i as f64 / (gx - 1) as f64, j as f64 / (gy - 1) as f64);
            nodes.push(ShellNode::new(p, d, thickness));
        }
    }
    let mut elements = Vec::with_capacity(nx * ny);
    for ey in 0..ny {
        for ex in 0..nx {
            let (i0, j0) = (2 * ex, 2 * ey);
            let at = |di: usize, dj: usize| grid_index(nx, i0 + di, j0 + dj);
            elements.push(ShellElement {
                nodes: [
                    at(0, 0),
                    at(2, 0),
                    at(2, 2),
                    at(0, 2),
                    at(1, 0),
                    at(2, 1),
                    at(1, 2),
                    at(0, 1),
                    at(1, 1),
                ],
                material: 0,
            });
        }
    }
    Mesh::new(nodes, elements, GaussRule::default())
}

/// Simpson-type weights `(1, 4, 1)/6` per element along a grid line of
/// `2n + 1` nodes, normalised to sum to one.
pub fn edge_node_weights(n_elements: usize) -> Vec<f64> {
    let mut w = vec![0.0; 2 * n_elements + 1];
    for e in 0..n_elements {
        w[2 * e] += 1.0 / 6.0;
        w[2 * e + 1] += 4.0 / 6.0;
        w[2 * e + 2] += 1.0 / 6.0;
    }
    w.iter().map(|x| x / n_elements as f64).collect()
}

/// Monitored quantities of each experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Probes {
    Cantilever {
        tip_node: usize,
        length: f64,
        bending_stiffness: f64,
    },
    PlateWithHole {
        a: usize,
        b: usize,
        c: usize,
    },
    Square {
        corner: usize,
        x_edge: Vec<usize>,
        y_edge: Vec<usize>,
        half_side: f64,
        thickness: f64,
    },
    Cylinder {
        mid_row: Vec<usize>,
        end_row: Vec<usize>,
        length: f64,
        profile_element: usize,
    },
}

/// A fully specified experiment.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub mesh: Mesh,
    pub constraints: Constraints,
    pub loads: Vec<LoadSchedule>,
    pub probes: Probes,
}

fn segments(list: &[SegmentConfig]) -> Vec<RampSegment> {
    list.iter().map(|&s| s.into()).collect()
}

impl Scenario {
    pub fn from_config(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let segs = segments(&config.load.segments);
        let wrong_target = |expected: &str| Error::Domain {
            field: "load.target".into(),
            message: format!("{:?} does not fit this geometry (expected {expected})", config.load.target),
        };
        let (mesh, constraints, targets, probes) = match config.geometry {
            GeometryConfig::Strip {
                length_m,
                width_m,
                thickness_m,
                length_elements: nx,
                width_elements: ny,
            } => {
                if config.load.target != LoadKind::TipMoment {
                    return Err(wrong_target("tip_moment_N_m"));
                }
                let mesh = structured_mesh(nx, ny, thickness_m, |u, v| {
                    (Vec3::new(u * length_m, v * width_m, 0.0), Vec3::z())
                })?;
                let mut c = Constraints::free(mesh.nodes.len());
                // planar bending: a fixed-axis end moment drives a lateral
                // instability of the strip close to the full circle
                for n in 0..mesh.nodes.len() {
                    c.fix(n, 1);
                    c.fix(n, 3);
                }
                for j in 0..=2 * ny {
                    c.fix_all(grid_index(nx, 0, j));
                }
                let w = edge_node_weights(ny);
                let tip: Vec<(usize, f64)> = (0..=2 * ny).map(|j| (grid_index(nx, 2 * nx, j), w[j])).collect();
                let e = youngs_modulus(&config.material.law)?;
                let ei = e * width_m * thickness_m.powi(3) / 12.0;
                let probes = Probes::Cantilever {
                    tip_node: grid_index(nx, 2 * nx, ny),
                    length: length_m,
                    bending_stiffness: ei,
                };
                // about −y the tip curls toward +z
                let t = vec![LoadTarget::TipMoment {
                    nodes: tip,
                    axis: -Vec3::y(),
                }];
                (mesh, c, t, probes)
            }
            GeometryConfig::PlateWithHole {
                half_width_m: w,
                hole_radius_m: a,
                thickness_m,
            } => {
                if !matches!(config.load.target, LoadKind::EdgeTension | LoadKind::EdgePressure) {
                    return Err(wrong_target("edge_tension_Pa or edge_pressure_Pa"));
                }
                let mesh = structured_mesh(1, 2, thickness_m, |s, v| {
                    let th = v * FRAC_PI_2;
                    let inner = Vec3::new(a * th.cos(), a * th.sin(), 0.0);
                    let outer = if th <= FRAC_PI_4 + 1e-12 {
                        Vec3::new(w, w * th.tan(), 0.0)
                    } else {
                        Vec3::new(w / th.tan(), w, 0.0)
                    };
                    (inner * (1.0 - s) + outer * s, Vec3::z())
                })?;
                let mut c = Constraints::free(mesh.nodes.len());
                for n in 0..mesh.nodes.len() {
                    for d in 2..5 {
                        c.fix(n, d);
                    }
                }
                for i in 0..=2 {
                    c.fix(grid_index(1, i, 0), 1);
                    c.fix(grid_index(1, i, 4), 0);
                }
                let target = match config.load.target {
                    LoadKind::EdgeTension => LoadTarget::EdgeTension {
                        edges: vec![(0, 1)],
                        direction: Vec3::x(),
                    },
                    _ => LoadTarget::EdgePressure { edges: vec![(0, 1)] },
                };
                let probes = Probes::PlateWithHole {
                    a: grid_index(1, 0, 4),
                    b: grid_index(1, 0, 0),
                    c: grid_index(1, 2, 2),
                };
                (mesh, c, vec![target], probes)
            }
            GeometryConfig::Square { side_m, thickness_m } => {
                if config.load.target != LoadKind::EdgeTension {
                    return Err(wrong_target("edge_tension_Pa"));
                }
                let a = 0.5 * side_m;
                let mesh = structured_mesh(1, 1, thickness_m, |u, v| (Vec3::new(a * u, a * v, 0.0), Vec3::z()))?;
                let mut c = Constraints::free(mesh.nodes.len());
                for n in 0..mesh.nodes.len() {
                    for d in 2..5 {
                        c.fix(n, d);
                    }
                }
                for k in 0..=2 {
                    c.fix(grid_index(1, 0, k), 0);
                    c.fix(grid_index(1, k, 0), 1);
                }
                let t = vec![
                    LoadTarget::EdgeTension {
                        edges: vec![(0, 1)],
                        direction: Vec3::x(),
                    },
                    LoadTarget::EdgeTension {
                        edges: vec![(0, 2)],
                        direction: Vec3::y(),
                    },
                ];
                let probes = Probes::Square {
                    corner: grid_index(1, 2, 2),
                    x_edge: (0..=2).map(|j| grid_index(1, 2, j)).collect(),
                    y_edge: (0..=2).map(|i| grid_index(1, i, 2)).collect(),
                    half_side: a,
                    thickness: thickness_m,
                };
                (mesh, c, t, probes)
            }
            GeometryConfig::Cylinder {
                inner_radius_m,
                wall_thickness_m,
                length_m,
                circumferential_elements: nx,
                axial_elements: ny,
                profile_row,
            } => {
                if config.load.target != LoadKind::FollowerPressure {
                    return Err(wrong_target("follower_pressure_Pa"));
                }
                let rm = inner_radius_m + 0.5 * wall_thickness_m;
                let mesh = structured_mesh(nx, ny, wall_thickness_m, |u, v| {
                    let th = u * FRAC_PI_2;
                    let radial = Vec3::new(th.cos(), th.sin(), 0.0);
                    (radial * rm + Vec3::new(0.0, 0.0, v * length_m), radial)
                })?;
                let mut c = Constraints::free(mesh.nodes.len());
                for j in 0..=2 * ny {
                    // y = 0 and x = 0 symmetry planes: no normal motion, no rotation about z
                    let n0 = grid_index(nx, 0, j);
                    c.fix(n0, 1);
                    c.fix(n0, 4);
                    let n1 = grid_index(nx, 2 * nx, j);
                    c.fix(n1, 0);
                    c.fix(n1, 4);
                }
                for i in 0..=2 * nx {
                    let n = grid_index(nx, i, 0);
                    c.fix(n, 2);
                    c.fix(n, 3);
                }
                let w = edge_node_weights(nx);
                let end_row: Vec<usize> = (0..=2 * nx).map(|i| grid_index(nx, i, 2 * ny)).collect();
                let mid_row: Vec<usize> = (0..=2 * nx).map(|i| grid_index(nx, i, ny)).collect();
                let t = vec![
                    LoadTarget::FollowerPressure {
                        elements: (0..mesh.elements.len()).collect(),
                        zeta: -1.0,
                    },
                    LoadTarget::CapForce {
                        nodes: end_row.iter().copied().zip(w).collect(),
                        radius_nodes: end_row.clone(),
                        axis: Vec3::z(),
                        sector: 0.25,
                    },
                ];
                let probes = Probes::Cylinder {
                    mid_row,
                    end_row,
                    length: length_m,
                    profile_element: profile_row * nx,
                };
                (mesh, c, t, probes)
            }
        };
        let mut mesh = mesh;
        mesh.rule.in_plane = config.solver.in_plane_gauss_points;
        let loads = targets
            .into_iter()
            .map(|target| LoadSchedule {
                segments: segs.clone(),
                target,
            })
            .collect();
        Ok(Scenario {
            config,
            mesh,
            constraints,
            loads,
            probes,
        })
    }

    pub fn setup(&self, technique: Technique) -> Result<ConstitutiveSetup> {
        ConstitutiveSetup::new(
            technique,
            self.config.material.law,
            self.config.technique.constant_tensor_poisson_ratio,
        )
    }

    /// Explicit model for the configured technique.
    pub fn model(&self) -> Result<Model> {
        self.model_with(self.config.technique.selector, None)
    }

    /// Explicit model with technique and time-step overrides.
    pub fn model_with(&self, technique: Technique, dt: Option<TimeStep>) -> Result<Model> {
        let mut solver = self.config.solver.to_solver();
        if let Some(dt) = dt {
            solver.time_step = dt;
        }
        Model::new(
            self.mesh.clone(),
            self.setup(technique)?,
            self.config.material.density_kg_per_m3,
            self.constraints.clone(),
            self.loads.clone(),
            solver,
        )
    }

    /// Replaces every load history, e.g. for the loading-rate study.
    pub fn with_segments(&self, list: &[SegmentConfig]) -> Self {
        let mut s = self.clone();
        s.config.load.segments = list.to_vec();
        for l in &mut s.loads {
            l.segments = segments(list);
        }
        s
    }

    pub fn load_value(&self, t: f64) -> f64 {
        self.loads.first().map_or(0.0, |l| l.value_at(t))
    }

    pub fn probe_header(&self) -> Vec<&'static str> {
        match self.probes {
            Probes::Cantilever { .. } => vec![
                "time_s",
                "moment_N_m",
                "tip_axial_m",
                "tip_transverse_m",
                "oracle_axial_m",
                "oracle_transverse_m",
            ],
            Probes::PlateWithHole { .. } => vec![
                "time_s",
                "traction_Pa",
                "a_ux_m",
                "a_uy_m",
                "b_ux_m",
                "b_uy_m",
                "c_ux_m",
                "c_uy_m",
                "max_green_lagrange",
                "volume_change_pct",
            ],
            Probes::Square { .. } => vec![
                "time_s",
                "traction_Pa",
                "stretch_11",
                "stretch_22",
                "green_11",
                "green_22",
                "tension_11_N_per_m",
                "tension_22_N_per_m",
                "oracle_tension_11_N_per_m",
                "oracle_tension_22_N_per_m",
            ],
            Probes::Cylinder { .. } => vec!["time_s", "pressure_Pa", "inner_radius_m", "axial_stretch"],
        }
    }

    /// One probe row for the current model state, matching [`probe_header`](Self::probe_header).
    pub fn probe_row(&self, model: &Model) -> Result<Vec<f64>> {
        let t = model.time;
        let value = self.load_value(t);
        let nodes = &model.mesh.nodes;
        Ok(match &self.probes {
            Probes::Cantilever {
                tip_node,
                length,
                bending_stiffness,
            } => {
                let u = nodes[*tip_node].displacement();
                let (ox, oy) = oracles::elastica(value, *bending_stiffness, *length)?;
                vec![t, value, u.x, u.z, ox, oy]
            }
            Probes::PlateWithHole { a, b, c } => {
                let (ua, ub, uc) = (nodes[*a].displacement(), nodes[*b].displacement(), nodes[*c].displacement());
                vec![
                    t,
                    value,
                    ua.x,
                    ua.y,
                    ub.x,
                    ub.y,
                    uc.x,
                    uc.y,
                    model.max_green_lagrange(),
                    100.0 * model.volume_change(),
                ]
            }
            Probes::Square {
                corner,
                x_edge,
                y_edge,
                half_side,
                thickness,
            } => {
                let p = nodes[*corner].position;
                let (l1, l2) = (p.x / half_side, p.y / half_side);
                let fx: f64 = x_edge.iter().map(|&n| model.f_int.block(n)[0]).sum();
                let fy: f64 = y_edge.iter().map(|&n| model.f_int.block(n)[1]).sum();
                let (t11, t22) = (fx / (half_side * l1), fy / (half_side * l2));
                let (o11, o22) = oracles::biaxial_point(&self.config.material.law, l1, l2, *thickness)?;
                vec![
                    t,
                    value,
                    l1,
                    l2,
                    0.5 * (l1 * l1 - 1.0),
                    0.5 * (l2 * l2 - 1.0),
                    t11,
                    t22,
                    o11,
                    o22,
                ]
            }
            Probes::Cylinder {
                mid_row,
                end_row,
                length,
                ..
            } => {
                let ri = inner_radius(nodes, mid_row, &Vec3::z());
                let lz = end_row.iter().map(|&n| nodes[n].position.z).sum::<f64>() / end_row.len() as f64 / length;
                vec![t, value, ri, lz]
            }
        })
    }

    /// Wall stresses through the thickness at the centre of the profile
    /// element, from the total deformation gradient.
    /// Rows: `(zeta, radius, σ_rr, σ_θθ, σ_zz)` in the global cylindrical basis.
    pub fn wall_profile(&self, model: &Model, zetas: &[f64]) -> Result<Vec<[f64; 5]>> {
        let element = match self.probes {
            Probes::Cylinder { profile_element, .. } => profile_element,
            _ => {
                return Err(Error::Domain {
                    field: "probes".into(),
                    message: "wall profile exists only for cylinder scenarios".into(),
                })
            }
        };
        let el = &model.mesh.elements[element];
        let nodes = &model.mesh.nodes;
        let mut out = Vec::with_capacity(zetas.len());
        for &z in zetas {
            let (x, jc) = interpolate_geometry(el, nodes, 0.0, 0.0, z, Configuration::Current);
            let (_, jr) = interpolate_geometry(el, nodes, 0.0, 0.0, z, Configuration::Reference);
            let (fc, fr) = (build_lamina_frame(&jc)?, build_lamina_frame(&jr)?);
            let f = deformation_gradient_lamina(&(jc * fc.matrix()), &(jr * fr.matrix()))?;
            let mut gp = GaussPointState::new(jr, fr);
            let sl = technique1_update(&mut gp, &f, &self.config.material.law, false)?;
            let r = fc.matrix();
            let sigma = r * sl.to_mat3() * r.transpose();
            let radial = Vec3::new(x.x, x.y, 0.0).normalize();
            let hoop = Vec3::z().cross(&radial);
            out.push([
                z,
                (x.x * x.x + x.y * x.y).sqrt(),
                radial.dot(&(sigma * radial)),
                hoop.dot(&(sigma * hoop)),
                Vec3::z().dot(&(sigma * Vec3::z())),
            ]);
        }
        Ok(out)
    }
}

/// Young's modulus of a linear model, or the small-strain equivalent
/// `3μ` of a hyperelastic one.
fn youngs_modulus(model: &MaterialModel) -> Result<f64> {
    Ok(match *model {
        MaterialModel::LinearElastic { youngs_modulus, .. } => youngs_modulus,
        MaterialModel::MooneyRivlin { c1, c2 } => 6.0 * (c1 + c2),
        _ => {
            let d = crate::materials::small_strain_tangent(model)?;
            0.75 * d.0[(0, 0)]
        }
    })
}

fn seg(start: f64, end: f64, duration_s: f64) -> SegmentConfig {
    SegmentConfig { start, end, duration_s }
}

fn solver(end_time_s: f64, output_stride: usize) -> SolverSection {
    SolverSection {
        dt: DtSetting(TimeStep::Auto),
        safety_factor: 0.8,
        end_time_s,
        output_stride,
        damping_per_s: 0.0,
        dt_refresh_steps: 20,
        rotary_inertia_scale: None,
        in_plane_gauss_points: 3,
    }
}

/// Cantilever moment ramp: nominal duration at full rate and the
/// fundamental bending period of the default strip (s).
pub const EXP1_RAMP_S: f64 = 150.0;
pub const EXP1_PERIOD_S: f64 = 56.0;
/// Plate-with-hole loading rate (Pa/s) and peak nominal traction (Pa).
pub const EXP2_RATE_PA_PER_S: f64 = 6.21e6;
pub const EXP2_PEAK_PA: f64 = 7.0e5;

/// Default configuration of each experiment.
pub fn default_config(id: u32) -> Result<ScenarioConfig> {
    let guccione_tube = MaterialModel::Guccione3D {
        c1: 10_000.0,
        c2: 30.0,
        c3: 10.0,
        c4: 15.0,
    };
    let tube = GeometryConfig::Cylinder {
        inner_radius_m: 0.0125,
        wall_thickness_m: 0.0025,
        length_m: 0.04,
        circumferential_elements: 2,
        axial_elements: 8,
        profile_row: 1,
    };
    let cfg = match id {
        1 => {
            let (l, w, h, e) = (10.0, 1.0, 0.1, 1.2e7);
            let ei = e * w * h * h * h / 12.0;
            let peak = 2.0 * PI * ei / l;
            let rate = peak / EXP1_RAMP_S;
            // half rate over the first half period cancels the start-up
            // oscillation of the fundamental bending mode
            let lead = 0.5 * EXP1_PERIOD_S;
            let first = 0.5 * rate * lead;
            let mut solver = solver(lead + (peak - first) / rate, 2000);
            solver.in_plane_gauss_points = 2;
            // linear material: the spectrum changes only with geometry
            solver.dt_refresh_steps = 200;
            ScenarioConfig {
                schema_version: SCHEMA_VERSION,
                name: "experiment1".into(),
                experiment: 1,
                geometry: GeometryConfig::Strip {
                    length_m: l,
                    width_m: w,
                    thickness_m: h,
                    length_elements: 15,
                    width_elements: 1,
                },
                material: MaterialConfig {
                    density_kg_per_m3: 1000.0,
                    law: MaterialModel::LinearElastic {
                        youngs_modulus: e,
                        poisson_ratio: 0.0,
                    },
                },
                technique: TechniqueConfig {
                    selector: Technique::Technique2,
                    constant_tensor_poisson_ratio: 0.499,
                },
                load: LoadConfig {
                    target: LoadKind::TipMoment,
                    segments: vec![seg(0.0, first, lead), seg(first, peak, (peak - first) / rate)],
                    alternate_segments: None,
                },
                solver,
            }
        }
        2 => {
            let ramp = EXP2_PEAK_PA / EXP2_RATE_PA_PER_S;
            ScenarioConfig {
                schema_version: SCHEMA_VERSION,
                name: "experiment2".into(),
                experiment: 2,
                geometry: GeometryConfig::PlateWithHole {
                    half_width_m: 0.2,
                    hole_radius_m: 0.05,
                    thickness_m: 0.01,
                },
                material: MaterialConfig {
                    density_kg_per_m3: 1000.0,
                    law: MaterialModel::MooneyRivlin {
                        c1: 0.1724e6,
                        c2: 0.0483e6,
                    },
                },
                technique: TechniqueConfig {
                    selector: Technique::Technique1,
                    constant_tensor_poisson_ratio: 0.499,
                },
                load: LoadConfig {
                    target: LoadKind::EdgeTension,
                    segments: vec![seg(0.0, EXP2_PEAK_PA, ramp)],
                    alternate_segments: None,
                },
                solver: solver(ramp, 1),
            }
        }
        3 => ScenarioConfig {
            schema_version: SCHEMA_VERSION,
            name: "experiment3".into(),
            experiment: 3,
            geometry: GeometryConfig::Square {
                side_m: 0.025,
                thickness_m: 0.0004,
            },
            material: MaterialConfig {
                density_kg_per_m3: 1000.0,
                law: MaterialModel::Guccione3D {
                    c1: 2000.0,
                    c2: 30.0,
                    c3: 10.0,
                    c4: 5.0,
                },
            },
            technique: TechniqueConfig {
                selector: Technique::Technique1,
                constant_tensor_poisson_ratio: 0.499,
            },
            load: LoadConfig {
                target: LoadKind::EdgeTension,
                segments: vec![seg(0.0, 12_000.0, 0.5)],
                alternate_segments: None,
            },
            solver: solver(0.5, 200),
        },
        4 => ScenarioConfig {
            schema_version: SCHEMA_VERSION,
            name: "experiment4".into(),
            experiment: 4,
            geometry: tube.clone(),
            material: MaterialConfig {
                density_kg_per_m3: 1060.0,
                law: guccione_tube,
            },
            technique: TechniqueConfig {
                selector: Technique::Technique1,
                constant_tensor_poisson_ratio: 0.499,
            },
            load: LoadConfig {
                target: LoadKind::FollowerPressure,
                segments: vec![seg(0.0, 18_660.0, 0.07)],
                alternate_segments: None,
            },
            solver: solver(0.07, 20),
        },
        5 => ScenarioConfig {
            schema_version: SCHEMA_VERSION,
            name: "experiment5".into(),
            experiment: 5,
            geometry: tube,
            material: MaterialConfig {
                density_kg_per_m3: 1060.0,
                law: guccione_tube,
            },
            technique: TechniqueConfig {
                selector: Technique::Technique1,
                constant_tensor_poisson_ratio: 0.499,
            },
            load: LoadConfig {
                target: LoadKind::FollowerPressure,
                segments: vec![seg(0.0, 26_660.0, 0.1), seg(26_660.0, 26_660.0, 0.05)],
                alternate_segments: Some(vec![seg(0.0, 26_660.0, 0.01), seg(26_660.0, 26_660.0, 0.14)]),
            },
            solver: solver(0.15, 20),
        },
        other => return Err(Error::InvalidExperiment(other)),
    };
    Ok(cfg)
}

/// Default scenario of an experiment.
pub fn build_experiment(id: u32) -> Result<Scenario> {
    Scenario::from_config(default_config(id)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_id() {
        assert!(matches!(build_experiment(0), Err(Error::InvalidExperiment(0))));
        assert!(matches!(build_experiment(6), Err(Error::InvalidExperiment(6))));
    }

    #[test]
    fn mesh_sizes() {
        let s = build_experiment(1).unwrap();
        assert_eq!(s.mesh.elements.len(), 15);
        assert_eq!(s.mesh.nodes.len(), 31 * 3);
        let s = build_experiment(4).unwrap();
        assert_eq!(s.mesh.elements.len(), 16);
        let s = build_experiment(2).unwrap();
        assert_eq!(s.mesh.elements.len(), 2);
        assert_eq!(s.mesh.nodes.len(), 15);
    }

    #[test]
    fn weights_sum_to_one() {
        for n in 1..4 {
            assert!((edge_node_weights(n).iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }
}
