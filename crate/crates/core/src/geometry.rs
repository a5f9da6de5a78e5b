//! Nine-node degenerated shell geometry: nodes, elements, Gauss rules,
//! lamina and fiber frames, and the fiber-length update.
//!
//! Jacobians follow the row convention: row `k` of `J` holds `∂x/∂ξ_k`
//! with `(ξ_1, ξ_2, ξ_3) = (ξ, η, ζ)`. With that layout the lamina
//! deformation gradient is `F = J_curᵀ J_ref⁻ᵀ`.

use crate::error::{Error, Result};
use crate::tensor::{Mat3, Vec3};

/// Parent coordinates of the nine nodes: corners, mid-edges, center.
pub const NODE_PARENT_COORDS: [(f64, f64); 9] = [
    (-1.0, -1.0),
    (1.0, -1.0),
    (1.0, 1.0),
    (-1.0, 1.0),
    (0.0, -1.0),
    (1.0, 0.0),
    (0.0, 1.0),
    (-1.0, 0.0),
    (0.0, 0.0),
];

/// Local node indices along each edge, in increasing parent coordinate.
/// Order: η = −1, ξ = +1, η = +1, ξ = −1.
pub const EDGE_NODES: [[usize; 3]; 4] = [[0, 4, 1], [1, 5, 2], [3, 6, 2], [0, 7, 3]];

/// Orthonormal right-handed triad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub e1: Vec3,
    pub e2: Vec3,
    pub e3: Vec3,
}

impl Frame {
    pub fn global() -> Self {
        Frame {
            e1: Vec3::x(),
            e2: Vec3::y(),
            e3: Vec3::z(),
        }
    }

    /// Columns are `e1, e2, e3`; maps lamina components to global ones.
    pub fn matrix(&self) -> Mat3 {
        Mat3::from_columns(&[self.e1, self.e2, self.e3])
    }

    pub fn rotated(&self, r: &Mat3) -> Self {
        Frame {
            e1: r * self.e1,
            e2: r * self.e2,
            e3: r * self.e3,
        }
    }

    /// Largest deviation from orthonormality and right-handedness.
    pub fn orthonormality_error(&self) -> f64 {
        let m = self.matrix();
        let ortho = (m.transpose() * m - Mat3::identity()).amax();
        let hand = (self.e1.cross(&self.e2) - self.e3).amax();
        ortho.max(hand)
    }
}

/// 1D quadratic Lagrange basis at nodes −1, 0, 1 and its derivative.
#[inline]
fn quad_1d(s: f64) -> ([f64; 3], [f64; 3]) {
    (
        [0.5 * s * (s - 1.0), 1.0 - s * s, 0.5 * s * (s + 1.0)],
        [s - 0.5, -2.0 * s, s + 0.5],
    )
}

#[inline]
fn slot(c: f64) -> usize {
    if c < -0.5 {
        0
    } else if c > 0.5 {
        2
    } else {
        1
    }
}

/// Biquadratic shape functions and their (ξ, η) derivatives.
#[derive(Debug, Clone, Copy)]
pub struct ShapeValues {
    pub n: [f64; 9],
    pub dn_dxi: [f64; 9],
    pub dn_deta: [f64; 9],
}

pub fn shape_functions(xi: f64, eta: f64) -> ShapeValues {
    let (lx, dlx) = quad_1d(xi);
    let (ly, dly) = quad_1d(eta);
    let mut out = ShapeValues {
        n: [0.0; 9],
        dn_dxi: [0.0; 9],
        dn_deta: [0.0; 9],
    };
    for (a, &(px, py)) in NODE_PARENT_COORDS.iter().enumerate() {
        let (i, j) = (slot(px), slot(py));
        out.n[a] = lx[i] * ly[j];
        out.dn_dxi[a] = dlx[i] * ly[j];
        out.dn_deta[a] = lx[i] * dly[j];
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussPoint {
    pub xi: f64,
    pub eta: f64,
    pub zeta: f64,
    pub weight: f64,
}

/// Gauss–Legendre abscissae and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    match n {
        1 => vec![(0.0, 2.0)],
        2 => {
            let a = 1.0 / 3f64.sqrt();
            vec![(-a, 1.0), (a, 1.0)]
        }
        3 => {
            let a = (0.6f64).sqrt();
            vec![(-a, 5.0 / 9.0), (0.0, 8.0 / 9.0), (a, 5.0 / 9.0)]
        }
        _ => {
            let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
            let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
            let wa = (18.0 + 30f64.sqrt()) / 36.0;
            let wb = (18.0 - 30f64.sqrt()) / 36.0;
            vec![(-b, wb), (-a, wa), (a, wa), (b, wb)]
        }
    }
}

/// Tensor-product rule: `in_plane × in_plane` over (ξ, η) and `thickness` over ζ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussRule {
    pub in_plane: usize,
    pub thickness: usize,
}

impl Default for GaussRule {
    fn default() -> Self {
        GaussRule {
            in_plane: 3,
            thickness: 2,
        }
    }
}

impl GaussRule {
    pub fn points(&self) -> Vec<GaussPoint> {
        let ip = gauss_legendre(self.in_plane);
        let th = gauss_legendre(self.thickness);
        let mut pts = Vec::with_capacity(ip.len() * ip.len() * th.len());
        for &(zeta, wz) in &th {
            for &(eta, we) in &ip {
                for &(xi, wx) in &ip {
                    pts.push(GaussPoint {
                        xi,
                        eta,
                        zeta,
                        weight: wx * we * wz,
                    });
                }
            }
        }
        pts
    }

    /// Mid-surface (ζ = 0) rule for surface integrals.
    pub fn surface_points(&self) -> Vec<GaussPoint> {
        let ip = gauss_legendre(self.in_plane);
        let mut pts = Vec::with_capacity(ip.len() * ip.len());
        for &(eta, we) in &ip {
            for &(xi, wx) in &ip {
                pts.push(GaussPoint {
                    xi,
                    eta,
                    zeta: 0.0,
                    weight: wx * we,
                });
            }
        }
        pts
    }
}

/// Nodal kinematic and inertial state.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellNode {
    pub ref_position: Vec3,
    pub position: Vec3,
    pub ref_director: Vec3,
    pub director: Vec3,
    pub ref_thickness: f64,
    pub thickness: f64,
    pub velocity: Vec3,
    /// Rates about the fiber-frame axes e1ᶠ and e2ᶠ.
    pub angular_velocity: [f64; 2],
    pub fiber_frame: Frame,
    pub prev_fiber_frame: Frame,
    pub mass: f64,
    pub inertia: f64,
}

impl ShellNode {
    pub fn new(position: Vec3, director: Vec3, thickness: f64) -> Self {
        let d = director.normalize();
        ShellNode {
            ref_position: position,
            position,
            ref_director: d,
            director: d,
            ref_thickness: thickness,
            thickness,
            velocity: Vec3::zeros(),
            angular_velocity: [0.0; 2],
            fiber_frame: Frame::global(),
            prev_fiber_frame: Frame::global(),
            mass: 0.0,
            inertia: 0.0,
        }
    }

    pub fn displacement(&self) -> Vec3 {
        self.position - self.ref_position
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShellElement {
    pub nodes: [usize; 9],
    pub material: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Configuration {
    Reference,
    Current,
}

/// Position and Jacobian of the shell map at a parent point.
pub fn interpolate_geometry(
    element: &ShellElement,
    nodes: &[ShellNode],
    xi: f64,
    eta: f64,
    zeta: f64,
    config: Configuration,
) -> (Vec3, Mat3) {
    let sf = shape_functions(xi, eta);
    let mut x = Vec3::zeros();
    let mut j = Mat3::zeros();
    for (a, &idx) in element.nodes.iter().enumerate() {
        let node = &nodes[idx];
        let (xbar, dir, h) = match config {
            Configuration::Reference => (node.ref_position, node.ref_director, node.ref_thickness),
            Configuration::Current => (node.position, node.director, node.thickness),
        };
        let half = 0.5 * h * dir;
        let p = xbar + zeta * half;
        x += sf.n[a] * p;
        for c in 0..3 {
            j[(0, c)] += sf.dn_dxi[a] * p[c];
            j[(1, c)] += sf.dn_deta[a] * p[c];
            j[(2, c)] += sf.n[a] * half[c];
        }
    }
    (x, j)
}

/// Same as [`interpolate_geometry`] but rejects inverted elements.
pub fn checked_geometry(
    element_index: usize,
    element: &ShellElement,
    nodes: &[ShellNode],
    gp: &GaussPoint,
    config: Configuration,
) -> Result<(Vec3, Mat3)> {
    let (x, j) = interpolate_geometry(element, nodes, gp.xi, gp.eta, gp.zeta, config);
    let det = j.determinant();
    if !(det > 0.0) {
        return Err(Error::InvertedElement {
            element: element_index,
            det,
        });
    }
    Ok((x, j))
}

/// Lamina frame from the surface tangents in rows 0 and 1 of `j`.
///
/// `e3` is the unit normal; `e1`, `e2` are placed symmetrically about the
/// bisector of the two tangents so the result does not depend on which
/// tangent is called first.
pub fn build_lamina_frame(j: &Mat3) -> Result<Frame> {
    let g1: Vec3 = j.row(0).transpose();
    let g2: Vec3 = j.row(1).transpose();
    build_lamina_frame_from_tangents(&g1, &g2)
}

pub fn build_lamina_frame_from_tangents(g1: &Vec3, g2: &Vec3) -> Result<Frame> {
    let n = g1.cross(g2);
    let norm = n.norm();
    let scale = g1.norm() * g2.norm();
    if !(norm > 1e-12 * scale.max(1e-300)) || norm < 1e-300 {
        return Err(Error::DegenerateSurfaceTangents { norm });
    }
    let e3 = n / norm;
    let a = g1 / g1.norm() + g2 / g2.norm();
    let a = a.normalize();
    let b = e3.cross(&a);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let e1 = (a - b) * s;
    let e2 = (a + b) * s;
    Ok(Frame { e1, e2, e3 })
}

/// Fiber-frame update that tracks the previous step's frame.
///
/// `e3ᶠ = Ŷ`, `e2ᶠ = Ŷ × e_jᶠ,prev / |·|` with `j = 1`, `e1ᶠ = e2ᶠ × Ŷ`.
/// Falls back to `j = 2` when the director is parallel to the previous
/// `e1ᶠ`. Valid while per-step rotations stay below 45°.
pub fn update_fiber_frame(director: &Vec3, prev: &Frame) -> Result<Frame> {
    let y = director.normalize();
    let c1 = y.cross(&prev.e1);
    let (e2, e1) = if c1.norm() >= 1e-10 {
        let e2 = c1.normalize();
        (e2, e2.cross(&y))
    } else {
        // j = 2: e1ᶠ = Ŷ × e2ᶠ,prev keeps the triad right-handed
        let c2 = y.cross(&prev.e2);
        if c2.norm() < 1e-10 {
            return Err(Error::DegenerateFiberFrame);
        }
        let e1 = -c2.normalize();
        (y.cross(&e1), e1)
    };
    Ok(Frame { e1, e2, e3: y })
}

/// Fixed-global-axis variant kept as a negative control: it flips the
/// in-plane axes once the director rotates past 90° from the axis plane.
pub fn update_fiber_frame_fixed_axis(director: &Vec3, axis: &Vec3) -> Result<Frame> {
    let y = director.normalize();
    let c = y.cross(axis);
    if c.norm() < 1e-10 {
        return Err(Error::DegenerateFiberFrame);
    }
    let e2 = c.normalize();
    let e1 = e2.cross(&y);
    Ok(Frame { e1, e2, e3: y })
}

/// Incompressible fiber length from the in-plane stretch product λ1·λ2.
pub fn update_fiber_length(ref_thickness: f64, stretch_product: f64) -> Result<f64> {
    if !(stretch_product > 0.0) {
        return Err(Error::NonPositiveStretch(stretch_product));
    }
    Ok(ref_thickness / stretch_product)
}

/// Compressible fiber length from the constitutive thickness stretch λ3.
pub fn update_fiber_length_compressible(ref_thickness: f64, thickness_stretch: f64) -> Result<f64> {
    if !(thickness_stretch > 0.0) {
        return Err(Error::NonPositiveStretch(thickness_stretch));
    }
    Ok(ref_thickness * thickness_stretch)
}

/// Mid-surface area ratio `|g1 × g2| / |G1 × G2|` at a parent point.
pub fn area_ratio(element: &ShellElement, nodes: &[ShellNode], xi: f64, eta: f64) -> f64 {
    let (_, jc) = interpolate_geometry(element, nodes, xi, eta, 0.0, Configuration::Current);
    let (_, jr) = interpolate_geometry(element, nodes, xi, eta, 0.0, Configuration::Reference);
    let ac = jc.row(0).cross(&jc.row(1)).norm();
    let ar = jr.row(0).cross(&jr.row(1)).norm();
    ac / ar
}

/// The shell mesh: nodes, elements, material table indices and Gauss rule.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<ShellNode>,
    pub elements: Vec<ShellElement>,
    pub rule: GaussRule,
}

impl Mesh {
    pub fn new(nodes: Vec<ShellNode>, elements: Vec<ShellElement>, rule: GaussRule) -> Result<Self> {
        let mesh = Mesh {
            nodes,
            elements,
            rule,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Checks index ranges, distinct element nodes and positive reference Jacobians.
    pub fn validate(&self) -> Result<()> {
        for (e, el) in self.elements.iter().enumerate() {
            for (k, &n) in el.nodes.iter().enumerate() {
                if n >= self.nodes.len() {
                    return Err(Error::InvalidMesh(format!("element {e} references node {n}")));
                }
                if el.nodes[..k].contains(&n) {
                    return Err(Error::InvalidMesh(format!("element {e} repeats node {n}")));
                }
            }
            for gp in self.rule.points() {
                checked_geometry(e, el, &self.nodes, &gp, Configuration::Reference)?;
            }
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if !(n.ref_thickness > 0.0) {
                return Err(Error::InvalidMesh(format!("node {i} has non-positive thickness")));
            }
        }
        Ok(())
    }

    /// Gauss-integrated volume, `Σ w det J`.
    pub fn volume(&self, config: Configuration) -> f64 {
        let pts = self.rule.points();
        self.elements
            .iter()
            .map(|el| {
                pts.iter()
                    .map(|gp| {
                        let (_, j) = interpolate_geometry(el, &self.nodes, gp.xi, gp.eta, gp.zeta, config);
                        gp.weight * j.determinant()
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    /// For each node, the (element, local index) pairs that reference it.
    pub fn node_elements(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (e, el) in self.elements.iter().enumerate() {
            for (a, &n) in el.nodes.iter().enumerate() {
                out[n].push((e, a));
            }
        }
        out
    }

    /// Nodal lamina frames in the current configuration, taken from the
    /// first element that references each node.
    pub fn nodal_lamina_frames(&self) -> Result<Vec<Frame>> {
        let adj = self.node_elements();
        adj.iter()
            .enumerate()
            .map(|(i, list)| {
                let &(e, a) = list
                    .first()
                    .ok_or_else(|| Error::InvalidMesh(format!("node {i} is not used by any element")))?;
                let (xi, eta) = NODE_PARENT_COORDS[a];
                let (_, j) =
                    interpolate_geometry(&self.elements[e], &self.nodes, xi, eta, 0.0, Configuration::Current);
                build_lamina_frame(&j)
            })
            .collect()
    }

    /// Sets every fiber frame (and its previous-step copy) to the nodal lamina frame.
    pub fn initialize_fiber_frames(&mut self) -> Result<()> {
        let frames = self.nodal_lamina_frames()?;
        for (node, lamina) in self.nodes.iter_mut().zip(frames) {
            // the fiber frame carries the director as e3; align it when the
            // director is not exactly the surface normal
            let frame = if (lamina.e3 - node.director).norm() < 1e-12 {
                lamina
            } else {
                update_fiber_frame(&node.director, &lamina)?
            };
            node.fiber_frame = frame;
            node.prev_fiber_frame = frame;
        }
        Ok(())
    }
}

impl Mesh {
    /// Sets every fiber frame so that `e1ᶠ` is the ξ-tangent projected
    /// normal to the director. On structured meshes this puts the two
    /// rotational DOFs about mesh-aligned axes, so symmetry conditions act
    /// on single DOFs.
    pub fn align_fiber_frames_with_xi(&mut self) -> Result<()> {
        let adj = self.node_elements();
        for (i, list) in adj.iter().enumerate() {
            let &(e, a) = list
                .first()
                .ok_or_else(|| Error::InvalidMesh(format!("node {i} is not used by any element")))?;
            let (xi, eta) = NODE_PARENT_COORDS[a];
            let (_, j) = interpolate_geometry(&self.elements[e], &self.nodes, xi, eta, 0.0, Configuration::Current);
            let y = self.nodes[i].director;
            let t: Vec3 = j.row(0).transpose();
            let t = t - t.dot(&y) * y;
            if t.norm() < 1e-12 {
                return Err(Error::DegenerateFiberFrame);
            }
            let e1 = t.normalize();
            let frame = Frame {
                e1,
                e2: y.cross(&e1),
                e3: y,
            };
            self.nodes[i].fiber_frame = frame;
            self.nodes[i].prev_fiber_frame = frame;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn flat_square(side: f64, h: f64) -> Mesh {
        let nodes = NODE_PARENT_COORDS
            .iter()
            .map(|&(px, py)| {
                ShellNode::new(
                    Vec3::new(0.5 * side * (px + 1.0), 0.5 * side * (py + 1.0), 0.0),
                    Vec3::z(),
                    h,
                )
            })
            .collect();
        let el = ShellElement {
            nodes: [0, 1, 2, 3, 4, 5, 6, 7, 8],
            material: 0,
        };
        Mesh::new(nodes, vec![el], GaussRule::default()).unwrap()
    }

    #[test]
    fn shape_functions_partition_unity_and_kronecker() {
        for &(xi, eta) in &[(0.3, -0.7), (0.0, 0.0), (0.91, 0.12)] {
            let s = shape_functions(xi, eta);
            assert!((s.n.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(s.dn_dxi.iter().sum::<f64>().abs() < 1e-14);
            assert!(s.dn_deta.iter().sum::<f64>().abs() < 1e-14);
        }
        for (a, &(px, py)) in NODE_PARENT_COORDS.iter().enumerate() {
            let s = shape_functions(px, py);
            for b in 0..9 {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((s.n[b] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gauss_weights_sum_to_parent_volume() {
        let w: f64 = GaussRule::default().points().iter().map(|g| g.weight).sum();
        assert!((w - 8.0).abs() < 1e-13);
        assert_eq!(GaussRule::default().points().len(), 18);
    }

    #[test]
    fn flat_unit_square_geometry() {
        let mesh = flat_square(1.0, 0.1);
        let el = &mesh.elements[0];
        let (x, j) = interpolate_geometry(el, &mesh.nodes, 0.0, 0.0, 0.0, Configuration::Reference);
        assert!((x - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-14);
        let expect = Mat3::from_diagonal(&Vec3::new(0.5, 0.5, 0.05));
        assert!((j - expect).amax() < 1e-14);
        let (x1, _) = interpolate_geometry(el, &mesh.nodes, 0.0, 0.0, 1.0, Configuration::Reference);
        assert!((x1 - x - Vec3::new(0.0, 0.0, 0.05)).norm() < 1e-14);
        assert!((mesh.volume(Configuration::Reference) - 0.1).abs() < 1e-13);
    }

    #[test]
    fn lamina_frame_global_and_symmetric() {
        let f = build_lamina_frame_from_tangents(&Vec3::x(), &Vec3::y()).unwrap();
        assert!((f.e1 - Vec3::x()).norm() < 1e-15);
        assert!((f.e2 - Vec3::y()).norm() < 1e-15);
        assert!((f.e3 - Vec3::z()).norm() < 1e-15);

        let ang = 80f64.to_radians();
        let g2 = Vec3::new(ang.cos(), ang.sin(), 0.0);
        let f = build_lamina_frame_from_tangents(&Vec3::x(), &g2).unwrap();
        assert!((f.e3 - Vec3::z()).norm() < 1e-14);
        assert!((f.e1.dot(&Vec3::x()) - f.e2.dot(&g2)).abs() < 1e-14);
        assert!(f.orthonormality_error() < 1e-14);
    }

    #[test]
    fn lamina_frame_rejects_parallel_tangents() {
        let err = build_lamina_frame_from_tangents(&Vec3::x(), &(2.0 * Vec3::x())).unwrap_err();
        assert!(err.to_string().contains("degenerate surface tangents"));
    }

    #[test]
    fn fiber_frame_no_motion_is_identity() {
        let f = update_fiber_frame(&Vec3::z(), &Frame::global()).unwrap();
        assert!((f.e1 - Vec3::x()).norm() < 1e-15);
        assert!((f.e2 - Vec3::y()).norm() < 1e-15);
    }

    #[test]
    fn fiber_frame_fallback_when_director_hits_e1() {
        // director swung onto the previous e1 axis
        let f = update_fiber_frame(&Vec3::x(), &Frame::global()).unwrap();
        assert!(f.orthonormality_error() < 1e-12);
        assert!((f.e3 - Vec3::x()).norm() < 1e-15);
        assert!(f.e2.dot(&Vec3::y()) > 0.99);
    }

    #[test]
    fn fiber_length_rules() {
        assert_eq!(update_fiber_length(0.1, 1.0).unwrap(), 0.1);
        assert!((update_fiber_length(0.1, 4.0).unwrap() - 0.025).abs() < 1e-16);
        assert!(update_fiber_length(0.1, 0.0).is_err());
        assert!(update_fiber_length_compressible(0.1, -1.0).is_err());
    }

    #[test]
    fn mesh_rejects_repeated_nodes() {
        let mut mesh = flat_square(1.0, 0.1);
        mesh.elements[0].nodes[1] = 0;
        assert!(mesh.validate().is_err());
    }
}
