//! Per-Gauss-point large-strain stress updates.
//!
//! * Technique 1: total. Green–Lagrange strain from the initial
//!   configuration, hyperelastic PK2 stress, push-forward to Cauchy.
//! * Technique 2: PK2 increment from a constant tensor, added to the
//!   previous Cauchy stress and pushed forward with the step gradient.
//! * Technique 3: linearized strain increment in the current lamina,
//!   added directly to the rotated prior stress.
//!
//! Stresses are stored in components of the lamina frame they were last
//! updated in. All techniques return `σ33 = 0` in the lamina.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Frame;
use crate::kinematics::{deformation_gradient_lamina, green_lagrange, incremental_linear_strain, ReferenceTag};
use crate::materials::{
    constant_elasticity_tensor, derive_mooney_rivlin_from_elastic, prepare_strain, small_strain_tangent,
    stress_response, MaterialModel,
};
use crate::tensor::{push_forward_stress, push_forward_tangent, Mat3, SymTensor, Tangent66};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Technique {
    Technique1,
    Technique2,
    Technique3,
}

impl Technique {
    pub const ALL: [Technique; 3] = [Technique::Technique1, Technique::Technique2, Technique::Technique3];

    pub fn reference(&self) -> ReferenceTag {
        match self {
            Technique::Technique1 | Technique::Technique2 => ReferenceTag::Initial,
            Technique::Technique3 => ReferenceTag::PreviousStep,
        }
    }

    pub fn number(&self) -> u8 {
        u8::from(*self)
    }
}

impl TryFrom<u8> for Technique {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Technique::Technique1),
            2 => Ok(Technique::Technique2),
            3 => Ok(Technique::Technique3),
            _ => Err(format!("technique must be 1, 2 or 3, got {v}")),
        }
    }
}

impl From<Technique> for u8 {
    fn from(t: Technique) -> u8 {
        match t {
            Technique::Technique1 => 1,
            Technique::Technique2 => 2,
            Technique::Technique3 => 3,
        }
    }
}

impl std::fmt::Display for Technique {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "technique {}", self.number())
    }
}

/// Constant tensor for Techniques 2 and 3.
///
/// Linear elasticity uses its plane-stress tensor, Mooney–Rivlin the
/// equivalent `(E, ν)` tensor, Guccione its condensed tangent at `E = 0`.
pub fn constant_tensor_for(model: &MaterialModel, poisson_ratio: f64) -> Result<Tangent66> {
    match *model {
        MaterialModel::LinearElastic {
            youngs_modulus,
            poisson_ratio,
        } => constant_elasticity_tensor(youngs_modulus, poisson_ratio, true),
        MaterialModel::MooneyRivlin { c1, c2 } => {
            let (e, nu) = derive_mooney_rivlin_from_elastic(c1, c2, poisson_ratio);
            constant_elasticity_tensor(e, nu, true)
        }
        MaterialModel::Guccione2D { .. } | MaterialModel::Guccione3D { .. } => small_strain_tangent(model),
    }
}

/// History carried by one Gauss point.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussPointState {
    /// Global row-convention Jacobian in the initial configuration.
    pub ref_jacobian: Mat3,
    pub ref_frame: Frame,
    /// Jacobian and lamina frame at the previous step.
    pub prev_jacobian: Mat3,
    pub prev_frame: Frame,
    /// Cauchy stress in `prev_frame` components (after an update: the new frame).
    pub sigma: SymTensor,
    /// Technique 2 accumulated PK2 stress.
    pub pk2: SymTensor,
    /// Spatial tangent from the last Technique 1 update, when requested.
    pub tangent: Option<Tangent66>,
    /// Total Green–Lagrange strain in the initial lamina frame (output only).
    pub strain: SymTensor,
    /// Through-thickness stretch used by compressible thickness updates.
    pub thickness_stretch: f64,
}

impl GaussPointState {
    pub fn new(ref_jacobian: Mat3, ref_frame: Frame) -> Self {
        GaussPointState {
            ref_jacobian,
            ref_frame,
            prev_jacobian: ref_jacobian,
            prev_frame: ref_frame,
            sigma: SymTensor::ZERO,
            pk2: SymTensor::ZERO,
            tangent: None,
            strain: SymTensor::ZERO,
            thickness_stretch: 1.0,
        }
    }
}

fn drop_normal(mut s: SymTensor) -> SymTensor {
    s.0[2] = 0.0;
    s
}

/// Total update from the lamina deformation gradient measured from the
/// initial configuration. Returns the lamina Cauchy stress.
pub fn technique1_update(
    state: &mut GaussPointState,
    f_total: &Mat3,
    model: &MaterialModel,
    with_tangent: bool,
) -> Result<SymTensor> {
    let e = green_lagrange(f_total);
    let prepared = prepare_strain(model, &e)?;
    let (s, d) = stress_response(model, &prepared, with_tangent)?;
    let ratio = if model.is_incompressible() {
        1.0
    } else {
        let det = f_total.determinant();
        if !(det > 0.0) {
            return Err(Error::DegenerateDeformationGradient { det });
        }
        1.0 / det
    };
    let sigma = drop_normal(push_forward_stress(f_total, ratio, &s)?);
    state.tangent = match d {
        Some(d) => Some(push_forward_tangent(f_total, ratio, &d)?),
        None => None,
    };
    state.strain = prepared.strain;
    state.thickness_stretch = prepared.thickness_stretch();
    state.sigma = sigma;
    Ok(sigma)
}

/// PK2-increment update: `S = σ_τ + C : ΔE`, `σ = F S Fᵀ / det F`.
pub fn technique2_update(
    state: &mut GaussPointState,
    delta_e: &SymTensor,
    c_const: &Tangent66,
    f_step: &Mat3,
) -> Result<SymTensor> {
    let det = f_step.determinant();
    if !(det > 0.0) {
        return Err(Error::DegenerateDeformationGradient { det });
    }
    let s = state.sigma.add(&c_const.contract(delta_e));
    state.pk2 = s;
    let sigma = drop_normal(push_forward_stress(f_step, 1.0 / det, &s)?);
    state.sigma = sigma;
    Ok(sigma)
}

/// Linearized increment: `σ ← σ + C : e`. The stored stress must already be
/// expressed in the current lamina frame. Returns the increment.
pub fn technique3_update(state: &mut GaussPointState, e_increment: &SymTensor, c_const: &Tangent66) -> SymTensor {
    let ds = drop_normal(c_const.contract(e_increment));
    state.sigma = drop_normal(state.sigma.add(&ds));
    ds
}

/// Re-expresses lamina components given in `old` in the basis `new`:
/// `σ′ = Qᵀ σ Q` with `Q = R_oldᵀ R_new`.
pub fn rotate_stress_to_new_frame(sigma: &SymTensor, old: &Frame, new: &Frame) -> SymTensor {
    let q = old.matrix().transpose() * new.matrix();
    SymTensor::from_mat3(&(q.transpose() * sigma.to_mat3() * q))
}

/// Rotation factor of the polar decomposition `F = R U`.
pub fn polar_rotation(f: &Mat3) -> Mat3 {
    let svd = f.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut r = u * vt;
    if r.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * vt;
    }
    r
}

/// Per-technique inputs that do not change during a run.
#[derive(Debug, Clone, Copy)]
pub struct ConstitutiveSetup {
    pub technique: Technique,
    pub model: MaterialModel,
    pub constant_tensor: Tangent66,
    /// ν used by the compressible thickness update.
    pub poisson_ratio: f64,
}

impl ConstitutiveSetup {
    pub fn new(technique: Technique, model: MaterialModel, poisson_ratio: f64) -> Result<Self> {
        model.validate()?;
        let nu = match model {
            MaterialModel::LinearElastic { poisson_ratio, .. } => poisson_ratio,
            _ => poisson_ratio,
        };
        Ok(ConstitutiveSetup {
            technique,
            model,
            constant_tensor: constant_tensor_for(&model, nu)?,
            poisson_ratio: nu,
        })
    }
}

/// Advances one Gauss point from its stored previous geometry to the
/// current Jacobian `j_cur` with lamina frame `frame_cur`.
pub fn update_gauss_point(
    state: &mut GaussPointState,
    setup: &ConstitutiveSetup,
    j_cur: &Mat3,
    frame_cur: &Frame,
    with_tangent: bool,
) -> Result<SymTensor> {
    let r_cur = frame_cur.matrix();
    let sigma = match setup.technique {
        Technique::Technique1 => {
            let f = deformation_gradient_lamina(&(j_cur * r_cur), &(state.ref_jacobian * state.ref_frame.matrix()))?;
            technique1_update(state, &f, &setup.model, with_tangent)?
        }
        Technique::Technique2 => {
            let f_step = deformation_gradient_lamina(&(j_cur * r_cur), &(state.prev_jacobian * state.prev_frame.matrix()))?;
            let de = green_lagrange(&f_step);
            accumulate_thickness(state, setup, &de);
            let sigma = technique2_update(state, &de, &setup.constant_tensor, &f_step)?;
            record_total_strain(state, j_cur, &r_cur)?;
            sigma
        }
        Technique::Technique3 => {
            let f_step = deformation_gradient_lamina(&(j_cur * r_cur), &(state.prev_jacobian * state.prev_frame.matrix()))?;
            // carry the stored stress along the material rotation of the step
            // old basis carried by the material spin: R_cur · R_rel
            let spun = Frame::global().rotated(&(r_cur * polar_rotation(&f_step)));
            state.sigma = rotate_stress_to_new_frame(&state.sigma, &spun, frame_cur);
            let e = incremental_linear_strain(&state.prev_jacobian, j_cur, &r_cur)?;
            accumulate_thickness(state, setup, &e);
            technique3_update(state, &e, &setup.constant_tensor);
            record_total_strain(state, j_cur, &r_cur)?;
            state.sigma
        }
    };
    state.prev_jacobian = *j_cur;
    state.prev_frame = *frame_cur;
    Ok(sigma)
}

fn accumulate_thickness(state: &mut GaussPointState, setup: &ConstitutiveSetup, de: &SymTensor) {
    if setup.model.is_incompressible() {
        return;
    }
    let nu = setup.poisson_ratio;
    let de33 = -nu / (1.0 - nu) * (de.0[0] + de.0[1]);
    state.thickness_stretch *= 1.0 + de33;
}

fn record_total_strain(state: &mut GaussPointState, j_cur: &Mat3, r_cur: &Mat3) -> Result<()> {
    let f = deformation_gradient_lamina(&(j_cur * r_cur), &(state.ref_jacobian * state.ref_frame.matrix()))?;
    state.strain = green_lagrange(&f);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{rotation_matrix, Vec3};

    fn state() -> GaussPointState {
        GaussPointState::new(Mat3::identity(), Frame::global())
    }

    #[test]
    fn identity_gives_zero_stress() {
        let m = MaterialModel::MooneyRivlin { c1: 1.0, c2: 0.5 };
        let s = technique1_update(&mut state(), &Mat3::identity(), &m, true).unwrap();
        assert!(s.max_abs_component() < 1e-14);
    }

    #[test]
    fn mooney_rivlin_uniaxial_closed_form() {
        let (c1, c2) = (0.3, 0.1);
        let m = MaterialModel::MooneyRivlin { c1, c2 };
        let l: f64 = 2.0;
        let t = 1.0 / l.sqrt();
        let f = Mat3::from_diagonal(&Vec3::new(l, t, t));
        let s = technique1_update(&mut state(), &f, &m, false).unwrap();
        let expect = 2.0 * (c1 + c2 / l) * (l * l - 1.0 / l);
        assert!((s.0[0] - expect).abs() < 1e-12, "{} vs {expect}", s.0[0]);
        assert!(s.0[1].abs() < 1e-12);
        assert_eq!(s.0[2], 0.0);
    }

    #[test]
    fn technique2_zero_increment_keeps_stress() {
        let mut st = state();
        st.sigma = SymTensor::new(1.0, 2.0, 0.0, 0.5, 0.0, 0.0);
        let c = constant_elasticity_tensor(10.0, 0.3, true).unwrap();
        let s = technique2_update(&mut st, &SymTensor::ZERO, &c, &Mat3::identity()).unwrap();
        assert_eq!(s, SymTensor::new(1.0, 2.0, 0.0, 0.5, 0.0, 0.0));
    }

    #[test]
    fn small_strain_limit_agrees() {
        let c = constant_elasticity_tensor(100.0, 0.3, true).unwrap();
        let e = SymTensor::new(1e-6, -3e-7, 0.0, 2e-7, 0.0, 0.0);
        let mut st = state();
        let f = Mat3::identity() + e.to_mat3();
        let s = technique2_update(&mut st, &green_lagrange(&f), &c, &f).unwrap();
        let lin = c.contract(&e);
        assert!((s.sub(&lin)).max_abs_component() < 1e-3 * lin.max_abs_component());
        let mut st3 = state();
        technique3_update(&mut st3, &e, &c);
        assert!((st3.sigma.sub(&lin)).max_abs_component() < 1e-12);
    }

    #[test]
    fn frame_rotation_cases() {
        let s = SymTensor::new(1.0, 2.0, 0.0, 0.3, 0.0, 0.0);
        let g = Frame::global();
        assert_eq!(rotate_stress_to_new_frame(&s, &g, &g), s);
        let q = rotation_matrix(&Vec3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2));
        let d = SymTensor::diag(3.0, 5.0, 0.0);
        let r = rotate_stress_to_new_frame(&d, &g, &g.rotated(&q));
        assert!((r.0[0] - 5.0).abs() < 1e-14 && (r.0[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rigid_rotation_preserves_lamina_stress() {
        let m = MaterialModel::LinearElastic {
            youngs_modulus: 10.0,
            poisson_ratio: 0.3,
        };
        for tech in [Technique::Technique2, Technique::Technique3] {
            let setup = ConstitutiveSetup::new(tech, m, 0.3).unwrap();
            let mut st = state();
            st.sigma = SymTensor::new(1.0, -0.5, 0.0, 0.2, 0.0, 0.0);
            // linearized strain carries an O(θ²) spurious part; keep the step small
            let q = rotation_matrix(&Vec3::new(2e-4, -1e-4, 3e-4));
            // rows of J rotate with the body
            let j = Mat3::identity() * q.transpose();
            let frame = Frame::global().rotated(&q);
            let s = update_gauss_point(&mut st, &setup, &j, &frame, false).unwrap();
            assert!((s.sub(&SymTensor::new(1.0, -0.5, 0.0, 0.2, 0.0, 0.0))).max_abs_component() < 1e-6, "{tech}");
        }
    }

    #[test]
    fn technique_round_trip() {
        for t in Technique::ALL {
            assert_eq!(Technique::try_from(t.number()).unwrap(), t);
        }
        assert!(Technique::try_from(4).is_err());
    }
}
