//! Strain-energy models, lamina PK2 stress and material tangent, and the
//! direct through-thickness condensation that makes S33 and the 33 rows
//! of the tangent vanish.
//!
//! All energies are written in the engineering Voigt variables
//! `x = (E11, E22, E33, 2E12, 2E23, 2E13)`, so `S_I = ∂W/∂x_I` holds the
//! tensor PK2 components and `D_IJ = ∂²W/∂x_I∂x_J` the tangent entries.

use nalgebra::Matrix6;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{SymTensor, Tangent66};

/// `exp(Q)` overflows f64 shortly above this.
pub const MAX_EXPONENT: f64 = 700.0;

/// Reduced (condensed) variable slots: everything except E33.
const REDUCED: [usize; 5] = [0, 1, 3, 4, 5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaterialModel {
    LinearElastic {
        #[serde(rename = "youngs_modulus_Pa")]
        youngs_modulus: f64,
        poisson_ratio: f64,
    },
    MooneyRivlin {
        #[serde(rename = "c1_Pa")]
        c1: f64,
        #[serde(rename = "c2_Pa")]
        c2: f64,
    },
    /// Fiber axis is lamina direction 1.
    #[serde(rename = "guccione_2d")]
    Guccione2D {
        #[serde(rename = "c1_Pa")]
        c1: f64,
        c2: f64,
        c3: f64,
        c4: f64,
    },
    /// Fiber axis is lamina direction 1.
    #[serde(rename = "guccione_3d")]
    Guccione3D {
        #[serde(rename = "c1_Pa")]
        c1: f64,
        c2: f64,
        c3: f64,
        c4: f64,
    },
}

impl MaterialModel {
    pub fn validate(&self) -> Result<()> {
        let finite = |field: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidMaterial {
                    field,
                    reason: format!("{v} is not finite"),
                })
            }
        };
        match *self {
            MaterialModel::LinearElastic {
                youngs_modulus,
                poisson_ratio,
            } => {
                finite("youngs_modulus_Pa", youngs_modulus)?;
                finite("poisson_ratio", poisson_ratio)?;
                if !(youngs_modulus > 0.0) {
                    return Err(Error::InvalidMaterial {
                        field: "youngs_modulus_Pa",
                        reason: format!("must be > 0, got {youngs_modulus}"),
                    });
                }
                if !(0.0..0.5).contains(&poisson_ratio) {
                    return Err(Error::InvalidMaterial {
                        field: "poisson_ratio",
                        reason: format!("must lie in [0, 0.5), got {poisson_ratio}"),
                    });
                }
            }
            MaterialModel::MooneyRivlin { c1, c2 } => {
                finite("c1_Pa", c1)?;
                finite("c2_Pa", c2)?;
                if !(c1 > 0.0) {
                    return Err(Error::InvalidMaterial {
                        field: "c1_Pa",
                        reason: format!("must be > 0, got {c1}"),
                    });
                }
            }
            MaterialModel::Guccione2D { c1, c2, c3, c4 } | MaterialModel::Guccione3D { c1, c2, c3, c4 } => {
                finite("c1_Pa", c1)?;
                finite("c2", c2)?;
                finite("c3", c3)?;
                finite("c4", c4)?;
                if !(c1 > 0.0) {
                    return Err(Error::InvalidMaterial {
                        field: "c1_Pa",
                        reason: format!("must be > 0, got {c1}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Models whose through-thickness strain is closed by `det F = 1`.
    pub fn is_incompressible(&self) -> bool {
        !matches!(self, MaterialModel::LinearElastic { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            MaterialModel::LinearElastic { .. } => "linear_elastic",
            MaterialModel::MooneyRivlin { .. } => "mooney_rivlin",
            MaterialModel::Guccione2D { .. } => "guccione_2d",
            MaterialModel::Guccione3D { .. } => "guccione_3d",
        }
    }

    /// Strain energy of the unconstrained model at engineering Voigt strain `x`.
    pub fn strain_energy(&self, x: &[f64; 6]) -> Result<f64> {
        Ok(self.energy_derivatives(x, 0)?.0)
    }

    /// Energy, gradient and Hessian in engineering Voigt variables.
    /// `order` limits the work: 0 energy only, 1 adds the gradient, 2 adds the Hessian.
    pub fn energy_derivatives(&self, x: &[f64; 6], order: u8) -> Result<(f64, [f64; 6], Matrix6<f64>)> {
        let mut grad = [0.0; 6];
        let mut hess = Matrix6::zeros();
        let w = match *self {
            MaterialModel::LinearElastic {
                youngs_modulus,
                poisson_ratio,
            } => {
                let d = hooke_3d(youngs_modulus, poisson_ratio)?;
                let xv = nalgebra::Vector6::from_column_slice(x);
                let s = d * xv;
                if order >= 1 {
                    grad.copy_from_slice(s.as_slice());
                }
                if order >= 2 {
                    hess = d;
                }
                0.5 * xv.dot(&s)
            }
            MaterialModel::MooneyRivlin { c1, c2 } => {
                let c = [1.0 + 2.0 * x[0], 1.0 + 2.0 * x[1], 1.0 + 2.0 * x[2]];
                let i1 = c[0] + c[1] + c[2];
                let tr_c2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + 2.0 * (x[3] * x[3] + x[4] * x[4] + x[5] * x[5]);
                let i2 = 0.5 * (i1 * i1 - tr_c2);
                if order >= 1 {
                    for i in 0..3 {
                        grad[i] = 2.0 * c1 + 2.0 * c2 * (i1 - c[i]);
                    }
                    for i in 3..6 {
                        grad[i] = -2.0 * c2 * x[i];
                    }
                }
                if order >= 2 {
                    for i in 0..3 {
                        for j in 0..3 {
                            if i != j {
                                hess[(i, j)] = 4.0 * c2;
                            }
                        }
                    }
                    for i in 3..6 {
                        hess[(i, i)] = -2.0 * c2;
                    }
                }
                c1 * (i1 - 3.0) + c2 * (i2 - 3.0)
            }
            MaterialModel::Guccione3D { c1, c2, c3, c4 } => {
                let q = [c2, c3, c3, 0.5 * c4, 0.5 * c3, 0.5 * c4];
                let big_q: f64 = (0..6).map(|i| q[i] * x[i] * x[i]).sum();
                let mut dq = [0.0; 6];
                let mut ddq = Matrix6::zeros();
                for i in 0..6 {
                    dq[i] = 2.0 * q[i] * x[i];
                    ddq[(i, i)] = 2.0 * q[i];
                }
                exponential_energy(c1, big_q, &dq, &ddq, order, &mut grad, &mut hess)?
            }
            MaterialModel::Guccione2D { c1, c2, c3, c4 } => {
                let c11 = 1.0 + 2.0 * x[0];
                let c22 = 1.0 + 2.0 * x[1];
                let delta = c11 * c22;
                if !(delta > 0.0) {
                    return Err(Error::DegenerateInPlaneState { cofactor: delta });
                }
                let g = 1.0 / delta;
                let d2 = delta * delta;
                let d3 = d2 * delta;
                let g1 = -2.0 * c22 / d2;
                let g2 = -2.0 * c11 / d2;
                let g11 = 8.0 * c22 * c22 / d3;
                let g22 = 8.0 * c11 * c11 / d3;
                let g12 = 4.0 / d2;
                let u = g - 1.0;
                let big_q = c2 * x[0] * x[0] + c3 * (x[1] * x[1] + 0.25 * u * u) + 0.5 * c4 * x[3] * x[3];
                let mut dq = [0.0; 6];
                dq[0] = 2.0 * c2 * x[0] + 0.5 * c3 * u * g1;
                dq[1] = 2.0 * c3 * x[1] + 0.5 * c3 * u * g2;
                dq[3] = c4 * x[3];
                let mut ddq = Matrix6::zeros();
                ddq[(0, 0)] = 2.0 * c2 + 0.5 * c3 * (g1 * g1 + u * g11);
                ddq[(1, 1)] = 2.0 * c3 + 0.5 * c3 * (g2 * g2 + u * g22);
                ddq[(0, 1)] = 0.5 * c3 * (g1 * g2 + u * g12);
                ddq[(1, 0)] = ddq[(0, 1)];
                ddq[(3, 3)] = c4;
                exponential_energy(c1, big_q, &dq, &ddq, order, &mut grad, &mut hess)?
            }
        };
        Ok((w, grad, hess))
    }
}

/// `W = C1/2 (exp Q − 1)` and its derivatives given those of `Q`.
fn exponential_energy(
    c1: f64,
    q: f64,
    dq: &[f64; 6],
    ddq: &Matrix6<f64>,
    order: u8,
    grad: &mut [f64; 6],
    hess: &mut Matrix6<f64>,
) -> Result<f64> {
    if !(q <= MAX_EXPONENT) {
        return Err(Error::EnergyOverflow { q });
    }
    let eq = q.exp();
    let k = 0.5 * c1 * eq;
    if order >= 1 {
        for i in 0..6 {
            grad[i] = k * dq[i];
        }
    }
    if order >= 2 {
        for i in 0..6 {
            for j in 0..6 {
                hess[(i, j)] = k * (ddq[(i, j)] + dq[i] * dq[j]);
            }
        }
    }
    Ok(0.5 * c1 * (eq - 1.0))
}

/// Unconstrained isotropic Hooke matrix (engineering shears).
fn hooke_3d(e: f64, nu: f64) -> Result<Matrix6<f64>> {
    if nu >= 0.5 {
        return Err(Error::InvalidMaterial {
            field: "poisson_ratio",
            reason: "nu = 0.5 has an unbounded bulk term without plane-stress condensation".into(),
        });
    }
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let mut d = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            d[(i, j)] = if i == j { lambda + 2.0 * mu } else { lambda };
        }
        d[(i + 3, i + 3)] = mu;
    }
    Ok(d)
}

/// Isotropic Hooke tensor, optionally with the 33 row and column statically
/// condensed out (`C̃ = C − C·33 C33· / C3333`) and then zeroed.
pub fn constant_elasticity_tensor(youngs_modulus: f64, poisson_ratio: f64, condense_plane_stress: bool) -> Result<Tangent66> {
    if !(youngs_modulus > 0.0) {
        return Err(Error::InvalidMaterial {
            field: "youngs_modulus_Pa",
            reason: format!("must be > 0, got {youngs_modulus}"),
        });
    }
    if !(0.0..=0.5).contains(&poisson_ratio) {
        return Err(Error::InvalidMaterial {
            field: "poisson_ratio",
            reason: format!("must lie in [0, 0.5], got {poisson_ratio}"),
        });
    }
    if !condense_plane_stress {
        return Ok(Tangent66(hooke_3d(youngs_modulus, poisson_ratio)?));
    }
    // closed form of the condensation; finite at nu = 0.5
    let (e, nu) = (youngs_modulus, poisson_ratio);
    let k = e / (1.0 - nu * nu);
    let g = e / (2.0 * (1.0 + nu));
    let mut d = Matrix6::zeros();
    d[(0, 0)] = k;
    d[(1, 1)] = k;
    d[(0, 1)] = k * nu;
    d[(1, 0)] = k * nu;
    d[(3, 3)] = g;
    d[(4, 4)] = g;
    d[(5, 5)] = g;
    Ok(Tangent66(d))
}

/// Static condensation of an arbitrary tangent on its 33 slot.
pub fn condense_tangent(c: &Tangent66) -> Tangent66 {
    let m = &c.0;
    let c33 = m[(2, 2)];
    let mut out = *m;
    if c33.abs() > 0.0 {
        for i in 0..6 {
            for j in 0..6 {
                out[(i, j)] = m[(i, j)] - m[(i, 2)] * m[(2, j)] / c33;
            }
        }
    }
    for k in 0..6 {
        out[(2, k)] = 0.0;
        out[(k, 2)] = 0.0;
    }
    Tangent66(out)
}

/// Mooney–Rivlin constants to the equivalent small-strain `(E, ν)`:
/// `μ = 2(C1 + C2)`, `E = 2μ(1 + ν)`.
pub fn derive_mooney_rivlin_from_elastic(c1: f64, c2: f64, poisson_ratio: f64) -> (f64, f64) {
    let mu = 2.0 * (c1 + c2);
    (2.0 * mu * (1.0 + poisson_ratio), poisson_ratio)
}

/// Lamina strain with E33 replaced by the solution of
/// `det(2E + I) = det_target²`, plus the sensitivities of E33 with respect to
/// the engineering variables (slot 2 unused).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondensedStrain {
    pub strain: SymTensor,
    pub de33: [f64; 6],
    pub d2e33: Matrix6<f64>,
    pub det_target: f64,
    pub condensed: bool,
}

impl CondensedStrain {
    /// Strain used as-is, without any through-thickness closure.
    pub fn unconstrained(strain: SymTensor) -> Self {
        CondensedStrain {
            strain,
            de33: [0.0; 6],
            d2e33: Matrix6::zeros(),
            det_target: (2.0 * strain.to_mat3() + nalgebra::Matrix3::identity()).determinant().max(0.0).sqrt(),
            condensed: false,
        }
    }

    /// Thickness stretch λ3 = sqrt(1 + 2E33).
    pub fn thickness_stretch(&self) -> f64 {
        (1.0 + 2.0 * self.strain.0[2]).max(0.0).sqrt()
    }
}

/// Solves `det(2E + I) − det_target² = 0` for E33; the relation is linear
/// in E33 because only the cofactor `C11 C22 − C12²` multiplies `C33`.
pub fn condense_e33(partial: &SymTensor, det_target: f64) -> Result<CondensedStrain> {
    let x = partial.to_engineering();
    // c = (C11, C22, C12, C23, C13) and d c / d x_reduced = (2, 2, 1, 1, 1)
    let c = [1.0 + 2.0 * x[0], 1.0 + 2.0 * x[1], x[3], x[4], x[5]];
    let s = [2.0, 2.0, 1.0, 1.0, 1.0];
    let a = c[0] * c[1] - c[2] * c[2];
    if !(a.abs() > 1e-12) {
        return Err(Error::DegenerateInPlaneState { cofactor: a });
    }
    let b = 2.0 * c[2] * c[3] * c[4] - c[0] * c[3] * c[3] - c[1] * c[4] * c[4];
    let j2 = det_target * det_target;
    let c33 = (j2 - b) / a;

    let a_c = [c[1], c[0], -2.0 * c[2], 0.0, 0.0];
    let b_c = [
        -c[3] * c[3],
        -c[4] * c[4],
        2.0 * c[3] * c[4],
        2.0 * c[2] * c[4] - 2.0 * c[0] * c[3],
        2.0 * c[2] * c[3] - 2.0 * c[1] * c[4],
    ];
    let mut a_cc = [[0.0; 5]; 5];
    a_cc[0][1] = 1.0;
    a_cc[1][0] = 1.0;
    a_cc[2][2] = -2.0;
    let mut b_cc = [[0.0; 5]; 5];
    let mut set = |i: usize, j: usize, v: f64| {
        b_cc[i][j] = v;
        b_cc[j][i] = v;
    };
    set(0, 3, -2.0 * c[3]);
    set(1, 4, -2.0 * c[4]);
    set(2, 3, 2.0 * c[4]);
    set(2, 4, 2.0 * c[3]);
    set(3, 4, 2.0 * c[2]);
    set(3, 3, -2.0 * c[0]);
    set(4, 4, -2.0 * c[1]);

    let mut c33_k = [0.0; 5];
    for k in 0..5 {
        c33_k[k] = -(b_c[k] + c33 * a_c[k]) / a;
    }
    let mut de33 = [0.0; 6];
    let mut d2e33 = Matrix6::zeros();
    for k in 0..5 {
        de33[REDUCED[k]] = 0.5 * s[k] * c33_k[k];
        for l in 0..5 {
            let c33_kl = -(b_cc[k][l] + c33_k[l] * a_c[k] + c33_k[k] * a_c[l] + c33 * a_cc[k][l]) / a;
            d2e33[(REDUCED[k], REDUCED[l])] = 0.5 * s[k] * s[l] * c33_kl;
        }
    }
    let mut strain = *partial;
    strain.0[2] = 0.5 * (c33 - 1.0);
    Ok(CondensedStrain {
        strain,
        de33,
        d2e33,
        det_target,
        condensed: true,
    })
}

/// Closes the through-thickness strain the way each model requires:
/// incompressible 3D models by condensation with `det F = 1`, the 2D
/// Guccione model through its own Δ-term, and linear elasticity through the
/// plane-stress relation of its constant tensor.
pub fn prepare_strain(model: &MaterialModel, strain: &SymTensor) -> Result<CondensedStrain> {
    match *model {
        MaterialModel::MooneyRivlin { .. } | MaterialModel::Guccione3D { .. } => condense_e33(strain, 1.0),
        MaterialModel::Guccione2D { .. } => {
            let mut s = *strain;
            let delta = (1.0 + 2.0 * s.0[0]) * (1.0 + 2.0 * s.0[1]);
            if !(delta > 0.0) {
                return Err(Error::DegenerateInPlaneState { cofactor: delta });
            }
            s.0[2] = 0.5 * (1.0 / delta - 1.0);
            Ok(CondensedStrain::unconstrained(s))
        }
        MaterialModel::LinearElastic { poisson_ratio, .. } => {
            let mut s = *strain;
            s.0[2] = -poisson_ratio / (1.0 - poisson_ratio) * (s.0[0] + s.0[1]);
            Ok(CondensedStrain::unconstrained(s))
        }
    }
}

/// Compressible closure: condensation against the measured `det F`.
pub fn prepare_strain_compressible(strain: &SymTensor, det_f: f64) -> Result<CondensedStrain> {
    condense_e33(strain, det_f)
}

/// PK2 stress and (optionally) tangent at a prepared strain.
pub fn stress_response(model: &MaterialModel, strain: &CondensedStrain, with_tangent: bool) -> Result<(SymTensor, Option<Tangent66>)> {
    match *model {
        MaterialModel::LinearElastic {
            youngs_modulus,
            poisson_ratio,
        } => {
            let d = constant_elasticity_tensor(youngs_modulus, poisson_ratio, true)?;
            Ok((d.contract(&strain.strain), with_tangent.then_some(d)))
        }
        MaterialModel::Guccione2D { .. } => {
            let x = strain.strain.to_engineering();
            let (_, g, h) = model.energy_derivatives(&x, if with_tangent { 2 } else { 1 })?;
            let s = SymTensor::new(g[0], g[1], 0.0, g[3], 0.0, 0.0);
            let t = with_tangent.then(|| {
                let mut d = Matrix6::zeros();
                for &i in &[0usize, 1, 3] {
                    for &j in &[0usize, 1, 3] {
                        d[(i, j)] = h[(i, j)];
                    }
                }
                Tangent66(d)
            });
            Ok((s, t))
        }
        MaterialModel::MooneyRivlin { .. } | MaterialModel::Guccione3D { .. } => {
            if !strain.condensed {
                // direct evaluation of the unconstrained energy
                let x = strain.strain.to_engineering();
                let (_, g, h) = model.energy_derivatives(&x, if with_tangent { 2 } else { 1 })?;
                return Ok((SymTensor(g), with_tangent.then_some(Tangent66(h))));
            }
            let x = strain.strain.to_engineering();
            let (_, g, h) = model.energy_derivatives(&x, if with_tangent { 2 } else { 1 })?;
            let e = &strain.de33;
            let mut s = [0.0; 6];
            for &i in &REDUCED {
                s[i] = g[i] + g[2] * e[i];
            }
            let t = with_tangent.then(|| {
                let mut d = Matrix6::zeros();
                for &i in &REDUCED {
                    for &j in &REDUCED {
                        d[(i, j)] = h[(i, j)]
                            + h[(i, 2)] * e[j]
                            + h[(2, j)] * e[i]
                            + h[(2, 2)] * e[i] * e[j]
                            + g[2] * strain.d2e33[(i, j)];
                    }
                }
                Tangent66(d)
            });
            Ok((SymTensor(s), t))
        }
    }
}

pub fn pk2_stress(model: &MaterialModel, strain: &CondensedStrain) -> Result<SymTensor> {
    Ok(stress_response(model, strain, false)?.0)
}

pub fn material_tangent(model: &MaterialModel, strain: &CondensedStrain) -> Result<Tangent66> {
    Ok(stress_response(model, strain, true)?.1.expect("tangent requested"))
}

/// Reduced energy `W(E(x̃))` along the closure used by [`prepare_strain`].
pub fn closed_energy(model: &MaterialModel, strain: &SymTensor) -> Result<f64> {
    let prepared = prepare_strain(model, strain)?;
    match model {
        MaterialModel::LinearElastic {
            youngs_modulus,
            poisson_ratio,
        } => {
            let d = constant_elasticity_tensor(*youngs_modulus, *poisson_ratio, true)?;
            let s = d.contract(&prepared.strain);
            let x = prepared.strain.to_engineering();
            Ok(0.5 * (0..6).map(|i| s.0[i] * x[i]).sum::<f64>())
        }
        _ => model.strain_energy(&prepared.strain.to_engineering()),
    }
}

/// Condensed tangent at zero strain, used as the constant tensor when a
/// hyperelastic model runs under a constant-tensor technique and for
/// stable time-step estimates.
pub fn small_strain_tangent(model: &MaterialModel) -> Result<Tangent66> {
    let prepared = prepare_strain(model, &SymTensor::ZERO)?;
    material_tangent(model, &prepared)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GUC: MaterialModel = MaterialModel::Guccione3D {
        c1: 10_000.0,
        c2: 1.0,
        c3: 1.0,
        c4: 1.0,
    };

    #[test]
    fn condensation_hand_cases() {
        let c = condense_e33(&SymTensor::ZERO, 1.0).unwrap();
        assert_eq!(c.strain.0[2], 0.0);
        let c = condense_e33(&SymTensor::diag(1.5, 1.5, 0.0), 1.0).unwrap();
        assert!((c.strain.0[2] + 0.46875).abs() < 1e-15);
        let c = condense_e33(&SymTensor::new(0.0, 0.5, 0.0, 0.5, 0.0, 0.0), 1.0).unwrap();
        assert!(c.strain.0[2].abs() < 1e-15);
    }

    #[test]
    fn condensation_rejects_collapsed_plane() {
        // C11 = C22 = 0
        let err = condense_e33(&SymTensor::diag(-0.5, -0.5, 0.0), 1.0).unwrap_err();
        assert!(err.to_string().contains("degenerate in-plane state"));
    }

    #[test]
    fn stress_free_reference() {
        for model in [
            GUC,
            MaterialModel::MooneyRivlin { c1: 1.0, c2: 0.3 },
            MaterialModel::Guccione2D {
                c1: 1.0,
                c2: 3.0,
                c3: 1.0,
                c4: 2.0,
            },
            MaterialModel::LinearElastic {
                youngs_modulus: 1.0,
                poisson_ratio: 0.3,
            },
        ] {
            let prepared = prepare_strain(&model, &SymTensor::ZERO).unwrap();
            let s = pk2_stress(&model, &prepared).unwrap();
            assert!(s.max_abs_component() < 1e-14, "{}", model.name());
        }
    }

    #[test]
    fn guccione_direct_uniaxial_value() {
        let mut x = [0.0; 6];
        x[0] = 0.1;
        let (_, g, _) = GUC.energy_derivatives(&x, 1).unwrap();
        let expect = 10_000.0 * 0.1 * (0.01f64).exp();
        assert!((g[0] - expect).abs() < 1e-9);
        assert!((g[0] - 1010.05).abs() < 0.01);
    }

    #[test]
    fn guccione_zero_strain_tangent() {
        let t = small_strain_tangent(&GUC).unwrap();
        // condensed tangent at the origin: the sensitivity of E33 is −1 for
        // both normal strains, so every in-plane entry gains C1·C3
        assert!((t.0[(0, 0)] - 20_000.0).abs() < 1e-9);
        assert!((t.0[(1, 1)] - 20_000.0).abs() < 1e-9);
        let prepared = CondensedStrain::unconstrained(SymTensor::ZERO);
        let raw = material_tangent(&GUC, &prepared).unwrap();
        assert!((raw.0[(0, 0)] - 10_000.0).abs() < 1e-9);
        assert!((raw.0[(1, 1)] - 10_000.0).abs() < 1e-9);
    }

    #[test]
    fn energy_overflow_is_reported() {
        let mut x = [0.0; 6];
        x[0] = 100.0;
        let err = GUC.energy_derivatives(&x, 1).unwrap_err();
        assert!(err.to_string().contains("energy overflow"));
    }

    #[test]
    fn plane_stress_tensor_forms() {
        let t = constant_elasticity_tensor(2.0, 0.0, false).unwrap();
        let expect = [2.0, 2.0, 2.0, 1.0, 1.0, 1.0];
        for (i, v) in expect.iter().enumerate() {
            assert!((t.0[(i, i)] - v).abs() < 1e-15);
        }
        let (e, nu) = (3.0, 0.3);
        let t = constant_elasticity_tensor(e, nu, true).unwrap();
        assert!((t.0[(0, 0)] - e / (1.0 - nu * nu)).abs() < 1e-14);
        assert!((t.0[(0, 1)] - e * nu / (1.0 - nu * nu)).abs() < 1e-14);
        assert!((t.0[(3, 3)] - e / (2.0 * (1.0 + nu))).abs() < 1e-14);
        let s = t.contract(&SymTensor::new(0.1, -0.2, 0.77, 0.0, 0.0, 0.0));
        assert_eq!(s.0[2], 0.0);
        // condensing the full tensor numerically gives the same matrix
        let full = constant_elasticity_tensor(e, nu, false).unwrap();
        assert!((condense_tangent(&full).0 - t.0).amax() < 1e-13);
        assert!(constant_elasticity_tensor(e, 0.5, false).is_err());
        assert!(constant_elasticity_tensor(e, 0.5, true).is_ok());
    }

    #[test]
    fn mooney_rivlin_equivalent_constants() {
        let (e, _) = derive_mooney_rivlin_from_elastic(1.0, 0.0, 0.5);
        assert!((e - 6.0).abs() < 1e-15);
        let (e, nu) = derive_mooney_rivlin_from_elastic(0.5, 0.5, 0.499);
        assert!((e - 5.996).abs() < 1e-12);
        assert_eq!(nu, 0.499);
    }

    #[test]
    fn validation_ranges() {
        assert!(MaterialModel::LinearElastic {
            youngs_modulus: 1.0,
            poisson_ratio: 0.6
        }
        .validate()
        .is_err());
        assert!(MaterialModel::MooneyRivlin { c1: -1.0, c2: 0.0 }.validate().is_err());
        assert!(GUC.validate().is_ok());
    }
}
