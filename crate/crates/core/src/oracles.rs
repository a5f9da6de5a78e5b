//! Closed-form and semi-analytical reference solutions.

use std::cell::Cell;

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::materials::{condense_e33, pk2_stress, prepare_strain, MaterialModel};
use crate::tensor::SymTensor;

/// `−tr(σ)/3`.
pub fn pressure_band(sigma: &SymTensor) -> f64 {
    -sigma.trace() / 3.0
}

/// Percentage volume change.
pub fn volume_change_percent(reference: f64, current: f64) -> f64 {
    100.0 * (current - reference) / reference
}

/// Tip displacements `(axial, transverse)` of an inextensible cantilever
/// bent by an end moment into a circular arc of curvature `M/EI`.
pub fn elastica(moment: f64, bending_stiffness: f64, length: f64) -> Result<(f64, f64)> {
    if !(bending_stiffness > 0.0) || !(length > 0.0) {
        return Err(Error::Domain {
            field: "elastica".into(),
            message: format!("EI and L must be > 0 (EI = {bending_stiffness}, L = {length})"),
        });
    }
    let k = moment / bending_stiffness;
    let kl = k * length;
    if kl.abs() < 1e-8 {
        // series limits avoid 0/0
        return Ok((-k * k * length.powi(3) / 6.0, 0.5 * k * length * length));
    }
    let x = kl.sin() / k;
    let y = (1.0 - kl.cos()) / k;
    Ok((x - length, y))
}

/// Membrane tensions `(T11, T22)` = PK2 stress × `h₀` at in-plane
/// stretches `λ1, λ2` with no shear.
///
/// Evaluated independently of the element code path: the normal stress is
/// removed with a Lagrange multiplier, `S_i = W_i − W_3 λ3²/λ_i²`.
pub fn biaxial_point(model: &MaterialModel, l1: f64, l2: f64, h0: f64) -> Result<(f64, f64)> {
    if !(l1 > 0.0) || !(l2 > 0.0) {
        return Err(Error::NonPositiveStretch(l1.min(l2)));
    }
    let e1 = 0.5 * (l1 * l1 - 1.0);
    let e2 = 0.5 * (l2 * l2 - 1.0);
    match model {
        MaterialModel::Guccione3D { .. } | MaterialModel::MooneyRivlin { .. } => {
            let l3 = 1.0 / (l1 * l2);
            let x = [e1, e2, 0.5 * (l3 * l3 - 1.0), 0.0, 0.0, 0.0];
            let (_, g, _) = model.energy_derivatives(&x, 1)?;
            let s1 = g[0] - g[2] * l3 * l3 / (l1 * l1);
            let s2 = g[1] - g[2] * l3 * l3 / (l2 * l2);
            Ok((s1 * h0, s2 * h0))
        }
        _ => {
            let prepared = prepare_strain(model, &SymTensor::diag(e1, e2, 0.0))?;
            let s = pk2_stress(model, &prepared)?;
            Ok((s.0[0] * h0, s.0[1] * h0))
        }
    }
}

/// Condensed-path variant of [`biaxial_point`], used to cross-check the two.
pub fn biaxial_point_condensed(model: &MaterialModel, l1: f64, l2: f64, h0: f64) -> Result<(f64, f64)> {
    let e = SymTensor::diag(0.5 * (l1 * l1 - 1.0), 0.5 * (l2 * l2 - 1.0), 0.0);
    let prepared = if model.is_incompressible() && !matches!(model, MaterialModel::Guccione2D { .. }) {
        condense_e33(&e, 1.0)?
    } else {
        prepare_strain(model, &e)?
    };
    let s = pk2_stress(model, &prepared)?;
    Ok((s.0[0] * h0, s.0[1] * h0))
}

/// Cauchy stresses at one radius of the inflated tube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallSample {
    pub radius: f64,
    pub reference_radius: f64,
    pub sigma_rr: f64,
    pub sigma_tt: f64,
    pub sigma_zz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSolution {
    pub pressure: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub axial_stretch: f64,
    pub profile: Vec<WallSample>,
    pub residual: f64,
}

/// Incompressible thick-walled closed-end tube under internal pressure.
///
/// The material's lamina axes map to (circumferential, axial, radial).
struct Tube<'a> {
    model: &'a MaterialModel,
    ri0: f64,
    ro0: f64,
}

impl Tube<'_> {
    fn outer(&self, ri: f64, lz: f64) -> f64 {
        (ri * ri + (self.ro0 * self.ro0 - self.ri0 * self.ri0) / lz).sqrt()
    }

    fn reference_radius(&self, r: f64, ri: f64, lz: f64) -> f64 {
        (self.ri0 * self.ri0 + lz * (r * r - ri * ri)).max(0.0).sqrt()
    }

    /// `(σθ − σr, σz − σr)` at current radius `r`.
    fn differences(&self, r: f64, ri: f64, lz: f64) -> Result<(f64, f64)> {
        let big_r = self.reference_radius(r, ri, lz);
        let lt = r / big_r;
        let lr = 1.0 / (lt * lz);
        let x = [
            0.5 * (lt * lt - 1.0),
            0.5 * (lz * lz - 1.0),
            0.5 * (lr * lr - 1.0),
            0.0,
            0.0,
            0.0,
        ];
        let (_, s, _) = self.model.energy_derivatives(&x, 1)?;
        let (tt, zz, rr) = (lt * lt * s[0], lz * lz * s[1], lr * lr * s[2]);
        Ok((tt - rr, zz - rr))
    }

    fn integrate<F: Fn(f64) -> Result<f64>>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        integrate(f, a, b)
    }

    /// Radial balance and closed-end axial balance residuals.
    fn residual(&self, ri: f64, lz: f64, p: f64) -> Result<[f64; 2]> {
        if !(ri > 0.0) || !(lz > 0.0) {
            return Err(Error::NonPositiveStretch(ri.min(lz)));
        }
        let ro = self.outer(ri, lz);
        let radial = self.integrate(|r| Ok(self.differences(r, ri, lz)?.0 / r), ri, ro)?;
        let axial = self.integrate(
            |r| {
                let (t, z) = self.differences(r, ri, lz)?;
                Ok(r * (2.0 * z - t))
            },
            ri,
            ro,
        )?;
        Ok([radial - p, axial])
    }
}

/// Adaptive double-exponential quadrature at 1e−8 accuracy relative to ∫|f|.
pub fn integrate<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let failure: Cell<Option<Error>> = Cell::new(None);
    let g = |x: f64| match f(x) {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e));
            0.0
        }
    };
    // tolerances scale with ∫|f| so sign-changing integrands near zero pass
    let rough = quadrature::integrate(|x| g(x).abs(), a, b, 1e-6);
    let scale = rough.integral.abs().max(1e-300);
    let fine = quadrature::integrate(g, a, b, 1e-10 * scale);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    if !(fine.error_estimate <= 1e-8 * scale) {
        return Err(Error::RootNotConverged {
            residual: fine.error_estimate,
        });
    }
    Ok(fine.integral)
}

/// Solves the tube for inner radius and axial stretch, then integrates the
/// radial stress profile at `samples` evenly spaced radii.
pub fn cylinder_inflation(
    model: &MaterialModel,
    ri0: f64,
    ro0: f64,
    pressure: f64,
    samples: usize,
) -> Result<CylinderSolution> {
    if !matches!(model, MaterialModel::Guccione3D { .. } | MaterialModel::MooneyRivlin { .. }) {
        return Err(Error::InvalidMaterial {
            field: "model",
            reason: format!("tube oracle needs an incompressible 3D model, got {}", model.name()),
        });
    }
    if !(ri0 > 0.0 && ro0 > ri0) {
        return Err(Error::Domain {
            field: "geometry".into(),
            message: format!("need 0 < r_i < r_o (got {ri0}, {ro0})"),
        });
    }
    let tube = Tube { model, ri0, ro0 };
    let mut x = Vector2::new(ri0, 1.0);
    let mut residual = 0.0;
    // continuation in pressure keeps Newton inside its basin for stiff models
    let stages = 8;
    for stage in 1..=stages {
        let p = pressure * stage as f64 / stages as f64;
        let scale = p.abs().max(1e-12 * model_scale(model));
        let mut converged = false;
        for _ in 0..60 {
            let r = tube.residual(x[0], x[1], p)?;
            let r_ax_scale = scale * ri0 * ri0;
            residual = (r[0] / scale).abs().max((r[1] / r_ax_scale).abs());
            if residual < 1e-10 {
                converged = true;
                break;
            }
            let mut jac = Matrix2::zeros();
            let steps = [1e-7 * ri0, 1e-7];
            for k in 0..2 {
                let mut xp = x;
                xp[k] += steps[k];
                let mut xm = x;
                xm[k] -= steps[k];
                let rp = tube.residual(xp[0], xp[1], p)?;
                let rm = tube.residual(xm[0], xm[1], p)?;
                jac[(0, k)] = (rp[0] - rm[0]) / (2.0 * steps[k]);
                jac[(1, k)] = (rp[1] - rm[1]) / (2.0 * steps[k]);
            }
            let dx = jac
                .lu()
                .solve(&Vector2::new(-r[0], -r[1]))
                .ok_or(Error::RootNotConverged { residual })?;
            // damp steps that would collapse the tube
            let mut t = 1.0;
            while x[0] + t * dx[0] <= 0.0 || x[1] + t * dx[1] <= 0.0 {
                t *= 0.5;
            }
            x += dx * t;
        }
        if !converged {
            return Err(Error::RootNotConverged { residual });
        }
    }
    let (ri, lz) = (x[0], x[1]);
    let ro = tube.outer(ri, lz);
    let mut profile = Vec::with_capacity(samples);
    for k in 0..samples {
        let r = if samples == 1 { ri } else { ri + (ro - ri) * k as f64 / (samples - 1) as f64 };
        let srr = -pressure + integrate(|s| Ok(tube.differences(s, ri, lz)?.0 / s), ri, r)?;
        let (dt, dz) = tube.differences(r, ri, lz)?;
        profile.push(WallSample {
            radius: r,
            reference_radius: tube.reference_radius(r, ri, lz),
            sigma_rr: srr,
            sigma_tt: srr + dt,
            sigma_zz: srr + dz,
        });
    }
    Ok(CylinderSolution {
        pressure,
        inner_radius: ri,
        outer_radius: ro,
        axial_stretch: lz,
        profile,
        residual,
    })
}

fn model_scale(model: &MaterialModel) -> f64 {
    match *model {
        MaterialModel::LinearElastic { youngs_modulus, .. } => youngs_modulus,
        MaterialModel::MooneyRivlin { c1, c2 } => c1 + c2.abs(),
        MaterialModel::Guccione2D { c1, .. } | MaterialModel::Guccione3D { c1, .. } => c1,
    }
}

/// A named curve for CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCurve {
    pub name: String,
    pub abscissa: (String, Vec<f64>),
    pub ordinates: Vec<(String, Vec<f64>)>,
}

impl OracleCurve {
    pub fn validate(&self) -> Result<()> {
        let xs = &self.abscissa.1;
        if xs.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::Domain {
                field: self.name.clone(),
                message: "abscissa must be monotone".into(),
            });
        }
        for (name, ys) in &self.ordinates {
            if ys.len() != xs.len() || ys.iter().any(|y| !y.is_finite()) {
                return Err(Error::Domain {
                    field: format!("{}.{name}", self.name),
                    message: "ordinate must be finite and match the abscissa length".into(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elastica_hand_values() {
        let l = 10.0;
        assert_eq!(elastica(0.0, 1.0, l).unwrap(), (0.0, 0.0));
        let ei = 1000.0;
        let m = std::f64::consts::FRAC_PI_2 * ei / l;
        let (u, v) = elastica(m, ei, l).unwrap();
        assert!((u + 0.363_380_2 * l).abs() < 1e-6 * l);
        assert!((v - 2.0 * l / std::f64::consts::PI).abs() < 1e-12);
        let (u, v) = elastica(2.0 * std::f64::consts::PI * ei / l, ei, l).unwrap();
        assert!((u + l).abs() < 1e-12 && v.abs() < 1e-12);
    }

    #[test]
    fn pressure_band_values() {
        assert_eq!(pressure_band(&SymTensor::diag(-2.0, -2.0, -2.0)), 2.0);
        assert_eq!(pressure_band(&SymTensor::ZERO), 0.0);
        assert_eq!(pressure_band(&SymTensor::diag(3.0, 0.0, 0.0)), -1.0);
    }

    #[test]
    fn zero_pressure_tube_is_undeformed() {
        let m = MaterialModel::Guccione3D {
            c1: 1e4,
            c2: 30.0,
            c3: 10.0,
            c4: 15.0,
        };
        let s = cylinder_inflation(&m, 0.0125, 0.015, 0.0, 3).unwrap();
        assert!((s.inner_radius - 0.0125).abs() < 1e-15);
        assert!((s.axial_stretch - 1.0).abs() < 1e-15);
        assert!(s.profile.iter().all(|w| w.sigma_rr.abs() < 1e-9 && w.sigma_tt.abs() < 1e-9));
    }

    #[test]
    fn biaxial_paths_agree() {
        let m = MaterialModel::Guccione3D {
            c1: 2000.0,
            c2: 30.0,
            c3: 10.0,
            c4: 5.0,
        };
        let a = biaxial_point(&m, 1.1, 1.05, 1.0).unwrap();
        let b = biaxial_point_condensed(&m, 1.1, 1.05, 1.0).unwrap();
        assert!((a.0 - b.0).abs() < 1e-9 * a.0.abs() && (a.1 - b.1).abs() < 1e-9 * a.1.abs());
    }
}
