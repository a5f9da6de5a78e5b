//! Deformation measures expressed in lamina frames.

use crate::error::{Error, Result};
use crate::tensor::{inv3, Mat3, SymTensor, SINGULAR_DET};

/// Which configuration strains are measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceTag {
    Initial,
    PreviousStep,
}

/// Lamina deformation gradient with its derived tensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaminaDeformation {
    pub f: Mat3,
    pub c: Mat3,
    pub b: Mat3,
    pub e: SymTensor,
    pub det_f: f64,
    pub reference: ReferenceTag,
}

impl LaminaDeformation {
    pub fn new(f: Mat3, reference: ReferenceTag) -> Self {
        let c = f.transpose() * f;
        let b = f * f.transpose();
        LaminaDeformation {
            f,
            c,
            b,
            e: green_lagrange(&f),
            det_f: f.determinant(),
            reference,
        }
    }
}

/// Lamina Jacobian: rows of `j` re-expressed in the lamina basis `frame`
/// (columns of `frame` are the lamina unit vectors).
#[inline]
pub fn to_lamina(j: &Mat3, frame: &Mat3) -> Mat3 {
    j * frame
}

/// `F = J_curᵀ J_ref⁻ᵀ` for row-convention lamina Jacobians.
pub fn deformation_gradient_lamina(j_cur: &Mat3, j_ref: &Mat3) -> Result<Mat3> {
    let det = j_ref.determinant();
    if !(det.abs() > SINGULAR_DET) {
        return Err(Error::SingularMatrix { det });
    }
    let inv = inv3(j_ref)?;
    Ok(j_cur.transpose() * inv.transpose())
}

/// `E = ½(FᵀF − I)`.
pub fn green_lagrange(f: &Mat3) -> SymTensor {
    let c = f.transpose() * f;
    SymTensor::from_mat3(&((c - Mat3::identity()) * 0.5))
}

/// `ε = ½(I − (FFᵀ)⁻¹)`.
pub fn almansi(f: &Mat3) -> Result<SymTensor> {
    let det = f.determinant();
    if !(det.abs() > SINGULAR_DET) {
        return Err(Error::DegenerateDeformationGradient { det });
    }
    let b_inv = inv3(&(f * f.transpose()))?;
    Ok(SymTensor::from_mat3(&((Mat3::identity() - b_inv) * 0.5)))
}

/// Linearized strain increment in the current lamina frame.
///
/// `j_prev` and `j_cur` are global row-convention Jacobians of the same
/// material point at the previous and current step; `frame` is the current
/// lamina basis. The incremental displacement gradient with respect to the
/// current coordinates is `I − ∂x_prev/∂x_cur`.
pub fn incremental_linear_strain(j_prev: &Mat3, j_cur: &Mat3, frame: &Mat3) -> Result<SymTensor> {
    let f_inc = deformation_gradient_lamina(j_cur, j_prev)?;
    let f_inv = inv3(&f_inc)?;
    let grad = Mat3::identity() - f_inv;
    let grad_l = frame.transpose() * grad * frame;
    Ok(SymTensor::from_mat3(&grad_l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Vec3;

    #[test]
    fn identity_and_stretch() {
        let a = 0.37;
        let jr = Mat3::from_diagonal(&Vec3::new(a, a, a));
        assert!((deformation_gradient_lamina(&jr, &jr).unwrap() - Mat3::identity()).amax() < 1e-15);
        let jc = Mat3::from_diagonal(&Vec3::new(2.0 * a, a, a));
        let f = deformation_gradient_lamina(&jc, &jr).unwrap();
        assert!((f - Mat3::from_diagonal(&Vec3::new(2.0, 1.0, 1.0))).amax() < 1e-15);
        assert!(deformation_gradient_lamina(&jc, &Mat3::zeros()).is_err());
    }

    #[test]
    fn green_lagrange_hand_cases() {
        assert_eq!(green_lagrange(&Mat3::identity()), SymTensor::ZERO);
        let e = green_lagrange(&Mat3::from_diagonal(&Vec3::new(2.0, 1.0, 1.0)));
        assert!((e.0[0] - 1.5).abs() < 1e-15);
        let mut shear = Mat3::identity();
        shear[(0, 1)] = 1.0;
        let e = green_lagrange(&shear);
        assert!(e.0[0].abs() < 1e-15);
        assert!((e.0[1] - 0.5).abs() < 1e-15);
        assert!((e.0[3] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn almansi_hand_cases() {
        let e = almansi(&Mat3::identity()).unwrap();
        assert!(e.max_abs_component() < 1e-15);
        let e = almansi(&Mat3::from_diagonal(&Vec3::new(2.0, 1.0, 1.0))).unwrap();
        assert!((e.0[0] - 0.375).abs() < 1e-15);
        assert!(almansi(&Mat3::zeros()).is_err());
    }

    #[test]
    fn zero_and_rigid_increment_give_zero_strain() {
        let j = Mat3::new(0.5, 0.1, 0.0, -0.05, 0.4, 0.0, 0.0, 0.0, 0.05);
        let e = incremental_linear_strain(&j, &j, &Mat3::identity()).unwrap();
        assert!(e.max_abs_component() < 1e-15);
    }
}
