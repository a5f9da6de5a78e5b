//! Small dense tensor algebra for lamina-frame mechanics.
//!
//! Voigt ordering is fixed project-wide as `(11, 22, 33, 12, 23, 13)`.
//! [`SymTensor`] always stores tensor (not engineering) shear components;
//! [`Tangent66`] is laid out so that `S_I = Σ_J D_IJ x_J` when `x` carries
//! engineering shears, which makes `D_IJ` equal to the tensor entry `C_ijkl`.

use nalgebra::{Matrix3, Matrix6, Vector3};

use crate::error::{Error, Result};

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;

/// Determinants below this magnitude are treated as singular.
pub const SINGULAR_DET: f64 = 1e-14;

/// Voigt slot -> tensor index pair.
pub const VOIGT_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)];

/// Tensor index pair -> Voigt slot.
#[inline]
pub const fn voigt_index(i: usize, j: usize) -> usize {
    match (i, j) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) | (1, 0) => 3,
        (1, 2) | (2, 1) => 4,
        _ => 5,
    }
}

#[inline]
pub fn det3(m: &Mat3) -> f64 {
    m.determinant()
}

pub fn inv3(m: &Mat3) -> Result<Mat3> {
    let det = m.determinant();
    if !(det.abs() > SINGULAR_DET) {
        return Err(Error::SingularMatrix { det });
    }
    m.try_inverse().ok_or(Error::SingularMatrix { det })
}

/// Symmetric second-order tensor in Voigt storage with tensor shears.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor(pub [f64; 6]);

impl SymTensor {
    pub const ZERO: SymTensor = SymTensor([0.0; 6]);

    pub fn new(c11: f64, c22: f64, c33: f64, c12: f64, c23: f64, c13: f64) -> Self {
        SymTensor([c11, c22, c33, c12, c23, c13])
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        SymTensor([a, b, c, 0.0, 0.0, 0.0])
    }

    /// Symmetric part of `m`; exact for symmetric input.
    pub fn from_mat3(m: &Mat3) -> Self {
        SymTensor([
            m[(0, 0)],
            m[(1, 1)],
            m[(2, 2)],
            0.5 * (m[(0, 1)] + m[(1, 0)]),
            0.5 * (m[(1, 2)] + m[(2, 1)]),
            0.5 * (m[(0, 2)] + m[(2, 0)]),
        ])
    }

    pub fn to_mat3(&self) -> Mat3 {
        let v = &self.0;
        Mat3::new(v[0], v[3], v[5], v[3], v[1], v[4], v[5], v[4], v[2])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[voigt_index(i, j)]
    }

    /// Voigt vector with doubled shears (engineering strain convention).
    pub fn to_engineering(&self) -> [f64; 6] {
        let v = &self.0;
        [v[0], v[1], v[2], 2.0 * v[3], 2.0 * v[4], 2.0 * v[5]]
    }

    pub fn from_engineering(x: &[f64; 6]) -> Self {
        SymTensor([x[0], x[1], x[2], 0.5 * x[3], 0.5 * x[4], 0.5 * x[5]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    /// Frobenius norm of the full 3x3 tensor.
    pub fn norm(&self) -> f64 {
        let v = &self.0;
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + 2.0 * (v[3] * v[3] + v[4] * v[4] + v[5] * v[5]))
            .sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().for_each(|x| *x *= s);
        out
    }

    pub fn add(&self, other: &SymTensor) -> Self {
        let mut out = *self;
        out.0.iter_mut().zip(other.0.iter()).for_each(|(a, b)| *a += b);
        out
    }

    pub fn sub(&self, other: &SymTensor) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn max_abs_component(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// Voigt-contracted fourth-order tangent with minor and major symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent66(pub Matrix6<f64>);

impl Default for Tangent66 {
    fn default() -> Self {
        Tangent66(Matrix6::zeros())
    }
}

impl Tangent66 {
    pub fn zeros() -> Self {
        Self::default()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.0[(voigt_index(i, j), voigt_index(k, l))]
    }

    /// `S = C : E` for a tensor-shear strain `E`.
    pub fn contract(&self, strain: &SymTensor) -> SymTensor {
        let x = strain.to_engineering();
        let mut out = [0.0; 6];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..6).map(|j| self.0[(i, j)] * x[j]).sum();
        }
        SymTensor(out)
    }

    /// Expanded `C_ijkl` array.
    pub fn to_full(&self) -> [[[[f64; 3]; 3]; 3]; 3] {
        let mut c = [[[[0.0; 3]; 3]; 3]; 3];
        for (i, ci) in c.iter_mut().enumerate() {
            for (j, cij) in ci.iter_mut().enumerate() {
                for (k, cijk) in cij.iter_mut().enumerate() {
                    for (l, v) in cijk.iter_mut().enumerate() {
                        *v = self.get(i, j, k, l);
                    }
                }
            }
        }
        c
    }

    /// Re-contracts a full tensor; minor symmetries are averaged in.
    pub fn from_full(c: &[[[[f64; 3]; 3]; 3]; 3]) -> Self {
        let mut m = Matrix6::zeros();
        for (a, &(i, j)) in VOIGT_PAIRS.iter().enumerate() {
            for (b, &(k, l)) in VOIGT_PAIRS.iter().enumerate() {
                m[(a, b)] = 0.25 * (c[i][j][k][l] + c[j][i][k][l] + c[i][j][l][k] + c[j][i][l][k]);
            }
        }
        Tangent66(m)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.0.amax().max(1.0);
        (0..6).all(|i| (0..6).all(|j| (self.0[(i, j)] - self.0[(j, i)]).abs() <= tol * scale))
    }
}

/// `σ_sr = ratio · F_si S_ij F_rj`.
pub fn push_forward_stress(f: &Mat3, density_ratio: f64, s: &SymTensor) -> Result<SymTensor> {
    let det = f.determinant();
    if !(det.abs() > SINGULAR_DET) {
        return Err(Error::DegenerateDeformationGradient { det });
    }
    let sigma = f * s.to_mat3() * f.transpose() * density_ratio;
    Ok(SymTensor::from_mat3(&sigma))
}

/// `τC_mnpq = ratio · F_mi F_nj ₀C_ijrs F_pr F_qs`, contracted one index at a time.
pub fn push_forward_tangent(f: &Mat3, density_ratio: f64, c0: &Tangent66) -> Result<Tangent66> {
    let det = f.determinant();
    if !(det.abs() > SINGULAR_DET) {
        return Err(Error::DegenerateDeformationGradient { det });
    }
    let mut a = c0.to_full();
    let mut b = [[[[0.0; 3]; 3]; 3]; 3];
    // four single-index transforms, each O(3^5)
    for slot in 0..4 {
        for m in 0..3 {
            for n in 0..3 {
                for p in 0..3 {
                    for q in 0..3 {
                        let mut acc = 0.0;
                        for r in 0..3 {
                            let (fv, av) = match slot {
                                0 => (f[(m, r)], a[r][n][p][q]),
                                1 => (f[(n, r)], a[m][r][p][q]),
                                2 => (f[(p, r)], a[m][n][r][q]),
                                _ => (f[(q, r)], a[m][n][p][r]),
                            };
                            acc += fv * av;
                        }
                        b[m][n][p][q] = acc;
                    }
                }
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    let mut out = Tangent66::from_full(&a);
    out.0 *= density_ratio;
    Ok(out)
}

/// Rodrigues rotation matrix for rotation vector `w`.
pub fn rotation_matrix(w: &Vec3) -> Mat3 {
    let angle = w.norm();
    if angle < 1e-300 {
        return Mat3::identity();
    }
    let k = w / angle;
    let kx = Mat3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    Mat3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse_basics() {
        assert_eq!(det3(&Mat3::identity()), 1.0);
        assert_eq!(inv3(&Mat3::identity()).unwrap(), Mat3::identity());
        let d = Mat3::from_diagonal(&Vec3::new(2.0, 3.0, 4.0));
        assert!((det3(&d) - 24.0).abs() < 1e-14);
        assert!(inv3(&Mat3::zeros()).is_err());
    }

    #[test]
    fn push_forward_diagonal_case() {
        let f = Mat3::from_diagonal(&Vec3::new(2.0, 0.5, 1.0));
        let s = SymTensor::diag(1.0, 0.0, 0.0);
        let sigma = push_forward_stress(&f, 1.0, &s).unwrap();
        assert!((sigma.0[0] - 4.0).abs() < 1e-14);
        assert!(sigma.0[1..].iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn push_forward_rejects_singular() {
        let s = SymTensor::diag(1.0, 1.0, 1.0);
        let err = push_forward_stress(&Mat3::zeros(), 1.0, &s).unwrap_err();
        assert!(err.to_string().contains("degenerate deformation gradient"));
        assert!(push_forward_tangent(&Mat3::zeros(), 1.0, &Tangent66::zeros()).is_err());
    }

    #[test]
    fn single_entry_tangent_scales_with_fourth_power() {
        let mut c0 = Tangent66::zeros();
        c0.0[(0, 0)] = 3.0;
        let lam = 1.7;
        let f = Mat3::from_diagonal(&Vec3::new(lam, 1.0, 1.0));
        let out = push_forward_tangent(&f, 1.0, &c0).unwrap();
        assert!((out.0[(0, 0)] - lam.powi(4) * 3.0).abs() < 1e-12);
        for i in 0..6 {
            for j in 0..6 {
                if (i, j) != (0, 0) {
                    assert_eq!(out.0[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn contract_doubles_shear() {
        let mut c = Tangent66::zeros();
        c.0[(3, 3)] = 5.0;
        let e = SymTensor::new(0.0, 0.0, 0.0, 0.1, 0.0, 0.0);
        assert!((c.contract(&e).0[3] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rodrigues_quarter_turn() {
        let r = rotation_matrix(&Vec3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2));
        let x = r * Vec3::x();
        assert!((x - Vec3::y()).norm() < 1e-15);
    }
}
