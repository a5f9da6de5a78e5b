use cbshell::error::Result;
use cbshell::geometry::{update_fiber_frame, Frame};
use cbshell::kinematics::green_lagrange;
use cbshell::materials::{closed_energy, prepare_strain, stress_response, MaterialModel};
use cbshell::tensor::{push_forward_stress, rotation_matrix, Mat3, SymTensor, Tangent66, Vec3};
use cbshell::verify::{constitutive_suite, naive_push_stress, naive_push_tangent, suite_models, PushForward, DEFAULT_SEED};
use proptest::prelude::*;

fn strain() -> impl Strategy<Value = SymTensor> {
    (
        -0.15..0.35f64,
        -0.15..0.35f64,
        -0.1..0.1f64,
        -0.05..0.05f64,
        -0.05..0.05f64,
    )
        .prop_map(|(a, b, c, d, e)| SymTensor::new(a, b, 0.0, c, d, e))
}

fn model() -> impl Strategy<Value = MaterialModel> {
    (0..suite_models().len()).prop_map(|i| suite_models()[i])
}

fn deformation() -> impl Strategy<Value = Mat3> {
    prop::array::uniform9(-0.4..0.4f64)
        .prop_map(|a| Mat3::identity() + Mat3::from_row_slice(&a))
        .prop_filter("det F > 0.2", |f| f.determinant() > 0.2)
}

fn response(m: &MaterialModel, x: &[f64; 6]) -> Result<SymTensor> {
    let p = prepare_strain(m, &SymTensor::from_engineering(x))?;
    Ok(stress_response(m, &p, false)?.0)
}

const REDUCED: [usize; 5] = [0, 1, 3, 4, 5];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stress_is_energy_gradient(m in model(), e in strain()) {
        let x = e.to_engineering();
        let s = response(&m, &x).unwrap();
        let scale = s.max_abs_component().max(1e-6);
        for &i in &REDUCED {
            let h = 1e-6;
            let (mut xp, mut xm) = (x, x);
            xp[i] += h;
            xm[i] -= h;
            let fd = (closed_energy(&m, &SymTensor::from_engineering(&xp)).unwrap()
                - closed_energy(&m, &SymTensor::from_engineering(&xm)).unwrap())
                / (2.0 * h);
            prop_assert!((s.0[i] - fd).abs() <= 1e-5 * scale, "{} component {i}: {} vs {fd}", m.name(), s.0[i]);
        }
    }

    #[test]
    fn tangent_is_stress_gradient(m in model(), e in strain()) {
        let x = e.to_engineering();
        let p = prepare_strain(&m, &e).unwrap();
        let d = stress_response(&m, &p, true).unwrap().1.unwrap();
        let scale = d.0.amax();
        for &j in &REDUCED {
            let h = 1e-6;
            let (mut xp, mut xm) = (x, x);
            xp[j] += h;
            xm[j] -= h;
            let (a, b) = (response(&m, &xp).unwrap(), response(&m, &xm).unwrap());
            for &i in &REDUCED {
                let fd = (a.0[i] - b.0[i]) / (2.0 * h);
                prop_assert!((d.0[(i, j)] - fd).abs() <= 1e-4 * scale);
            }
        }
    }

    #[test]
    fn condensed_normal_terms_vanish(m in model(), e in strain()) {
        let p = prepare_strain(&m, &e).unwrap();
        let (s, d) = stress_response(&m, &p, true).unwrap();
        let d = d.unwrap();
        prop_assert!(s.0[2].abs() <= 1e-12 * s.max_abs_component().max(1.0));
        for k in 0..6 {
            prop_assert!(d.0[(2, k)].abs() <= 1e-12 * d.0.amax());
            prop_assert!(d.0[(k, 2)].abs() <= 1e-12 * d.0.amax());
        }
        // the 2D Guccione model closes E33 from its in-plane normal strains only
        if matches!(m, MaterialModel::MooneyRivlin { .. } | MaterialModel::Guccione3D { .. }) {
            let c = p.strain.to_mat3() * 2.0 + Mat3::identity();
            prop_assert!((c.determinant() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn push_forwards_match_explicit_sums(f in deformation(), ratio in 0.5..1.5f64, s in prop::array::uniform6(-1.0..1.0f64)) {
        let s = SymTensor(s);
        let fast = push_forward_stress(&f, ratio, &s).unwrap();
        let slow = naive_push_stress(&f, ratio, &s);
        prop_assert!(fast.sub(&slow).max_abs_component() <= 1e-10 * slow.max_abs_component());
        let mut c = nalgebra::Matrix6::zeros();
        for i in 0..6 {
            for j in 0..6 {
                c[(i, j)] = s.0[i] * s.0[j] + if i == j { 1.0 } else { 0.0 };
            }
        }
        let c = Tangent66(c);
        let fast = PushForward::reference();
        let t = (fast.tangent)(&f, ratio, &c).unwrap();
        let n = naive_push_tangent(&f, ratio, &c);
        prop_assert!((t.0 - n.0).amax() <= 1e-10 * n.0.amax());
    }

    #[test]
    fn rigid_rotation_has_no_green_lagrange_strain(w in prop::array::uniform3(-3.0..3.0f64)) {
        let r = rotation_matrix(&Vec3::from(w));
        prop_assert!(green_lagrange(&r).max_abs_component() <= 1e-14);
    }

    #[test]
    fn fiber_frame_stays_orthonormal(w in prop::array::uniform3(-1.0..1.0f64)) {
        let mut frame = Frame::global();
        let axis = Vec3::from(w);
        for k in 1..=40 {
            let d = rotation_matrix(&(axis * (k as f64 / 10.0))) * Vec3::z();
            frame = update_fiber_frame(&d, &frame).unwrap();
            prop_assert!(frame.orthonormality_error() <= 1e-10);
            prop_assert!((frame.e3 - d.normalize()).norm() <= 1e-12);
        }
    }
}

/// `F_is S_ij F_jr` instead of `F_is S_ij F_rj`: the transposed-index bug.
fn transposed_stress(f: &Mat3, ratio: f64, s: &SymTensor) -> Result<SymTensor> {
    Ok(SymTensor::from_mat3(&((f * s.to_mat3() * f) * ratio)))
}

#[test]
fn corrupted_push_forward_fails_the_named_check() {
    let push = PushForward {
        stress: transposed_stress,
        ..PushForward::reference()
    };
    let report = constitutive_suite(DEFAULT_SEED, 20, push);
    assert!(!report.passed());
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert_eq!(failed, ["push_forward_stress vs explicit summation"]);
}

#[test]
fn reference_suite_passes_with_default_seed() {
    let report = constitutive_suite(DEFAULT_SEED, 100, PushForward::reference());
    assert!(report.passed(), "{}", report.to_text());
}
