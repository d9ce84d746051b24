//! Local stability: triangular structure, verdict agreement, table rows.

use am2cascade::diagram::classify_point;
use am2cascade::stability::{classify_all, jacobian_at};
use am2cascade::{enumerate_steady_states, Analytic, KineticParams, Label, Model, OperatingPoint};
use nalgebra::Matrix4;
use proptest::prelude::*;

fn model() -> Model {
    Model::new(&KineticParams::BERNARD2001).unwrap()
}

fn stable_set(op: &OperatingPoint) -> Vec<String> {
    let m = model();
    let mut s = enumerate_steady_states(op, &m);
    classify_all(&mut s, op, &m);
    let mut v: Vec<String> = s
        .iter()
        .filter(|s| s.stability.as_ref().is_some_and(|v| v.is_stable()))
        .map(|s| s.label.to_string())
        .collect();
    v.dedup();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduced_jacobian_is_lower_block_triangular(
        d in 0.0f64..0.6, r in 0.01f64..0.99, s1 in 0.0f64..300.0, s2 in 0.0f64..300.0,
    ) {
        let m = model();
        let op = OperatingPoint::new(d, r, s1, s2).unwrap();
        for s in enumerate_steady_states(&op, &m).iter().filter(|s| s.exists) {
            let j = jacobian_at(s, &op, &m);
            let a = j.matrix();
            prop_assert_eq!((a[0][1], a[0][2], a[0][3], a[1][2], a[1][3], a[2][3]), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
            let mut eig: Vec<f64> = Matrix4::from_fn(|r, c| a[r][c])
                .complex_eigenvalues()
                .iter()
                .map(|z| z.re)
                .collect();
            let mut diag = j.eigenvalues().to_vec();
            eig.sort_by(f64::total_cmp);
            diag.sort_by(f64::total_cmp);
            for (e, d) in eig.iter().zip(&diag) {
                prop_assert!((e - d).abs() < 1e-9 * (1.0 + d.abs()));
            }
        }
    }

    #[test]
    fn verdicts_agree_off_boundaries(
        d in 0.0f64..0.6, r in 0.01f64..0.99, s1 in 0.0f64..300.0, s2 in 0.0f64..300.0,
    ) {
        let m = model();
        let op = OperatingPoint::new(d, r, s1, s2).unwrap();
        let mut states = enumerate_steady_states(&op, &m);
        classify_all(&mut states, &op, &m);
        for s in states.iter().filter(|s| s.exists) {
            let v = s.stability.as_ref().unwrap();
            prop_assert!(v.agree || v.near_boundary, "{}: {:?}", s.label, v);
            // Stable implies existing, and E10^10-type states contract in X1^2.
            if s.label.to_string() == "E10^10" {
                prop_assert!(v.eigenvalues[2] < 0.0);
            }
        }
    }
}

#[test]
fn washout_region_is_globally_stable() {
    let m = model();
    let op = OperatingPoint::new(0.42, 1.0 / 3.0, 5.0, 150.0).unwrap();
    let s = &enumerate_steady_states(&op, &m)[0];
    let j = jacobian_at(s, &op, &m);
    assert!(j.eigenvalues().iter().all(|e| *e < 0.0));
    assert!((j.a11 - (m.mu1.rate(5.0) - op.d1())).abs() < 1e-15);
    assert!((j.a44 - (m.mu2.rate(150.0) - op.d2())).abs() < 1e-15);
    assert_eq!(stable_set(&op), ["E00^00"]);
}

#[test]
fn table_rows_at_reference_points() {
    let third = 1.0 / 3.0;
    let j10 = OperatingPoint::new(0.1675, third, 151.25, 150.0).unwrap();
    assert_eq!(stable_set(&j10), ["E10^10", "E10^11", "E11^11"]);
    let j18 = OperatingPoint::new(0.1175, third, 133.75, 150.0).unwrap();
    assert_eq!(stable_set(&j18), ["E10^11", "E11^11"]);
    let j14 = OperatingPoint::new(0.1575, third, 1.25, 150.0).unwrap();
    assert_eq!(stable_set(&j14), ["E00^01", "E01^01"]);
    let j32 = OperatingPoint::new(0.3925, 0.7, 241.25, 150.0).unwrap();
    assert_eq!(classify_point(&j32, &model()).pattern(), "U.....S........");
}

#[test]
fn states_past_the_haldane_peak_are_unstable() {
    let m = model();
    let l: Label = "E02^01".parse().unwrap();
    for (d, s1, s2) in [(0.1, 5.0, 400.0), (0.05, 3.0, 600.0), (0.12, 10.0, 900.0)] {
        let op = OperatingPoint::new(d, 0.3, s1, s2).unwrap();
        let mut states = enumerate_steady_states(&op, &m);
        classify_all(&mut states, &op, &m);
        for s in states.iter().filter(|s| s.label == l && s.exists) {
            assert_eq!(s.stability.as_ref().unwrap().analytic, Analytic::Unstable);
        }
    }
}
