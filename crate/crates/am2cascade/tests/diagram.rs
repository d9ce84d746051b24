//! Structural properties of the operating diagrams.

use am2cascade::diagram::{figure_preset, gamma_sample, scan_plane, Axes, PlaneSpec, GAMMA_IDS};
use am2cascade::equilibria::aux_values;
use am2cascade::{KineticParams, Model, OperatingPoint, Stage};
use proptest::prelude::*;

fn model() -> Model {
    Model::new(&KineticParams::BERNARD2001).unwrap()
}

/// Distance from `p` to segment `ab`, in cell units.
fn seg_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let len2 = vx * vx + vy * vy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (cx, cy) = (a.0 + t * vx - p.0, a.1 + t * vy - p.1);
    (cx * cx + cy * cy).sqrt()
}

#[test]
fn signature_changes_sit_on_gamma_curves() {
    for name in ["fig3", "fig5", "fig6", "fig7"] {
        let f = figure_preset(name).unwrap();
        let m = Model::new(&f.params).unwrap();
        let plane = f.plane.with_grid(80, 80);
        let scan = scan_plane(&plane, &m).unwrap();
        let (dx, dy) = (plane.dx(), plane.dy());
        let to_cells = |(x, y): (f64, f64)| (x / dx, y / dy);
        let curves: Vec<Vec<Vec<(f64, f64)>>> = GAMMA_IDS
            .map(|id| {
                gamma_sample(id, &plane, &m)
                    .unwrap()
                    .segments
                    .into_iter()
                    .map(|s| s.into_iter().map(to_cells).collect())
                    .collect()
            })
            .collect();
        let near = |p: (f64, f64)| {
            curves.iter().flatten().any(|seg| {
                seg.windows(2)
                    .any(|w| seg_dist(p, w[0], w[1]) <= 2f64.sqrt())
                    || (seg.len() == 1 && seg_dist(p, seg[0], seg[0]) <= 2f64.sqrt())
            })
        };
        let mut bad = Vec::new();
        for j in 0..plane.ny {
            for i in 0..plane.nx {
                let h = scan.hashes[scan.index(i, j)];
                for (a, b) in [(i + 1, j), (i, j + 1)] {
                    if a >= plane.nx || b >= plane.ny || scan.hashes[scan.index(a, b)] == h {
                        continue;
                    }
                    let p = plane.cell_center(i, j);
                    let q = plane.cell_center(a, b);
                    let mid = to_cells((0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1)));
                    if !near(mid) {
                        bad.push((p, q));
                    }
                }
            }
        }
        assert!(
            bad.is_empty(),
            "{name}: {} changes away from any curve, e.g. {:?}",
            bad.len(),
            &bad[..bad.len().min(5)]
        );
    }
}

#[test]
fn f21_below_f11_when_r_small_and_inlet_past_peak() {
    let m = model();
    let r = 1.0 / 3.0;
    for s2in in [60.0, 150.0, 400.0] {
        for k in 1..200 {
            let d = 0.4 * k as f64 / 200.0;
            let op = OperatingPoint::new(d, r, 100.0, s2in).unwrap();
            let a = aux_values(&op, &m);
            if let (Some(f21), Some(f11)) = (a.f21, a.f11) {
                assert!(f21 < f11, "D={d} S2in={s2in}: {f21} {f11}");
            }
        }
    }
}

#[test]
fn f11_lambda_f12_ordering_below_d1_star() {
    let m = model();
    let r = 1.0 / 3.0;
    let s2in = 150.0;
    let d1s = r * m.mu2.rate(s2in);
    for k in 1..200 {
        let d = d1s * k as f64 / 200.0;
        let op = OperatingPoint::new(d, r, 100.0, s2in).unwrap();
        let a = aux_values(&op, &m);
        let l11 = m.lambda1(d, r, Stage::First).value();
        if let (Some(f11), Some(l), Some(f12)) = (a.f11, l11, a.f12) {
            assert!(f11 < l && l < f12, "D={d}");
        }
    }
}

#[test]
fn triple_intersections_in_the_inlet_plane() {
    // γ4 meets γ0 on γ10, and γ2 meets γ1 on γ11.
    let m = model();
    let (d, r) = (0.1, 0.3);
    let be = m.break_evens(d, r);
    for (stage, s2) in [
        (Stage::First, be.lambda2(Stage::First, 1).value().unwrap()),
        (Stage::Second, be.lambda2(Stage::Second, 1).value().unwrap()),
    ] {
        let op = OperatingPoint::new(d, r, 0.0, s2).unwrap();
        let a = aux_values(&op, &m);
        let f = a.f(stage, 1).unwrap();
        let l = be.lambda1(stage).value().unwrap();
        assert!((f - l).abs() < 1e-9 * (1.0 + l), "{f} {l}");
    }
    // Same check on the sampled polylines, to grid tolerance.
    let plane = PlaneSpec {
        axes: Axes::S2inS1in { d, r },
        x: [0.0, 1500.0],
        y: [0.0, 300.0],
        nx: 600,
        ny: 600,
    };
    for (a, b, c) in [(0, 4, 10), (1, 2, 11)] {
        let ga = gamma_sample(a, &plane, &m).unwrap();
        let gb = gamma_sample(b, &plane, &m).unwrap();
        let gc = gamma_sample(c, &plane, &m).unwrap();
        let x = gc.points().next().unwrap().0;
        let ya = ga.points().next().unwrap().1;
        let seg = &gb.segments[0];
        let k = seg.iter().position(|p| p.0 >= x).unwrap();
        let yb = seg[k].1;
        let tol = 2.0 * (plane.dx() + plane.dy());
        assert!((ya - yb).abs() < tol, "γ{a}, γ{b}, γ{c}: {ya} vs {yb}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn break_even_orderings(d in 0.001f64..0.6, r in 0.02f64..0.98) {
        prop_assume!((r - 0.5).abs() > 1e-3);
        let m = model();
        let be = m.break_evens(d, r);
        let l1 = [be.lambda1(Stage::First), be.lambda1(Stage::Second)];
        let l2 = [
            be.lambda2(Stage::First, 1), be.lambda2(Stage::First, 2),
            be.lambda2(Stage::Second, 1), be.lambda2(Stage::Second, 2),
        ];
        prop_assume!(l1.iter().chain(&l2).all(|b| b.is_finite()));
        let v = |b: am2cascade::BreakEven| b.value().unwrap();
        let (l11, l12) = (v(l1[0]), v(l1[1]));
        let (a11, a12, a21, a22) = (v(l2[0]), v(l2[1]), v(l2[2]), v(l2[3]));
        if r < 0.5 {
            prop_assert!(l12 < l11);
            prop_assert!(a21 < a11 && a11 < a12 && a12 < a22);
        } else {
            prop_assert!(l11 < l12);
            prop_assert!(a11 < a21 && a21 < a22 && a22 < a12);
        }
    }

    #[test]
    fn phi_signs_past_second_stage_thresholds(
        d in 0.01f64..0.16,
        r in 0.05f64..0.45,
        s1in in 0.0f64..400.0,
        s2in in 0.0f64..1500.0,
    ) {
        let m = model();
        let op = OperatingPoint::new(d, r, s1in, s2in).unwrap();
        let stars = m.critical_rates(&op).s2in_stars;
        let a = aux_values(&op, &m);
        if let (Some(s22), Some(phi1)) = (stars[1].value(), a.phi1) {
            if s2in > s22 {
                prop_assert!(phi1 > 0.0, "phi1 = {}", phi1);
            }
        }
        if let (Some(s24), Some(phi2)) = (stars[3].value(), a.phi2) {
            if s2in > s24 {
                prop_assert!(phi2 > 0.0, "phi2 = {}", phi2);
            }
        }
    }
}
