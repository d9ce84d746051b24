//! The sixteen boundary curves `γ0..γ15`, sampled in a two-parameter plane.

use serde::{Deserialize, Serialize};

use crate::equilibria::{aux_values, mixed_break_even};
use crate::error::{ModelError, Result};
use crate::kinetics::{Model, OperatingPoint, Stage};
use crate::numeric::bisect;

use super::plane::{Axes, PlaneSpec};

pub const GAMMA_IDS: std::ops::RangeInclusive<u8> = 0..=15;

/// Minimum number of samples along each curve.
pub const MIN_SAMPLES: usize = 256;

/// A sampled boundary curve. Disconnected pieces become separate segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaCurve {
    pub id: u8,
    /// Polylines in plane coordinates `(x, y)`.
    pub segments: Vec<Vec<(f64, f64)>>,
    /// Interval of the free x-coordinate over which the curve is defined,
    /// clipped to the plane window; `None` when empty.
    pub domain: Option<(f64, f64)>,
}

impl GammaCurve {
    pub fn is_empty(&self) -> bool {
        self.segments.iter().all(|s| s.is_empty())
    }

    pub fn points(&self) -> impl Iterator<Item = &(f64, f64)> {
        self.segments.iter().flatten()
    }

    fn empty(id: u8) -> Self {
        Self {
            id,
            segments: Vec::new(),
            domain: None,
        }
    }
}

/// Value of the defining function of `γ_id` at `op`; zero on the curve.
/// `None` where the curve's defining quantities are undefined.
pub fn gamma_residual(id: u8, op: &OperatingPoint, model: &Model) -> Result<Option<f64>> {
    check_id(id)?;
    let be = model.break_evens(op.d, op.r);
    let rm = |stage: Stage| stage.fraction(op.r);
    let mu2in = model.mu2.rate(op.s2in);
    let f = |stage, j| mixed_break_even(model, op, &be, stage, j).map(|v| op.s1in - v);
    Ok(match id {
        0 => be.lambda1(Stage::First).value().map(|l| op.s1in - l),
        1 => be.lambda1(Stage::Second).value().map(|l| op.s1in - l),
        2 => f(Stage::Second, 1),
        3 => f(Stage::Second, 2),
        4 => f(Stage::First, 1),
        5 => f(Stage::First, 2),
        6 => Some(op.d - rm(Stage::First) * mu2in),
        7 => Some(op.d - rm(Stage::Second) * mu2in),
        8 => Some(op.d - rm(Stage::First) * model.mu2max()),
        9 => Some(op.d - rm(Stage::Second) * model.mu2max()),
        10..=13 => {
            let (stage, j) = star_index(id);
            if op.d < rm(stage) * model.mu2max() {
                be.lambda2(stage, j).value().map(|l| op.s2in - l)
            } else {
                None
            }
        }
        _ => {
            let l11 = be.lambda1(Stage::First);
            if op.d > rm(Stage::Second) * model.mu2max() || !l11.is_below(op.s1in) {
                None
            } else {
                aux_values(op, model).phi(id as usize - 13)
            }
        }
    })
}

fn check_id(id: u8) -> Result<()> {
    if GAMMA_IDS.contains(&id) {
        Ok(())
    } else {
        Err(ModelError::Unknown {
            kind: "curve",
            name: format!("gamma{id}"),
        })
    }
}

/// `γ10..γ13` are `S2in = λ2^{11}, λ2^{21}, λ2^{12}, λ2^{22}`.
fn star_index(id: u8) -> (Stage, usize) {
    match id {
        10 => (Stage::First, 1),
        11 => (Stage::Second, 1),
        12 => (Stage::First, 2),
        _ => (Stage::Second, 2),
    }
}

/// Sample `γ_id` across `plane`.
pub fn gamma_sample(id: u8, plane: &PlaneSpec, model: &Model) -> Result<GammaCurve> {
    check_id(id)?;
    plane.validate()?;
    let n = MIN_SAMPLES.max(2 * plane.nx.max(plane.ny));
    let mu2max = model.mu2max();
    let curve = match (plane.axes, id) {
        (Axes::DS1in { r, .. }, 0 | 1) => {
            let stage = if id == 0 { Stage::First } else { Stage::Second };
            let cap = stage.fraction(r) * model.m1();
            graph(id, plane, n, (0.0, cap), |d| {
                model.lambda1(d, r, stage).value()
            })
        }
        (Axes::DS1in { r, s2in }, 2..=5) => {
            let (stage, j) = f_index(id);
            let cap = stage.fraction(r) * model.m1().min(mu2max);
            graph(id, plane, n, (0.0, cap), |d| {
                let op = OperatingPoint::new(d, r, 0.0, s2in).ok()?;
                let be = model.break_evens(d, r);
                mixed_break_even(model, &op, &be, stage, j)
            })
        }
        (Axes::DS1in { r, s2in }, 6..=13) => {
            let mu2in = model.mu2.rate(s2in);
            let at = |frac: f64, rate: f64| vertical(id, plane, n, frac * rate);
            match id {
                6 => at(r, mu2in),
                7 => at(1.0 - r, mu2in),
                8 => at(r, mu2max),
                9 => at(1.0 - r, mu2max),
                // S2in equals the lower (resp. upper) root iff it sits left
                // (resp. right) of the peak; the curve is then D = D_i^*.
                _ => {
                    let (stage, j) = star_index(id);
                    let left = s2in < model.s2m();
                    if (j == 1) == left {
                        at(stage.fraction(r), mu2in)
                    } else {
                        GammaCurve::empty(id)
                    }
                }
            }
        }
        (Axes::S2inS1in { d, r }, 0 | 1) => {
            let stage = if id == 0 { Stage::First } else { Stage::Second };
            match model.lambda1(d, r, stage).value() {
                Some(l) => horizontal(id, plane, n, l),
                None => GammaCurve::empty(id),
            }
        }
        (Axes::S2inS1in { d, r }, 2..=5) => {
            let (stage, j) = f_index(id);
            graph(id, plane, n, (0.0, f64::INFINITY), |s2in| {
                let op = OperatingPoint::new(d, r, 0.0, s2in).ok()?;
                let be = model.break_evens(d, r);
                mixed_break_even(model, &op, &be, stage, j)
            })
        }
        (Axes::S2inS1in { d, r }, 6 | 7) => {
            let stage = if id == 6 { Stage::First } else { Stage::Second };
            let (a, b) = model.lambda2_pair(d, r, stage);
            let mut c = GammaCurve::empty(id);
            for s in [a, b].into_iter().filter_map(|s| s.value()) {
                let v = vertical(id, plane, n, s);
                c.segments.extend(v.segments);
                c.domain = c.domain.or(v.domain);
            }
            if a == b {
                c.segments.truncate(1);
            }
            c
        }
        // D = D_i^m is a single point of the fixed D; no curve in this plane.
        (Axes::S2inS1in { .. }, 8 | 9) => GammaCurve::empty(id),
        (Axes::S2inS1in { d, r }, 10..=13) => {
            let (stage, j) = star_index(id);
            if d < stage.fraction(r) * mu2max {
                match model.break_evens(d, r).lambda2(stage, j).value() {
                    Some(s) => vertical(id, plane, n, s),
                    None => GammaCurve::empty(id),
                }
            } else {
                GammaCurve::empty(id)
            }
        }
        (_, _) => phi_curve(id, plane, model, n)?,
    };
    Ok(curve)
}

fn f_index(id: u8) -> (Stage, usize) {
    match id {
        2 => (Stage::Second, 1),
        3 => (Stage::Second, 2),
        4 => (Stage::First, 1),
        _ => (Stage::First, 2),
    }
}

fn vertical(id: u8, plane: &PlaneSpec, n: usize, x: f64) -> GammaCurve {
    if !(x >= plane.x[0] && x <= plane.x[1]) {
        return GammaCurve::empty(id);
    }
    let seg = (0..n).map(|k| (x, lerp(plane.y, k, n))).collect();
    GammaCurve {
        id,
        segments: vec![seg],
        domain: Some((x, x)),
    }
}

fn horizontal(id: u8, plane: &PlaneSpec, n: usize, y: f64) -> GammaCurve {
    let seg = (0..n).map(|k| (lerp(plane.x, k, n), y)).collect();
    GammaCurve {
        id,
        segments: vec![seg],
        domain: Some((plane.x[0], plane.x[1])),
    }
}

fn lerp(range: [f64; 2], k: usize, n: usize) -> f64 {
    range[0] + (range[1] - range[0]) * k as f64 / (n - 1) as f64
}

/// Graph `y = g(x)` of a function defined on (part of) the open interval
/// `dom`, keeping the part with `y >= 0`. Segment ends are pushed onto the
/// edge of that set by bisection.
fn graph(
    id: u8,
    plane: &PlaneSpec,
    n: usize,
    dom: (f64, f64),
    g: impl Fn(f64) -> Option<f64>,
) -> GammaCurve {
    let lo = plane.x[0].max(dom.0);
    let hi = plane.x[1].min(dom.1);
    if !(hi > lo) {
        return GammaCurve::empty(id);
    }
    let xs: Vec<f64> = (0..n).map(|k| lerp([lo, hi], k, n)).collect();
    let defined = |x: f64| g(x).filter(|y| y.is_finite() && *y >= 0.0);
    let edge = |inside: f64, outside: f64| {
        let mut a = inside;
        let mut b = outside;
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if defined(m).is_some() {
                a = m;
            } else {
                b = m;
            }
        }
        a
    };
    let mut segments: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    let mut prev: Option<f64> = None;
    let mut span: Option<(f64, f64)> = None;
    for &x in &xs {
        match defined(x) {
            Some(y) => {
                if current.is_empty() {
                    if let Some(p) = prev {
                        let e = edge(x, p);
                        if e < x {
                            current.push((e, defined(e).expect("edge is defined")));
                        }
                    }
                }
                current.push((x, y));
            }
            None => {
                if let Some(&(px, _)) = current.last() {
                    let e = edge(px, x);
                    if e > px {
                        current.push((e, defined(e).expect("edge is defined")));
                    }
                    segments.push(std::mem::take(&mut current));
                }
            }
        }
        prev = Some(x);
    }
    if !current.is_empty() {
        segments.push(current);
    }
    for s in &segments {
        let (a, b) = (s[0].0, s[s.len() - 1].0);
        span = Some(span.map_or((a, b), |(p, q)| (p.min(a), q.max(b))));
    }
    GammaCurve {
        id,
        segments,
        domain: span,
    }
}

/// `φ_j = 0` traced as `S1in` roots along each x sample.
fn phi_curve(id: u8, plane: &PlaneSpec, model: &Model, n: usize) -> Result<GammaCurve> {
    const PANELS: usize = 256;
    let phi = |x: f64, y: f64| -> Option<f64> {
        let op = plane.point(x, y).ok()?;
        gamma_residual(id, &op, model).ok().flatten()
    };
    let mut segments: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut open: Vec<(f64, f64)> = Vec::new();
    let mut span: Option<(f64, f64)> = None;
    let dx = (plane.x[1] - plane.x[0]) / (n - 1) as f64;
    for k in 0..n {
        let x = plane.x[0] + k as f64 * dx;
        let mut roots = Vec::new();
        let mut prev: Option<(f64, f64)> = None;
        for p in 0..=PANELS {
            let y = lerp(plane.y, p, PANELS + 1);
            match phi(x, y) {
                Some(v) => {
                    if let Some((py, pv)) = prev {
                        if v == 0.0 {
                            roots.push(y);
                        } else if pv != 0.0 && (pv > 0.0) != (v > 0.0) {
                            let root = bisect(
                                |s| phi(x, s).unwrap_or(pv),
                                py,
                                y,
                                |s| 4.0 * f64::EPSILON * (1.0 + s.abs()),
                                200,
                            );
                            roots.push(root);
                        }
                    }
                    prev = Some((y, v));
                }
                None => prev = None,
            }
        }
        // φ_j grows with S1in, so there is at most one crossing per column.
        match roots.first() {
            Some(&y) => {
                open.push((x, y));
                span = Some(span.map_or((x, x), |(a, b)| (a.min(x), b.max(x))));
            }
            None => {
                if !open.is_empty() {
                    segments.push(std::mem::take(&mut open));
                }
            }
        }
    }
    if !open.is_empty() {
        segments.push(open);
    }
    Ok(GammaCurve {
        id,
        segments,
        domain: span,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::plane::figure_preset;
    use crate::kinetics::KineticParams;

    fn fig(name: &str) -> (PlaneSpec, Model) {
        let f = figure_preset(name).unwrap();
        (f.plane, Model::new(&f.params).unwrap())
    }

    #[test]
    fn unknown_id_is_rejected() {
        let (p, m) = fig("fig3");
        assert!(gamma_sample(16, &p, &m).is_err());
    }

    #[test]
    fn gamma0_passes_reference_points() {
        let (p, m) = fig("fig3");
        let c = gamma_sample(0, &p, &m).unwrap();
        assert!(c.points().count() >= MIN_SAMPLES);
        for (d, s1) in [(0.05, 2.366), (0.1, 7.10)] {
            let seg = &c.segments[0];
            let k = seg.iter().position(|&(x, _)| x > d).unwrap();
            let ((x0, y0), (x1, y1)) = (seg[k - 1], seg[k]);
            let y = y0 + (y1 - y0) * (d - x0) / (x1 - x0);
            assert!((y - s1).abs() < 5e-3, "{d}: {y}");
        }
        // λ1^1 diverges at r1·m1 = 0.2.
        let (lo, hi) = c.domain.unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi < 0.2 && hi > 0.19);
    }

    #[test]
    fn gamma8_is_vertical_at_d1m() {
        let (p, m) = fig("fig3");
        let c = gamma_sample(8, &p, &m).unwrap();
        let haldane = 0.74 / (1.0 + 2.0 * (9.28f64 / 256.0).sqrt());
        let expected = haldane / 3.0;
        assert!(c.points().all(|&(x, _)| (x - expected).abs() < 1e-12));
        assert!((expected - 0.1786).abs() < 1e-4);
    }

    #[test]
    fn vertical_identities() {
        // S2in = 150 lies right of the peak: γ6 coincides with γ12, γ10 is empty.
        let (p, m) = fig("fig3");
        let g6 = gamma_sample(6, &p, &m).unwrap();
        assert_eq!(
            g6,
            GammaCurve {
                id: 6,
                ..gamma_sample(12, &p, &m).unwrap()
            }
        );
        assert!(gamma_sample(10, &p, &m).unwrap().is_empty());
        let (p5, _) = fig("fig5");
        assert!(!gamma_sample(10, &p5, &m).unwrap().is_empty());
        assert!(gamma_sample(12, &p5, &m).unwrap().is_empty());
    }

    #[test]
    fn sampled_points_satisfy_their_equation() {
        for name in ["fig3", "fig5", "fig6", "fig7"] {
            let (p, m) = fig(name);
            let p = p.with_grid(64, 64);
            for id in GAMMA_IDS {
                let c = gamma_sample(id, &p, &m).unwrap();
                for &(x, y) in c.points() {
                    let op = p.point(x, y).unwrap();
                    let r = gamma_residual(id, &op, &m).unwrap().unwrap();
                    let scale = 1.0 + x.abs().max(y.abs());
                    assert!(r.abs() <= 1e-9 * scale, "{name} γ{id} at ({x}, {y}): {r}");
                }
            }
        }
    }

    #[test]
    fn phi2_root_in_d_plane() {
        // Fix S1in and bisect φ2 along D directly; γ15 must pass there.
        let m = Model::new(&KineticParams::BERNARD2001).unwrap();
        let plane = PlaneSpec {
            axes: Axes::DS1in {
                r: 1.0 / 3.0,
                s2in: 150.0,
            },
            x: [0.0, 0.2],
            y: [0.0, 300.0],
            nx: 200,
            ny: 200,
        };
        let c = gamma_sample(15, &plane, &m).unwrap();
        assert!(!c.is_empty());
        let &(d, s1) = c.points().nth(c.points().count() / 2).unwrap();
        let phi2 = |dd: f64| {
            let op = OperatingPoint::new(dd, 1.0 / 3.0, s1, 150.0).unwrap();
            aux_values(&op, &m).phi2.unwrap()
        };
        let lo = phi2(d - 1e-3);
        let hi = phi2(d + 1e-3);
        assert!(lo.signum() != hi.signum(), "{lo} {hi}");
    }

    #[test]
    fn empty_domains() {
        // In the S2in plane at D = 0.17, r = 0.3, D exceeds D_1^m.
        let (p, m) = fig("fig7");
        for id in [4, 5, 8, 9, 10, 12] {
            assert!(gamma_sample(id, &p, &m).unwrap().is_empty(), "γ{id}");
        }
        assert!(!gamma_sample(11, &p, &m).unwrap().is_empty());
    }
}
