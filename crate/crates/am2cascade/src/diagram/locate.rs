//! Region lookup from inequality definitions, and the comparison of a scan
//! against the expected region table.

use serde::Serialize;

use crate::equilibria::aux_values;
use crate::kinetics::{GrowthLaw, Model, OperatingPoint, Stage};

use super::plane::{Axes, FigurePreset};
use super::scan::ScanResult;
use super::signature::classify_point;
use super::table::{region_row, RegionRow};

/// Quantities appearing in the region definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum V {
    Zero,
    Inf,
    L11,
    L12,
    L2_11,
    L2_12,
    L2_21,
    L2_22,
    F11,
    F12,
    F21,
    F22,
    D1m,
    D2m,
    D1s,
    D2s,
    R1M1,
    R2M1,
    /// `r2·m2`, with `m2` the Haldane scale factor.
    R2M2,
    S2m,
}

#[derive(Debug, Clone, Copy)]
enum E {
    One(V),
    Min(&'static [V]),
    Max(&'static [V]),
}

use E::{Max, Min, One};
use V::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phi {
    Any,
    Neg,
    Pos,
}

#[derive(Debug, Clone, Copy)]
struct Def {
    s2in: (E, E),
    s1in: (E, E),
    phi: Phi,
    d: (E, E),
    j: u8,
}

const ALL: (E, E) = (One(Zero), One(Inf));
const ABOVE_PEAK: (E, E) = (One(S2m), One(Inf));
const BELOW_PEAK: (E, E) = (One(Zero), One(S2m));

const fn def(s2in: (E, E), s1in: (E, E), phi: Phi, d: (E, E), j: u8) -> Def {
    Def {
        s2in,
        s1in,
        phi,
        d,
        j,
    }
}

const fn o(v: V) -> E {
    One(v)
}

/// `(D, S1in)` plane, `r < 1/2`.
const LOW_R: [Def; 37] = [
    def(
        ALL,
        (o(L11), o(F22)),
        Phi::Neg,
        (o(D1m), Min(&[R1M1, D2m])),
        6,
    ),
    def(
        ALL,
        (o(L11), o(F22)),
        Phi::Pos,
        (o(D1m), Min(&[R1M1, D2m])),
        7,
    ),
    def(
        ALL,
        (o(F22), o(L11)),
        Phi::Any,
        (o(D1m), Min(&[R2M1, D2s, D2m])),
        8,
    ),
    def(
        ALL,
        (Max(&[L11, F22]), o(Inf)),
        Phi::Any,
        (o(D1m), Min(&[R1M1, R2M1, D2m])),
        9,
    ),
    def(ALL, (o(Zero), o(L12)), Phi::Any, (o(Zero), o(D1s)), 15),
    // Printed upper bound `λ1^1`; capped by `F22` so it does not overlap 23.
    def(
        ALL,
        (o(L12), Min(&[L11, F22])),
        Phi::Any,
        (o(Zero), Min(&[R2M1, D1s])),
        16,
    ),
    def(
        ALL,
        (o(L11), Min(&[F12, F22])),
        Phi::Neg,
        (o(Zero), Min(&[R1M1, D1s, D2m])),
        17,
    ),
    def(
        ALL,
        (o(F12), o(F22)),
        Phi::Neg,
        (o(Zero), Min(&[R1M1, D1s, D1m, D2m])),
        18,
    ),
    def(
        ALL,
        (o(F12), o(F22)),
        Phi::Pos,
        (o(Zero), Min(&[R1M1, D1s, D1m, D2m])),
        19,
    ),
    def(
        ALL,
        (Max(&[F12, F22]), o(Inf)),
        Phi::Any,
        (o(Zero), Min(&[R1M1, R2M2, D1s, D1m, D2m])),
        20,
    ),
    def(ABOVE_PEAK, (o(Zero), o(L12)), Phi::Any, (o(D2m), o(Inf)), 0),
    def(ABOVE_PEAK, (o(L12), o(Inf)), Phi::Any, (o(D2m), o(Inf)), 1),
    def(ABOVE_PEAK, (o(L12), o(Inf)), Phi::Any, (o(D2s), o(D2m)), 2),
    def(ABOVE_PEAK, (o(Zero), o(L12)), Phi::Any, (o(D2s), o(D2m)), 3),
    def(ABOVE_PEAK, (o(Zero), o(L12)), Phi::Any, (o(D1m), o(D2s)), 4),
    def(
        ABOVE_PEAK,
        (o(L12), Min(&[L11, F22])),
        Phi::Any,
        (o(D1m), o(R1M1)),
        5,
    ),
    def(
        ABOVE_PEAK,
        (o(F22), o(Inf)),
        Phi::Any,
        (o(D1s), Min(&[R2M1, D1m, D2m])),
        10,
    ),
    def(
        ABOVE_PEAK,
        (o(L11), o(F22)),
        Phi::Pos,
        (o(D1s), Min(&[R1M1, D1m, D2m])),
        11,
    ),
    def(
        ABOVE_PEAK,
        (o(L11), o(F22)),
        Phi::Neg,
        (o(D1s), Min(&[R1M1, D1m, D2m])),
        12,
    ),
    // Printed as `max(λ1^1, F22)`, which would overlap 10 to 12.
    def(
        ABOVE_PEAK,
        (o(L12), Min(&[L11, F22])),
        Phi::Any,
        (o(D1s), Min(&[R2M1, D1m])),
        13,
    ),
    def(
        ABOVE_PEAK,
        (o(Zero), o(L12)),
        Phi::Any,
        (o(D1s), o(D1m)),
        14,
    ),
    def(
        ABOVE_PEAK,
        (Max(&[L11, L12]), Min(&[F12, F22])),
        Phi::Pos,
        (o(Zero), Min(&[R1M1, R2M1, D2m])),
        21,
    ),
    def(
        ABOVE_PEAK,
        (Max(&[L11, F22]), o(F12)),
        Phi::Any,
        (o(Zero), Min(&[R1M1, R2M1, D2m])),
        22,
    ),
    def(
        ABOVE_PEAK,
        (o(F22), o(L11)),
        Phi::Any,
        (o(Zero), Min(&[R2M1, D1s, D2m])),
        23,
    ),
    def(
        ABOVE_PEAK,
        (o(F22), o(Inf)),
        Phi::Any,
        (o(D1s), Min(&[R2M1, D1m, D2m])),
        24,
    ),
    def(BELOW_PEAK, (o(Zero), o(L12)), Phi::Any, (o(D2s), o(Inf)), 0),
    // A union of two pieces; F21 only exists below D_2^m.
    def(BELOW_PEAK, (o(L12), o(F21)), Phi::Any, (o(D2s), o(Inf)), 1),
    def(BELOW_PEAK, (o(L12), o(Inf)), Phi::Any, (o(D2m), o(Inf)), 1),
    def(
        BELOW_PEAK,
        (o(F21), o(F22)),
        Phi::Any,
        (o(D2s), Min(&[R2M1, D2m])),
        25,
    ),
    def(
        BELOW_PEAK,
        (o(F22), o(Inf)),
        Phi::Any,
        (o(D2s), Min(&[R2M1, D2m])),
        26,
    ),
    def(
        BELOW_PEAK,
        (o(F22), o(Inf)),
        Phi::Any,
        (o(D1s), Min(&[R2M1, D1m, D2m])),
        27,
    ),
    def(
        BELOW_PEAK,
        (o(F12), o(F22)),
        Phi::Pos,
        (o(D1s), Min(&[R1M1, D1m])),
        28,
    ),
    def(
        BELOW_PEAK,
        (o(F12), o(F22)),
        Phi::Neg,
        (o(D1s), Min(&[R1M1, D1m])),
        29,
    ),
    def(
        BELOW_PEAK,
        (o(F11), o(F12)),
        Phi::Any,
        (o(D1s), Min(&[R1M1, D1m])),
        30,
    ),
    def(
        BELOW_PEAK,
        (o(L11), o(F11)),
        Phi::Any,
        (o(D1s), Min(&[R1M1, D1m])),
        31,
    ),
    def(
        BELOW_PEAK,
        (o(L12), Min(&[L11, F22])),
        Phi::Any,
        (o(D1s), Min(&[R2M1, D2s])),
        5,
    ),
    def(BELOW_PEAK, (o(Zero), o(L12)), Phi::Any, (o(D1s), o(D2s)), 4),
];

/// `(D, S1in)` plane, `r > 1/2`, `S2in` above the peak.
const HIGH_R: [Def; 20] = [
    def(ABOVE_PEAK, (o(Zero), o(L11)), Phi::Any, (o(D1m), o(Inf)), 0),
    def(
        ABOVE_PEAK,
        (o(L11), o(Inf)),
        Phi::Any,
        (o(D1m), o(R1M1)),
        32,
    ),
    def(
        ABOVE_PEAK,
        (o(L11), o(Inf)),
        Phi::Any,
        (o(D1s), Min(&[R1M1, D1m])),
        33,
    ),
    def(
        ABOVE_PEAK,
        (o(Zero), o(L11)),
        Phi::Any,
        (o(D1s), o(D1m)),
        34,
    ),
    def(
        ABOVE_PEAK,
        (o(Zero), o(L11)),
        Phi::Any,
        (o(D2m), o(D1s)),
        35,
    ),
    def(
        ABOVE_PEAK,
        (o(L11), Min(&[L12, F12])),
        Phi::Any,
        (o(D2m), o(R1M1)),
        36,
    ),
    def(
        ABOVE_PEAK,
        (o(L12), o(F12)),
        Phi::Any,
        (o(D2m), o(R2M1)),
        37,
    ),
    def(
        ABOVE_PEAK,
        (o(F12), o(L12)),
        Phi::Any,
        (o(Zero), Min(&[R1M1, D1s, D1m])),
        38,
    ),
    def(
        ABOVE_PEAK,
        (Max(&[L12, F12]), o(Inf)),
        Phi::Any,
        (o(D2m), Min(&[R1M1, R2M1, D1m])),
        39,
    ),
    def(
        ABOVE_PEAK,
        (o(F12), o(Inf)),
        Phi::Any,
        (o(D2s), Min(&[R1M1, D1m, D2m])),
        40,
    ),
    def(
        ABOVE_PEAK,
        (o(L12), o(F12)),
        Phi::Any,
        (o(D2s), Min(&[R2M1, D2m])),
        41,
    ),
    def(
        ABOVE_PEAK,
        (o(L11), o(L12)),
        Phi::Any,
        (o(D2s), Min(&[R1M1, D2m])),
        42,
    ),
    def(
        ABOVE_PEAK,
        (o(Zero), o(L11)),
        Phi::Any,
        (o(D2s), o(D2m)),
        43,
    ),
    def(
        ABOVE_PEAK,
        (o(Zero), o(L11)),
        Phi::Any,
        (o(Zero), o(D2s)),
        15,
    ),
    def(
        ABOVE_PEAK,
        (o(L11), o(L12)),
        Phi::Neg,
        (o(Zero), Min(&[R1M1, D2s, D2m])),
        44,
    ),
    def(
        ABOVE_PEAK,
        (o(L11), o(L12)),
        Phi::Pos,
        (o(Zero), Min(&[R1M1, D2s, D2m])),
        45,
    ),
    def(
        ABOVE_PEAK,
        (o(L12), o(F22)),
        Phi::Neg,
        (o(Zero), Min(&[R1M1, R2M1, D2m])),
        46,
    ),
    def(
        ABOVE_PEAK,
        (o(L12), o(F22)),
        Phi::Pos,
        (o(Zero), Min(&[R1M1, R2M1, D2m])),
        21,
    ),
    def(
        ABOVE_PEAK,
        (o(F22), o(F12)),
        Phi::Any,
        (o(Zero), Min(&[R2M1, D2s, D2m])),
        22,
    ),
    def(
        ABOVE_PEAK,
        (o(F12), o(Inf)),
        Phi::Any,
        (o(Zero), Min(&[R1M1, D2s, D1m])),
        20,
    ),
];

const B0: (E, E) = (o(Zero), o(L2_21));
const B1: (E, E) = (o(L2_21), o(L2_11));
const B2: (E, E) = (o(L2_11), o(L2_12));
const B3: (E, E) = (o(L2_12), o(L2_22));
const B4: (E, E) = (o(L2_22), o(Inf));

/// `(S2in, S1in)` plane, `r < 1/2`; `D` is fixed so its column is void.
const S2_PLANE: [Def; 30] = [
    def(B0, (o(Zero), o(L12)), Phi::Any, ALL, 0),
    def(B0, (o(L12), o(F21)), Phi::Any, ALL, 1),
    def(B0, (o(F21), o(L11)), Phi::Any, ALL, 64),
    def(B0, (o(L11), o(F11)), Phi::Any, ALL, 65),
    def(B0, (o(F11), o(F12)), Phi::Any, ALL, 66),
    def(B0, (o(F12), o(F22)), Phi::Neg, ALL, 67),
    def(B0, (o(F12), o(F22)), Phi::Pos, ALL, 68),
    def(B0, (o(F22), o(Inf)), Phi::Any, ALL, 69),
    def(B1, (o(Zero), o(L12)), Phi::Any, ALL, 4),
    def(B1, (o(L12), o(L11)), Phi::Any, ALL, 5),
    def(B1, (o(L11), o(F11)), Phi::Any, ALL, 63),
    def(B1, (o(F11), o(F12)), Phi::Any, ALL, 62),
    def(B1, (o(F12), o(F22)), Phi::Neg, ALL, 61),
    def(B1, (o(F12), o(F22)), Phi::Pos, ALL, 60),
    def(B1, (o(F22), o(Inf)), Phi::Any, ALL, 27),
    def(B2, (o(Zero), o(L12)), Phi::Any, ALL, 15),
    def(B2, (o(L12), o(L11)), Phi::Any, ALL, 56),
    def(B2, (o(L11), o(F12)), Phi::Any, ALL, 46),
    def(B2, (o(F12), o(F22)), Phi::Neg, ALL, 57),
    def(B2, (o(F12), o(F22)), Phi::Pos, ALL, 58),
    def(B2, (o(F22), o(Inf)), Phi::Any, ALL, 59),
    def(B3, (Max(&[L11, F22]), o(Inf)), Phi::Any, ALL, 50),
    def(B3, (o(L11), o(F22)), Phi::Pos, ALL, 51),
    def(B3, (o(L11), o(F22)), Phi::Neg, ALL, 52),
    def(B3, (o(F22), o(L11)), Phi::Any, ALL, 53),
    def(B3, (o(L12), Min(&[L11, F22])), Phi::Any, ALL, 54),
    def(B3, (o(Zero), o(L12)), Phi::Any, ALL, 55),
    def(B4, (o(Zero), o(L12)), Phi::Any, ALL, 47),
    def(B4, (o(L12), o(L11)), Phi::Any, ALL, 48),
    def(B4, (o(L11), o(Inf)), Phi::Any, ALL, 49),
];

/// Everything the definitions refer to, evaluated at one operating point.
/// Infinite break-evens become `+∞`; undefined `F_ij` stay `None`.
struct Ctx {
    vals: [Option<f64>; 20],
    phi2: Option<f64>,
}

impl Ctx {
    fn new(op: &OperatingPoint, model: &Model) -> Self {
        let be = model.break_evens(op.d, op.r);
        let aux = aux_values(op, model);
        let inf = |b: crate::kinetics::BreakEven| Some(b.bound());
        let mu2max = model.mu2max();
        let mu2in = model.mu2.rate(op.s2in);
        let m2 = match model.mu2 {
            GrowthLaw::Haldane { scale, .. } => scale,
            _ => mu2max,
        };
        let (r1, r2) = (op.r1(), op.r2());
        let mut vals = [None; 20];
        for (v, x) in [
            (Zero, Some(0.0)),
            (Inf, Some(f64::INFINITY)),
            (L11, inf(be.lambda1(Stage::First))),
            (L12, inf(be.lambda1(Stage::Second))),
            (L2_11, inf(be.lambda2(Stage::First, 1))),
            (L2_12, inf(be.lambda2(Stage::First, 2))),
            (L2_21, inf(be.lambda2(Stage::Second, 1))),
            (L2_22, inf(be.lambda2(Stage::Second, 2))),
            (F11, aux.f11),
            (F12, aux.f12),
            (F21, aux.f21),
            (F22, aux.f22),
            (D1m, Some(r1 * mu2max)),
            (D2m, Some(r2 * mu2max)),
            (D1s, Some(r1 * mu2in)),
            (D2s, Some(r2 * mu2in)),
            (R1M1, Some(r1 * model.m1())),
            (R2M1, Some(r2 * model.m1())),
            (R2M2, Some(r2 * m2)),
            (S2m, Some(model.s2m())),
        ] {
            vals[v as usize] = x;
        }
        Self {
            vals,
            phi2: aux.phi2,
        }
    }

    fn eval(&self, e: E) -> Option<f64> {
        let fold = |vs: &[V], f: fn(f64, f64) -> f64, init: f64| {
            vs.iter()
                .try_fold(init, |acc, v| self.vals[*v as usize].map(|x| f(acc, x)))
        };
        match e {
            One(v) => self.vals[v as usize],
            Min(vs) => fold(vs, f64::min, f64::INFINITY),
            Max(vs) => fold(vs, f64::max, f64::NEG_INFINITY),
        }
    }

    /// Open-interval membership; `None` when a bound is undefined.
    fn within(&self, x: f64, (lo, hi): (E, E)) -> Option<bool> {
        let (a, b) = (self.eval(lo)?, self.eval(hi)?);
        Some(x > a && x < b)
    }

    fn holds(&self, def: &Def, op: &OperatingPoint, fixed_d: bool) -> bool {
        let phi_ok = match def.phi {
            Phi::Any => true,
            Phi::Neg => self.phi2.is_some_and(|p| p < 0.0),
            Phi::Pos => self.phi2.is_some_and(|p| p > 0.0),
        };
        phi_ok
            && self.within(op.s2in, def.s2in) == Some(true)
            && self.within(op.s1in, def.s1in) == Some(true)
            && (fixed_d || self.within(op.d, def.d) == Some(true))
    }
}

fn definitions(axes: &Axes) -> (&'static [Def], bool) {
    match *axes {
        Axes::DS1in { r, .. } if r < 0.5 => (&LOW_R, false),
        Axes::DS1in { r, .. } if r > 0.5 => (&HIGH_R, false),
        Axes::S2inS1in { r, .. } if r < 0.5 => (&S2_PLANE, true),
        _ => (&[], false),
    }
}

/// Regions whose inequality definition holds at `op`, restricted to `allowed`
/// (all when empty). Sorted and deduplicated.
pub fn locate_regions(op: &OperatingPoint, model: &Model, axes: &Axes, allowed: &[u8]) -> Vec<u8> {
    let (defs, fixed_d) = definitions(axes);
    let ctx = Ctx::new(op, model);
    let mut js: Vec<u8> = defs
        .iter()
        .filter(|d| allowed.is_empty() || allowed.contains(&d.j))
        .filter(|d| ctx.holds(d, op, fixed_d))
        .map(|d| d.j)
        .collect();
    js.sort_unstable();
    js.dedup();
    js
}

/// Outcome of checking one extracted region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionCheck {
    pub region: usize,
    pub hash: u64,
    pub point: (f64, f64),
    /// Every definition satisfied at the representative point.
    pub located: Vec<u8>,
    pub computed: String,
    /// Pattern of the located row, when exactly one row was found.
    pub expected: Option<String>,
    pub matches: bool,
}

impl RegionCheck {
    pub fn j(&self) -> Option<u8> {
        match self.located[..] {
            [j] => Some(j),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCheck {
    pub figure: String,
    pub checks: Vec<RegionCheck>,
}

impl TableCheck {
    pub fn mismatches(&self) -> impl Iterator<Item = &RegionCheck> {
        self.checks.iter().filter(|c| !c.matches)
    }
}

/// Locate every accepted region's representative point among the figure's
/// region definitions and compare its signature with the table row.
pub fn region_table_check(scan: &ScanResult, preset: &FigurePreset, model: &Model) -> TableCheck {
    let checks = scan
        .accepted_regions()
        .map(|r| {
            let (x, y) = r.point;
            let op = scan.plane.point(x, y).expect("scan points are valid");
            check_point(
                &op,
                model,
                &scan.plane.axes,
                preset.regions,
                r.id,
                r.hash,
                r.point,
            )
        })
        .collect();
    TableCheck {
        figure: preset.name.to_string(),
        checks,
    }
}

/// Check a single operating point against the figure's definitions.
pub fn check_point(
    op: &OperatingPoint,
    model: &Model,
    axes: &Axes,
    allowed: &[u8],
    region: usize,
    hash: u64,
    point: (f64, f64),
) -> RegionCheck {
    let located = locate_regions(op, model, axes, allowed);
    let computed = classify_point(op, model).pattern();
    let expected = match located[..] {
        [j] => region_row(j).map(|row| row.pattern()),
        _ => None,
    };
    let matches = expected.as_deref() == Some(computed.as_str());
    RegionCheck {
        region,
        hash,
        point,
        located,
        computed,
        expected,
        matches,
    }
}

/// Row label for a legend entry: the located row when unique, otherwise the
/// only row of the figure carrying the same pattern.
pub fn legend_row(check: &RegionCheck, allowed: &[u8]) -> Option<RegionRow> {
    if let Some(j) = check.j() {
        return region_row(j);
    }
    let mut same = allowed
        .iter()
        .filter_map(|&j| region_row(j))
        .filter(|row| row.pattern() == check.computed);
    match (same.next(), same.next()) {
        (Some(row), None) => Some(row),
        _ => None,
    }
}
