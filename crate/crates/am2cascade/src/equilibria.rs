//! Steady states of the reduced cascade and their reconstruction.
//!
//! The reduced state is `(X1^1, X2^1, X1^2, X2^2)`. Each steady state is
//! labelled `E_ij^kl`: the first reactor carries species 1 iff `i = 1`,
//! species 2 with the small (`j = 1`) or large (`j = 2`) break-even of μ2,
//! and likewise `(k, l)` for the second reactor.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ModelError, Result};
use crate::kinetics::{BreakEven, BreakEvens, Model, OperatingPoint, Stage};
use crate::numeric::{bisect, golden_min};
use crate::stability::StabilityVerdict;

/// `E_ij^kl`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub i: u8,
    pub j: u8,
    pub k: u8,
    pub l: u8,
}

const fn lab(i: u8, j: u8, k: u8, l: u8) -> Label {
    Label { i, j, k, l }
}

impl Label {
    /// The fifteen labels in the column order of the region table.
    pub const ALL: [Label; 15] = [
        lab(0, 0, 0, 0),
        lab(0, 0, 0, 1),
        lab(0, 0, 0, 2),
        lab(0, 0, 1, 0),
        lab(0, 0, 1, 1),
        lab(0, 0, 1, 2),
        lab(1, 0, 1, 0),
        lab(1, 0, 1, 1),
        lab(1, 0, 1, 2),
        lab(0, 1, 0, 1),
        lab(0, 2, 0, 1),
        lab(0, 1, 1, 1),
        lab(0, 2, 1, 1),
        lab(1, 1, 1, 1),
        lab(1, 2, 1, 1),
    ];

    pub fn column(self) -> usize {
        Self::ALL
            .iter()
            .position(|&l| l == self)
            .expect("label is one of the fifteen")
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}{}^{}{}", self.i, self.j, self.k, self.l)
    }
}

impl FromStr for Label {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || ModelError::Unknown {
            kind: "label",
            name: s.to_string(),
        };
        let b = s.as_bytes();
        if b.len() != 6 || b[0] != b'E' || b[3] != b'^' {
            return Err(bad());
        }
        let digit = |c: u8| (b'0'..=b'2').contains(&c).then_some(c - b'0');
        let l = Label {
            i: digit(b[1]).ok_or_else(bad)?,
            j: digit(b[2]).ok_or_else(bad)?,
            k: digit(b[4]).ok_or_else(bad)?,
            l: digit(b[5]).ok_or_else(bad)?,
        };
        if Self::ALL.contains(&l) {
            Ok(l)
        } else {
            Err(bad())
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Default number of scan panels for the multi-root equations.
pub const SCAN_PANELS: usize = 2048;
const TANGENCY_TOL: f64 = 1e-10;
const ROOT_ITERS: usize = 400;

// Bisection runs to float resolution: a 1e-12 bracket still leaves full-model
// residuals near 1e-9 where the substrate is almost exhausted.
fn root_tol(x: f64) -> f64 {
    4.0 * f64::EPSILON * (1.0 + x.abs())
}

/// A root of one of the scalar steady-state equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub x: f64,
    /// Even-multiplicity touch point (non-generic).
    pub tangency: bool,
}

/// The outflow/growth balance functions of the second reactor, bound to an
/// operating point and to the upstream components `X1^{1*}`, `X2^{1*}` and
/// the downstream `X1^{2*}`.
#[derive(Debug, Clone, Copy)]
pub struct AuxFunctions<'a> {
    pub model: &'a Model,
    pub op: OperatingPoint,
    pub x11: f64,
    pub x21: f64,
    pub x12: f64,
}

impl<'a> AuxFunctions<'a> {
    pub fn new(model: &'a Model, op: OperatingPoint, x11: f64, x21: f64, x12: f64) -> Self {
        Self {
            model,
            op,
            x11,
            x21,
            x12,
        }
    }

    pub fn f1(&self, x: f64) -> f64 {
        self.model.mu1.rate(self.op.s1in - self.model.k1 * x)
    }

    pub fn f1_prime(&self, x: f64) -> f64 {
        -self.model.k1 * self.model.mu1.slope(self.op.s1in - self.model.k1 * x)
    }

    pub fn f2(&self, x: f64) -> f64 {
        self.model.mu2.rate(self.op.s2in - self.model.k3 * x)
    }

    pub fn f2_prime(&self, x: f64) -> f64 {
        -self.model.k3 * self.model.mu2.slope(self.op.s2in - self.model.k3 * x)
    }

    pub fn f3(&self, x: f64) -> f64 {
        self.model
            .mu2
            .rate(self.op.s2in + self.model.k2 * self.x12 - self.model.k3 * x)
    }

    pub fn f3_prime(&self, x: f64) -> f64 {
        -self.model.k3
            * self
                .model
                .mu2
                .slope(self.op.s2in + self.model.k2 * self.x12 - self.model.k3 * x)
    }

    pub fn g1(&self, x: f64) -> f64 {
        hyperbola(self.op.d2(), self.x11, x)
    }

    pub fn g1_prime(&self, x: f64) -> f64 {
        self.op.d2() * self.x11 / (x * x)
    }

    pub fn g2(&self, x: f64) -> f64 {
        hyperbola(self.op.d2(), self.x21, x)
    }

    pub fn g2_prime(&self, x: f64) -> f64 {
        self.op.d2() * self.x21 / (x * x)
    }

    /// Right end `S1in/k1` of the domain of f1.
    pub fn f1_end(&self) -> f64 {
        self.op.s1in / self.model.k1
    }

    /// Right end `S2in/k3` of the domain of f2.
    pub fn f2_end(&self) -> f64 {
        self.op.s2in / self.model.k3
    }

    /// Right end `d = (S2in + k2·X1^{2*})/k3` of the domain of f3.
    pub fn f3_end(&self) -> f64 {
        (self.op.s2in + self.model.k2 * self.x12) / self.model.k3
    }

    /// Peak abscissa `x1^m` of f2.
    pub fn x1m(&self) -> f64 {
        (self.op.s2in - self.model.s2m()) / self.model.k3
    }

    /// Peak abscissa `x2^m` of f3.
    pub fn x2m(&self) -> f64 {
        (self.op.s2in + self.model.k2 * self.x12 - self.model.s2m()) / self.model.k3
    }
}

/// `D2·(x − a)/x`, with the `a = 0` limit taken exactly.
#[inline]
fn hyperbola(d2: f64, a: f64, x: f64) -> f64 {
    if a == 0.0 {
        d2
    } else {
        d2 * (1.0 - a / x)
    }
}

/// Unique root of `f1 = g1` on `(X1^{1*}, S1in/k1)`.
pub fn solve_f1_g1(aux: &AuxFunctions) -> Result<f64> {
    let (a, b) = (aux.x11, aux.f1_end());
    if !(a < b) {
        return Err(ModelError::Infeasible(format!(
            "f1 = g1 needs X1^1* < S1in/k1, got {a} >= {b}"
        )));
    }
    let h = |x: f64| aux.f1(x) - aux.g1(x);
    // With X1^1* = 0 the left end is the open limit g1 → D2.
    let left = if a == 0.0 { h(0.0) } else { h(a) };
    if !(left > 0.0) || !(h(b) < 0.0) {
        return Err(ModelError::Infeasible(
            "f1 - g1 does not change sign on its interval".into(),
        ));
    }
    Ok(bisect(h, a, b, root_tol, ROOT_ITERS))
}

/// All roots of `f2 = g2` on `(X2^{1*}, S2in/k3)`, ascending.
pub fn solve_f2_g2(aux: &AuxFunctions) -> Result<Vec<Root>> {
    solve_f2_g2_with(aux, SCAN_PANELS)
}

pub fn solve_f2_g2_with(aux: &AuxFunctions, panels: usize) -> Result<Vec<Root>> {
    let (a, b) = (aux.x21, aux.f2_end());
    if !(a < b) {
        return Err(ModelError::Infeasible(format!(
            "f2 = g2 needs X2^1* < S2in/k3, got {a} >= {b}"
        )));
    }
    Ok(scan_roots(
        |x| aux.f2(x) - aux.g2(x),
        a,
        b,
        aux.x1m(),
        panels,
    ))
}

/// All roots of `f3 = g2` on `(X2^{1*}, d)`, ascending.
pub fn solve_f3_g2(aux: &AuxFunctions) -> Result<Vec<Root>> {
    solve_f3_g2_with(aux, SCAN_PANELS)
}

pub fn solve_f3_g2_with(aux: &AuxFunctions, panels: usize) -> Result<Vec<Root>> {
    let (a, b) = (aux.x21, aux.f3_end());
    if !(a < b) {
        return Err(ModelError::Infeasible(format!(
            "f3 = g2 needs X2^1* < d, got {a} >= {b}"
        )));
    }
    Ok(scan_roots(
        |x| aux.f3(x) - aux.g2(x),
        a,
        b,
        aux.x2m(),
        panels,
    ))
}

/// Roots of `h = f − g` on `(a, b)` where `f` is unimodal with peak `xm` and
/// `g` increasing. Past the peak `h` is strictly decreasing, so when
/// `a ≥ xm` the single bracketed root is bisected directly; otherwise the
/// interval is sign-scanned with `panels` panels.
fn scan_roots<H: Fn(f64) -> f64>(h: H, a: f64, b: f64, xm: f64, panels: usize) -> Vec<Root> {
    if a >= xm {
        let (ha, hb) = (h(a), h(b));
        if ha > 0.0 && hb < 0.0 {
            return vec![Root {
                x: bisect(&h, a, b, root_tol, ROOT_ITERS),
                tangency: false,
            }];
        }
    }
    let n = panels.max(2);
    let xs: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
    let hs: Vec<f64> = xs.iter().map(|&x| h(x)).collect();
    let mut roots = Vec::new();
    for k in 0..n {
        let (h0, h1) = (hs[k], hs[k + 1]);
        if k > 0 && h0 == 0.0 {
            let (hl, hr) = (hs[k - 1], h1);
            roots.push(Root {
                x: xs[k],
                tangency: hl != 0.0 && hr != 0.0 && (hl > 0.0) == (hr > 0.0),
            });
            continue;
        }
        if h0 != 0.0 && h1 != 0.0 && (h0 > 0.0) != (h1 > 0.0) {
            roots.push(Root {
                x: bisect(&h, xs[k], xs[k + 1], root_tol, ROOT_ITERS),
                tangency: false,
            });
        }
    }
    // Sign-preserving near-zero minima of |h|.
    for k in 1..n {
        let (hl, hm, hr) = (hs[k - 1], hs[k], hs[k + 1]);
        if hm == 0.0 || (hl > 0.0) != (hm > 0.0) || (hr > 0.0) != (hm > 0.0) {
            continue;
        }
        if hm.abs() <= hl.abs() && hm.abs() <= hr.abs() {
            let (x, v) = golden_min(|x| h(x).abs(), xs[k - 1], xs[k + 1], 120);
            let hx = h(x);
            if v < TANGENCY_TOL && (hx == 0.0 || (hx > 0.0) == (hm > 0.0)) {
                roots.push(Root { x, tangency: true });
            }
        }
    }
    roots.sort_by(|p, q| p.x.total_cmp(&q.x));
    roots
}

/// `F_ij` and `φ_j`, each undefined outside its domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxValues {
    #[serde(rename = "F11")]
    pub f11: Option<f64>,
    #[serde(rename = "F12")]
    pub f12: Option<f64>,
    #[serde(rename = "F21")]
    pub f21: Option<f64>,
    #[serde(rename = "F22")]
    pub f22: Option<f64>,
    pub phi1: Option<f64>,
    pub phi2: Option<f64>,
}

impl AuxValues {
    /// `F_{stage, j}`.
    pub fn f(&self, stage: Stage, j: usize) -> Option<f64> {
        match (stage, j) {
            (Stage::First, 1) => self.f11,
            (Stage::First, 2) => self.f12,
            (Stage::Second, 1) => self.f21,
            (Stage::Second, 2) => self.f22,
            _ => panic!("j must be 1 or 2"),
        }
    }

    pub fn phi(&self, j: usize) -> Option<f64> {
        match j {
            1 => self.phi1,
            2 => self.phi2,
            _ => panic!("j must be 1 or 2"),
        }
    }
}

/// `F_ij = λ1^i + (k1/k2)(λ2^{ij} − S2in)`, defined for `0 < D < min(r_i m1, D_i^m)`.
pub fn mixed_break_even(
    model: &Model,
    op: &OperatingPoint,
    be: &BreakEvens,
    stage: Stage,
    j: usize,
) -> Option<f64> {
    let dm = stage.fraction(op.r) * model.mu2max();
    if !(op.d > 0.0 && op.d < dm) {
        return None;
    }
    let l1 = be.lambda1(stage).value()?;
    let l2 = be.lambda2(stage, j).value()?;
    Some(l1 + model.k1 / model.k2 * (l2 - op.s2in))
}

/// `φ_j = S2in + k2·X1^{2*} − λ2^{2j}` given `X1^{2*}`.
fn phi_from(
    model: &Model,
    op: &OperatingPoint,
    be: &BreakEvens,
    x12: f64,
    j: usize,
) -> Option<f64> {
    if op.d > op.r2() * model.mu2max() {
        return None;
    }
    let l2 = be.lambda2(Stage::Second, j).value()?;
    Some(op.s2in + model.k2 * x12 - l2)
}

/// `X1^{2*}` for the first reactor carrying species 1 alone, when `S1in > λ1^1`.
fn upstream_x12(model: &Model, op: &OperatingPoint, be: &BreakEvens) -> Option<(f64, f64)> {
    let l11 = be.lambda1(Stage::First).value()?;
    if !(op.s1in > l11) {
        return None;
    }
    let x11 = (op.s1in - l11) / model.k1;
    let aux = AuxFunctions::new(model, *op, x11, 0.0, 0.0);
    solve_f1_g1(&aux).ok().map(|x12| (x11, x12))
}

pub fn aux_values(op: &OperatingPoint, model: &Model) -> AuxValues {
    let be = model.break_evens(op.d, op.r);
    let x12 = upstream_x12(model, op, &be).map(|(_, x)| x);
    let phi = |j| x12.and_then(|x| phi_from(model, op, &be, x, j));
    AuxValues {
        f11: mixed_break_even(model, op, &be, Stage::First, 1),
        f12: mixed_break_even(model, op, &be, Stage::First, 2),
        f21: mixed_break_even(model, op, &be, Stage::Second, 1),
        f22: mixed_break_even(model, op, &be, Stage::Second, 2),
        phi1: phi(1),
        phi2: phi(2),
    }
}

/// One candidate steady state (one branch of a multi-root family).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub label: Label,
    /// 1-based index among the branches of this label, ascending in `X2^2`.
    pub branch: u8,
    pub branch_count: u8,
    pub exists: bool,
    /// The existence condition that decided, with its evaluated sides.
    pub reason: String,
    #[serde(default)]
    pub tangency: bool,
    pub reduced: Option<[f64; 4]>,
    pub full: Option<[f64; 8]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityVerdict>,
}

impl SteadyState {
    fn absent(label: Label, reason: String) -> Self {
        Self {
            label,
            branch: 1,
            branch_count: 0,
            exists: false,
            reason,
            tangency: false,
            reduced: None,
            full: None,
            stability: None,
        }
    }

    fn present(label: Label, reason: String, reduced: [f64; 4]) -> Self {
        Self {
            label,
            branch: 1,
            branch_count: 1,
            exists: true,
            reason,
            tangency: false,
            reduced: Some(reduced),
            full: None,
            stability: None,
        }
    }

    /// `(X1^1, X2^1, X1^2, X2^2)` of an existing state.
    pub fn x(&self) -> [f64; 4] {
        self.reduced.expect("existing steady state has components")
    }
}

fn gt(lhs: &str, x: f64, rhs: &str, y: BreakEven) -> (bool, String) {
    let held = y.is_below(x);
    (
        held,
        format!("{lhs} > {rhs} [{} > {y}]", crate::io::fmt_g9(x)),
    )
}

fn gt_opt(lhs: &str, x: f64, rhs: &str, y: Option<f64>) -> (bool, String) {
    match y {
        Some(v) => gt(lhs, x, rhs, BreakEven::Finite(v)),
        None => (false, format!("{rhs} undefined")),
    }
}

fn both(a: (bool, String), b: (bool, String)) -> (bool, String) {
    (a.0 && b.0, format!("{} and {}", a.1, b.1))
}

/// Every candidate of the nine families, one entry per branch, with its
/// existence verdict. Existing entries carry reduced and full states.
pub fn enumerate_steady_states(op: &OperatingPoint, model: &Model) -> Vec<SteadyState> {
    let be = model.break_evens(op.d, op.r);
    let av = aux_values(op, model);
    let (k1, k2, k3) = (model.k1, model.k2, model.k3);
    let l11 = be.lambda1(Stage::First);
    let l12 = be.lambda1(Stage::Second);
    let upstream = upstream_x12(model, op, &be);
    let mut out: Vec<SteadyState> = Vec::with_capacity(16);
    let push_multi = |out: &mut Vec<SteadyState>,
                      label,
                      reason: String,
                      base: [f64; 3],
                      roots: Result<Vec<Root>>| {
        match roots {
            Ok(rs) if !rs.is_empty() => {
                let n = rs.len() as u8;
                for (b, r) in rs.iter().enumerate() {
                    let mut ss = SteadyState::present(
                        label,
                        reason.clone(),
                        [base[0], base[1], base[2], r.x],
                    );
                    ss.branch = b as u8 + 1;
                    ss.branch_count = n;
                    ss.tangency = r.tangency;
                    out.push(ss);
                }
            }
            Ok(_) => out.push(SteadyState::absent(
                label,
                format!("{reason}; no root found"),
            )),
            Err(e) => out.push(SteadyState::absent(label, format!("{reason}; {e}"))),
        }
    };

    // E00^00
    out.push(SteadyState::present(
        Label::ALL[0],
        "always exists".into(),
        [0.0; 4],
    ));

    // E00^0i
    for j in 1..=2u8 {
        let l2 = be.lambda2(Stage::Second, j as usize);
        let (held, reason) = gt("S2in", op.s2in, &format!("lambda2^2{j}"), l2);
        let label = lab(0, 0, 0, j);
        out.push(if held {
            SteadyState::present(
                label,
                reason,
                [0.0, 0.0, 0.0, (op.s2in - l2.value().unwrap()) / k3],
            )
        } else {
            SteadyState::absent(label, reason)
        });
    }

    // E00^10
    let (held, reason) = gt("S1in", op.s1in, "lambda1^2", l12);
    out.push(if held {
        SteadyState::present(
            lab(0, 0, 1, 0),
            reason,
            [0.0, 0.0, (op.s1in - l12.value().unwrap()) / k1, 0.0],
        )
    } else {
        SteadyState::absent(lab(0, 0, 1, 0), reason)
    });

    // E00^1i
    for j in 1..=2u8 {
        let (held, reason) = both(
            gt("S1in", op.s1in, "lambda1^2", l12),
            gt_opt(
                "S1in",
                op.s1in,
                &format!("F2{j}"),
                av.f(Stage::Second, j as usize),
            ),
        );
        let label = lab(0, 0, 1, j);
        out.push(if held {
            let x12 = (op.s1in - l12.value().unwrap()) / k1;
            let l2 = be.lambda2(Stage::Second, j as usize).value().unwrap();
            SteadyState::present(
                label,
                reason,
                [0.0, 0.0, x12, (op.s2in + k2 * x12 - l2) / k3],
            )
        } else {
            SteadyState::absent(label, reason)
        });
    }

    // E10^10 and E10^1i
    let (held, reason) = gt("S1in", op.s1in, "lambda1^1", l11);
    match (held, upstream) {
        (true, Some((x11, x12))) => out.push(SteadyState::present(
            lab(1, 0, 1, 0),
            reason,
            [x11, 0.0, x12, 0.0],
        )),
        (true, None) => out.push(SteadyState::absent(
            lab(1, 0, 1, 0),
            format!("{reason}; f1 = g1 unsolved"),
        )),
        (false, _) => out.push(SteadyState::absent(lab(1, 0, 1, 0), reason)),
    }
    for j in 1..=2u8 {
        let label = lab(1, 0, 1, j);
        let phi = av.phi(j as usize);
        let (held, reason) = both(
            gt("S1in", op.s1in, "lambda1^1", l11),
            match phi {
                Some(v) => (v > 0.0, format!("phi{j} > 0 [{}]", crate::io::fmt_g9(v))),
                None => (false, format!("phi{j} undefined")),
            },
        );
        out.push(match (held, upstream) {
            (true, Some((x11, x12))) => {
                SteadyState::present(label, reason, [x11, 0.0, x12, phi.unwrap() / k3])
            }
            _ => SteadyState::absent(label, reason),
        });
    }

    // E0i^01
    for j in 1..=2u8 {
        let l2 = be.lambda2(Stage::First, j as usize);
        let (held, reason) = gt("S2in", op.s2in, &format!("lambda2^1{j}"), l2);
        let label = lab(0, j, 0, 1);
        if held {
            let x21 = (op.s2in - l2.value().unwrap()) / k3;
            let aux = AuxFunctions::new(model, *op, 0.0, x21, 0.0);
            push_multi(&mut out, label, reason, [0.0, x21, 0.0], solve_f2_g2(&aux));
        } else {
            out.push(SteadyState::absent(label, reason));
        }
    }

    // E0i^11
    for j in 1..=2u8 {
        let l2 = be.lambda2(Stage::First, j as usize);
        let (held, reason) = both(
            gt("S1in", op.s1in, "lambda1^2", l12),
            gt("S2in", op.s2in, &format!("lambda2^1{j}"), l2),
        );
        let label = lab(0, j, 1, 1);
        if held {
            let x21 = (op.s2in - l2.value().unwrap()) / k3;
            let x12 = (op.s1in - l12.value().unwrap()) / k1;
            let aux = AuxFunctions::new(model, *op, 0.0, x21, x12);
            push_multi(&mut out, label, reason, [0.0, x21, x12], solve_f3_g2(&aux));
        } else {
            out.push(SteadyState::absent(label, reason));
        }
    }

    // E1i^11
    for j in 1..=2u8 {
        let (held, reason) = both(
            gt("S1in", op.s1in, "lambda1^1", l11),
            gt_opt(
                "S1in",
                op.s1in,
                &format!("F1{j}"),
                av.f(Stage::First, j as usize),
            ),
        );
        let label = lab(1, j, 1, 1);
        match (held, upstream) {
            (true, Some((x11, x12))) => {
                let l2 = be.lambda2(Stage::First, j as usize).value().unwrap();
                let x21 = (op.s2in + k2 * x11 - l2) / k3;
                let aux = AuxFunctions::new(model, *op, x11, x21, x12);
                push_multi(&mut out, label, reason, [x11, x21, x12], solve_f3_g2(&aux));
            }
            _ => out.push(SteadyState::absent(label, reason)),
        }
    }

    for ss in out.iter_mut().filter(|s| s.exists) {
        match reconstruct_full_state(ss, op, model) {
            Ok(full) => ss.full = Some(full),
            Err(e) => {
                ss.exists = false;
                ss.reason = format!("{}; {e}", ss.reason);
            }
        }
    }
    out
}

/// `(S1^1, X1^1, S2^1, X2^1, S1^2, X1^2, S2^2, X2^2)` from reduced coordinates.
pub fn reconstruct(x: &[f64; 4], op: &OperatingPoint, model: &Model) -> [f64; 8] {
    let [x11, x21, x12, x22] = *x;
    [
        op.s1in - model.k1 * x11,
        x11,
        op.s2in - model.k3 * x21 + model.k2 * x11,
        x21,
        op.s1in - model.k1 * x12,
        x12,
        op.s2in - model.k3 * x22 + model.k2 * x12,
        x22,
    ]
}

/// Full state of an existing steady state; tiny round-off negatives are
/// clamped to zero, anything larger is a consistency error.
pub fn reconstruct_full_state(
    ss: &SteadyState,
    op: &OperatingPoint,
    model: &Model,
) -> Result<[f64; 8]> {
    let x = ss
        .reduced
        .filter(|_| ss.exists)
        .ok_or_else(|| ModelError::Consistency(format!("{} does not exist", ss.label)))?;
    let mut full = reconstruct(&x, op, model);
    let scale = 1.0 + op.s1in.max(op.s2in);
    for v in full.iter_mut() {
        if *v < 0.0 {
            if *v > -1e-9 * scale {
                *v = 0.0;
            } else {
                return Err(ModelError::Consistency(format!(
                    "{} reconstructs a negative component {v}",
                    ss.label
                )));
            }
        }
    }
    Ok(full)
}

/// Membership of a reduced state in the physical set `M`.
pub fn in_m(x: &[f64; 4], op: &OperatingPoint, model: &Model, slack: f64) -> bool {
    let [x11, x21, x12, x22] = *x;
    let ok1 = |x1: f64, x2: f64| {
        x1 >= -slack
            && x2 >= -slack
            && x1 <= op.s1in / model.k1 + slack
            && x2 <= (op.s2in + model.k2 * x1) / model.k3 + slack
    };
    ok1(x11, x21) && ok1(x12, x22)
}
