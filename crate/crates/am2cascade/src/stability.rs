//! Local stability of steady states.
//!
//! The reduced Jacobian is lower block triangular, so its eigenvalues are the
//! diagonal entries `a11, a22, a33, a44`. Stability is decided twice: once by
//! the closed-form existence-style conditions on break-even concentrations,
//! once by the signs of those entries, and the two are cross-checked.

use serde::{Deserialize, Serialize};

use crate::equilibria::{aux_values, AuxFunctions, AuxValues, Label, SteadyState};
use crate::kinetics::{in_closed, BreakEven, BreakEvens, Model, OperatingPoint, Stage};

/// Margin on the diagonal entries below which a verdict is marginal.
pub const NUMERIC_MARGIN: f64 = 1e-8;
/// Tolerance on `g2' − f3'` below which the analytic verdict is a boundary.
pub const SLOPE_TOL: f64 = 1e-10;
const EDGE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianBlocks {
    pub a11: f64,
    pub a21: f64,
    pub a22: f64,
    pub a31: f64,
    pub a33: f64,
    pub a42: f64,
    pub a43: f64,
    pub a44: f64,
}

impl JacobianBlocks {
    pub fn matrix(&self) -> [[f64; 4]; 4] {
        [
            [self.a11, 0.0, 0.0, 0.0],
            [self.a21, self.a22, 0.0, 0.0],
            [self.a31, 0.0, self.a33, 0.0],
            [0.0, self.a42, self.a43, self.a44],
        ]
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        [self.a11, self.a22, self.a33, self.a44]
    }
}

/// Reduced Jacobian at any point `(X1^1, X2^1, X1^2, X2^2)` of `M`.
pub fn jacobian_reduced(x: &[f64; 4], op: &OperatingPoint, model: &Model) -> JacobianBlocks {
    let [x11, x21, x12, x22] = *x;
    let (k1, k2, k3) = (model.k1, model.k2, model.k3);
    let (d1, d2) = (op.d1(), op.d2());
    let s11 = op.s1in - k1 * x11;
    let s21 = op.s2in + k2 * x11 - k3 * x21;
    let s12 = op.s1in - k1 * x12;
    let s22 = op.s2in + k2 * x12 - k3 * x22;
    let (mu1, mu2) = (&model.mu1, &model.mu2);
    JacobianBlocks {
        a11: mu1.rate(s11) - d1 - k1 * mu1.slope(s11) * x11,
        a21: k2 * mu2.slope(s21) * x21,
        a22: mu2.rate(s21) - d1 - k3 * mu2.slope(s21) * x21,
        a31: d2,
        a33: mu1.rate(s12) - d2 - k1 * mu1.slope(s12) * x12,
        a42: d2,
        a43: k2 * mu2.slope(s22) * x22,
        a44: mu2.rate(s22) - d2 - k3 * mu2.slope(s22) * x22,
    }
}

pub fn jacobian_at(ss: &SteadyState, op: &OperatingPoint, model: &Model) -> JacobianBlocks {
    jacobian_reduced(&ss.x(), op, model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Analytic {
    Stable,
    Unstable,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Numeric {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub analytic: Analytic,
    /// The stability condition that was applied, with its evaluated pieces.
    pub clause: String,
    pub numeric: Numeric,
    pub eigenvalues: [f64; 4],
    /// Both verdicts are definite and equal, or both are borderline.
    pub agree: bool,
    /// One verdict is borderline, so a mismatch is not a failure.
    pub near_boundary: bool,
}

impl StabilityVerdict {
    pub fn is_stable(&self) -> bool {
        self.analytic == Analytic::Stable
    }
}

/// Three-valued truth used to carry "on the boundary" through conjunctions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    True,
    False,
    Near,
}

impl Tri {
    fn and(self, o: Tri) -> Tri {
        match (self, o) {
            (Tri::False, _) | (_, Tri::False) => Tri::False,
            (Tri::Near, _) | (_, Tri::Near) => Tri::Near,
            _ => Tri::True,
        }
    }

    fn or(self, o: Tri) -> Tri {
        match (self, o) {
            (Tri::True, _) | (_, Tri::True) => Tri::True,
            (Tri::Near, _) | (_, Tri::Near) => Tri::Near,
            _ => Tri::False,
        }
    }
}

fn near(x: f64, y: f64) -> bool {
    (x - y).abs() <= EDGE_REL * (1.0 + x.abs().max(y.abs()))
}

fn g9(x: f64) -> String {
    crate::io::fmt_g9(x)
}

/// `x < bound` (true against the sentinel).
fn below(x: f64, bound: BreakEven, name: &str, text: &mut Vec<String>) -> Tri {
    text.push(format!("S1in < {name} [{} < {bound}]", g9(x)));
    match bound {
        BreakEven::Infinite => Tri::True,
        BreakEven::Finite(b) if near(x, b) => Tri::Near,
        BreakEven::Finite(b) => {
            if x < b {
                Tri::True
            } else {
                Tri::False
            }
        }
    }
}

/// `x ∉ [lo, hi]`.
fn outside(x: f64, lo: BreakEven, hi: BreakEven, what: &str, text: &mut Vec<String>) -> Tri {
    text.push(format!("{what} notin [{lo}, {hi}] [{}]", g9(x)));
    let at_edge = [lo, hi]
        .iter()
        .any(|b| matches!(b, BreakEven::Finite(v) if near(x, *v)));
    if at_edge {
        Tri::Near
    } else if in_closed(x, lo, hi) {
        Tri::False
    } else {
        Tri::True
    }
}

fn slope_condition(
    ss: &SteadyState,
    op: &OperatingPoint,
    model: &Model,
    text: &mut Vec<String>,
) -> Tri {
    let [x11, x21, x12, x22] = ss.x();
    let aux = AuxFunctions::new(model, *op, x11, x21, x12);
    let (g, f) = (aux.g2_prime(x22), aux.f3_prime(x22));
    text.push(format!("g2'(X2^2*) > f3'(X2^2*) [{} > {}]", g9(g), g9(f)));
    if (g - f).abs() < SLOPE_TOL {
        Tri::Near
    } else if g > f {
        Tri::True
    } else {
        Tri::False
    }
}

/// Closed-form stability verdict for an existing steady state.
pub fn classify_analytic(
    ss: &SteadyState,
    op: &OperatingPoint,
    model: &Model,
) -> (Analytic, String) {
    let be = model.break_evens(op.d, op.r);
    let av = aux_values(op, model);
    classify_analytic_with(ss, op, model, &be, &av)
}

pub(crate) fn classify_analytic_with(
    ss: &SteadyState,
    op: &OperatingPoint,
    model: &Model,
    be: &BreakEvens,
    av: &AuxValues,
) -> (Analytic, String) {
    let mut text = Vec::new();
    let s1 = op.s1in;
    let s2 = op.s2in;
    let l11 = be.lambda1(Stage::First);
    let l12 = be.lambda1(Stage::Second);
    let (a11, a12) = (be.lambda2(Stage::First, 1), be.lambda2(Stage::First, 2));
    let (a21, a22) = (be.lambda2(Stage::Second, 1), be.lambda2(Stage::Second, 2));
    let kk = model.k2 / model.k1;
    let label = ss.label;
    let t = match (label.i, label.j, label.k, label.l) {
        (0, 0, 0, 0) => below(s1, l11, "lambda1^1", &mut text)
            .and(below(s1, l12, "lambda1^2", &mut text))
            .and(outside(s2, a11, a12, "S2in", &mut text))
            .and(outside(s2, a21, a22, "S2in", &mut text)),
        (0, 0, 0, 1) => below(s1, l11, "lambda1^1", &mut text)
            .and(below(s1, l12, "lambda1^2", &mut text))
            .and(outside(s2, a11, a12, "S2in", &mut text)),
        (0, 0, 1, 0) => {
            let shifted = s2 + kk * (s1 - l12.value().expect("E00^10 exists"));
            below(s1, l11, "lambda1^1", &mut text)
                .and(outside(s2, a11, a12, "S2in", &mut text))
                .and(outside(
                    shifted,
                    a21,
                    a22,
                    "S2in+(k2/k1)(S1in-lambda1^2)",
                    &mut text,
                ))
        }
        (0, 0, 1, 1) => {
            below(s1, l11, "lambda1^1", &mut text).and(outside(s2, a11, a12, "S2in", &mut text))
        }
        (1, 0, 1, 0) => {
            let shifted = s2 + kk * (s1 - l11.value().expect("E10^10 exists"));
            let upper = outside(shifted, a11, a12, "S2in+(k2/k1)(S1in-lambda1^1)", &mut text);
            let lower = match (av.phi1, av.phi2) {
                (Some(p1), Some(p2)) => {
                    text.push(format!(
                        "phi1 < 0 or phi2 > 0 [phi1 = {}, phi2 = {}]",
                        g9(p1),
                        g9(p2)
                    ));
                    let lt = |v: f64| {
                        if near(v, 0.0) {
                            Tri::Near
                        } else if v < 0.0 {
                            Tri::True
                        } else {
                            Tri::False
                        }
                    };
                    let gt = |v: f64| {
                        if near(v, 0.0) {
                            Tri::Near
                        } else if v > 0.0 {
                            Tri::True
                        } else {
                            Tri::False
                        }
                    };
                    lt(p1).or(gt(p2))
                }
                _ => {
                    text.push("phi1 < 0 or phi2 > 0 [phi undefined: lambda2^2j infinite]".into());
                    Tri::True
                }
            };
            upper.and(lower)
        }
        (1, 0, 1, 1) => {
            let shifted = s2 + kk * (s1 - l11.value().expect("E10^11 exists"));
            outside(shifted, a11, a12, "S2in+(k2/k1)(S1in-lambda1^1)", &mut text)
        }
        (0, 1, 0, 1) => {
            below(s1, l11, "lambda1^1", &mut text).and(below(s1, l12, "lambda1^2", &mut text))
        }
        (0, 1, 1, 1) => {
            below(s1, l11, "lambda1^1", &mut text).and(slope_condition(ss, op, model, &mut text))
        }
        (1, 1, 1, 1) => slope_condition(ss, op, model, &mut text),
        _ => {
            text.push("unstable whenever it exists".into());
            Tri::False
        }
    };
    let verdict = match t {
        Tri::True => Analytic::Stable,
        Tri::False => Analytic::Unstable,
        Tri::Near => Analytic::Boundary,
    };
    (verdict, format!("{label}: {}", text.join(" and ")))
}

/// Eigenvalue-sign verdict with margin [`NUMERIC_MARGIN`].
pub fn classify_numeric(
    ss: &SteadyState,
    op: &OperatingPoint,
    model: &Model,
) -> (Numeric, [f64; 4]) {
    let eig = jacobian_at(ss, op, model).eigenvalues();
    (numeric_from(&eig), eig)
}

pub fn numeric_from(eig: &[f64; 4]) -> Numeric {
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max < -NUMERIC_MARGIN {
        Numeric::Stable
    } else if max > NUMERIC_MARGIN {
        Numeric::Unstable
    } else {
        Numeric::Marginal
    }
}

fn combine(
    analytic: Analytic,
    clause: String,
    numeric: Numeric,
    eig: [f64; 4],
) -> StabilityVerdict {
    let near_boundary = analytic == Analytic::Boundary || numeric == Numeric::Marginal;
    let agree = matches!(
        (analytic, numeric),
        (Analytic::Stable, Numeric::Stable)
            | (Analytic::Unstable, Numeric::Unstable)
            | (Analytic::Boundary, Numeric::Marginal)
    );
    StabilityVerdict {
        analytic,
        clause,
        numeric,
        eigenvalues: eig,
        agree,
        near_boundary,
    }
}

pub fn verdict(ss: &SteadyState, op: &OperatingPoint, model: &Model) -> StabilityVerdict {
    let (a, clause) = classify_analytic(ss, op, model);
    let (n, eig) = classify_numeric(ss, op, model);
    combine(a, clause, n, eig)
}

/// Fill the stability slot of every existing state.
pub fn classify_all(states: &mut [SteadyState], op: &OperatingPoint, model: &Model) {
    let be = model.break_evens(op.d, op.r);
    let av = aux_values(op, model);
    for ss in states.iter_mut().filter(|s| s.exists) {
        let (a, clause) = classify_analytic_with(ss, op, model, &be, &av);
        let (n, eig) = classify_numeric(ss, op, model);
        ss.stability = Some(combine(a, clause, n, eig));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckEntry {
    pub label: Label,
    pub branch: u8,
    pub analytic: Analytic,
    pub numeric: Numeric,
    pub agree: bool,
    pub near_boundary: bool,
    /// Smallest `|a_ii|`, a proxy for the distance to a stability boundary.
    pub min_abs_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub entries: Vec<CrossCheckEntry>,
    /// Mismatches between two definite verdicts.
    pub disagreements: usize,
    pub flagged: usize,
}

pub fn crosscheck(states: &[SteadyState], op: &OperatingPoint, model: &Model) -> CrossCheckReport {
    let be = model.break_evens(op.d, op.r);
    let av = aux_values(op, model);
    let entries: Vec<CrossCheckEntry> = states
        .iter()
        .filter(|s| s.exists)
        .map(|ss| {
            let (a, clause) = classify_analytic_with(ss, op, model, &be, &av);
            let (n, eig) = classify_numeric(ss, op, model);
            let v = combine(a, clause, n, eig);
            CrossCheckEntry {
                label: ss.label,
                branch: ss.branch,
                analytic: v.analytic,
                numeric: v.numeric,
                agree: v.agree,
                near_boundary: v.near_boundary,
                min_abs_eigenvalue: eig.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min),
            }
        })
        .collect();
    let disagreements = entries
        .iter()
        .filter(|e| !e.agree && !e.near_boundary)
        .count();
    let flagged = entries.iter().filter(|e| e.near_boundary).count();
    CrossCheckReport {
        entries,
        disagreements,
        flagged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::enumerate_steady_states;
    use crate::kinetics::KineticParams;
    use nalgebra::Matrix4;

    fn model() -> Model {
        Model::new(&KineticParams::BERNARD2001).unwrap()
    }

    fn states(op: &OperatingPoint, m: &Model) -> Vec<SteadyState> {
        let mut s = enumerate_steady_states(op, m);
        classify_all(&mut s, op, m);
        s
    }

    fn find(s: &[SteadyState], name: &str) -> SteadyState {
        let l: Label = name.parse().unwrap();
        s.iter()
            .find(|x| x.label == l && x.exists)
            .cloned()
            .expect(name)
    }

    #[test]
    fn washout_entries_in_j0() {
        let m = model();
        let op = OperatingPoint::new(0.42, 1.0 / 3.0, 5.0, 150.0).unwrap();
        let s = states(&op, &m);
        let e = find(&s, "E00^00");
        let j = jacobian_at(&e, &op, &m);
        assert!((j.a11 - (m.mu1.rate(5.0) - op.d1())).abs() < 1e-15);
        assert!((j.a44 - (m.mu2.rate(150.0) - op.d2())).abs() < 1e-15);
        assert!(j.eigenvalues().iter().all(|&a| a < 0.0));
        let v = e.stability.unwrap();
        assert_eq!(v.analytic, Analytic::Stable);
        assert!(v.agree);
    }

    #[test]
    fn e10_10_lower_block_is_contracting() {
        let m = model();
        let op = OperatingPoint::new(0.1, 1.0 / 3.0, 60.0, 150.0).unwrap();
        let s = states(&op, &m);
        let e = find(&s, "E10^10");
        let [x11, _, x12, _] = e.x();
        let aux = AuxFunctions::new(&m, op, x11, 0.0, 0.0);
        let j = jacobian_at(&e, &op, &m);
        let expected = -(aux.g1_prime(x12) - aux.f1_prime(x12)) * x12;
        assert!((j.a33 - expected).abs() < 1e-12);
        assert!(j.a33 < 0.0);
        assert!(e.stability.unwrap().clause.contains("phi1"));
    }

    #[test]
    fn finite_difference_slope_oracle() {
        let m = model();
        for s in [0.3, 4.0, 48.0, 150.0, 900.0] {
            for law in [&m.mu1, &m.mu2] {
                let h = 1e-6 * s;
                let fd = (law.rate(s + h) - law.rate(s - h)) / (2.0 * h);
                assert!((fd - law.slope(s)).abs() <= 1e-6 * law.slope(s).abs().max(1e-6));
            }
        }
    }

    #[test]
    fn e02_01_is_unstable() {
        let m = model();
        let op = OperatingPoint::new(0.05, 1.0 / 3.0, 1.0, 1500.0).unwrap();
        let s = states(&op, &m);
        let e = find(&s, "E02^01");
        let j = jacobian_at(&e, &op, &m);
        assert!(j.a22 > 0.0);
        let v = e.stability.unwrap();
        assert_eq!(v.analytic, Analytic::Unstable);
        assert_eq!(v.numeric, Numeric::Unstable);
    }

    #[test]
    fn marginal_on_gamma1() {
        let m = model();
        let l12 = m.lambda1(0.1, 1.0 / 3.0, Stage::Second).value().unwrap();
        let op = OperatingPoint::new(0.1, 1.0 / 3.0, l12, 2000.0).unwrap();
        let s = states(&op, &m);
        let v = find(&s, "E00^00").stability.unwrap();
        assert_eq!(v.numeric, Numeric::Marginal);
        assert_eq!(v.analytic, Analytic::Boundary);
        assert!(v.agree);
    }

    #[test]
    fn triangular_matrix_eigenvalues() {
        let m = model();
        let op = OperatingPoint::new(0.08, 0.4, 80.0, 150.0).unwrap();
        for ss in states(&op, &m).iter().filter(|s| s.exists) {
            let j = jacobian_at(ss, &op, &m);
            let a = j.matrix();
            let mat = Matrix4::from_fn(|r, c| a[r][c]);
            let mut ev: Vec<f64> = mat.complex_eigenvalues().iter().map(|z| z.re).collect();
            let mut diag = j.eigenvalues().to_vec();
            ev.sort_by(f64::total_cmp);
            diag.sort_by(f64::total_cmp);
            for (x, y) in ev.iter().zip(&diag) {
                assert!((x - y).abs() < 1e-9, "{} {x} {y}", ss.label);
            }
        }
    }

    #[test]
    fn crosscheck_agrees_on_a_rich_point() {
        let m = model();
        let op = OperatingPoint::new(0.05, 1.0 / 3.0, 100.0, 150.0).unwrap();
        let s = enumerate_steady_states(&op, &m);
        let rep = crosscheck(&s, &op, &m);
        assert_eq!(rep.disagreements, 0);
        assert!(!rep.entries.is_empty());
    }
}
