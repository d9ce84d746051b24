//! Growth laws, break-even concentrations and critical dilution rates.
//!
//! Species 1 grows on S1 with a monotone (Monod-like) law, species 2 on S2
//! with a unimodal (Haldane-like) law. A break-even concentration is the
//! substrate level at which growth equals the local dilution rate; it is
//! [`BreakEven::Infinite`] when no such level exists.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ModelError, Result};
use crate::numeric::{bisect, golden_min, logspace};

/// Kinetic and yield constants of the two-reaction model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KineticParams {
    pub m1: f64,
    #[serde(rename = "kS1")]
    pub ks1: f64,
    pub m2: f64,
    #[serde(rename = "kS2")]
    pub ks2: f64,
    #[serde(rename = "kI")]
    pub ki: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl KineticParams {
    pub const BERNARD2001: KineticParams = KineticParams {
        m1: 0.6,
        ks1: 7.1,
        m2: 0.74,
        ks2: 9.28,
        ki: 256.0,
        k1: 42.14,
        k2: 116.5,
        k3: 268.0,
    };

    pub const BERNARD2001_LOWM1: KineticParams = KineticParams {
        m1: 0.3,
        ..Self::BERNARD2001
    };

    pub const PRESET_NAMES: [&'static str; 2] = ["bernard2001", "bernard2001-lowm1"];

    /// Built-in parameter set by name.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "bernard2001" => Ok(Self::BERNARD2001),
            "bernard2001-lowm1" => Ok(Self::BERNARD2001_LOWM1),
            _ => Err(ModelError::Unknown {
                kind: "preset",
                name: name.to_string(),
            }),
        }
    }

    pub fn named_values(&self) -> [(&'static str, f64); 8] {
        [
            ("m1", self.m1),
            ("kS1", self.ks1),
            ("m2", self.m2),
            ("kS2", self.ks2),
            ("kI", self.ki),
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.named_values() {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    why: "must be finite and strictly positive",
                });
            }
        }
        Ok(())
    }
}

/// `μ1(S1) = m1·S1/(kS1 + S1)`.
pub fn mu1_eval(s1: f64, p: &KineticParams) -> Result<f64> {
    check_conc("S1", s1)?;
    Ok(p.m1 * s1 / (p.ks1 + s1))
}

/// `μ2(S2) = m2·S2/(kS2 + S2 + S2²/kI)`.
pub fn mu2_eval(s2: f64, p: &KineticParams) -> Result<f64> {
    check_conc("S2", s2)?;
    Ok(p.m2 * s2 / (p.ks2 + s2 + s2 * s2 / p.ki))
}

fn check_conc(what: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::NegativeConcentration { what, value })
    }
}

/// Shape class a growth law is validated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LawClass {
    /// Zero at the origin, strictly increasing, bounded.
    Monotone,
    /// Zero at the origin, increasing up to a single peak, decreasing after.
    UnimodalWithPeak,
}

/// A user supplied rate function, checked on a sampled grid.
#[derive(Clone)]
pub struct CustomLaw {
    rate: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    class: LawClass,
    peak: Option<f64>,
    peak_rate: f64,
}

impl fmt::Debug for CustomLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLaw")
            .field("class", &self.class)
            .field("peak", &self.peak)
            .finish_non_exhaustive()
    }
}

const VALIDATION_POINTS: usize = 1000;
const VALIDATION_MAX: f64 = 1e6;

impl CustomLaw {
    pub fn new<F>(rate: F, class: LawClass) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let f0 = rate(0.0);
        if f0.abs() > 1e-14 {
            return Err(ModelError::Hypothesis(format!(
                "rate at 0 is {f0}, expected 0"
            )));
        }
        let grid = logspace(1e-6, VALIDATION_MAX, VALIDATION_POINTS);
        let vals: Vec<f64> = grid.iter().map(|&s| rate(s)).collect();
        if let Some(k) = vals.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(ModelError::Hypothesis(format!(
                "rate is negative or not finite at S = {}",
                grid[k]
            )));
        }
        match class {
            LawClass::Monotone => {
                if let Some(k) = (1..vals.len()).find(|&k| vals[k] <= vals[k - 1]) {
                    return Err(ModelError::Hypothesis(format!(
                        "monotone law does not increase near S = {}",
                        grid[k]
                    )));
                }
                Ok(Self {
                    rate: Arc::new(rate),
                    class,
                    peak: None,
                    peak_rate: *vals.last().unwrap(),
                })
            }
            LawClass::UnimodalWithPeak => {
                let kmax = (0..vals.len())
                    .max_by(|&a, &b| vals[a].total_cmp(&vals[b]))
                    .unwrap();
                if kmax == 0 || kmax == vals.len() - 1 {
                    return Err(ModelError::Hypothesis(
                        "unimodal law has no interior peak on the validation grid".into(),
                    ));
                }
                let rising = (1..=kmax).all(|k| vals[k] > vals[k - 1]);
                let falling = (kmax + 1..vals.len()).all(|k| vals[k] < vals[k - 1]);
                if !(rising && falling) {
                    return Err(ModelError::Hypothesis(
                        "unimodal law is not increasing-then-decreasing on the validation grid"
                            .into(),
                    ));
                }
                let (peak, neg) = golden_min(|s| -rate(s), grid[kmax - 1], grid[kmax + 1], 200);
                Ok(Self {
                    rate: Arc::new(rate),
                    class,
                    peak: Some(peak),
                    peak_rate: -neg,
                })
            }
        }
    }
}

/// Growth rate as a function of substrate concentration.
#[derive(Debug, Clone)]
pub enum GrowthLaw {
    Monod {
        max: f64,
        half_sat: f64,
    },
    Haldane {
        scale: f64,
        half_sat: f64,
        inhibition: f64,
    },
    Custom(CustomLaw),
}

const BISECT_TOL: f64 = 1e-12;
const BISECT_ITERS: usize = 200;

impl GrowthLaw {
    pub fn class(&self) -> LawClass {
        match self {
            GrowthLaw::Monod { .. } => LawClass::Monotone,
            GrowthLaw::Haldane { .. } => LawClass::UnimodalWithPeak,
            GrowthLaw::Custom(c) => c.class,
        }
    }

    #[inline]
    pub fn rate(&self, s: f64) -> f64 {
        match *self {
            GrowthLaw::Monod { max, half_sat } => max * s / (half_sat + s),
            GrowthLaw::Haldane {
                scale,
                half_sat,
                inhibition,
            } => scale * s / (half_sat + s + s * s / inhibition),
            GrowthLaw::Custom(ref c) => (c.rate)(s),
        }
    }

    /// Derivative of the rate; closed form for the built-in laws, central
    /// difference with a relative step of 1e-6 otherwise.
    #[inline]
    pub fn slope(&self, s: f64) -> f64 {
        match *self {
            GrowthLaw::Monod { max, half_sat } => {
                max * half_sat / ((half_sat + s) * (half_sat + s))
            }
            GrowthLaw::Haldane {
                scale,
                half_sat,
                inhibition,
            } => {
                let den = half_sat + s + s * s / inhibition;
                scale * (half_sat - s * s / inhibition) / (den * den)
            }
            GrowthLaw::Custom(ref c) => {
                let h = 1e-6 * s.abs().max(1.0);
                if s >= h {
                    ((c.rate)(s + h) - (c.rate)(s - h)) / (2.0 * h)
                } else {
                    ((c.rate)(s + h) - (c.rate)(s)) / h
                }
            }
        }
    }

    /// Peak abscissa for unimodal laws.
    pub fn peak(&self) -> Option<f64> {
        match *self {
            GrowthLaw::Monod { .. } => None,
            GrowthLaw::Haldane {
                half_sat,
                inhibition,
                ..
            } => Some((half_sat * inhibition).sqrt()),
            GrowthLaw::Custom(ref c) => c.peak,
        }
    }

    /// Maximum of a unimodal law, or the supremum estimate of a monotone one.
    pub fn peak_rate(&self) -> f64 {
        match *self {
            GrowthLaw::Monod { max, .. } => max,
            GrowthLaw::Haldane {
                scale,
                half_sat,
                inhibition,
            } => scale / (1.0 + 2.0 * (half_sat / inhibition).sqrt()),
            GrowthLaw::Custom(ref c) => c.peak_rate,
        }
    }

    /// Unique `S` with `rate(S) = level` for a monotone law.
    fn invert_monotone(&self, level: f64) -> BreakEven {
        if level <= 0.0 {
            return BreakEven::Finite(0.0);
        }
        match *self {
            GrowthLaw::Monod { max, half_sat } => {
                if level < max {
                    BreakEven::Finite(half_sat * level / (max - level))
                } else {
                    BreakEven::Infinite
                }
            }
            _ => {
                let Some(hi) = self.bracket_up(0.0, |v| v > level) else {
                    return BreakEven::Infinite;
                };
                BreakEven::Finite(bisect(
                    |s| self.rate(s) - level,
                    0.0,
                    hi,
                    |_| BISECT_TOL,
                    BISECT_ITERS,
                ))
            }
        }
    }

    /// The two solutions of `rate(S) = level` for a unimodal law, ascending.
    fn invert_unimodal(&self, level: f64) -> (BreakEven, BreakEven) {
        use BreakEven::*;
        if level <= 0.0 {
            return (Finite(0.0), Infinite);
        }
        let peak_rate = self.peak_rate();
        let peak = self.peak().expect("unimodal law has a peak");
        if level > peak_rate {
            return (Infinite, Infinite);
        }
        if level == peak_rate {
            return (Finite(peak), Finite(peak));
        }
        match *self {
            GrowthLaw::Haldane {
                scale,
                half_sat,
                inhibition,
            } => {
                // level·S²/kI + (level − m)·S + level·kS = 0; the product of the
                // roots is kS·kI, which keeps the large root accurate.
                let b = scale - level;
                let disc = (b * b - 4.0 * level * level * half_sat / inhibition).max(0.0);
                let small = 2.0 * level * half_sat / (b + disc.sqrt());
                let large = half_sat * inhibition / small;
                (Finite(small), Finite(large.max(peak)))
            }
            _ => {
                let small = bisect(
                    |s| self.rate(s) - level,
                    0.0,
                    peak,
                    |_| BISECT_TOL,
                    BISECT_ITERS,
                );
                let large = match self.bracket_up(peak, |v| v < level) {
                    Some(hi) => Finite(bisect(
                        |s| self.rate(s) - level,
                        peak,
                        hi,
                        |_| BISECT_TOL,
                        BISECT_ITERS,
                    )),
                    None => Infinite,
                };
                (Finite(small), large)
            }
        }
    }

    fn bracket_up(&self, from: f64, done: impl Fn(f64) -> bool) -> Option<f64> {
        let mut hi = from.max(1.0);
        while hi < 1e15 {
            if done(self.rate(hi)) {
                return Some(hi);
            }
            hi *= 2.0;
        }
        None
    }
}

/// A break-even concentration, or the `+∞` convention when none exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BreakEven {
    Finite(f64),
    Infinite,
}

impl BreakEven {
    pub fn value(self) -> Option<f64> {
        match self {
            BreakEven::Finite(x) => Some(x),
            BreakEven::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, BreakEven::Finite(_))
    }

    /// `x > self`; never true against the sentinel.
    pub fn is_below(self, x: f64) -> bool {
        match self {
            BreakEven::Finite(v) => x > v,
            BreakEven::Infinite => false,
        }
    }

    /// `x < self`; always true against the sentinel.
    pub fn is_above(self, x: f64) -> bool {
        match self {
            BreakEven::Finite(v) => x < v,
            BreakEven::Infinite => true,
        }
    }

    /// Comparison bound: the sentinel maps to `f64::INFINITY`. Only meant for
    /// ordering, never for arithmetic.
    pub fn bound(self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }

    pub fn min(self, other: BreakEven) -> BreakEven {
        if self.bound() <= other.bound() {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: BreakEven) -> BreakEven {
        if self.bound() >= other.bound() {
            self
        } else {
            other
        }
    }
}

/// `x ∈ [lo, hi]` where an infinite lower end makes the interval empty and an
/// infinite upper end leaves it unbounded.
pub fn in_closed(x: f64, lo: BreakEven, hi: BreakEven) -> bool {
    match lo {
        BreakEven::Infinite => false,
        BreakEven::Finite(a) => x >= a && !hi.is_below(x),
    }
}

impl fmt::Display for BreakEven {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BreakEven::Finite(x) => write!(f, "{}", crate::io::fmt_g9(*x)),
            BreakEven::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for BreakEven {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BreakEven::Finite(x) => s.serialize_f64(crate::io::round_g9(*x)),
            BreakEven::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for BreakEven {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(BreakEven::Finite(x)),
            Repr::Text(t) if t == "inf" => Ok(BreakEven::Infinite),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "expected number or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// Reactor of the cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    First,
    Second,
}

impl Stage {
    pub const BOTH: [Stage; 2] = [Stage::First, Stage::Second];

    pub fn index(self) -> usize {
        match self {
            Stage::First => 0,
            Stage::Second => 1,
        }
    }

    /// Volume fraction `r_i` given `r`.
    pub fn fraction(self, r: f64) -> f64 {
        match self {
            Stage::First => r,
            Stage::Second => 1.0 - r,
        }
    }
}

/// The experimenter's controls: flow, volume split and inlet concentrations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    #[serde(rename = "D")]
    pub d: f64,
    pub r: f64,
    #[serde(rename = "S1in")]
    pub s1in: f64,
    #[serde(rename = "S2in")]
    pub s2in: f64,
}

impl OperatingPoint {
    pub fn new(d: f64, r: f64, s1in: f64, s2in: f64) -> Result<Self> {
        let op = Self { d, r, s1in, s2in };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, why| Err(ModelError::InvalidParameter { name, value, why });
        if !(self.d.is_finite() && self.d >= 0.0) {
            return bad("D", self.d, "must be finite and nonnegative");
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return bad("r", self.r, "must lie strictly between 0 and 1");
        }
        if !(self.s1in.is_finite() && self.s1in >= 0.0) {
            return bad("S1in", self.s1in, "must be finite and nonnegative");
        }
        if !(self.s2in.is_finite() && self.s2in >= 0.0) {
            return bad("S2in", self.s2in, "must be finite and nonnegative");
        }
        Ok(())
    }

    pub fn r1(&self) -> f64 {
        self.r
    }

    pub fn r2(&self) -> f64 {
        1.0 - self.r
    }

    pub fn d1(&self) -> f64 {
        self.d / self.r
    }

    pub fn d2(&self) -> f64 {
        self.d / (1.0 - self.r)
    }

    pub fn dilution(&self, stage: Stage) -> f64 {
        self.d / stage.fraction(self.r)
    }
}

/// Critical dilution rates and inlet levels organising the diagrams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalRates {
    #[serde(rename = "S2m")]
    pub s2m: f64,
    pub mu2max: f64,
    #[serde(rename = "D1m")]
    pub d1m: f64,
    #[serde(rename = "D2m")]
    pub d2m: f64,
    #[serde(rename = "D1star")]
    pub d1star: f64,
    #[serde(rename = "D2star")]
    pub d2star: f64,
    /// `S21*, S22*, S23*, S24*` = `λ2^11, λ2^21, λ2^12, λ2^22`.
    #[serde(rename = "S2in_stars")]
    pub s2in_stars: [BreakEven; 4],
}

/// Which of the three `m1` versus `μ2` orderings holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OperatingCase {
    /// `m1 > μ2(S2^m)`
    One,
    /// `μ2(S2in) > m1`
    Two,
    /// `μ2(S2^m) > m1 > μ2(S2in)`
    Three,
    /// An equality between the three rates.
    Degenerate,
}

impl fmt::Display for OperatingCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatingCase::One => "case 1",
            OperatingCase::Two => "case 2",
            OperatingCase::Three => "case 3",
            OperatingCase::Degenerate => "degenerate",
        })
    }
}

/// All six break-even concentrations at one `(D, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakEvens {
    /// `[λ1^1, λ1^2]`
    pub l1: [BreakEven; 2],
    /// `[[λ2^11, λ2^12], [λ2^21, λ2^22]]`
    pub l2: [[BreakEven; 2]; 2],
}

impl BreakEvens {
    pub fn lambda1(&self, stage: Stage) -> BreakEven {
        self.l1[stage.index()]
    }

    /// `λ2^{ij}` with `j ∈ {1, 2}`.
    pub fn lambda2(&self, stage: Stage, j: usize) -> BreakEven {
        self.l2[stage.index()][j - 1]
    }
}

/// The growth laws together with the yield coefficients.
#[derive(Debug, Clone)]
pub struct Model {
    pub mu1: GrowthLaw,
    pub mu2: GrowthLaw,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl Model {
    pub fn new(p: &KineticParams) -> Result<Self> {
        p.validate()?;
        Ok(Self {
            mu1: GrowthLaw::Monod {
                max: p.m1,
                half_sat: p.ks1,
            },
            mu2: GrowthLaw::Haldane {
                scale: p.m2,
                half_sat: p.ks2,
                inhibition: p.ki,
            },
            k1: p.k1,
            k2: p.k2,
            k3: p.k3,
        })
    }

    pub fn with_laws(mu1: GrowthLaw, mu2: GrowthLaw, k1: f64, k2: f64, k3: f64) -> Result<Self> {
        if mu1.class() != LawClass::Monotone {
            return Err(ModelError::Hypothesis("mu1 must be monotone".into()));
        }
        if mu2.class() != LawClass::UnimodalWithPeak {
            return Err(ModelError::Hypothesis("mu2 must be unimodal".into()));
        }
        for (name, value) in [("k1", k1), ("k2", k2), ("k3", k3)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    why: "must be finite and strictly positive",
                });
            }
        }
        Ok(Self {
            mu1,
            mu2,
            k1,
            k2,
            k3,
        })
    }

    pub fn m1(&self) -> f64 {
        self.mu1.peak_rate()
    }

    /// Peak abscissa `S2^m` of μ2.
    pub fn s2m(&self) -> f64 {
        self.mu2.peak().expect("mu2 is unimodal")
    }

    /// `μ2(S2^m)`.
    pub fn mu2max(&self) -> f64 {
        self.mu2.peak_rate()
    }

    /// `λ1^i(D, r)`.
    pub fn lambda1(&self, d: f64, r: f64, stage: Stage) -> BreakEven {
        self.mu1.invert_monotone(d / stage.fraction(r))
    }

    /// `(λ2^{i1}, λ2^{i2})`, ascending; a double root at `D = D_i^m`.
    pub fn lambda2_pair(&self, d: f64, r: f64, stage: Stage) -> (BreakEven, BreakEven) {
        let ri = stage.fraction(r);
        let dm = ri * self.mu2max();
        if d > dm {
            return (BreakEven::Infinite, BreakEven::Infinite);
        }
        if d == dm {
            let s = BreakEven::Finite(self.s2m());
            return (s, s);
        }
        self.mu2.invert_unimodal(d / ri)
    }

    pub fn break_evens(&self, d: f64, r: f64) -> BreakEvens {
        let pair = |stage| {
            let (a, b) = self.lambda2_pair(d, r, stage);
            [a, b]
        };
        BreakEvens {
            l1: [
                self.lambda1(d, r, Stage::First),
                self.lambda1(d, r, Stage::Second),
            ],
            l2: [pair(Stage::First), pair(Stage::Second)],
        }
    }

    pub fn critical_rates(&self, op: &OperatingPoint) -> CriticalRates {
        let mu2max = self.mu2max();
        let mu2in = self.mu2.rate(op.s2in);
        let be = self.break_evens(op.d, op.r);
        let d1m = op.r1() * mu2max;
        let d2m = op.r2() * mu2max;
        let star = |stage: Stage, j: usize, dm: f64| {
            if op.d < dm {
                be.lambda2(stage, j)
            } else {
                BreakEven::Infinite
            }
        };
        CriticalRates {
            s2m: self.s2m(),
            mu2max,
            d1m,
            d2m,
            d1star: op.r1() * mu2in,
            d2star: op.r2() * mu2in,
            s2in_stars: [
                star(Stage::First, 1, d1m),
                star(Stage::Second, 1, d2m),
                star(Stage::First, 2, d1m),
                star(Stage::Second, 2, d2m),
            ],
        }
    }

    pub fn operating_case(&self, s2in: f64) -> OperatingCase {
        let m1 = self.m1();
        let top = self.mu2max();
        let at_inlet = self.mu2.rate(s2in);
        if m1 > top {
            OperatingCase::One
        } else if at_inlet > m1 {
            OperatingCase::Two
        } else if top > m1 && m1 > at_inlet {
            OperatingCase::Three
        } else {
            OperatingCase::Degenerate
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> Model {
        Model::new(&KineticParams::BERNARD2001).unwrap()
    }

    fn finite(b: BreakEven) -> f64 {
        b.value().expect("finite break-even")
    }

    #[test]
    fn mu1_limits_and_half_saturation() {
        let p = KineticParams::BERNARD2001;
        assert_eq!(mu1_eval(0.0, &p).unwrap(), 0.0);
        assert!((mu1_eval(7.1, &p).unwrap() - 0.3).abs() < 1e-15);
        assert!((mu1_eval(1e12, &p).unwrap() - 0.6).abs() < 1e-9);
        assert!(mu1_eval(-1.0, &p).is_err());
    }

    #[test]
    fn mu2_peak_values() {
        let p = KineticParams::BERNARD2001;
        let m = model();
        assert!((m.s2m() - 48.740).abs() < 1e-3);
        assert!((mu2_eval(m.s2m(), &p).unwrap() - 0.535).abs() < 1e-3);
        assert!((m.mu2max() - mu2_eval(m.s2m(), &p).unwrap()).abs() < 1e-14);
        assert!((mu2_eval(150.0, &p).unwrap() - 0.449).abs() < 1e-3);
        assert!(mu2_eval(-0.5, &p).is_err());
    }

    #[test]
    fn lambda1_goldens() {
        let m = model();
        let r = 1.0 / 3.0;
        for (d, l11, l12) in [
            (0.05, 2.366, 1.014),
            (0.1, 7.10, 2.366),
            (0.14, 16.567, 3.82),
        ] {
            assert!((finite(m.lambda1(d, r, Stage::First)) - l11).abs() < 5e-3);
            assert!((finite(m.lambda1(d, r, Stage::Second)) - l12).abs() < 5e-3);
        }
        // closed form kS1·Di/(m1 − Di)
        let d1 = 0.14 / r;
        assert!((finite(m.lambda1(0.14, r, Stage::First)) - 7.1 * d1 / (0.6 - d1)).abs() < 1e-12);
        assert!((finite(m.lambda1(0.17, r, Stage::First)) - 40.233).abs() < 5e-3);
        assert_eq!(m.lambda1(0.25, r, Stage::First), BreakEven::Infinite);
    }

    #[test]
    fn lambda2_matches_bisection_oracle() {
        let m = model();
        let (a, b) = m.lambda2_pair(0.1, 1.0 / 3.0, Stage::First);
        let level = 0.3;
        let g = |s: f64| m.mu2.rate(s) - level;
        let lo = bisect(g, 0.0, m.s2m(), |_| 1e-13, 300);
        let hi = bisect(g, m.s2m(), 1e4, |_| 1e-11, 300);
        assert!((finite(a) - lo).abs() < 1e-9);
        assert!((finite(b) - hi).abs() < 1e-8);
        assert!((lo - 6.438).abs() < 1e-3);
        assert!((hi - 369.03).abs() < 1e-2);
    }

    #[test]
    fn lambda2_double_root_and_sentinel() {
        let m = model();
        let r = 1.0 / 3.0;
        let d1m = r * m.mu2max();
        let (a, b) = m.lambda2_pair(d1m, r, Stage::First);
        assert_eq!(a, b);
        assert!((finite(a) - 48.740).abs() < 1e-3);
        assert_eq!(
            m.lambda2_pair(0.2, r, Stage::First),
            (BreakEven::Infinite, BreakEven::Infinite)
        );
    }

    #[test]
    fn critical_rates_values() {
        let m = model();
        let op = OperatingPoint::new(0.1, 1.0 / 3.0, 10.0, 150.0).unwrap();
        let c = m.critical_rates(&op);
        assert!((c.d1star - 0.1497).abs() < 1e-3);
        assert!((c.d2star - 0.2994).abs() < 1e-3);
        assert!((c.d1m - 0.1786).abs() < 1e-3);
        assert!((c.d2m - 0.3572).abs() < 1e-3);
        assert!(c.s2in_stars.iter().all(|b| b.is_finite()));
        let half = m.critical_rates(&OperatingPoint::new(0.1, 0.5, 10.0, 150.0).unwrap());
        assert_eq!(half.d1m, half.d2m);
        let fast = m.critical_rates(&OperatingPoint::new(0.3, 1.0 / 3.0, 10.0, 150.0).unwrap());
        assert!(!fast.s2in_stars[0].is_finite() && fast.s2in_stars[1].is_finite());
    }

    #[test]
    fn operating_cases() {
        let m = model();
        assert_eq!(m.operating_case(150.0), OperatingCase::One);
        let low = Model::new(&KineticParams::BERNARD2001_LOWM1).unwrap();
        assert_eq!(low.operating_case(150.0), OperatingCase::Two);
        assert_eq!(low.operating_case(5.0), OperatingCase::Three);
    }

    #[test]
    fn custom_laws_follow_bisection_path() {
        let p = KineticParams::BERNARD2001;
        let mu1 = GrowthLaw::Custom(
            CustomLaw::new(move |s| p.m1 * s / (p.ks1 + s), LawClass::Monotone).unwrap(),
        );
        let mu2 = GrowthLaw::Custom(
            CustomLaw::new(
                move |s| p.m2 * s / (p.ks2 + s + s * s / p.ki),
                LawClass::UnimodalWithPeak,
            )
            .unwrap(),
        );
        let custom = Model::with_laws(mu1, mu2, p.k1, p.k2, p.k3).unwrap();
        let closed = model();
        for d in [0.02, 0.05, 0.1, 0.15] {
            for stage in Stage::BOTH {
                let a = finite(custom.lambda1(d, 0.4, stage));
                let b = finite(closed.lambda1(d, 0.4, stage));
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
                let (c1, c2) = custom.lambda2_pair(d, 0.4, stage);
                let (o1, o2) = closed.lambda2_pair(d, 0.4, stage);
                assert!((finite(c1) - finite(o1)).abs() < 1e-8);
                assert!((finite(c2) - finite(o2)).abs() < 1e-6 * finite(o2));
            }
        }
        assert!((custom.s2m() - closed.s2m()).abs() < 1e-5);
        let s = 23.0;
        assert!(
            (custom.mu2.slope(s) - closed.mu2.slope(s)).abs() < 1e-6 * closed.mu2.slope(s).abs()
        );
    }

    #[test]
    fn hypothesis_validator_rejects_bad_laws() {
        assert!(CustomLaw::new(|s| 1.0 + s, LawClass::Monotone).is_err());
        assert!(CustomLaw::new(|s| s / (1.0 + s), LawClass::UnimodalWithPeak).is_err());
        assert!(CustomLaw::new(
            |s| s * (-s).exp() * (1.0 + (s * 50.0).sin() * 0.5),
            LawClass::UnimodalWithPeak
        )
        .is_err());
    }

    #[test]
    fn interval_sentinels() {
        use BreakEven::*;
        assert!(!in_closed(5.0, Infinite, Infinite));
        assert!(in_closed(5.0, Finite(0.0), Infinite));
        assert!(in_closed(5.0, Finite(5.0), Finite(5.0)));
        assert!(!in_closed(5.0, Finite(1.0), Finite(4.0)));
        assert!(Infinite.is_above(1e300));
        assert!(!Infinite.is_below(1e300));
    }

    #[test]
    fn break_even_serde_round_trip() {
        let v = vec![BreakEven::Finite(2.5), BreakEven::Infinite];
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, "[2.5,\"inf\"]");
        let back: Vec<BreakEven> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn preset_lookup() {
        assert_eq!(KineticParams::preset("bernard2001-lowm1").unwrap().m1, 0.3);
        assert!(KineticParams::preset("nope").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn lambda_residuals(d in 1e-4f64..0.6, r in 0.05f64..0.95) {
                let m = model();
                for stage in Stage::BOTH {
                    let di = d / stage.fraction(r);
                    if let BreakEven::Finite(s) = m.lambda1(d, r, stage) {
                        prop_assert!((m.mu1.rate(s) - di).abs() < 1e-10);
                    }
                    let (a, b) = m.lambda2_pair(d, r, stage);
                    if let (BreakEven::Finite(x), BreakEven::Finite(y)) = (a, b) {
                        prop_assert!((m.mu2.rate(x) - di).abs() < 1e-10);
                        prop_assert!((m.mu2.rate(y) - di).abs() < 1e-10);
                        prop_assert!(x < m.s2m() && m.s2m() < y);
                    }
                }
            }

            #[test]
            fn break_even_ordering(d in 1e-3f64..0.2, r in 0.05f64..0.95) {
                let m = model();
                let be = m.break_evens(d, r);
                let all_finite = be.l1.iter().chain(be.l2.iter().flatten()).all(|b| b.is_finite());
                prop_assume!(all_finite && (r - 0.5).abs() > 1e-6);
                let v = |b: BreakEven| b.value().unwrap();
                let (l11, l12) = (v(be.l1[0]), v(be.l1[1]));
                let (a11, a12, a21, a22) = (v(be.l2[0][0]), v(be.l2[0][1]), v(be.l2[1][0]), v(be.l2[1][1]));
                if r < 0.5 {
                    prop_assert!(l12 < l11);
                    prop_assert!(a21 < a11 && a11 < a12 && a12 < a22);
                } else {
                    prop_assert!(l11 < l12);
                    prop_assert!(a11 < a21 && a21 < a22 && a22 < a12);
                }
            }

            #[test]
            fn lambda1_increasing_in_d(d in 1e-3f64..0.19, dd in 1e-6f64..1e-2) {
                let m = model();
                let (a, b) = (m.lambda1(d, 1.0 / 3.0, Stage::First), m.lambda1(d + dd, 1.0 / 3.0, Stage::First));
                if let (BreakEven::Finite(x), BreakEven::Finite(y)) = (a, b) {
                    prop_assert!(y > x);
                }
            }
        }
    }
}
