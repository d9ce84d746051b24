//! Time integration of the full and reduced cascade, conservation monitors,
//! attractor matching and basin sampling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equilibria::{enumerate_steady_states, reconstruct, Label, SteadyState};
use crate::error::{ModelError, Result};
use crate::kinetics::{Model, OperatingPoint};
use crate::par_map;

/// `(S1^1, X1^1, S2^1, X2^1, S1^2, X1^2, S2^2, X2^2)`.
pub type FullState = [f64; 8];
/// `(X1^1, X2^1, X1^2, X2^2)`.
pub type ReducedState = [f64; 4];

/// Right-hand side of the eight-dimensional cascade.
pub fn rhs_full(x: &FullState, op: &OperatingPoint, model: &Model) -> FullState {
    let [s11, x11, s21, x21, s12, x12, s22, x22] = *x;
    let (d1, d2) = (op.d1(), op.d2());
    let (k1, k2, k3) = (model.k1, model.k2, model.k3);
    let m11 = model.mu1.rate(s11);
    let m21 = model.mu2.rate(s21);
    let m12 = model.mu1.rate(s12);
    let m22 = model.mu2.rate(s22);
    [
        d1 * (op.s1in - s11) - k1 * m11 * x11,
        (m11 - d1) * x11,
        d1 * (op.s2in - s21) + k2 * m11 * x11 - k3 * m21 * x21,
        (m21 - d1) * x21,
        d2 * (s11 - s12) - k1 * m12 * x12,
        d2 * (x11 - x12) + m12 * x12,
        d2 * (s21 - s22) + k2 * m12 * x12 - k3 * m22 * x22,
        d2 * (x21 - x22) + m22 * x22,
    ]
}

/// Right-hand side of the reduced four-dimensional cascade.
pub fn rhs_reduced(x: &ReducedState, op: &OperatingPoint, model: &Model) -> ReducedState {
    let [x11, x21, x12, x22] = *x;
    let (d1, d2) = (op.d1(), op.d2());
    let (k1, k2, k3) = (model.k1, model.k2, model.k3);
    let m11 = model.mu1.rate(op.s1in - k1 * x11);
    let m21 = model.mu2.rate(op.s2in + k2 * x11 - k3 * x21);
    let m12 = model.mu1.rate(op.s1in - k1 * x12);
    let m22 = model.mu2.rate(op.s2in + k2 * x12 - k3 * x22);
    [
        (m11 - d1) * x11,
        (m21 - d1) * x21,
        d2 * (x11 - x12) + m12 * x12,
        d2 * (x21 - x22) + m22 * x22,
    ]
}

/// Reduced right-hand side plus a flag telling whether `x` lies in `M`.
pub fn rhs_reduced_checked(
    x: &ReducedState,
    op: &OperatingPoint,
    model: &Model,
) -> (ReducedState, bool) {
    (
        rhs_reduced(x, op, model),
        crate::equilibria::in_m(x, op, model, 1e-12),
    )
}

/// Analytic Jacobian of [`rhs_full`], row-major.
pub fn jacobian_full(x: &FullState, op: &OperatingPoint, model: &Model) -> [[f64; 8]; 8] {
    let [s11, x11, s21, x21, s12, x12, s22, x22] = *x;
    let (d1, d2) = (op.d1(), op.d2());
    let (k1, k2, k3) = (model.k1, model.k2, model.k3);
    let (mu1, mu2) = (&model.mu1, &model.mu2);
    let (m11, p11) = (mu1.rate(s11), mu1.slope(s11));
    let (m21, p21) = (mu2.rate(s21), mu2.slope(s21));
    let (m12, p12) = (mu1.rate(s12), mu1.slope(s12));
    let (m22, p22) = (mu2.rate(s22), mu2.slope(s22));
    let mut j = [[0.0; 8]; 8];
    j[0][0] = -d1 - k1 * p11 * x11;
    j[0][1] = -k1 * m11;
    j[1][0] = p11 * x11;
    j[1][1] = m11 - d1;
    j[2][0] = k2 * p11 * x11;
    j[2][1] = k2 * m11;
    j[2][2] = -d1 - k3 * p21 * x21;
    j[2][3] = -k3 * m21;
    j[3][2] = p21 * x21;
    j[3][3] = m21 - d1;
    j[4][0] = d2;
    j[4][4] = -d2 - k1 * p12 * x12;
    j[4][5] = -k1 * m12;
    j[5][1] = d2;
    j[5][4] = p12 * x12;
    j[5][5] = m12 - d2;
    j[6][2] = d2;
    j[6][4] = k2 * p12 * x12;
    j[6][5] = k2 * m12;
    j[6][6] = -d2 - k3 * p22 * x22;
    j[6][7] = -k3 * m22;
    j[7][3] = d2;
    j[7][6] = p22 * x22;
    j[7][7] = m22 - d2;
    j
}

/// Conservation variables and their distance to the inlet values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationDiagnostics {
    /// `[Z1^1, Z2^1, Z1^2, Z2^2]`
    pub z: [f64; 4],
    /// `[|Z1^1 − S1in|, |Z2^1 − S2in|, |Z1^2 − S1in|, |Z2^2 − S2in|]`
    pub deviation: [f64; 4],
}

pub fn conservation(x: &FullState, op: &OperatingPoint, model: &Model) -> ConservationDiagnostics {
    let [s11, x11, s21, x21, s12, x12, s22, x22] = *x;
    let z = [
        s11 + model.k1 * x11,
        s21 + model.k3 * x21 - model.k2 * x11,
        s12 + model.k1 * x12,
        s22 + model.k3 * x22 - model.k2 * x12,
    ];
    ConservationDiagnostics {
        z,
        deviation: [
            (z[0] - op.s1in).abs(),
            (z[1] - op.s2in).abs(),
            (z[2] - op.s1in).abs(),
            (z[3] - op.s2in).abs(),
        ],
    }
}

/// Integration and convergence-detection settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub tmax: f64,
    /// Mixed relative/absolute error target per step.
    pub tol: f64,
    /// Smallest step accepted before declaring stiffness, relative to `1 + t`.
    pub min_step: f64,
    /// `‖ẋ‖∞` threshold for convergence.
    pub converge_tol: f64,
    /// Consecutive accepted steps below `converge_tol` required.
    pub converge_steps: usize,
    /// Relative radius for matching a terminal state to a steady state.
    pub match_radius: f64,
    /// Keep every accepted step (otherwise only the endpoints).
    pub record: bool,
    /// Stop at `tmax` even if converged earlier (used by conservation checks).
    pub run_to_tmax: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            tmax: 1e4,
            tol: 1e-10,
            min_step: 1e-12,
            converge_tol: 1e-8,
            converge_steps: 50,
            match_radius: 1e-4,
            record: true,
            run_to_tmax: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TerminalEvent {
    /// `label` is `None` when no existing steady state lies within the radius.
    ConvergedTo {
        t: f64,
        label: Option<Label>,
        branch: u8,
    },
    MaxTime {
        t: f64,
    },
    BlowUp {
        t: f64,
    },
}

impl TerminalEvent {
    pub fn matched(&self) -> Option<(Label, u8)> {
        match self {
            TerminalEvent::ConvergedTo {
                label: Some(l),
                branch,
                ..
            } => Some((*l, *branch)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub states: Vec<FullState>,
    /// Accepted step sizes (one per step after the first sample).
    pub steps: Vec<f64>,
    /// Number of components clamped back to zero by the positivity guard.
    pub projections: usize,
    pub event: TerminalEvent,
}

impl Trajectory {
    pub fn last(&self) -> &FullState {
        self.states
            .last()
            .expect("trajectory has at least one state")
    }
}

struct Run<const N: usize> {
    t: Vec<f64>,
    y: Vec<[f64; N]>,
    steps: Vec<f64>,
    projections: usize,
    outcome: Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    Converged(f64),
    MaxTime(f64),
    BlowUp(f64),
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

const TAIL_RATE: f64 = 1e-5;
const TAIL_STEPS: usize = 200;
const TAIL_TOL_FLOOR: f64 = 1e-14;

fn inf_norm<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Adaptive Dormand–Prince integration of `ẏ = f(y)` from `y0` with
/// convergence detection on `‖ẏ‖∞`.
fn dopri<const N: usize, F>(f: F, y0: [f64; N], opts: &IntegrateOptions) -> Result<Run<N>>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = f(&y);
    let mut run = Run {
        t: vec![0.0],
        y: vec![y0],
        steps: Vec::new(),
        projections: 0,
        outcome: Outcome::MaxTime(opts.tmax),
    };
    if !opts.run_to_tmax && inf_norm(&k1) < opts.converge_tol {
        run.outcome = Outcome::Converged(0.0);
        return Ok(run);
    }
    let mut tol = opts.tol;
    let scale = |tol: f64, a: f64, b: f64| tol * (1.0 + a.abs().max(b.abs()));
    let mut h = {
        let d = inf_norm(&k1).max(1e-10);
        (0.01 * (1.0 + inf_norm(&y)) / d).min(opts.tmax).max(1e-6)
    };
    let mut quiet = 0usize;
    let mut tail = 0usize;
    while t < opts.tmax {
        if t + h > opts.tmax {
            h = opts.tmax - t;
        }
        let k2 = f(&combo(&y, h, &[(A21, &k1)]));
        let k3 = f(&combo(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(&combo(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(&combo(
            &y,
            h,
            &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
        ));
        let k6 = f(&combo(
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ));
        let y5 = combo(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = f(&y5);
        let mut err = 0.0f64;
        for i in 0..N {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            err = err.max(e.abs() / scale(tol, y[i], y5[i]));
        }
        if !err.is_finite() || y5.iter().any(|v| !v.is_finite() || v.abs() > 1e12) {
            if h < opts.min_step * (1.0 + t) {
                run.outcome = Outcome::BlowUp(t);
                return Ok(run);
            }
            h *= 0.25;
            continue;
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            let mut projected = false;
            for v in y.iter_mut() {
                if *v < 0.0 {
                    if *v < -1e-12 {
                        run.projections += 1;
                    }
                    *v = 0.0;
                    projected = true;
                }
            }
            k1 = if projected { f(&y) } else { k7 };
            run.steps.push(h);
            if opts.record || t >= opts.tmax {
                run.t.push(t);
                run.y.push(y);
            }
            let rate = inf_norm(&k1);
            if rate < opts.converge_tol {
                quiet += 1;
                if quiet >= opts.converge_steps && !opts.run_to_tmax {
                    run.outcome = Outcome::Converged(t);
                    break;
                }
            } else {
                quiet = 0;
            }
            // Close to an equilibrium the step is pinned at the stability
            // limit and the stiffest mode jitters at an amplitude set by the
            // tolerance, which can keep ‖ẏ‖ above `converge_tol` forever.
            // Tightening the tolerance there lowers that floor cheaply.
            if rate < TAIL_RATE && !opts.run_to_tmax {
                tail += 1;
                if tail >= TAIL_STEPS && tol > TAIL_TOL_FLOOR {
                    tol = (tol * 0.1).max(TAIL_TOL_FLOOR);
                    tail = 0;
                }
            } else {
                tail = 0;
            }
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= fac;
        if h < opts.min_step * (1.0 + t) {
            return Err(ModelError::Stiffness { t, h });
        }
    }
    if !opts.record && run.t.last() != Some(&t) {
        run.t.push(t);
        run.y.push(y);
    }
    Ok(run)
}

/// Closest existing steady state within `radius·(1 + ‖x*‖∞)` in reduced coordinates.
pub fn match_steady_state(
    x: &ReducedState,
    states: &[SteadyState],
    radius: f64,
) -> Option<(Label, u8)> {
    states
        .iter()
        .filter(|s| s.exists)
        .map(|s| {
            let r = s.x();
            let dist = (0..4).fold(0f64, |a, i| a.max((x[i] - r[i]).abs()));
            (dist / (1.0 + inf_norm(&r)), s)
        })
        .filter(|(d, _)| *d <= radius)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, s)| (s.label, s.branch))
}

fn reduce(x: &FullState) -> ReducedState {
    [x[1], x[3], x[5], x[7]]
}

fn event_of(
    outcome: Outcome,
    last: &ReducedState,
    states: &[SteadyState],
    radius: f64,
) -> TerminalEvent {
    match outcome {
        Outcome::Converged(t) => {
            let m = match_steady_state(last, states, radius);
            TerminalEvent::ConvergedTo {
                t,
                label: m.map(|x| x.0),
                branch: m.map_or(0, |x| x.1),
            }
        }
        Outcome::MaxTime(t) => TerminalEvent::MaxTime { t },
        Outcome::BlowUp(t) => TerminalEvent::BlowUp { t },
    }
}

/// Integrate the full model from `ic`.
pub fn integrate(
    ic: &FullState,
    op: &OperatingPoint,
    model: &Model,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    check_ic(ic, opts)?;
    let run = dopri(|x| rhs_full(x, op, model), *ic, opts)?;
    let states = enumerate_steady_states(op, model);
    let event = event_of(
        run.outcome,
        &reduce(run.y.last().unwrap()),
        &states,
        opts.match_radius,
    );
    Ok(Trajectory {
        t: run.t,
        states: run.y,
        steps: run.steps,
        projections: run.projections,
        event,
    })
}

/// Integrate the reduced model from `ic`; states are reported reconstructed.
pub fn integrate_reduced(
    ic: &ReducedState,
    op: &OperatingPoint,
    model: &Model,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let states = enumerate_steady_states(op, model);
    integrate_reduced_with(ic, op, model, opts, &states)
}

fn integrate_reduced_with(
    ic: &ReducedState,
    op: &OperatingPoint,
    model: &Model,
    opts: &IntegrateOptions,
    states: &[SteadyState],
) -> Result<Trajectory> {
    check_ic(ic, opts)?;
    let run = dopri(|x| rhs_reduced(x, op, model), *ic, opts)?;
    let event = event_of(
        run.outcome,
        run.y.last().unwrap(),
        states,
        opts.match_radius,
    );
    Ok(Trajectory {
        t: run.t,
        states: run.y.iter().map(|x| reconstruct(x, op, model)).collect(),
        steps: run.steps,
        projections: run.projections,
        event,
    })
}

fn check_ic<const N: usize>(ic: &[f64; N], opts: &IntegrateOptions) -> Result<()> {
    if let Some(v) = ic.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(ModelError::NegativeConcentration {
            what: "initial condition",
            value: *v,
        });
    }
    if !(opts.tol > 0.0 && opts.tmax > 0.0) {
        return Err(ModelError::InvalidParameter {
            name: "tol/tmax",
            value: opts.tol.min(opts.tmax),
            why: "must be positive",
        });
    }
    Ok(())
}

/// Uniform sample of `M` by rejection from its bounding box.
pub fn sample_in_m<R: Rng>(rng: &mut R, op: &OperatingPoint, model: &Model) -> ReducedState {
    let x1max = op.s1in / model.k1;
    let x2box = (op.s2in + model.k2 * x1max) / model.k3;
    let pair = |rng: &mut R| loop {
        let x1 = rng.random::<f64>() * x1max;
        let x2 = rng.random::<f64>() * x2box;
        if x2 <= (op.s2in + model.k2 * x1) / model.k3 {
            return (x1, x2);
        }
    };
    let (a, b) = pair(rng);
    let (c, d) = pair(rng);
    [a, b, c, d]
}

/// Full state drawn uniformly from `M` with a fixed seed.
pub fn seeded_initial_state(seed: u64, op: &OperatingPoint, model: &Model) -> FullState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    crate::equilibria::reconstruct(&sample_in_m(&mut rng, op, model), op, model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinReport {
    pub seed: u64,
    pub n: usize,
    /// Attractor (`label#branch`) to number of trajectories that reached it.
    pub counts: BTreeMap<String, usize>,
    /// Converged but not within the match radius of any steady state.
    pub unmatched: usize,
    /// Stopped at `tmax` (or by the blow-up guard) without converging.
    pub not_converged: usize,
}

impl BasinReport {
    pub fn attractors(&self) -> Vec<Label> {
        let mut v: Vec<Label> = self
            .counts
            .keys()
            .filter_map(|k| k.split('#').next()?.parse().ok())
            .collect();
        v.sort();
        v.dedup();
        v
    }
}

pub fn attractor_key(label: Label, branch: u8) -> String {
    format!("{label}#{branch}")
}

/// Integrate `n` trajectories from uniform initial conditions in `M` and
/// count which steady state each one reaches. Trajectory `i` draws from its
/// own ChaCha stream, so the result does not depend on scheduling.
pub fn basin_sample(
    op: &OperatingPoint,
    model: &Model,
    n: usize,
    seed: u64,
    opts: &IntegrateOptions,
) -> Result<BasinReport> {
    if n == 0 {
        return Err(ModelError::InvalidParameter {
            name: "n",
            value: 0.0,
            why: "need at least one trajectory",
        });
    }
    let states = enumerate_steady_states(op, model);
    let opts = IntegrateOptions {
        record: false,
        ..*opts
    };
    let ids: Vec<u64> = (0..n as u64).collect();
    let outcomes = par_map(&ids, |&i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i);
        let ic = sample_in_m(&mut rng, op, model);
        integrate_reduced_with(&ic, op, model, &opts, &states).map(|tr| tr.event)
    });
    let mut report = BasinReport {
        seed,
        n,
        counts: BTreeMap::new(),
        unmatched: 0,
        not_converged: 0,
    };
    for ev in outcomes {
        match ev? {
            TerminalEvent::ConvergedTo {
                label: Some(l),
                branch,
                ..
            } => *report.counts.entry(attractor_key(l, branch)).or_default() += 1,
            TerminalEvent::ConvergedTo { label: None, .. } => report.unmatched += 1,
            _ => report.not_converged += 1,
        }
    }
    Ok(report)
}
