//! Steady states, stability and operating diagrams of a two-step
//! anaerobic digestion model run as a cascade of two chemostats.
//!
//! The entry point is [`Model`], built from [`KineticParams`], evaluated at an
//! [`OperatingPoint`] `(D, r, S1in, S2in)`.

// NaN must fail these guards, so `!(a < b)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagram;
pub mod equilibria;
pub mod error;
pub mod io;
pub mod kinetics;
pub mod numeric;
pub mod simulator;
pub mod stability;

pub use equilibria::{enumerate_steady_states, Label, SteadyState};
pub use error::{ModelError, Result};
pub use kinetics::{BreakEven, GrowthLaw, KineticParams, Model, OperatingPoint, Stage};
pub use stability::{Analytic, Numeric, StabilityVerdict};

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}
