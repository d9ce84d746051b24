//! Per-point existence/stability signature over the fifteen labels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::equilibria::{enumerate_steady_states, Label};
use crate::kinetics::{Model, OperatingPoint};
use crate::stability::{classify_all, Analytic, Numeric};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mark {
    Absent,
    Unstable,
    Stable,
}

impl Mark {
    pub fn symbol(self) -> char {
        match self {
            Mark::Absent => '.',
            Mark::Unstable => 'U',
            Mark::Stable => 'S',
        }
    }
}

/// Summary of one label at one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Entry {
    pub exists: bool,
    /// At least one existing branch is stable.
    pub stable: bool,
    /// The number of existing branches is odd.
    pub odd: bool,
}

impl Entry {
    pub fn mark(self) -> Mark {
        match (self.exists, self.stable) {
            (false, _) => Mark::Absent,
            (true, false) => Mark::Unstable,
            (true, true) => Mark::Stable,
        }
    }

    fn bits(self) -> u64 {
        self.exists as u64 | (self.stable as u64) << 1 | (self.odd as u64) << 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RegionSignature {
    /// Indexed by [`Label::column`].
    pub entries: [Entry; 15],
    /// Some verdict is borderline or some root is a tangency.
    pub on_boundary: bool,
}

impl RegionSignature {
    pub fn marks(&self) -> [Mark; 15] {
        self.entries.map(Entry::mark)
    }

    /// Three bits per label in column order; independent of evaluation order.
    pub fn hash(&self) -> u64 {
        self.entries
            .iter()
            .enumerate()
            .fold(0, |h, (c, e)| h | e.bits() << (3 * c))
    }

    pub fn hash_hex(&self) -> String {
        format!("{:012x}", self.hash())
    }

    pub fn from_hash(h: u64) -> Self {
        let mut entries = [Entry {
            exists: false,
            stable: false,
            odd: false,
        }; 15];
        for (c, e) in entries.iter_mut().enumerate() {
            let b = h >> (3 * c);
            *e = Entry {
                exists: b & 1 != 0,
                stable: b & 2 != 0,
                odd: b & 4 != 0,
            };
        }
        Self {
            entries,
            on_boundary: false,
        }
    }

    /// `S`, `U` or `.` per label.
    pub fn pattern(&self) -> String {
        self.entries.iter().map(|e| e.mark().symbol()).collect()
    }

    pub fn stable_labels(&self) -> Vec<Label> {
        Label::ALL
            .iter()
            .zip(&self.entries)
            .filter(|(_, e)| e.stable)
            .map(|(l, _)| *l)
            .collect()
    }
}

impl fmt::Display for RegionSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pattern())?;
        if self.on_boundary {
            f.write_str(" (on-boundary)")?;
        }
        Ok(())
    }
}

/// Enumerate and classify every steady state at `op` and fold the result
/// into a signature.
pub fn classify_point(op: &OperatingPoint, model: &Model) -> RegionSignature {
    let mut states = enumerate_steady_states(op, model);
    classify_all(&mut states, op, model);
    let mut sig = RegionSignature {
        entries: [Entry {
            exists: false,
            stable: false,
            odd: false,
        }; 15],
        on_boundary: false,
    };
    for ss in states.iter().filter(|s| s.exists) {
        let e = &mut sig.entries[ss.label.column()];
        e.exists = true;
        e.odd = !e.odd;
        sig.on_boundary |= ss.tangency;
        if let Some(v) = &ss.stability {
            e.stable |= v.analytic == Analytic::Stable;
            sig.on_boundary |= v.analytic == Analytic::Boundary || v.numeric == Numeric::Marginal;
        }
    }
    sig
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::KineticParams;

    #[test]
    fn washout_corner_is_j0() {
        let m = Model::new(&KineticParams::BERNARD2001).unwrap();
        let op = OperatingPoint::new(0.45, 1.0 / 3.0, 2.0, 150.0).unwrap();
        let s = classify_point(&op, &m);
        assert_eq!(s.pattern(), "S..............");
        assert!(!s.on_boundary);
    }

    #[test]
    fn hash_round_trip() {
        let m = Model::new(&KineticParams::BERNARD2001).unwrap();
        let op = OperatingPoint::new(0.05, 1.0 / 3.0, 100.0, 150.0).unwrap();
        let s = classify_point(&op, &m);
        assert_eq!(RegionSignature::from_hash(s.hash()).entries, s.entries);
        assert_eq!(s.hash_hex().len(), 12);
    }
}
