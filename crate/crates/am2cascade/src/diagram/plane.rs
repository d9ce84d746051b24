//! Two-parameter planes and the five reference figure presets.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::kinetics::{KineticParams, OperatingPoint};

/// Which two operating parameters vary; the other two are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axes", deny_unknown_fields)]
pub enum Axes {
    /// `x = D`, `y = S1in`.
    #[serde(rename = "D-S1in")]
    DS1in {
        r: f64,
        #[serde(rename = "S2in")]
        s2in: f64,
    },
    /// `x = S2in`, `y = S1in`.
    #[serde(rename = "S2in-S1in")]
    S2inS1in {
        #[serde(rename = "D")]
        d: f64,
        r: f64,
    },
}

impl Axes {
    pub fn x_name(&self) -> &'static str {
        match self {
            Axes::DS1in { .. } => "D",
            Axes::S2inS1in { .. } => "S2in",
        }
    }

    pub fn y_name(&self) -> &'static str {
        "S1in"
    }

    pub fn r(&self) -> f64 {
        match *self {
            Axes::DS1in { r, .. } | Axes::S2inS1in { r, .. } => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneSpec {
    #[serde(flatten)]
    pub axes: Axes,
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl PlaneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, value: f64, why: &'static str| {
            Err(ModelError::InvalidParameter { name, value, why })
        };
        for (name, [lo, hi]) in [("x range", self.x), ("y range", self.y)] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo && lo >= 0.0) {
                return bad(name, hi - lo, "needs 0 <= lo < hi");
            }
        }
        if self.nx < 2 || self.ny < 2 {
            return bad(
                "grid",
                self.nx.min(self.ny) as f64,
                "at least 2 cells per axis",
            );
        }
        let r = self.axes.r();
        if !(r > 0.0 && r < 1.0) {
            return bad("r", r, "must lie in (0, 1)");
        }
        match self.axes {
            Axes::DS1in { s2in, .. } if !(s2in >= 0.0) => bad("S2in", s2in, "must be nonnegative"),
            Axes::S2inS1in { d, .. } if !(d > 0.0) => bad("D", d, "must be positive"),
            _ => Ok(()),
        }
    }

    /// Operating point at plane coordinates `(x, y)`.
    pub fn point(&self, x: f64, y: f64) -> Result<OperatingPoint> {
        match self.axes {
            Axes::DS1in { r, s2in } => OperatingPoint::new(x, r, y, s2in),
            Axes::S2inS1in { d, r } => OperatingPoint::new(d, r, y, x),
        }
    }

    pub fn dx(&self) -> f64 {
        (self.x[1] - self.x[0]) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y[1] - self.y[0]) / self.ny as f64
    }

    /// Centre of cell `(i, j)`; `i` runs along x.
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x[0] + (i as f64 + 0.5) * self.dx(),
            self.y[0] + (j as f64 + 0.5) * self.dy(),
        )
    }

    pub fn with_grid(mut self, nx: usize, ny: usize) -> Self {
        self.nx = nx;
        self.ny = ny;
        self
    }
}

/// A reference operating diagram: parameters, window and the regions it shows.
#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub name: &'static str,
    pub params: KineticParams,
    pub plane: PlaneSpec,
    /// Region ids drawn in the figure.
    pub regions: &'static [u8],
}

pub const FIGURE_NAMES: [&str; 5] = ["fig3", "fig4", "fig5", "fig6", "fig7"];

const FIG3: [u8; 21] = [
    0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20,
];
const FIG4: [u8; 17] = [
    0, 3, 4, 5, 8, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24,
];
const FIG5: [u8; 21] = [
    0, 1, 4, 5, 6, 7, 8, 9, 15, 16, 17, 18, 19, 20, 25, 26, 27, 28, 29, 30, 31,
];
const FIG6: [u8; 20] = [
    0, 15, 20, 21, 22, 32, 33, 34, 35, 36, 37, 38, 39, 40, 41, 42, 43, 44, 45, 46,
];
const FIG7: [u8; 30] = [
    0, 1, 4, 5, 15, 27, 46, 47, 48, 49, 50, 51, 52, 53, 54, 55, 56, 57, 58, 59, 60, 61, 62, 63, 64,
    65, 66, 67, 68, 69,
];

pub fn figure_preset(name: &str) -> Result<FigurePreset> {
    const GRID: usize = 600;
    let d_plane = |r: f64, s2in: f64, d_max: f64, s1_max: f64| PlaneSpec {
        axes: Axes::DS1in { r, s2in },
        x: [0.0, d_max],
        y: [0.0, s1_max],
        nx: GRID,
        ny: GRID,
    };
    let p = KineticParams::BERNARD2001;
    let (params, plane, regions): (_, _, &'static [u8]) = match name {
        "fig3" => (p, d_plane(1.0 / 3.0, 150.0, 0.6, 300.0), &FIG3),
        "fig4" => (
            KineticParams::BERNARD2001_LOWM1,
            d_plane(1.0 / 3.0, 150.0, 0.38, 360.0),
            &FIG4,
        ),
        "fig5" => (p, d_plane(1.0 / 3.0, 10.0, 0.6, 300.0), &FIG5),
        "fig6" => (p, d_plane(0.7, 150.0, 0.6, 300.0), &FIG6),
        "fig7" => (
            p,
            PlaneSpec {
                axes: Axes::S2inS1in { d: 0.17, r: 0.3 },
                x: [0.0, 1500.0],
                y: [0.0, 300.0],
                nx: GRID,
                ny: GRID,
            },
            &FIG7,
        ),
        _ => {
            return Err(ModelError::Unknown {
                kind: "figure",
                name: name.to_string(),
            })
        }
    };
    Ok(FigurePreset {
        name: FIGURE_NAMES
            .iter()
            .find(|n| **n == name)
            .copied()
            .unwrap_or("custom"),
        params,
        plane,
        regions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for n in FIGURE_NAMES {
            let f = figure_preset(n).unwrap();
            f.plane.validate().unwrap();
            assert_eq!(f.name, n);
        }
        assert!(figure_preset("fig8").is_err());
        assert_eq!(figure_preset("fig7").unwrap().regions.len(), 30);
    }

    #[test]
    fn rejects_degenerate_planes() {
        let mut p = figure_preset("fig3").unwrap().plane;
        p.nx = 1;
        assert!(p.validate().is_err());
        p.nx = 10;
        p.x = [0.3, 0.3];
        assert!(p.validate().is_err());
    }

    #[test]
    fn cell_centres_avoid_the_axis() {
        let p = figure_preset("fig3").unwrap().plane.with_grid(4, 4);
        assert_eq!(p.cell_center(0, 0), (0.075, 37.5));
        let op = p.point(0.075, 37.5).unwrap();
        assert_eq!((op.d, op.s1in, op.s2in), (0.075, 37.5, 150.0));
    }
}
