//! Browser bindings: break-even table, operating-diagram raster and a single
//! trajectory, each computed on demand from the page controls.

use am2cascade::diagram::{figure_preset, scan_plane};
use am2cascade::io::{round_g9, LegendRow};
use am2cascade::simulator::{integrate, seeded_initial_state, IntegrateOptions, TerminalEvent};
use am2cascade::{KineticParams, Model, ModelError, OperatingPoint, Stage};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest grid the page may request; keeps a scan under a second or so.
pub const MAX_GRID: usize = 400;

fn js_err(e: ModelError) -> JsError {
    JsError::new(&e.to_string())
}

fn model(preset: &str) -> Result<Model, ModelError> {
    Model::new(&KineticParams::preset(preset)?)
}

fn num(v: f64) -> Value {
    json!(round_g9(v))
}

fn break_even(b: am2cascade::BreakEven) -> Value {
    b.value().map_or(json!("inf"), num)
}

/// Break-even concentrations and critical rates at `(D, r)` as JSON.
pub fn lambda_table(preset: &str, d: f64, r: f64, s2in: f64) -> Result<Value, ModelError> {
    let m = model(preset)?;
    let op = OperatingPoint::new(d, r, 0.0, s2in)?;
    let be = m.break_evens(d, r);
    let cr = m.critical_rates(&op);
    Ok(json!({
        "lambda1_1": break_even(be.lambda1(Stage::First)),
        "lambda1_2": break_even(be.lambda1(Stage::Second)),
        "lambda2_11": break_even(be.lambda2(Stage::First, 1)),
        "lambda2_12": break_even(be.lambda2(Stage::First, 2)),
        "lambda2_21": break_even(be.lambda2(Stage::Second, 1)),
        "lambda2_22": break_even(be.lambda2(Stage::Second, 2)),
        "D1m": num(cr.d1m),
        "D2m": num(cr.d2m),
        "D1star": num(cr.d1star),
        "D2star": num(cr.d2star),
        "S2m": num(cr.s2m),
        "case": m.operating_case(s2in).to_string(),
    }))
}

/// A scanned figure as RGBA pixels (row 0 at the top) plus its legend.
#[wasm_bindgen]
pub struct Raster {
    width: usize,
    height: usize,
    rgba: Vec<u8>,
    legend: String,
}

#[wasm_bindgen]
impl Raster {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }

    /// Legend rows as a JSON array.
    pub fn legend(&self) -> String {
        self.legend.clone()
    }
}

fn parse_hex(c: &str) -> [u8; 3] {
    let v = u32::from_str_radix(c.trim_start_matches('#'), 16).unwrap_or(0xbebebe);
    [(v >> 16) as u8, (v >> 8) as u8, v as u8]
}

/// Scan a reference figure at `n × n` cells.
pub fn raster(figure: &str, n: usize) -> Result<Raster, ModelError> {
    let f = figure_preset(figure)?;
    let n = n.clamp(2, MAX_GRID);
    let m = Model::new(&f.params)?;
    let plane = f.plane.with_grid(n, n);
    let scan = scan_plane(&plane, &m)?;
    let legend = LegendRow::from_scan(&scan, &m, f.regions);
    let mut rgba = vec![0u8; n * n * 4];
    for j in 0..n {
        for i in 0..n {
            let k = scan.index(i, j);
            let color = scan.region_of[k]
                .and_then(|id| legend.iter().find(|l| l.region_id == id))
                .map_or([0xbe; 3], |l| parse_hex(&l.color));
            // Flip vertically so larger y is drawn higher.
            let p = ((n - 1 - j) * n + i) * 4;
            rgba[p..p + 3].copy_from_slice(&color);
            rgba[p + 3] = 255;
        }
    }
    let legend = serde_json::to_string(
        &legend
            .iter()
            .map(|l| json!({"J": l.j, "pattern": l.pattern, "color": l.color, "cells": l.cells}))
            .collect::<Vec<_>>(),
    )
    .expect("legend serialises");
    Ok(Raster {
        width: n,
        height: n,
        rgba,
        legend,
    })
}

/// One trajectory from a seeded initial state, thinned to at most `points`.
pub fn trajectory_json(
    preset: &str,
    op: [f64; 4],
    seed: u64,
    tmax: f64,
    points: usize,
) -> Result<Value, ModelError> {
    let m = model(preset)?;
    let op = OperatingPoint::new(op[0], op[1], op[2], op[3])?;
    let opts = IntegrateOptions {
        tmax,
        ..Default::default()
    };
    let tr = integrate(&seeded_initial_state(seed, &op, &m), &op, &m, &opts)?;
    let stride = tr.t.len().div_ceil(points.max(2)).max(1);
    let keep: Vec<usize> = (0..tr.t.len())
        .step_by(stride)
        .chain(std::iter::once(tr.t.len() - 1))
        .collect();
    let event = match &tr.event {
        TerminalEvent::ConvergedTo { t, label, branch } => match label {
            Some(l) => format!("converged at t = {} to {l}#{branch}", round_g9(*t)),
            None => format!("converged at t = {} to an unlisted state", round_g9(*t)),
        },
        TerminalEvent::MaxTime { t } => format!("no convergence by t = {}", round_g9(*t)),
        TerminalEvent::BlowUp { t } => format!("blow-up guard at t = {}", round_g9(*t)),
    };
    Ok(json!({
        "t": keep.iter().map(|&k| round_g9(tr.t[k])).collect::<Vec<_>>(),
        "states": keep.iter().map(|&k| tr.states[k].map(round_g9)).collect::<Vec<_>>(),
        "event": event,
    }))
}

#[wasm_bindgen(js_name = lambdaTable)]
pub fn lambda_table_js(preset: &str, d: f64, r: f64, s2in: f64) -> Result<String, JsError> {
    lambda_table(preset, d, r, s2in)
        .map(|v| v.to_string())
        .map_err(js_err)
}

#[wasm_bindgen(js_name = scanFigure)]
pub fn scan_figure_js(figure: &str, n: usize) -> Result<Raster, JsError> {
    raster(figure, n).map_err(js_err)
}

#[wasm_bindgen(js_name = simulate)]
#[allow(clippy::too_many_arguments)]
pub fn simulate_js(
    preset: &str,
    d: f64,
    r: f64,
    s1in: f64,
    s2in: f64,
    seed: u64,
    tmax: f64,
    points: usize,
) -> Result<String, JsError> {
    trajectory_json(preset, [d, r, s1in, s2in], seed, tmax, points)
        .map(|v| v.to_string())
        .map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_table_marks_infinite_entries() {
        let t = lambda_table("bernard2001", 0.25, 1.0 / 3.0, 150.0).unwrap();
        assert_eq!(t["lambda1_1"], "inf");
        assert!(t["lambda1_2"].as_f64().unwrap() > 0.0);
        assert!(lambda_table("nope", 0.1, 0.3, 1.0).is_err());
    }

    #[test]
    fn raster_is_opaque_and_sized() {
        let r = raster("fig3", 40).unwrap();
        assert_eq!((r.width, r.height, r.rgba.len()), (40, 40, 6400));
        assert!(r.rgba.chunks(4).all(|p| p[3] == 255));
        let legend: Vec<Value> = serde_json::from_str(&r.legend).unwrap();
        assert!(legend.len() > 5);
    }

    #[test]
    fn trajectory_is_thinned_and_ends_converged() {
        let v = trajectory_json("bernard2001", [0.1, 0.3, 50.0, 150.0], 3, 1e4, 50).unwrap();
        let t = v["t"].as_array().unwrap();
        assert!(t.len() <= 52 && t.len() > 2);
        assert_eq!(v["states"].as_array().unwrap().len(), t.len());
        assert!(v["event"].as_str().unwrap().contains("E11^11"));
    }
}
