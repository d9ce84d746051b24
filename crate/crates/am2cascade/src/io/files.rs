//! Writers and parsers for grid, legend, curve, trajectory and report files.
//!
//! Every number goes through [`fmt_g9`]. Parsers accept exactly what the
//! writers produce.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::diagram::{check_point, color_hex, legend_row, Axes, GammaCurve, ScanResult};
use crate::equilibria::{aux_values, AuxValues, SteadyState};
use crate::kinetics::{BreakEvens, CriticalRates, KineticParams, Model, OperatingPoint};
use crate::simulator::{conservation, BasinReport, Trajectory};

use super::format::{fmt_g9, round_g9};
use super::{IoError, IoResult};

/// Color of cells that belong to no region.
const UNASSIGNED: &str = "#bebebe";

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn write_err(e: impl ToString) -> IoError {
    IoError::parse("write", e)
}

fn records<R: Read>(r: R, what: &str, header: &[&str]) -> IoResult<Vec<csv::StringRecord>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let got = rd.headers().map_err(|e| IoError::parse(what, e))?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(IoError::parse(
            what,
            format!("unexpected header {:?}", got.iter().collect::<Vec<_>>()),
        ));
    }
    rd.records()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| IoError::parse(format!("{what} record {}", i + 1), e)))
        .collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, k: usize, what: &str) -> IoResult<T>
where
    T::Err: std::fmt::Display,
{
    let s = rec
        .get(k)
        .ok_or_else(|| IoError::parse(what, format!("missing column {k}")))?;
    s.parse()
        .map_err(|e: T::Err| IoError::parse(what, format!("column {k} ({s:?}): {e}")))
}

fn opt_field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    k: usize,
    what: &str,
) -> IoResult<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match rec.get(k) {
        Some("") | None => Ok(None),
        Some(_) => field(rec, k, what).map(Some),
    }
}

fn hash_field(rec: &csv::StringRecord, k: usize, what: &str) -> IoResult<u64> {
    let s = rec.get(k).unwrap_or_default();
    u64::from_str_radix(s, 16).map_err(|e| IoError::parse(what, format!("hash {s:?}: {e}")))
}

// ---------------------------------------------------------------- legend

pub const LEGEND_HEADER: [&str; 9] = [
    "region_id",
    "signature_hash",
    "pattern",
    "J",
    "color",
    "cells",
    "x",
    "y",
    "accepted",
];

/// One connected region: its signature, table label (when matched) and color.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendRow {
    pub region_id: usize,
    pub hash: u64,
    pub pattern: String,
    pub j: Option<u8>,
    pub color: String,
    pub cells: usize,
    /// Representative point.
    pub x: f64,
    pub y: f64,
    pub accepted: bool,
}

impl LegendRow {
    /// Legend of a scan. Regions are labelled by the inequality definitions
    /// of `allowed` when those single one out, otherwise by pattern.
    pub fn from_scan(scan: &ScanResult, model: &Model, allowed: &[u8]) -> Vec<LegendRow> {
        let axes: Axes = scan.plane.axes;
        scan.regions
            .iter()
            .map(|r| {
                let op = scan
                    .plane
                    .point(r.point.0, r.point.1)
                    .expect("scan points are valid");
                let check = check_point(&op, model, &axes, allowed, r.id, r.hash, r.point);
                let row = legend_row(&check, allowed);
                LegendRow {
                    region_id: r.id,
                    hash: r.hash,
                    pattern: scan.signature(r.hash).pattern(),
                    j: row.map(|row| row.j),
                    color: row
                        .map_or(UNASSIGNED, |row| color_hex(row.color))
                        .to_string(),
                    cells: r.cells,
                    x: r.point.0,
                    y: r.point.1,
                    accepted: r.accepted,
                }
            })
            .collect()
    }
}

pub fn write_legend_csv<W: Write>(w: W, rows: &[LegendRow]) -> IoResult<()> {
    let mut out = csv_writer(w);
    out.write_record(LEGEND_HEADER).map_err(write_err)?;
    for r in rows {
        out.write_record([
            r.region_id.to_string(),
            format!("{:012x}", r.hash),
            r.pattern.clone(),
            r.j.map(|j| j.to_string()).unwrap_or_default(),
            r.color.clone(),
            r.cells.to_string(),
            fmt_g9(r.x),
            fmt_g9(r.y),
            r.accepted.to_string(),
        ])
        .map_err(write_err)?;
    }
    out.flush().map_err(write_err)
}

pub fn parse_legend_csv<R: Read>(r: R) -> IoResult<Vec<LegendRow>> {
    records(r, "legend", &LEGEND_HEADER)?
        .iter()
        .map(|rec| {
            let w = "legend";
            Ok(LegendRow {
                region_id: field(rec, 0, w)?,
                hash: hash_field(rec, 1, w)?,
                pattern: field(rec, 2, w)?,
                j: opt_field(rec, 3, w)?,
                color: field(rec, 4, w)?,
                cells: field(rec, 5, w)?,
                x: field(rec, 6, w)?,
                y: field(rec, 7, w)?,
                accepted: field(rec, 8, w)?,
            })
        })
        .collect()
}

// ------------------------------------------------------------------ grid

pub const GRID_HEADER: [&str; 5] = ["x", "y", "region_id", "signature_hash", "color"];

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub x: f64,
    pub y: f64,
    /// `None` for borderline cells left out of every region.
    pub region_id: Option<usize>,
    pub hash: u64,
    pub color: String,
}

/// One row per cell, row-major from the bottom-left corner.
pub fn write_grid_csv<W: Write>(w: W, scan: &ScanResult, legend: &[LegendRow]) -> IoResult<()> {
    let mut out = csv_writer(w);
    out.write_record(GRID_HEADER).map_err(write_err)?;
    for j in 0..scan.plane.ny {
        for i in 0..scan.plane.nx {
            let k = scan.index(i, j);
            let (x, y) = scan.plane.cell_center(i, j);
            let region = scan.region_of[k];
            let color = region
                .and_then(|id| legend.iter().find(|l| l.region_id == id))
                .map_or(UNASSIGNED, |l| l.color.as_str());
            out.write_record([
                fmt_g9(x),
                fmt_g9(y),
                region.map(|r| r.to_string()).unwrap_or_default(),
                format!("{:012x}", scan.hashes[k]),
                color.to_string(),
            ])
            .map_err(write_err)?;
        }
    }
    out.flush().map_err(write_err)
}

pub fn parse_grid_csv<R: Read>(r: R) -> IoResult<Vec<GridRow>> {
    records(r, "grid", &GRID_HEADER)?
        .iter()
        .map(|rec| {
            Ok(GridRow {
                x: field(rec, 0, "grid")?,
                y: field(rec, 1, "grid")?,
                region_id: opt_field(rec, 2, "grid")?,
                hash: hash_field(rec, 3, "grid")?,
                color: field(rec, 4, "grid")?,
            })
        })
        .collect()
}

// ----------------------------------------------------------------- gamma

pub const GAMMA_HEADER: [&str; 4] = ["gamma", "segment", "x", "y"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRow {
    pub gamma: u8,
    pub segment: usize,
    pub x: f64,
    pub y: f64,
}

pub fn write_gamma_csv<W: Write>(w: W, curves: &[GammaCurve]) -> IoResult<()> {
    let mut out = csv_writer(w);
    out.write_record(GAMMA_HEADER).map_err(write_err)?;
    for c in curves {
        for (s, seg) in c.segments.iter().enumerate() {
            for &(x, y) in seg {
                out.write_record([c.id.to_string(), s.to_string(), fmt_g9(x), fmt_g9(y)])
                    .map_err(write_err)?;
            }
        }
    }
    out.flush().map_err(write_err)
}

pub fn parse_gamma_csv<R: Read>(r: R) -> IoResult<Vec<GammaRow>> {
    records(r, "gamma", &GAMMA_HEADER)?
        .iter()
        .map(|rec| {
            Ok(GammaRow {
                gamma: field(rec, 0, "gamma")?,
                segment: field(rec, 1, "gamma")?,
                x: field(rec, 2, "gamma")?,
                y: field(rec, 3, "gamma")?,
            })
        })
        .collect()
}

// ------------------------------------------------------------ trajectory

pub const TRAJECTORY_HEADER: [&str; 13] = [
    "t", "S1_1", "X1_1", "S2_1", "X2_1", "S1_2", "X1_2", "S2_2", "X2_2", "dZ1_1", "dZ2_1", "dZ1_2",
    "dZ2_2",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub state: [f64; 8],
    /// Distances of the conservation variables to their inlet values.
    pub dz: [f64; 4],
}

pub fn write_trajectory_csv<W: Write>(
    w: W,
    traj: &Trajectory,
    op: &OperatingPoint,
    model: &Model,
) -> IoResult<()> {
    let mut out = csv_writer(w);
    out.write_record(TRAJECTORY_HEADER).map_err(write_err)?;
    for (t, x) in traj.t.iter().zip(&traj.states) {
        let dz = conservation(x, op, model).deviation;
        let row = std::iter::once(*t).chain(x.iter().copied()).chain(dz);
        out.write_record(row.map(fmt_g9)).map_err(write_err)?;
    }
    out.flush().map_err(write_err)
}

pub fn parse_trajectory_csv<R: Read>(r: R) -> IoResult<Vec<TrajectoryRow>> {
    records(r, "trajectory", &TRAJECTORY_HEADER)?
        .iter()
        .map(|rec| {
            let mut v = [0.0; 13];
            for (k, slot) in v.iter_mut().enumerate() {
                *slot = field(rec, k, "trajectory")?;
            }
            let mut state = [0.0; 8];
            state.copy_from_slice(&v[1..9]);
            let mut dz = [0.0; 4];
            dz.copy_from_slice(&v[9..]);
            Ok(TrajectoryRow { t: v[0], state, dz })
        })
        .collect()
}

// ------------------------------------------------------------------ JSON

/// Pretty JSON with every float rounded to 9 significant digits.
pub fn rounded_json<T: Serialize>(value: &T) -> String {
    fn walk(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Number(n) if n.is_f64() => {
                let x = round_g9(n.as_f64().expect("f64 number"));
                if let Some(m) = serde_json::Number::from_f64(x) {
                    *n = m;
                }
            }
            serde_json::Value::Array(a) => a.iter_mut().for_each(walk),
            serde_json::Value::Object(o) => o.values_mut().for_each(walk),
            _ => {}
        }
    }
    let mut v = serde_json::to_value(value).expect("report serialises");
    walk(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("value serialises");
    s.push('\n');
    s
}

fn read_json<T: DeserializeOwned, R: Read>(r: R, what: &str) -> IoResult<T> {
    serde_json::from_reader(r).map_err(|e| IoError::parse(what, e))
}

/// Everything computed at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateReport {
    pub params: KineticParams,
    pub point: OperatingPoint,
    pub case: String,
    pub break_evens: BreakEvens,
    pub critical: CriticalRates,
    pub aux: AuxValues,
    pub states: Vec<SteadyState>,
}

impl SteadyStateReport {
    /// `states` should already carry their stability verdicts.
    pub fn new(
        params: &KineticParams,
        model: &Model,
        op: &OperatingPoint,
        states: Vec<SteadyState>,
    ) -> Self {
        Self {
            params: *params,
            point: *op,
            case: model.operating_case(op.s2in).to_string(),
            break_evens: model.break_evens(op.d, op.r),
            critical: model.critical_rates(op),
            aux: aux_values(op, model),
            states,
        }
    }
}

pub fn write_steady_states<W: Write>(mut w: W, report: &SteadyStateReport) -> IoResult<()> {
    w.write_all(rounded_json(report).as_bytes())
        .map_err(write_err)
}

pub fn read_steady_states<R: Read>(r: R) -> IoResult<SteadyStateReport> {
    read_json(r, "steady-state report")
}

pub fn write_basin_report<W: Write>(mut w: W, report: &BasinReport) -> IoResult<()> {
    w.write_all(rounded_json(report).as_bytes())
        .map_err(write_err)
}

pub fn read_basin_report<R: Read>(r: R) -> IoResult<BasinReport> {
    read_json(r, "basin report")
}
