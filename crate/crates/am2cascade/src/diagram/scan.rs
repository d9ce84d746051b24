//! Grid classification, region extraction and small-region refinement.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kinetics::Model;
use crate::par_map;

use super::plane::PlaneSpec;
use super::signature::{classify_point, RegionSignature};

/// Regions with fewer cells than this are re-checked at twice the resolution.
pub const MIN_REGION_CELLS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: usize,
    pub hash: u64,
    pub cells: usize,
    /// Cell deepest inside the region (farthest from any other region).
    pub representative: (usize, usize),
    /// Plane coordinates of the representative cell.
    pub point: (f64, f64),
    /// Survived the refinement pass (always true for regions of normal size).
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub plane: PlaneSpec,
    /// Row-major (`j * nx + i`) signature hashes.
    pub hashes: Vec<u64>,
    /// Cells whose own classification is borderline; excluded from regions.
    pub on_boundary: Vec<bool>,
    /// Cells with a 4-neighbour of a different signature.
    pub edge: Vec<bool>,
    pub region_of: Vec<Option<usize>>,
    pub regions: Vec<Region>,
    pub signatures: BTreeMap<u64, RegionSignature>,
}

impl ScanResult {
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.plane.nx + i
    }

    /// Distinct signatures over accepted regions.
    pub fn distinct_signatures(&self) -> usize {
        self.accepted_hashes().len()
    }

    pub fn accepted_hashes(&self) -> BTreeSet<u64> {
        self.regions
            .iter()
            .filter(|r| r.accepted)
            .map(|r| r.hash)
            .collect()
    }

    pub fn accepted_regions(&self) -> impl Iterator<Item = &Region> {
        self.regions.iter().filter(|r| r.accepted)
    }

    pub fn signature(&self, hash: u64) -> &RegionSignature {
        &self.signatures[&hash]
    }
}

/// Classify every cell centre of `plane` and extract connected regions.
///
/// Cells are evaluated independently, so the result does not depend on how
/// the rows are scheduled.
pub fn scan_plane(plane: &PlaneSpec, model: &Model) -> Result<ScanResult> {
    plane.validate()?;
    let (nx, ny) = (plane.nx, plane.ny);
    let rows: Vec<usize> = (0..ny).collect();
    let classified = par_map(&rows, |&j| {
        (0..nx)
            .map(|i| {
                let (x, y) = plane.cell_center(i, j);
                plane.point(x, y).map(|op| classify_point(&op, model))
            })
            .collect::<Result<Vec<_>>>()
    });
    let mut hashes = Vec::with_capacity(nx * ny);
    let mut on_boundary = Vec::with_capacity(nx * ny);
    let mut signatures = BTreeMap::new();
    for row in classified {
        for sig in row? {
            let h = sig.hash();
            hashes.push(h);
            on_boundary.push(sig.on_boundary);
            signatures.entry(h).or_insert(RegionSignature {
                on_boundary: false,
                ..sig
            });
        }
    }
    let idx = |i: usize, j: usize| j * nx + i;
    let neighbours = |i: usize, j: usize| {
        let mut v = Vec::with_capacity(4);
        if i > 0 {
            v.push((i - 1, j));
        }
        if i + 1 < nx {
            v.push((i + 1, j));
        }
        if j > 0 {
            v.push((i, j - 1));
        }
        if j + 1 < ny {
            v.push((i, j + 1));
        }
        v
    };
    let mut edge = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let h = hashes[idx(i, j)];
            edge[idx(i, j)] = neighbours(i, j)
                .iter()
                .any(|&(a, b)| hashes[idx(a, b)] != h);
        }
    }

    // 4-connected flood fill over non-borderline cells.
    let mut region_of: Vec<Option<usize>> = vec![None; nx * ny];
    let mut members: Vec<Vec<(usize, usize)>> = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let k = idx(i, j);
            if on_boundary[k] || region_of[k].is_some() {
                continue;
            }
            let id = members.len();
            let h = hashes[k];
            let mut cells = Vec::new();
            let mut queue = VecDeque::from([(i, j)]);
            region_of[k] = Some(id);
            while let Some((a, b)) = queue.pop_front() {
                cells.push((a, b));
                for (c, d) in neighbours(a, b) {
                    let kk = idx(c, d);
                    if region_of[kk].is_none() && !on_boundary[kk] && hashes[kk] == h {
                        region_of[kk] = Some(id);
                        queue.push_back((c, d));
                    }
                }
            }
            members.push(cells);
        }
    }

    // Distance (in 4-steps) to the nearest cell outside one's own region.
    let mut depth = vec![usize::MAX; nx * ny];
    let mut queue = VecDeque::new();
    for j in 0..ny {
        for i in 0..nx {
            let k = idx(i, j);
            let outer = region_of[k].is_none()
                || i == 0
                || j == 0
                || i + 1 == nx
                || j + 1 == ny
                || neighbours(i, j)
                    .iter()
                    .any(|&(a, b)| region_of[idx(a, b)] != region_of[k]);
            if outer {
                depth[k] = 0;
                queue.push_back((i, j));
            }
        }
    }
    while let Some((a, b)) = queue.pop_front() {
        let d = depth[idx(a, b)];
        for (c, e) in neighbours(a, b) {
            let kk = idx(c, e);
            if depth[kk] == usize::MAX && region_of[kk] == region_of[idx(a, b)] {
                depth[kk] = d + 1;
                queue.push_back((c, e));
            }
        }
    }

    let mut regions = Vec::with_capacity(members.len());
    for (id, cells) in members.iter().enumerate() {
        let &(ri, rj) = cells
            .iter()
            .max_by_key(|&&(i, j)| (depth[idx(i, j)], std::cmp::Reverse(idx(i, j))))
            .expect("regions are non-empty");
        let hash = hashes[idx(ri, rj)];
        let accepted = cells.len() >= MIN_REGION_CELLS || refine(plane, model, cells, hash)?;
        regions.push(Region {
            id,
            hash,
            cells: cells.len(),
            representative: (ri, rj),
            point: plane.cell_center(ri, rj),
            accepted,
        });
    }
    Ok(ScanResult {
        plane: *plane,
        hashes,
        on_boundary,
        edge,
        region_of,
        regions,
        signatures,
    })
}

/// Re-evaluate each cell of a small region on a 2×2 sub-grid and accept the
/// region if enough sub-cells reproduce its signature.
fn refine(plane: &PlaneSpec, model: &Model, cells: &[(usize, usize)], hash: u64) -> Result<bool> {
    let (dx, dy) = (plane.dx(), plane.dy());
    let mut hits = 0;
    for &(i, j) in cells {
        for (a, b) in [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)] {
            let x = plane.x[0] + (i as f64 + a) * dx;
            let y = plane.y[0] + (j as f64 + b) * dy;
            let sig = classify_point(&plane.point(x, y)?, model);
            if !sig.on_boundary && sig.hash() == hash {
                hits += 1;
            }
        }
    }
    Ok(hits >= MIN_REGION_CELLS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::plane::figure_preset;

    #[test]
    fn coarse_scan_is_consistent() {
        let f = figure_preset("fig3").unwrap();
        let m = Model::new(&f.params).unwrap();
        let plane = f.plane.with_grid(40, 30);
        let s = scan_plane(&plane, &m).unwrap();
        assert_eq!(s.hashes.len(), 1200);
        let total: usize = s.regions.iter().map(|r| r.cells).sum();
        assert_eq!(total, s.on_boundary.iter().filter(|b| !**b).count());
        for r in &s.regions {
            assert_eq!(
                s.region_of[s.index(r.representative.0, r.representative.1)],
                Some(r.id)
            );
        }
        // Washout corner: large D.
        let k = s.index(39, 0);
        assert_eq!(s.signature(s.hashes[k]).pattern(), "S..............");
        assert!(s.distinct_signatures() >= 5);
    }

    #[test]
    fn scan_is_deterministic() {
        let f = figure_preset("fig6").unwrap();
        let m = Model::new(&f.params).unwrap();
        let plane = f.plane.with_grid(24, 24);
        let a = scan_plane(&plane, &m).unwrap();
        let b = scan_plane(&plane, &m).unwrap();
        assert_eq!(a, b);
    }
}
