//! Operating diagrams: boundary curves, point signatures and plane scans.

mod gamma;
mod locate;
mod plane;
mod scan;
mod signature;
mod table;

pub use gamma::{gamma_residual, gamma_sample, GammaCurve, GAMMA_IDS, MIN_SAMPLES};
pub use locate::{
    check_point, legend_row, locate_regions, region_table_check, RegionCheck, TableCheck,
};
pub use plane::{figure_preset, Axes, FigurePreset, PlaneSpec, FIGURE_NAMES};
pub use scan::{scan_plane, Region, ScanResult, MIN_REGION_CELLS};
pub use signature::{classify_point, Entry, Mark, RegionSignature};
pub use table::{color_hex, region_row, region_table, RegionRow};
