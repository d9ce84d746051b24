//! Run configuration and the text formats read and written by the tool.

mod config;
mod files;
mod format;

use std::path::PathBuf;

use thiserror::Error;

use crate::error::ModelError;

pub use config::{
    params_from_file, resolve_params, OptionsSection, ParamsSection, PlaneSection, RunConfig,
    PRESET_DIR_ENV,
};
pub use files::{
    parse_gamma_csv, parse_grid_csv, parse_legend_csv, parse_trajectory_csv, read_basin_report,
    read_steady_states, rounded_json, write_basin_report, write_gamma_csv, write_grid_csv,
    write_legend_csv, write_steady_states, write_trajectory_csv, GammaRow, GridRow, LegendRow,
    SteadyStateReport, TrajectoryRow, GAMMA_HEADER, GRID_HEADER, LEGEND_HEADER, TRAJECTORY_HEADER,
};
pub use format::{fmt_g9, round_g9};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{what}: {msg}")]
    Parse { what: String, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IoError {
    pub(crate) fn parse(what: impl Into<String>, msg: impl ToString) -> Self {
        IoError::Parse {
            what: what.into(),
            msg: msg.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type IoResult<T> = std::result::Result<T, IoError>;
