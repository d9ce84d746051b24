//! TOML run configuration: `[params]`, `[point]`, `[plane]`, `[options]`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagram::{figure_preset, PlaneSpec};
use crate::kinetics::{KineticParams, OperatingPoint};

use super::{IoError, IoResult};

/// Directory searched for `<name>.toml` parameter presets before the
/// built-in ones.
pub const PRESET_DIR_ENV: &str = "AM2_PRESET_DIR";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub preset: Option<String>,
    pub m1: Option<f64>,
    #[serde(rename = "kS1")]
    pub ks1: Option<f64>,
    pub m2: Option<f64>,
    #[serde(rename = "kS2")]
    pub ks2: Option<f64>,
    #[serde(rename = "kI")]
    pub ki: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub k3: Option<f64>,
}

/// Either a reference figure by name or an explicit plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlaneSection {
    Figure { figure: String },
    Explicit(PlaneSpec),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSection {
    pub grid: Option<[usize; 2]>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub n: Option<usize>,
    pub tmax: Option<f64>,
    pub ic: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: ParamsSection,
    pub point: Option<OperatingPoint>,
    pub plane: Option<PlaneSection>,
    #[serde(default)]
    pub options: OptionsSection,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> IoResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| IoError::parse(origin, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> IoResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn validate(&self) -> IoResult<()> {
        if self.point.is_some() && self.plane.is_some() {
            return Err(IoError::Config(
                "give either [point] or [plane], not both".into(),
            ));
        }
        if let Some(p) = &self.point {
            p.validate()?;
        }
        if let Some(PlaneSection::Explicit(p)) = &self.plane {
            p.validate()?;
        }
        let o = &self.options;
        for (name, v) in [("tol", o.tol), ("tmax", o.tmax)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(IoError::Config(format!(
                        "options.{name} must be positive, got {v}"
                    )));
                }
            }
        }
        if let Some([nx, ny]) = o.grid {
            if nx < 2 || ny < 2 {
                return Err(IoError::Config(
                    "options.grid needs at least 2 cells per axis".into(),
                ));
            }
        }
        if let Some(ic) = &o.ic {
            if ic.len() != 8 {
                return Err(IoError::Config(format!(
                    "options.ic needs 8 values, got {}",
                    ic.len()
                )));
            }
        }
        if o.jobs == Some(0) {
            return Err(IoError::Config("options.jobs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> IoResult<KineticParams> {
        resolve_params(&self.params)
    }

    /// The plane together with the region list of its figure, if any.
    pub fn plane(&self) -> IoResult<Option<(PlaneSpec, Option<&'static str>)>> {
        let mut out = match &self.plane {
            None => return Ok(None),
            Some(PlaneSection::Explicit(p)) => (*p, None),
            Some(PlaneSection::Figure { figure }) => {
                let f = figure_preset(figure)?;
                (f.plane, Some(f.name))
            }
        };
        if let Some([nx, ny]) = self.options.grid {
            out.0 = out.0.with_grid(nx, ny);
        }
        Ok(Some(out))
    }
}

/// Start from the named preset (default `bernard2001`) and apply overrides.
pub fn resolve_params(section: &ParamsSection) -> IoResult<KineticParams> {
    let name = section.preset.as_deref().unwrap_or("bernard2001");
    apply_overrides(load_preset(name)?, section)
}

/// Parameters from a TOML file, then the overrides of `section`.
pub fn params_from_file(path: &Path, section: &ParamsSection) -> IoResult<KineticParams> {
    apply_overrides(read_params(path)?, section)
}

fn read_params(path: &Path) -> IoResult<KineticParams> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    toml::from_str(&text).map_err(|e| IoError::parse(path.display().to_string(), e))
}

fn apply_overrides(mut p: KineticParams, section: &ParamsSection) -> IoResult<KineticParams> {
    for (slot, v) in [
        (&mut p.m1, section.m1),
        (&mut p.ks1, section.ks1),
        (&mut p.m2, section.m2),
        (&mut p.ks2, section.ks2),
        (&mut p.ki, section.ki),
        (&mut p.k1, section.k1),
        (&mut p.k2, section.k2),
        (&mut p.k3, section.k3),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    p.validate()?;
    Ok(p)
}

fn load_preset(name: &str) -> IoResult<KineticParams> {
    if let Some(dir) = std::env::var_os(PRESET_DIR_ENV) {
        let path = Path::new(&dir).join(format!("{name}.toml"));
        if path.is_file() {
            return read_params(&path);
        }
    }
    Ok(KineticParams::preset(name)?)
}
