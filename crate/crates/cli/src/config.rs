//! Run configuration files (TOML).
//!
//! ```toml
//! mode = "evolve"              # "model", "simulate" or "evolve"
//! plot = true
//!
//! [embryo]
//! source_voltage = 10.0
//! source_resistance = 750.0
//! load_resistance = 50.0
//!
//! [filter]
//! kind = "low_pass"            # "high_pass" uses cutoff_hz too;
//! cutoff_hz = 50e3             # "band_pass" uses low_hz and high_hz
//! # grid_points = 200          # default grid: f_min/100 .. f_max*100
//!
//! [evolution]                  # every key optional
//! population_size = 50
//! generations = 100
//! selection = { tournament = 4 }   # or "roulette_wheel"
//! rng_seed = 0
//!
//! [io]
//! input = "model.toml"         # model file for model/simulate modes
//! output_dir = "out"
//! ```

use std::path::{Path, PathBuf};

use lgsynth_core::filter::{EmbryoSpec, FilterKind, FilterSpec};
use lgsynth_core::gp::EvolutionConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::model_file::SimulationSettings;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Model,
    Simulate,
    #[default]
    Evolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterShape {
    LowPass,
    HighPass,
    BandPass,
}

/// Filter target as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub kind: FilterShape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_hi: Option<f64>,
}

impl FilterConfig {
    pub fn spec(&self) -> Result<FilterSpec, CliError> {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| CliError::Parse(format!("filter kind {:?} needs `{key}`", self.kind)))
        };
        let kind = match self.kind {
            FilterShape::LowPass => FilterKind::LowPass {
                cutoff_hz: need(self.cutoff_hz, "cutoff_hz")?,
            },
            FilterShape::HighPass => FilterKind::HighPass {
                cutoff_hz: need(self.cutoff_hz, "cutoff_hz")?,
            },
            FilterShape::BandPass => FilterKind::BandPass {
                low_hz: need(self.low_hz, "low_hz")?,
                high_hz: need(self.high_hz, "high_hz")?,
            },
        };
        let mut spec = FilterSpec::new(kind);
        if let Some(n) = self.grid_points {
            spec.grid_points = n;
        }
        if let Some(lo) = self.grid_lo {
            spec.grid_lo = lo;
        }
        if let Some(hi) = self.grid_hi {
            spec.grid_hi = hi;
        }
        spec.validate().map_err(|e| CliError::Parse(e.to_string()))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("lgsynth-out")
}

impl Default for IoConfig {
    fn default() -> Self {
        Self {
            input: None,
            output_dir: default_output_dir(),
        }
    }
}

fn default_embryo() -> EmbryoSpec {
    EmbryoSpec::REFERENCE
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "yes")]
    pub plot: bool,
    #[serde(default = "default_embryo")]
    pub embryo: EmbryoSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterConfig>,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub simulation: SimulationSettings,
    #[serde(default)]
    pub io: IoConfig,
}

/// Largest seed a config file can carry (TOML integers are signed 64-bit).
pub const MAX_CONFIG_SEED: u64 = i64::MAX as u64;

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(format!("invalid run config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        // Relative paths inside a config are relative to the config itself.
        if let Some(input) = cfg.io.input.as_mut() {
            if input.is_relative() {
                if let Some(dir) = path.parent() {
                    *input = dir.join(&*input);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        if self.evolution.rng_seed > MAX_CONFIG_SEED {
            return Err(CliError::Usage(format!(
                "rng_seed {} exceeds the config file limit {MAX_CONFIG_SEED}",
                self.evolution.rng_seed
            )));
        }
        toml::to_string(self).map_err(|e| CliError::Io(format!("cannot serialize config: {e}")))
    }
}
