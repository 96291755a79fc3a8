//! TOML documents read by the CLI: figure presets (with user overrides
//! merged on top), free-form experiment configs, and calibration records.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tridot_core::calibration::Calibration;
use tridot_core::{ChargeNoise, ExperimentConfig, HubbardParams};

use crate::Usage;

const FIG2: &str = include_str!("../presets/fig2.toml");
const FIG3: &str = include_str!("../presets/fig3.toml");
const FIG4: &str = include_str!("../presets/fig4.toml");
const FIG5: &str = include_str!("../presets/fig5.toml");

pub fn preset_text(figure: u8) -> Result<&'static str> {
    Ok(match figure {
        2 => FIG2,
        3 => FIG3,
        4 => FIG4,
        5 => FIG5,
        other => bail!(Usage(format!("unknown figure preset {other}; expected 2, 3, 4 or 5"))),
    })
}

fn default_dt() -> f64 {
    tridot_core::dynamics::DEFAULT_DT
}

fn default_one() -> usize {
    1
}

fn default_calibration_mc() -> usize {
    100
}

/// Settings for one figure. Noise-free figures ignore the noise fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureConfig {
    pub figure: u8,
    pub hubbard: HubbardParams,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub tau_max: f64,
    #[serde(default = "default_one")]
    pub n_mc: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_one")]
    pub record_stride: usize,
    /// Charge noise; an unset amplitude is calibrated to `decay_target`.
    #[serde(default)]
    pub charge: Option<ChargeNoise>,
    #[serde(default)]
    pub decay_target: Option<f64>,
    #[serde(default = "default_calibration_mc")]
    pub calibration_mc: usize,
    #[serde(default)]
    pub b_nuc: Option<f64>,
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn parse_table(text: &str, origin: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| Usage(format!("{origin}: {e}")).into())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn decode<T: for<'de> Deserialize<'de>>(table: toml::Table, origin: &str) -> Result<T> {
    T::deserialize(toml::Value::Table(table)).map_err(|e| Usage(format!("{origin}: {e}")).into())
}

/// The preset for `figure`, with the keys of `overrides` (if any) replacing
/// the preset's at any nesting depth.
pub fn figure_config(figure: u8, overrides: Option<&Path>) -> Result<FigureConfig> {
    let mut table = parse_table(preset_text(figure)?, &format!("preset fig{figure}"))?;
    if let Some(path) = overrides {
        let over = parse_table(&read(path)?, &path.display().to_string())?;
        merge(&mut table, over);
    }
    let cfg: FigureConfig = decode(table, "figure config")?;
    if cfg.figure != figure {
        bail!(Usage(format!(
            "config declares figure {} but figure {figure} was requested",
            cfg.figure
        )));
    }
    Ok(cfg)
}

pub fn experiment_config(path: &Path) -> Result<ExperimentConfig> {
    let table = parse_table(&read(path)?, &path.display().to_string())?;
    decode(table, &path.display().to_string())
}

/// Persisted result of `tridot calibrate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationRecord {
    pub amplitude: f64,
    pub target_decay: f64,
    pub achieved_decay: f64,
    pub seed: u64,
    pub n_mc: usize,
    pub window: f64,
    pub dt: f64,
    /// `[time, mean return probability]` of each fitted peak.
    pub peaks: Vec<[f64; 2]>,
    /// `[amplitude, decay time]` of each search step.
    pub evaluations: Vec<[f64; 2]>,
    pub hubbard: HubbardParams,
    pub charge: ChargeNoise,
}

impl CalibrationRecord {
    pub fn new(cal: &Calibration, window: f64, dt: f64, hubbard: HubbardParams, template: &ChargeNoise) -> Self {
        CalibrationRecord {
            amplitude: cal.amplitude,
            target_decay: cal.target_decay,
            achieved_decay: cal.fit.decay,
            seed: cal.seed,
            n_mc: cal.n_mc,
            window,
            dt,
            peaks: cal.fit.peaks.iter().map(|&(t, v)| [t, v]).collect(),
            evaluations: cal.evaluations.iter().map(|&(a, d)| [a, d]).collect(),
            hubbard,
            charge: ChargeNoise {
                amplitude: Some(cal.amplitude),
                ..template.clone()
            },
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let table = parse_table(&read(path)?, &path.display().to_string())?;
        decode(table, &path.display().to_string())
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}
