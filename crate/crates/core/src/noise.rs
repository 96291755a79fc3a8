//! Classical noise sources: 1/f detuning traces for charge noise, the
//! detuning-dependent tunneling profile, and quasistatic nuclear fields.
//!
//! All randomness comes from [`stream_rng`]: a ChaCha20 generator keyed by a
//! 64-bit seed and a 64-bit stream id. ChaCha is counter based, so a given
//! (seed, stream) pair produces the same numbers no matter which thread
//! draws them or in which order streams are visited.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hubbard::NuclearFields;
use crate::linalg::C64;

/// Gaussian width of the tunneling profile, scaled energy units.
pub const DEFAULT_PROFILE_WIDTH: f64 = 0.01;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneOverFConfig {
    /// Target rms of the trace.
    pub amplitude: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub n_samples: usize,
    pub dt: f64,
    pub seed: u64,
    pub stream: u64,
}

impl OneOverFConfig {
    /// Band from one cycle per trace duration up to Nyquist.
    pub fn full_band(amplitude: f64, n_samples: usize, dt: f64, seed: u64, stream: u64) -> Self {
        OneOverFConfig {
            amplitude,
            f_min: 1.0 / (n_samples as f64 * dt),
            f_max: 0.5 / dt,
            n_samples,
            dt,
            seed,
            stream,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nyquist = 0.5 / self.dt;
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::InvalidBand(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.f_min > 0.0 && self.f_min < self.f_max && self.f_max <= nyquist * (1.0 + 1e-12)) {
            return Err(Error::InvalidBand(format!(
                "need 0 < f_min < f_max <= {nyquist}, got [{}, {}]",
                self.f_min, self.f_max
            )));
        }
        if !self.amplitude.is_finite() || self.amplitude < 0.0 {
            return Err(Error::InvalidBand(format!(
                "amplitude must be >= 0, got {}",
                self.amplitude
            )));
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidBand("need at least two samples".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrace {
    pub values: Vec<f64>,
    pub config: OneOverFConfig,
}

impl NoiseTrace {
    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|x| x * x).sum::<f64>() / self.values.len() as f64).sqrt()
    }
}

/// Spectral synthesis of 1/f noise.
///
/// Fourier amplitudes `∝ f^(-1/2)` with uniform random phases on bins inside
/// `[f_min, f_max]`, zero elsewhere, inverse transformed to a real series and
/// rescaled to the configured rms. Synthesis runs on a grid at least twice
/// the requested length (so the returned trace is not periodic) and the
/// leading `n_samples` values are kept.
pub fn gen_one_over_f(cfg: &OneOverFConfig) -> Result<NoiseTrace> {
    cfg.validate()?;
    let n = cfg.n_samples;
    if cfg.amplitude == 0.0 {
        return Ok(NoiseTrace {
            values: vec![0.0; n],
            config: *cfg,
        });
    }
    let m = (2 * n).next_power_of_two();
    let df = 1.0 / (m as f64 * cfg.dt);
    let mut rng = stream_rng(cfg.seed, cfg.stream);
    let mut spectrum = vec![C64::new(0.0, 0.0); m];
    for k in 1..=m / 2 {
        // one phase per positive bin, drawn whether or not it is in band, so
        // the band edges do not shift the random sequence
        let phase = rng.random::<f64>() * 2.0 * PI;
        let f = k as f64 * df;
        if f < cfg.f_min || f > cfg.f_max {
            continue;
        }
        let z = C64::from_polar(f.powf(-0.5), phase);
        if k == m / 2 {
            spectrum[k] = C64::new(z.re, 0.0);
        } else {
            spectrum[k] = z;
            spectrum[m - k] = z.conj();
        }
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut spectrum);
    let mut values: Vec<f64> = spectrum[..n].iter().map(|z| z.re).collect();
    let rms = (values.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    if rms == 0.0 {
        return Err(Error::InvalidBand("no frequency bins fall inside the band".into()));
    }
    let scale = cfg.amplitude / rms;
    values.iter_mut().for_each(|x| *x *= scale);
    Ok(NoiseTrace {
        values,
        config: *cfg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunnelingProfile {
    pub t0: f64,
    pub width: f64,
}

impl TunnelingProfile {
    pub fn new(t0: f64, width: f64) -> Result<Self> {
        if width.is_nan() || width <= 0.0 {
            return Err(Error::InvalidParams(format!("profile width must be > 0, got {width}")));
        }
        Ok(TunnelingProfile { t0, width })
    }

    /// `t0 · exp(-δ² / (2 width²))`.
    pub fn tunneling_at(&self, delta: f64) -> f64 {
        self.t0 * (-delta * delta / (2.0 * self.width * self.width)).exp()
    }
}

/// Quasistatic nuclear fields: nine i.i.d. `N(0, b_nuc²)` components, which
/// makes each dot's field isotropic with a Maxwell-distributed magnitude.
pub fn sample_nuclear(b_nuc: f64, seed: u64, stream: u64) -> Result<NuclearFields> {
    if !b_nuc.is_finite() || b_nuc < 0.0 {
        return Err(Error::InvalidParams(format!("B_nuc must be >= 0, got {b_nuc}")));
    }
    if b_nuc == 0.0 {
        return Ok(NuclearFields::default());
    }
    let normal = Normal::new(0.0, b_nuc).expect("finite positive sigma");
    let mut rng = stream_rng(seed, stream);
    let mut b = [[0.0; 3]; 3];
    for comp in b.iter_mut().flatten() {
        *comp = normal.sample(&mut rng);
    }
    Ok(NuclearFields { b })
}

/// How the detuning trace enters the Hubbard parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeNoise {
    /// rms detuning; `None` means "calibrate before use".
    #[serde(default)]
    pub amplitude: Option<f64>,
    /// Tunneling profile width.
    #[serde(default = "default_width")]
    pub width: f64,
    /// Weight of δ(t) added to `E_A, E_C, E_B`.
    #[serde(default = "default_coupling")]
    pub coupling: [f64; 3],
    /// Whether both hoppings follow the Gaussian profile in δ.
    #[serde(default = "default_true")]
    pub modulate_tunneling: bool,
    /// Band overrides; default is one cycle per run up to Nyquist.
    #[serde(default)]
    pub f_min: Option<f64>,
    #[serde(default)]
    pub f_max: Option<f64>,
}

fn default_width() -> f64 {
    DEFAULT_PROFILE_WIDTH
}

fn default_coupling() -> [f64; 3] {
    [0.0, 1.0, 0.0]
}

fn default_true() -> bool {
    true
}

impl Default for ChargeNoise {
    fn default() -> Self {
        ChargeNoise {
            amplitude: None,
            width: DEFAULT_PROFILE_WIDTH,
            coupling: default_coupling(),
            modulate_tunneling: true,
            f_min: None,
            f_max: None,
        }
    }
}

impl ChargeNoise {
    pub fn with_amplitude(amplitude: f64) -> Self {
        ChargeNoise {
            amplitude: Some(amplitude),
            ..Default::default()
        }
    }

    /// Trace configuration for a run of `n_steps` steps of `dt`.
    pub fn trace_config(&self, n_steps: usize, dt: f64, seed: u64, stream: u64) -> Result<OneOverFConfig> {
        let amplitude = self
            .amplitude
            .ok_or_else(|| Error::InvalidParams("charge noise amplitude not set".into()))?;
        let mut cfg = OneOverFConfig::full_band(amplitude, n_steps.max(2), dt, seed, stream);
        if let Some(f) = self.f_min {
            cfg.f_min = f;
        }
        if let Some(f) = self.f_max {
            cfg.f_max = f;
        }
        Ok(cfg)
    }
}
