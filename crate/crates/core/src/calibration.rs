//! Charge-noise calibration: choose the 1/f amplitude so the ↑↑ return
//! probability decays with a requested envelope time.

use crate::error::{Error, Result};
use crate::gatelab::{fidelity_trace, ExperimentConfig, Initial, Target};
use crate::hubbard::HubbardParams;
use crate::noise::ChargeNoise;
use crate::tjmodel::return_times;

/// Maxima rising less than this above their surroundings are noise.
pub const MIN_PROMINENCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFit {
    /// Envelope decay time; see [`fit_envelope_decay`].
    pub decay: f64,
    /// `(time, value)` of the prominent maxima, for diagnostics.
    pub peaks: Vec<(f64, f64)>,
}

/// Height of the local maximum `k` above the higher of the lowest points
/// separating it from a taller value (or the trace end) on each side.
fn prominence(values: &[f64], k: usize) -> f64 {
    let v = values[k];
    let base = |range: &mut dyn Iterator<Item = usize>| {
        let mut low = v;
        for i in range {
            if values[i] > v {
                break;
            }
            low = low.min(values[i]);
        }
        low
    };
    let left = base(&mut (0..k).rev());
    let right = base(&mut (k + 1..values.len()));
    v - left.max(right)
}

/// Decay time of the oscillation envelope of a return probability `p(τ)`
/// that starts at 1 and dephases towards ½, oscillating with `period`.
///
/// The envelope is `e(τ) = √(2 ⟨(2p - 1)²⟩)`, the average taken over one
/// period centred on `τ` (clipped at the trace ends), so `e = 1` for an
/// undamped `cos²` and `e → 0` once dephased. The decay time is the first
/// time `e` falls below `1/e`, interpolated linearly in `ln e`; infinite if
/// it never does within the trace.
pub fn fit_envelope_decay(times: &[f64], values: &[f64], period: f64) -> EnvelopeFit {
    let n = values.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in values {
        prefix.push(prefix.last().unwrap() + (2.0 * v - 1.0).powi(2));
    }
    let half = 0.5 * period;
    let envelope = |k: usize| {
        let lo = times.partition_point(|&t| t < times[k] - half);
        let hi = times.partition_point(|&t| t <= times[k] + half);
        (2.0 * (prefix[hi] - prefix[lo]) / (hi - lo) as f64).sqrt()
    };
    let threshold = (-1.0f64).exp();
    let mut decay = f64::INFINITY;
    let mut prev = (times.first().copied().unwrap_or(0.0), 1.0f64);
    for (k, &t) in times.iter().enumerate() {
        let e = envelope(k);
        if e < threshold {
            let (t0, e0) = prev;
            let (l0, l1) = (e0.ln(), e.max(f64::MIN_POSITIVE).ln());
            let f = if l0 > l1 { (l0 + 1.0) / (l0 - l1) } else { 1.0 };
            decay = t0 + f.clamp(0.0, 1.0) * (t - t0);
            break;
        }
        prev = (t, e.min(1.0));
    }
    let peaks = (1..n.saturating_sub(1))
        .filter(|&k| values[k] > values[k - 1] && values[k] >= values[k + 1])
        .filter(|&k| prominence(values, k) >= MIN_PROMINENCE)
        .map(|k| (times[k], values[k]))
        .collect();
    EnvelopeFit { decay, peaks }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationContext {
    pub hubbard: HubbardParams,
    pub dt: f64,
    pub n_mc: usize,
    pub seed: u64,
    pub workers: usize,
    /// Measurement window in units of the target decay time.
    pub window_factor: f64,
    /// Shortest measurement window, in time units.
    pub min_window: f64,
    /// Accepted relative error of the achieved decay time.
    pub tolerance: f64,
    pub start_amplitude: f64,
    pub max_amplitude: f64,
}

impl CalibrationContext {
    pub fn new(hubbard: HubbardParams, seed: u64) -> Self {
        CalibrationContext {
            hubbard,
            dt: crate::dynamics::DEFAULT_DT,
            n_mc: 100,
            seed,
            workers: 0,
            window_factor: 4.0,
            min_window: 20.0,
            tolerance: 0.05,
            start_amplitude: 1e-4,
            max_amplitude: 0.5,
        }
    }
}

impl CalibrationContext {
    pub fn window(&self, target_decay: f64) -> f64 {
        (self.window_factor * target_decay).max(self.min_window)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub amplitude: f64,
    pub target_decay: f64,
    pub fit: EnvelopeFit,
    /// `(amplitude, decay)` for every evaluation, in order.
    pub evaluations: Vec<(f64, f64)>,
    pub seed: u64,
    pub n_mc: usize,
}

/// Mean ↑↑ return probability under charge noise of `amplitude`, fitted.
pub fn upup_decay(
    amplitude: f64,
    template: &ChargeNoise,
    ctx: &CalibrationContext,
    tau_max: f64,
) -> Result<EnvelopeFit> {
    let cfg = ExperimentConfig {
        charge: Some(ChargeNoise {
            amplitude: Some(amplitude),
            ..template.clone()
        }),
        n_mc: ctx.n_mc,
        seed: ctx.seed,
        workers: ctx.workers,
        dt: ctx.dt,
        ..ExperimentConfig::noiseless(ctx.hubbard, Initial::UpUp, vec![Target::SelfOverlap], tau_max)
    };
    let tr = fidelity_trace(&cfg)?;
    let t = 0.5 * (ctx.hubbard.t_ac + ctx.hubbard.t_cb);
    Ok(fit_envelope_decay(&tr.times, &tr.curves[0].mean, return_times(t, 1)?))
}

/// Search the amplitude whose ↑↑ envelope decays in `target_decay`.
///
/// The decay time falls with amplitude until the noise starts to freeze the
/// tunneling, then rises again. The search doubles the amplitude while the
/// envelope never decays, walks up in quarter octaves until the decay reaches
/// the target, and bisects the last step in log amplitude. It fails if the
/// decay turns upwards before reaching the target.
pub fn calibrate_amplitude(
    target_decay: f64,
    template: &ChargeNoise,
    ctx: &CalibrationContext,
) -> Result<Calibration> {
    if !target_decay.is_finite() || target_decay <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "target decay must be > 0, got {target_decay}"
        )));
    }
    let tau_max = ctx.window(target_decay);
    let mut evaluations = Vec::new();
    let eval = |a: f64, evaluations: &mut Vec<(f64, f64)>| -> Result<EnvelopeFit> {
        let fit = upup_decay(a, template, ctx, tau_max)?;
        evaluations.push((a, fit.decay));
        Ok(fit)
    };
    let close = |d: f64| (d - target_decay).abs() <= ctx.tolerance * target_decay;
    let history = |evaluations: &[(f64, f64)]| {
        evaluations
            .iter()
            .map(|(a, d)| format!("{a:.3e} -> {d:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    };

    let mut hi = ctx.start_amplitude;
    let mut fit = eval(hi, &mut evaluations)?;
    if fit.decay < target_decay && !close(fit.decay) {
        return Err(Error::Calibration(format!(
            "decay {:.4} at the smallest amplitude {hi} is already below the target",
            fit.decay
        )));
    }
    let mut lo = hi;
    let mut rising = 0;
    while !close(fit.decay) && fit.decay > target_decay {
        let step = if fit.decay.is_infinite() { 2.0 } else { 2f64.powf(0.25) };
        lo = hi;
        hi *= step;
        if hi > ctx.max_amplitude {
            return Err(Error::Calibration(format!(
                "no amplitude up to {} reaches decay time {target_decay} (amplitude -> decay: {})",
                ctx.max_amplitude,
                history(&evaluations)
            )));
        }
        let prev = fit.decay;
        fit = eval(hi, &mut evaluations)?;
        rising = if fit.decay > prev && prev.is_finite() { rising + 1 } else { 0 };
        if rising == 2 {
            let min = evaluations.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
            return Err(Error::Calibration(format!(
                "decay time bottoms out at {min:.4} above target {target_decay} (amplitude -> decay: {})",
                history(&evaluations)
            )));
        }
    }
    let mut amplitude = hi;
    let mut best = (amplitude, fit.clone());
    while !close(fit.decay) && hi / lo > 1.0 + 1e-6 {
        amplitude = (lo * hi).sqrt();
        fit = eval(amplitude, &mut evaluations)?;
        if fit.decay > target_decay {
            lo = amplitude;
        } else {
            hi = amplitude;
        }
        if (fit.decay - target_decay).abs() < (best.1.decay - target_decay).abs() {
            best = (amplitude, fit.clone());
        }
    }
    if !close(fit.decay) {
        (amplitude, fit) = best;
    }
    if !close(fit.decay) {
        return Err(Error::Calibration(format!(
            "best decay {:.4} misses target {target_decay} by more than {:.0}% (amplitude -> decay: {})",
            fit.decay,
            ctx.tolerance * 100.0,
            history(&evaluations)
        )));
    }
    Ok(Calibration {
        amplitude,
        target_decay,
        fit,
        evaluations,
        seed: ctx.seed,
        n_mc: ctx.n_mc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(len: f64) -> Vec<f64> {
        (0..=(len / 0.01) as usize).map(|k| k as f64 * 0.01).collect()
    }

    #[test]
    fn fit_recovers_exponential_envelope() {
        for (t_decay, omega) in [(7.0, 4.0), (10.0, 2.0), (3.0, 16.0)] {
            let times = grid(4.0 * t_decay);
            let values: Vec<f64> = times
                .iter()
                .map(|&t| 0.5 + 0.5 * (-t / t_decay).exp() * (omega * t).cos())
                .collect();
            let fit = fit_envelope_decay(&times, &values, 2.0 * PI / omega);
            assert!((fit.decay - t_decay).abs() / t_decay < 0.02, "{t_decay}: {}", fit.decay);
            assert!(!fit.peaks.is_empty());
        }
    }

    #[test]
    fn fit_follows_power_law_envelope() {
        // e(τ) = (1 + τ²)^(-1/4) crosses 1/e at τ = √(e⁴ - 1)
        let times = grid(20.0);
        let values: Vec<f64> = times
            .iter()
            .map(|&t| 0.5 + 0.5 * (1.0 + t * t).powf(-0.25) * (8.0 * t).cos())
            .collect();
        let want = (1.0f64.exp().powi(4) - 1.0).sqrt();
        let fit = fit_envelope_decay(&times, &values, PI / 4.0);
        assert!((fit.decay - want).abs() / want < 0.02, "{} vs {want}", fit.decay);
    }

    #[test]
    fn undamped_trace_never_decays() {
        let times = grid(20.0);
        let values: Vec<f64> = times.iter().map(|&t| (2.0 * t).cos().powi(2)).collect();
        let fit = fit_envelope_decay(&times, &values, PI / 2.0);
        assert!(fit.decay.is_infinite());
        assert!(fit.peaks.len() >= 10);
    }

    #[test]
    fn dephased_trace_decays_at_once() {
        let times = grid(20.0);
        let values: Vec<f64> = times.iter().map(|&t| if t == 0.0 { 1.0 } else { 0.5 }).collect();
        assert!(fit_envelope_decay(&times, &values, 1.0).decay < 0.02);
    }

    #[test]
    fn prominence_ignores_wiggles() {
        let times = grid(10.0);
        let values: Vec<f64> = times
            .iter()
            .map(|&t| 0.5 + 0.4 * (2.0 * t).cos() + 0.01 * (40.0 * t).sin())
            .collect();
        let fit = fit_envelope_decay(&times, &values, PI);
        // true maxima at τ = kπ, k = 1..3
        assert_eq!(fit.peaks.len(), 3, "{:?}", fit.peaks);
    }

    #[test]
    fn rejects_bad_target() {
        let ctx = CalibrationContext::new(HubbardParams::processing(2f64.sqrt(), 20.0), 1);
        assert!(calibrate_amplitude(0.0, &ChargeNoise::default(), &ctx).is_err());
    }
}
