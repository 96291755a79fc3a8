//! Assemble the curves of each figure from gatelab experiments.

use anyhow::{bail, Result};
use tridot_core::calibration::{calibrate_amplitude, Calibration, CalibrationContext};
use tridot_core::gatelab::{Curve, FidelityTrace};
use tridot_core::tjmodel::analytic_overlap;
use tridot_core::{fidelity_trace, ChargeNoise, EffectiveParams, ExperimentConfig, Initial, Target};

use crate::config::FigureConfig;
use crate::Usage;

pub struct RunOptions {
    pub workers: usize,
    /// Amplitude taken from a calibration record, if one was given.
    pub amplitude: Option<f64>,
}

fn base(cfg: &FigureConfig, opts: &RunOptions, initial: Initial, target: Target) -> ExperimentConfig {
    ExperimentConfig {
        hubbard: cfg.hubbard,
        initial,
        targets: vec![target],
        dt: cfg.dt,
        tau_max: cfg.tau_max,
        charge: None,
        b_nuc: None,
        n_mc: cfg.n_mc,
        seed: cfg.seed,
        workers: opts.workers,
        record_stride: cfg.record_stride,
    }
}

pub fn calibrate(cfg: &FigureConfig, template: &ChargeNoise, target: f64, workers: usize) -> Result<Calibration> {
    let ctx = CalibrationContext {
        dt: cfg.dt,
        n_mc: cfg.calibration_mc,
        workers,
        ..CalibrationContext::new(cfg.hubbard, cfg.seed)
    };
    Ok(calibrate_amplitude(target, template, &ctx)?)
}

/// The charge-noise model with its amplitude resolved: a calibration record
/// wins, then an explicit amplitude, then calibration to `decay_target`.
fn charge(cfg: &FigureConfig, opts: &RunOptions) -> Result<ChargeNoise> {
    let template = cfg.charge.clone().unwrap_or_default();
    if let Some(a) = opts.amplitude {
        return Ok(ChargeNoise {
            amplitude: Some(a),
            ..template
        });
    }
    if template.amplitude.is_some() {
        return Ok(template);
    }
    let Some(target) = cfg.decay_target else {
        bail!(Usage(format!(
            "figure {} needs charge.amplitude, decay_target or a calibration record",
            cfg.figure
        )));
    };
    let cal = calibrate(cfg, &template, target, opts.workers)?;
    Ok(ChargeNoise {
        amplitude: Some(cal.amplitude),
        ..template
    })
}

fn relabel(mut tr: FidelityTrace, label: &str) -> Curve {
    let mut c = tr.curves.remove(0);
    c.label = label.to_string();
    c
}

pub fn run_figure(cfg: &FigureConfig, opts: &RunOptions) -> Result<FidelityTrace> {
    let (first, rest): (FidelityTrace, Vec<Curve>) = match cfg.figure {
        2 => {
            let quiet = |i, t| ExperimentConfig {
                n_mc: 1,
                ..base(cfg, opts, i, t)
            };
            let upup = fidelity_trace(&quiet(Initial::UpUp, Target::SelfOverlap))?;
            let numeric = fidelity_trace(&quiet(Initial::UpDown, Target::Gate))?;
            let ex = quiet(Initial::UpDown, Target::Gate).exchange();
            let p = EffectiveParams::new(cfg.hubbard.t_ac, ex);
            let analytic = Curve {
                label: "updown_target_analytic".into(),
                mean: upup.times.iter().map(|&t| analytic_overlap(t, &p)).collect(),
                stderr: None,
            };
            let numeric = relabel(numeric, "updown_target_numeric");
            let mut upup = upup;
            upup.curves[0].label = "upup_self".into();
            (upup, vec![analytic, numeric])
        }
        3 => {
            let ch = charge(cfg, opts)?;
            let noisy = |i, t| ExperimentConfig {
                charge: Some(ch.clone()),
                ..base(cfg, opts, i, t)
            };
            let mut upup = fidelity_trace(&noisy(Initial::UpUp, Target::SelfOverlap))?;
            upup.curves[0].label = "upup_self".into();
            let updown = relabel(fidelity_trace(&noisy(Initial::UpDown, Target::Gate))?, "updown_target");
            (upup, vec![updown])
        }
        4 => {
            let ch = charge(cfg, opts)?;
            let mut tr = fidelity_trace(&ExperimentConfig {
                charge: Some(ch),
                b_nuc: Some(cfg.b_nuc.unwrap_or(0.1)),
                ..base(cfg, opts, Initial::Superposition, Target::Gate)
            })?;
            tr.curves[0].label = "superposition_target".into();
            (tr, vec![])
        }
        5 => {
            let ch = charge(cfg, opts)?;
            let mut only = fidelity_trace(&ExperimentConfig {
                charge: Some(ch.clone()),
                ..base(cfg, opts, Initial::UpDown, Target::PartialSwap)
            })?;
            only.curves[0].label = "partial_swap_charge".into();
            let both = fidelity_trace(&ExperimentConfig {
                charge: Some(ch),
                b_nuc: Some(cfg.b_nuc.unwrap_or(0.1)),
                ..base(cfg, opts, Initial::UpDown, Target::PartialSwap)
            })?;
            (only, vec![relabel(both, "partial_swap_both")])
        }
        other => bail!(Usage(format!("unknown figure {other}"))),
    };
    let mut out = first;
    out.curves.extend(rest);
    Ok(out)
}
