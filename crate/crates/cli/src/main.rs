//! `tridot`: spectra, figure traces, noise calibration and gate-time search
//! for the triple-dot entangling gate.

mod config;
mod figures;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tridot_core::calibration::CalibrationContext;
use tridot_core::gatelab::format_sig;
use tridot_core::linalg::Eigensystem;
use tridot_core::tjmodel::{
    analytic_spectrum, eigen_residual, effective_hamiltonian, return_times, target_times,
};
use tridot_core::{
    fidelity_trace, find_gate_time, AnalyticModel, EffectiveParams, GateModel, HubbardParams,
    NumericModel,
};

use crate::config::CalibrationRecord;
use crate::figures::RunOptions;

/// A usage or configuration error (exit code 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Parser)]
#[command(name = "tridot", version, about = "Triple-dot two-spin gate simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config (figure overrides, experiment, or calibration settings).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for Monte-Carlo loops (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Monte-Carlo sample count, overriding the config.
    #[arg(long, global = true)]
    mc: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic vs numeric eigenvalues of the t-J model.
    Spectrum {
        #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
        t: f64,
        #[arg(long, default_value_t = 20.0, conflicts_with = "j")]
        u: f64,
        /// Exchange J directly, instead of t²/U.
        #[arg(long)]
        j: Option<f64>,
    },
    /// Write the CSV trace of a figure preset (2, 3, 4 or 5).
    Fig {
        figure: u8,
        /// Calibration record from `tridot calibrate`.
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Find the charge-noise amplitude giving a target ↑↑ decay time.
    Calibrate {
        #[arg(long, allow_negative_numbers = true)]
        target: f64,
    },
    /// Search the gate time maximizing min(F↑↑, F↑↓→target).
    GateTime {
        #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
        t: f64,
        #[arg(long, default_value_t = 20.0)]
        u: f64,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.0, 8.0], allow_negative_numbers = true)]
        window: Vec<f64>,
        #[arg(long, default_value_t = tridot_core::gatelab::DEFAULT_GATE_THRESHOLD)]
        threshold: f64,
        #[arg(long, value_enum, default_value_t = Model::Analytic)]
        model: Model,
    },
    /// Run a free-form experiment config and write its CSV trace.
    Evolve,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    /// Closed-form t-J overlaps.
    Analytic,
    /// Numeric 6×6 t-J propagation.
    Effective,
    /// Numeric full Hubbard propagation.
    Hubbard,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn spectrum(t: f64, u: f64, j: Option<f64>) -> Result<String> {
    let p = match j {
        Some(j) => EffectiveParams::new(t, j),
        None => EffectiveParams::from_hubbard(t, u)?,
    };
    let s = analytic_spectrum(&p)?;
    let h = effective_hamiltonian(&p);
    let numeric = Eigensystem::new(h.matrix()).values;
    let mut rows: Vec<(usize, f64, f64)> = s
        .pairs()
        .enumerate()
        .map(|(i, (lambda, v))| (i + 1, lambda, eigen_residual(&h, lambda, v)))
        .collect();
    rows.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out = String::from("vector,analytic,numeric,residual\n");
    for ((i, lambda, res), num) in rows.iter().zip(&numeric) {
        writeln!(out, "v{i},{},{},{}", format_sig(*lambda), format_sig(*num), format_sig(*res))?;
    }
    Ok(out)
}

fn gate_time(t: f64, u: f64, window: &[f64], threshold: f64, model: Model) -> Result<String> {
    let hub = HubbardParams::processing(t, u);
    hub.validate()?;
    let p = EffectiveParams::from_hubbard(t, u)?;
    let m: Box<dyn GateModel> = match model {
        Model::Analytic => Box::new(AnalyticModel { params: p }),
        Model::Effective => Box::new(NumericModel::effective(&p)?),
        Model::Hubbard => Box::new(NumericModel::hubbard(&hub)?),
    };
    let g = find_gate_time(m.as_ref(), (window[0], window[1]), threshold)?;
    let period = return_times(t, 1)?;
    let m_near = (g.tau / period).round().max(1.0) as u32;
    let n_near = ((g.tau * 6.0 * p.j / std::f64::consts::PI - 1.0) / 4.0).round().max(0.0) as u32;
    let mut out = String::new();
    writeln!(out, "tau_star = {}", format_sig(g.tau))?;
    writeln!(out, "tau_star_ns = {}", format_sig(tridot_core::units::to_ns(g.tau)))?;
    writeln!(out, "joint = {}", format_sig(g.joint))?;
    writeln!(out, "upup = {}", format_sig(g.fidelities.upup))?;
    writeln!(out, "upup_in_phase = {}", format_sig(g.fidelities.upup_in_phase))?;
    writeln!(out, "updown_target = {}", format_sig(g.fidelities.updown))?;
    writeln!(out, "nearest_return = {{ m = {m_near}, tau = {} }}", format_sig(return_times(t, m_near)?))?;
    writeln!(out, "nearest_target = {{ n = {n_near}, tau = {} }}", format_sig(target_times(p.j, n_near)?))?;
    writeln!(out, "reached_threshold = {}", g.joint >= threshold)?;
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    match cli.command {
        Command::Spectrum { t, u, j } => emit(c.out.as_deref(), &spectrum(t, u, j)?),
        Command::Fig { figure, calibration } => {
            let mut cfg = config::figure_config(figure, c.config.as_deref())?;
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            if let Some(n) = c.mc {
                cfg.n_mc = n;
            }
            let amplitude = match calibration {
                Some(path) => Some(CalibrationRecord::load(&path)?.amplitude),
                None => None,
            };
            let opts = RunOptions {
                workers: c.workers,
                amplitude,
            };
            let tr = figures::run_figure(&cfg, &opts)?;
            emit(c.out.as_deref(), &tr.to_csv())
        }
        Command::Calibrate { target } => {
            if !target.is_finite() || target <= 0.0 {
                bail!(Usage(format!("--target must be a positive decay time, got {target}")));
            }
            let mut cfg = config::figure_config(3, c.config.as_deref())?;
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            if let Some(n) = c.mc {
                cfg.calibration_mc = n;
            }
            let template = cfg.charge.clone().unwrap_or_default();
            let cal = figures::calibrate(&cfg, &template, target, c.workers)?;
            let window = CalibrationContext::new(cfg.hubbard, cfg.seed).window(target);
            let record = CalibrationRecord::new(&cal, window, cfg.dt, cfg.hubbard, &template);
            emit(c.out.as_deref(), &record.to_toml()?)
        }
        Command::GateTime {
            t,
            u,
            window,
            threshold,
            model,
        } => emit(c.out.as_deref(), &gate_time(t, u, &window, threshold, model)?),
        Command::Evolve => {
            let Some(path) = c.config.as_deref() else {
                bail!(Usage("evolve needs --config PATH".into()));
            };
            let mut cfg = config::experiment_config(path)?;
            if let Some(s) = c.seed {
                cfg.seed = s;
            }
            if let Some(n) = c.mc {
                cfg.n_mc = n;
            }
            cfg.workers = c.workers;
            emit(c.out.as_deref(), &fidelity_trace(&cfg)?.to_csv())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    if let Some(e) = err.downcast_ref::<tridot_core::Error>() {
        return if e.is_numerical() { 3 } else { 2 };
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
