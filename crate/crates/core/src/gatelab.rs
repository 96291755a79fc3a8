//! Gate experiments: targets of the two-qubit gate, Monte-Carlo fidelity
//! traces under charge and nuclear noise, and the gate-time search.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_piecewise, Observable, StateVector, StaticPropagator, DEFAULT_DT};
use crate::error::{Error, Result};
use crate::fock::{orb, Basis, FockState, SpinOrbital, Sz};
use crate::hubbard::{build_hubbard, build_zeeman, HubbardParams, HubbardTerms};
use crate::linalg::{c, CMat, C64, I};
use crate::noise::{gen_one_over_f, sample_nuclear, ChargeNoise, TunnelingProfile};
use crate::tjmodel::{analytic_overlap, effective_hamiltonian, EffectiveParams};

/// Computational basis of the two qubits, spin on A first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Qubits {
    UpUp,
    UpDown,
    DownUp,
    DownDown,
}

impl Qubits {
    pub const ALL: [Qubits; 4] = [Qubits::UpUp, Qubits::UpDown, Qubits::DownUp, Qubits::DownDown];

    pub fn index(self) -> usize {
        self as usize
    }

    fn orbitals(self) -> (SpinOrbital, SpinOrbital) {
        use orb::*;
        match self {
            Qubits::UpUp => (A_UP, B_UP),
            Qubits::UpDown => (A_UP, B_DN),
            Qubits::DownUp => (A_DN, B_UP),
            Qubits::DownDown => (A_DN, B_DN),
        }
    }

    /// `d†_{Aσ} d†_{Bσ'} |0⟩`; always `+1 ×` the canonical mask.
    pub fn ket(self) -> FockState {
        let (a, b) = self.orbitals();
        FockState::pair(a, b).expect("A and B orbitals differ").0
    }

    pub fn sz(self) -> Sz {
        match self {
            Qubits::UpUp => Sz::Plus,
            Qubits::UpDown | Qubits::DownUp => Sz::Zero,
            Qubits::DownDown => Sz::Minus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Qubits::UpUp => "upup",
            Qubits::UpDown => "updown",
            Qubits::DownUp => "downup",
            Qubits::DownDown => "downdown",
        }
    }
}

/// Amplitudes over (↑↑, ↑↓, ↓↑, ↓↓).
pub type TwoQubit = [C64; 4];

pub fn basis_vector(q: Qubits) -> TwoQubit {
    let mut v = [c(0.0); 4];
    v[q.index()] = c(1.0);
    v
}

/// `2 |a↑↑ a↓↓ - a↑↓ a↓↑|` for a normalized pure state.
pub fn concurrence(v: &TwoQubit) -> f64 {
    2.0 * (v[0] * v[3] - v[1] * v[2]).norm()
}

/// The entangling gate as a 4×4 unitary (column `k` = image of input `k`).
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    columns: [TwoQubit; 4],
}

impl GateSpec {
    /// `↑↑→↑↑`, `↓↓→↓↓`, `↑↓→e^{iπ/4}(↑↓ - i↓↑)/√2`, `↓↑→e^{iπ/4}(↓↑ - i↑↓)/√2`.
    pub fn ideal() -> Self {
        let p = C64::from_polar(FRAC_1_SQRT_2, FRAC_PI_4);
        let zero = c(0.0);
        GateSpec {
            columns: [
                [c(1.0), zero, zero, zero],
                [zero, p, -I * p, zero],
                [zero, -I * p, p, zero],
                [zero, zero, zero, c(1.0)],
            ],
        }
    }

    pub fn image(&self, q: Qubits) -> TwoQubit {
        self.columns[q.index()]
    }

    pub fn apply(&self, v: &TwoQubit) -> TwoQubit {
        let mut out = [c(0.0); 4];
        for (k, col) in self.columns.iter().enumerate() {
            for r in 0..4 {
                out[r] += col[r] * v[k];
            }
        }
        out
    }

    pub fn matrix(&self) -> CMat {
        CMat::from_fn(4, 4, |r, k| self.columns[k][r])
    }

    /// `max |U†U - 1|`.
    pub fn unitarity_residual(&self) -> f64 {
        let u = self.matrix();
        let d = u.adjoint() * &u - CMat::identity(4, 4);
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Embed two-qubit amplitudes as `d†_A d†_B` kets of `basis`.
pub fn embed_two_qubit(v: &TwoQubit, basis: &Basis) -> Result<StateVector> {
    let terms: Vec<(FockState, C64)> = Qubits::ALL
        .iter()
        .zip(v.iter())
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(q, a)| (q.ket(), *a))
        .collect();
    StateVector::superposition(basis, &terms)
}

pub fn gate_target(q: Qubits, basis: &Basis) -> Result<StateVector> {
    embed_two_qubit(&GateSpec::ideal().image(q), basis)
}

/// Partial-swap trajectory `e^{i3Jτ/2}(cos(3Jτ/2)|q⟩ - i sin(3Jτ/2)|q̄⟩)` for
/// `q` = ↑↓ or ↓↑, with `q̄` the flipped pair.
pub fn partial_swap_amplitudes(tau: f64, j: f64, q: Qubits) -> Result<TwoQubit> {
    let (own, other) = match q {
        Qubits::UpDown => (1, 2),
        Qubits::DownUp => (2, 1),
        _ => {
            return Err(Error::InvalidParams(
                "partial swap is defined for ↑↓ and ↓↑ inputs".into(),
            ))
        }
    };
    let x = 1.5 * j * tau;
    let phase = C64::from_polar(1.0, x);
    let mut v = [c(0.0); 4];
    v[own] = phase * x.cos();
    v[other] = -I * phase * x.sin();
    Ok(v)
}

pub fn partial_swap_target(tau: f64, j: f64, q: Qubits, basis: &Basis) -> Result<StateVector> {
    embed_two_qubit(&partial_swap_amplitudes(tau, j, q)?, basis)
}

/// `(↑↑ + ↑↓)/√2`, the state used to check the gate's relative phases.
pub fn superposition_input() -> TwoQubit {
    let a = c(FRAC_1_SQRT_2);
    [a, a, c(0.0), c(0.0)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    UpUp,
    UpDown,
    DownUp,
    DownDown,
    /// `(↑↑ + ↑↓)/√2`.
    Superposition,
}

impl Initial {
    pub fn amplitudes(self) -> TwoQubit {
        match self {
            Initial::UpUp => basis_vector(Qubits::UpUp),
            Initial::UpDown => basis_vector(Qubits::UpDown),
            Initial::DownUp => basis_vector(Qubits::DownUp),
            Initial::DownDown => basis_vector(Qubits::DownDown),
            Initial::Superposition => superposition_input(),
        }
    }

    pub fn qubits(self) -> Option<Qubits> {
        match self {
            Initial::UpUp => Some(Qubits::UpUp),
            Initial::UpDown => Some(Qubits::UpDown),
            Initial::DownUp => Some(Qubits::DownUp),
            Initial::DownDown => Some(Qubits::DownDown),
            Initial::Superposition => None,
        }
    }

    fn sector(self) -> Option<Sz> {
        self.qubits().map(Qubits::sz)
    }
}

/// Reference state a curve is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// The initial state itself (return probability).
    SelfOverlap,
    /// Ideal gate image of the initial state.
    Gate,
    /// Time-dependent partial-swap trajectory (↑↓ or ↓↑ inputs only).
    PartialSwap,
}

impl Target {
    pub fn label(self) -> &'static str {
        match self {
            Target::SelfOverlap => "self",
            Target::Gate => "target",
            Target::PartialSwap => "partial_swap",
        }
    }
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub hubbard: HubbardParams,
    pub initial: Initial,
    pub targets: Vec<Target>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub tau_max: f64,
    #[serde(default)]
    pub charge: Option<ChargeNoise>,
    /// Quasistatic nuclear field scale; `None` disables the Zeeman term.
    #[serde(default)]
    pub b_nuc: Option<f64>,
    #[serde(default = "default_one")]
    pub n_mc: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads for the Monte-Carlo loop (0 = all cores). Never
    /// changes the result.
    #[serde(default)]
    pub workers: usize,
    /// Keep every `record_stride`-th grid point.
    #[serde(default = "default_one")]
    pub record_stride: usize,
}

impl ExperimentConfig {
    pub fn noiseless(hubbard: HubbardParams, initial: Initial, targets: Vec<Target>, tau_max: f64) -> Self {
        ExperimentConfig {
            hubbard,
            initial,
            targets,
            dt: DEFAULT_DT,
            tau_max,
            charge: None,
            b_nuc: None,
            n_mc: 1,
            seed: 0,
            workers: 0,
            record_stride: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hubbard.validate()?;
        if !self.tau_max.is_finite() || self.tau_max <= 0.0 {
            return Err(Error::InvalidParams(format!("tau_max must be > 0, got {}", self.tau_max)));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 || self.dt > self.tau_max {
            return Err(Error::InvalidParams(format!("invalid dt {}", self.dt)));
        }
        if self.n_mc == 0 || self.record_stride == 0 {
            return Err(Error::InvalidParams("n_mc and record_stride must be >= 1".into()));
        }
        if self.targets.is_empty() {
            return Err(Error::InvalidParams("no targets requested".into()));
        }
        if self.targets.contains(&Target::PartialSwap)
            && !matches!(self.initial, Initial::UpDown | Initial::DownUp)
        {
            return Err(Error::InvalidParams(
                "partial_swap target needs an up_down or down_up initial state".into(),
            ));
        }
        if let Some(ch) = &self.charge {
            match ch.amplitude {
                Some(a) if a >= 0.0 && a.is_finite() => {}
                _ => return Err(Error::InvalidParams("charge noise amplitude missing or invalid".into())),
            }
            TunnelingProfile::new(self.hubbard.t_ac, ch.width)?;
        }
        if let Some(b) = self.b_nuc {
            if !b.is_finite() || b < 0.0 {
                return Err(Error::InvalidParams(format!("b_nuc must be >= 0, got {b}")));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.tau_max / self.dt).round() as usize
    }

    /// Exchange `J = t_AC t_CB / Ū` used for the partial-swap trajectory.
    pub fn exchange(&self) -> f64 {
        let u = self.hubbard.u.iter().sum::<f64>() / 3.0;
        self.hubbard.t_ac * self.hubbard.t_cb / u
    }

    fn is_noisy(&self) -> bool {
        self.charge.is_some() || self.b_nuc.is_some()
    }

    /// Full space when nuclear fields are on or the input spans sectors.
    pub fn working_basis(&self) -> Basis {
        match (self.b_nuc, self.initial.sector()) {
            (None, Some(sz)) => Basis::sector(sz),
            _ => Basis::full(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub mean: Vec<f64>,
    /// Standard error of the mean; present when `n_mc > 1`.
    pub stderr: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub seed: u64,
    pub n_mc: usize,
    pub dt: f64,
    pub hubbard: HubbardParams,
    pub charge_amplitude: Option<f64>,
    pub b_nuc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityTrace {
    pub times: Vec<f64>,
    pub curves: Vec<Curve>,
    pub meta: TraceMeta,
}

impl FidelityTrace {
    /// Linear interpolation of curve `i` at `tau`.
    pub fn value_at(&self, i: usize, tau: f64) -> f64 {
        interpolate(&self.times, &self.curves[i].mean, tau)
    }

    pub fn stderr_at(&self, i: usize, tau: f64) -> Option<f64> {
        self.curves[i]
            .stderr
            .as_ref()
            .map(|s| interpolate(&self.times, s, tau))
    }
}

/// `x` with nine significant digits; plain decimal for moderate magnitudes.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    // round first so a carry (0.9999999999 -> 1.00000000) moves the exponent
    let sci = format!("{x:.8e}");
    let mag: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-4..9).contains(&mag) {
        let rounded: f64 = sci.parse().expect("valid float");
        let decimals = (8 - mag).max(0) as usize;
        format!("{rounded:.decimals$}")
    } else {
        sci
    }
}

impl FidelityTrace {
    /// CSV with columns `time_scaled, time_ns`, one per curve, then one
    /// `<label>_stderr` per curve that carries errors. LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_scaled,time_ns");
        for c in &self.curves {
            out.push(',');
            out.push_str(&c.label);
        }
        for c in self.curves.iter().filter(|c| c.stderr.is_some()) {
            out.push_str(&format!(",{}_stderr", c.label));
        }
        out.push('\n');
        for (k, &t) in self.times.iter().enumerate() {
            out.push_str(&format_sig(t));
            out.push(',');
            out.push_str(&format_sig(crate::units::to_ns(t)));
            for c in &self.curves {
                out.push(',');
                out.push_str(&format_sig(c.mean[k]));
            }
            for s in self.curves.iter().filter_map(|c| c.stderr.as_ref()) {
                out.push(',');
                out.push_str(&format_sig(s[k]));
            }
            out.push('\n');
        }
        out
    }
}

pub fn interpolate(times: &[f64], values: &[f64], tau: f64) -> f64 {
    match times.iter().position(|&x| x >= tau) {
        None => *values.last().expect("non-empty trace"),
        Some(0) => values[0],
        Some(k) => {
            let (t0, t1) = (times[k - 1], times[k]);
            let w = (tau - t0) / (t1 - t0);
            values[k - 1] * (1.0 - w) + values[k] * w
        }
    }
}

const STREAM_CHARGE: u64 = 0;
const STREAM_NUCLEAR: u64 = 1;

fn stream_id(sample: usize, kind: u64) -> u64 {
    ((sample as u64) << 2) | kind
}

/// Samples per accumulation chunk. Chunk boundaries are fixed, so sums are
/// formed in the same order for any number of workers.
const CHUNK: usize = 8;

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    basis: Basis,
    terms: HubbardTerms,
    psi0: StateVector,
    fixed_targets: Vec<Option<StateVector>>,
    n_steps: usize,
}

struct PartialSwapObservable<'a> {
    j: f64,
    q: Qubits,
    basis: &'a Basis,
}

impl Observable for PartialSwapObservable<'_> {
    fn reference(&self, time: f64) -> StateVector {
        partial_swap_target(time, self.j, self.q, self.basis).expect("validated input")
    }
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let basis = cfg.working_basis();
        let psi0 = embed_two_qubit(&cfg.initial.amplitudes(), &basis)?;
        let gate_image = GateSpec::ideal().apply(&cfg.initial.amplitudes());
        let fixed_targets = cfg
            .targets
            .iter()
            .map(|t| match t {
                Target::SelfOverlap => Ok(Some(psi0.clone())),
                Target::Gate => embed_two_qubit(&gate_image, &basis).map(Some),
                Target::PartialSwap => Ok(None),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Runner {
            cfg,
            terms: HubbardTerms::new(&basis)?,
            basis,
            psi0,
            fixed_targets,
            n_steps: cfg.n_steps(),
        })
    }

    fn reference(&self, curve: usize, time: f64) -> StateVector {
        match &self.fixed_targets[curve] {
            Some(s) => s.clone(),
            None => {
                let q = self.cfg.initial.qubits().expect("validated");
                partial_swap_target(time, self.cfg.exchange(), q, &self.basis).expect("validated")
            }
        }
    }

    /// Overlaps `[curve][grid point]` for one Monte-Carlo sample.
    fn sample(&self, index: usize) -> Result<Vec<Vec<f64>>> {
        let cfg = self.cfg;
        let zeeman = match cfg.b_nuc {
            Some(b) => {
                let fields = sample_nuclear(b, cfg.seed, stream_id(index, STREAM_NUCLEAR))?;
                Some(build_zeeman(&fields, &self.basis)?.into_matrix())
            }
            None => None,
        };
        let base = self.terms.assemble_matrix(&cfg.hubbard);

        let Some(charge) = &cfg.charge else {
            let mut h = base;
            if let Some(z) = &zeeman {
                h += z;
            }
            let prop = StaticPropagator::new(&crate::hubbard::HamiltonianMatrix::new(self.basis.clone(), h)?)?;
            let mut out = vec![Vec::with_capacity(self.n_steps + 1); cfg.targets.len()];
            for k in 0..=self.n_steps {
                let time = k as f64 * cfg.dt;
                let psi = prop.evolve(&self.psi0, time)?;
                for (i, series) in out.iter_mut().enumerate() {
                    series.push(crate::dynamics::squared_overlap(&psi, &self.reference(i, time))?);
                }
            }
            return Ok(out);
        };

        let trace_cfg = charge.trace_config(self.n_steps, cfg.dt, cfg.seed, stream_id(index, STREAM_CHARGE))?;
        let trace = gen_one_over_f(&trace_cfg)?;
        let prof_ac = TunnelingProfile::new(cfg.hubbard.t_ac, charge.width)?;
        let prof_cb = TunnelingProfile::new(cfg.hubbard.t_cb, charge.width)?;
        let provider = |k: usize| -> Result<CMat> {
            let delta = trace.values[k];
            let mut p = cfg.hubbard;
            for (e, w) in p.e.iter_mut().zip(charge.coupling) {
                *e += w * delta;
            }
            if charge.modulate_tunneling {
                p.t_ac = prof_ac.tunneling_at(delta);
                p.t_cb = prof_cb.tunneling_at(delta);
            }
            let mut m = self.terms.assemble_matrix(&p);
            if let Some(z) = &zeeman {
                m += z;
            }
            Ok(m)
        };
        let swap = cfg.initial.qubits().map(|q| PartialSwapObservable {
            j: cfg.exchange(),
            q,
            basis: &self.basis,
        });
        let observables: Vec<&dyn Observable> = self
            .fixed_targets
            .iter()
            .map(|t| match t {
                Some(s) => s as &dyn Observable,
                None => swap.as_ref().expect("validated") as &dyn Observable,
            })
            .collect();
        let traj = evolve_piecewise(provider, &self.psi0, cfg.dt, self.n_steps, &observables)?;
        Ok(traj.overlaps)
    }
}

/// Running mean and sum of squared deviations per curve and grid point
/// (Welford updates, Chan merges).
struct Sums {
    n: usize,
    mean: Vec<Vec<f64>>,
    m2: Vec<Vec<f64>>,
}

impl Sums {
    fn zero(curves: usize, points: usize) -> Self {
        Sums {
            n: 0,
            mean: vec![vec![0.0; points]; curves],
            m2: vec![vec![0.0; points]; curves],
        }
    }

    fn add(&mut self, sample: &[Vec<f64>]) {
        self.n += 1;
        let n = self.n as f64;
        for (i, series) in sample.iter().enumerate() {
            for (k, &x) in series.iter().enumerate() {
                let d = x - self.mean[i][k];
                self.mean[i][k] += d / n;
                self.m2[i][k] += d * (x - self.mean[i][k]);
            }
        }
    }

    fn merge(&mut self, other: &Sums) {
        if other.n == 0 {
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            for k in 0..self.mean[i].len() {
                let d = other.mean[i][k] - self.mean[i][k];
                self.mean[i][k] += d * nb / n;
                self.m2[i][k] += other.m2[i][k] + d * d * na * nb / n;
            }
        }
        self.n += other.n;
    }
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Monte-Carlo averaged squared overlaps against each requested target.
///
/// Sample `i` draws its nuclear fields and its charge trace from streams
/// derived from `(seed, i)`; results depend only on `(config, seed, n_mc)`.
pub fn fidelity_trace(cfg: &ExperimentConfig) -> Result<FidelityTrace> {
    let runner = Runner::new(cfg)?;
    let points = runner.n_steps + 1;
    let curves = cfg.targets.len();
    // without noise every sample is identical
    let samples = if cfg.is_noisy() { cfg.n_mc } else { 1 };
    let n_chunks = samples.div_ceil(CHUNK);

    let chunks: Vec<Result<Sums>> = with_workers(cfg.workers, || {
        (0..n_chunks)
            .into_par_iter()
            .map(|ci| {
                let mut s = Sums::zero(curves, points);
                for idx in ci * CHUNK..((ci + 1) * CHUNK).min(samples) {
                    s.add(&runner.sample(idx)?);
                }
                Ok(s)
            })
            .collect()
    })?;
    let mut total = Sums::zero(curves, points);
    for chunk in chunks {
        total.merge(&chunk?);
    }

    let stride = cfg.record_stride;
    let keep: Vec<usize> = (0..points).filter(|k| k % stride == 0).collect();
    let times = keep.iter().map(|&k| k as f64 * cfg.dt).collect();
    let n = total.n as f64;
    let curves = cfg
        .targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mean: Vec<f64> = keep.iter().map(|&k| total.mean[i][k].clamp(0.0, 1.0)).collect();
            let stderr = (cfg.n_mc > 1).then(|| {
                keep.iter()
                    .map(|&k| {
                        if total.n < 2 {
                            return 0.0;
                        }
                        let var = (total.m2[i][k] / (n - 1.0)).max(0.0);
                        (var / n).sqrt()
                    })
                    .collect()
            });
            Curve {
                label: t.label().to_string(),
                mean,
                stderr,
            }
        })
        .collect();
    Ok(FidelityTrace {
        times,
        curves,
        meta: TraceMeta {
            seed: cfg.seed,
            n_mc: cfg.n_mc,
            dt: cfg.dt,
            hubbard: cfg.hubbard,
            charge_amplitude: cfg.charge.as_ref().and_then(|c| c.amplitude),
            b_nuc: cfg.b_nuc,
        },
    })
}

/// Fidelity trace for `(↑↑ + ↑↓)/√2` against its ideal gate image; the
/// input spans two S_z sectors, so this always runs in the full space.
pub fn run_superposition_check(cfg: &ExperimentConfig) -> Result<FidelityTrace> {
    let cfg = ExperimentConfig {
        initial: Initial::Superposition,
        targets: vec![Target::Gate],
        ..cfg.clone()
    };
    fidelity_trace(&cfg)
}

/// Fidelities of the two gate branches at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchFidelities {
    /// `|⟨↑↑|ψ↑↑(τ)⟩|²`.
    pub upup: f64,
    /// `max(0, Re⟨↑↑|ψ↑↑(τ)⟩)²`: the ↑↑ return counted only when it comes
    /// back without a sign flip.
    pub upup_in_phase: f64,
    /// `|⟨target|ψ↑↓(τ)⟩|²`.
    pub updown: f64,
}

impl BranchFidelities {
    pub fn joint(&self) -> f64 {
        self.upup_in_phase.min(self.updown)
    }
}

pub trait GateModel {
    fn branch_fidelities(&self, tau: f64) -> BranchFidelities;
}

/// Closed forms: `⟨↑↑|ψ⟩ = cos(√2 t τ)` and the analytic ↑↓ overlap.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticModel {
    pub params: EffectiveParams,
}

impl GateModel for AnalyticModel {
    fn branch_fidelities(&self, tau: f64) -> BranchFidelities {
        let a = (SQRT_2 * self.params.t * tau).cos();
        BranchFidelities {
            upup: a * a,
            upup_in_phase: a.max(0.0).powi(2),
            updown: analytic_overlap(tau, &self.params),
        }
    }
}

/// Exact noiseless propagation of both branches.
#[derive(Debug, Clone)]
pub struct NumericModel {
    upup: StaticPropagator,
    upup0: StateVector,
    updown: StaticPropagator,
    updown0: StateVector,
    updown_target: StateVector,
}

impl NumericModel {
    /// Full Hubbard sectors.
    pub fn hubbard(p: &HubbardParams) -> Result<Self> {
        let plus = Basis::sector(Sz::Plus);
        let zero = Basis::sector(Sz::Zero);
        Ok(NumericModel {
            upup: StaticPropagator::new(&build_hubbard(p, &plus)?)?,
            upup0: StateVector::basis_state(&plus, Qubits::UpUp.ket())?,
            updown: StaticPropagator::new(&build_hubbard(p, &zero)?)?,
            updown0: StateVector::basis_state(&zero, Qubits::UpDown.ket())?,
            updown_target: gate_target(Qubits::UpDown, &zero)?,
        })
    }

    /// The 6×6 t-J model for ↑↓ (↑↑ is U-independent: no double occupancy).
    pub fn effective(p: &EffectiveParams) -> Result<Self> {
        let plus = Basis::sector(Sz::Plus);
        let six = Basis::singly_occupied();
        let hub = HubbardParams::processing(p.t, 1.0);
        Ok(NumericModel {
            upup: StaticPropagator::new(&build_hubbard(&hub, &plus)?)?,
            upup0: StateVector::basis_state(&plus, Qubits::UpUp.ket())?,
            updown: StaticPropagator::new(&effective_hamiltonian(p))?,
            updown0: StateVector::basis_state(&six, Qubits::UpDown.ket())?,
            updown_target: gate_target(Qubits::UpDown, &six)?,
        })
    }
}

impl GateModel for NumericModel {
    fn branch_fidelities(&self, tau: f64) -> BranchFidelities {
        let uu = self.upup.evolve(&self.upup0, tau).expect("same basis");
        let a = self.upup0.inner(&uu).expect("same basis");
        let ud = self.updown.evolve(&self.updown0, tau).expect("same basis");
        BranchFidelities {
            upup: a.norm_sqr(),
            upup_in_phase: a.re.max(0.0).powi(2),
            updown: self.updown_target.inner(&ud).expect("same basis").norm_sqr(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateTime {
    pub tau: f64,
    pub fidelities: BranchFidelities,
    pub joint: f64,
}

/// Default acceptance level for "earliest good optimum".
pub const DEFAULT_GATE_THRESHOLD: f64 = 0.999;

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        x1
    } else {
        x2
    }
}

/// Maximize `min(F↑↑ in phase, F↑↓→target)` over `[lo, hi]`.
///
/// Scans a dense grid, refines every grid-local maximum, and returns the
/// earliest refined optimum reaching `threshold`, or the global optimum
/// when none does.
pub fn find_gate_time(model: &dyn GateModel, window: (f64, f64), threshold: f64) -> Result<GateTime> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo {
        return Err(Error::EmptyWindow { lo, hi });
    }
    let at = |tau: f64| {
        let f = model.branch_fidelities(tau);
        GateTime {
            tau,
            fidelities: f,
            joint: f.joint(),
        }
    };
    if hi == lo {
        return Ok(at(lo));
    }
    let n = (((hi - lo) / 0.005).ceil() as usize).max(2000);
    let h = (hi - lo) / n as f64;
    let grid: Vec<f64> = (0..=n).map(|k| lo + k as f64 * h).collect();
    let vals: Vec<f64> = grid.iter().map(|&x| at(x).joint).collect();
    let objective = |x: f64| model.branch_fidelities(x).joint();

    let mut best: Option<GateTime> = None;
    for k in 0..=n {
        let left = if k > 0 { vals[k - 1] } else { f64::NEG_INFINITY };
        let right = if k < n { vals[k + 1] } else { f64::NEG_INFINITY };
        if !(vals[k] >= left && vals[k] > right) || vals[k] <= 0.0 {
            continue;
        }
        let a = grid[k.saturating_sub(1)];
        let b = grid[(k + 1).min(n)];
        let x = golden_max(&objective, a, b);
        let cand = if at(x).joint >= vals[k] { at(x) } else { at(grid[k]) };
        if cand.joint >= threshold {
            return Ok(cand);
        }
        if best.is_none_or(|b| cand.joint > b.joint) {
            best = Some(cand);
        }
    }
    Ok(best.unwrap_or_else(|| at(lo)))
}
