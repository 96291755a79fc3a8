//! Two-electron simulator for a linear triple quantum dot A–C–B with both
//! spins parked on the outer dots: Fock-space Hubbard model, its t-J
//! reduction, exact and piecewise-constant propagation, 1/f charge noise,
//! quasistatic nuclear fields, and gate-level experiments.
//!
//! Energies are in units of 10 µeV and times in units of ħ/(10 µeV); see
//! [`units`].

pub mod calibration;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod gatelab;
pub mod hubbard;
pub mod linalg;
pub mod noise;
pub mod tjmodel;

pub mod units {
    /// ħ / (10 µeV) in nanoseconds.
    pub const NS_PER_TIME_UNIT: f64 = 0.065_821_195_695;

    pub fn to_ns(tau: f64) -> f64 {
        tau * NS_PER_TIME_UNIT
    }
}

pub use error::{Error, Result};
pub use fock::{Basis, BasisKind, Dot, FockState, Spin, SpinOrbital, Sz};
pub use gatelab::{
    find_gate_time, fidelity_trace, run_superposition_check, AnalyticModel, ExperimentConfig,
    FidelityTrace, GateModel, GateSpec, GateTime, Initial, NumericModel, Qubits, Target,
};
pub use hubbard::{HamiltonianMatrix, HubbardParams, NuclearFields};
pub use linalg::{CMat, C64};
pub use noise::ChargeNoise;
pub use tjmodel::EffectiveParams;
