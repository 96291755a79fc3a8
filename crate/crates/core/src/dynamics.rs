//! Unitary propagation with ħ = 1.
//!
//! Static Hamiltonians are propagated through one eigendecomposition; noisy
//! ones are stepped piecewise-constantly, diagonalizing every step matrix.
//! Matrices here are at most 15×15, so each step is exact in `dt`.

use crate::error::{Error, Result};
use crate::fock::{Basis, FockState};
use crate::hubbard::HamiltonianMatrix;
use crate::linalg::{hermiticity_residual, CMat, CVec, Eigensystem, C64};

/// Step matrices with a larger relative anti-Hermitian part are rejected.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
/// Piecewise propagation aborts once `|‖ψ‖ - 1|` exceeds this.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;
/// Default step in scaled time units.
pub const DEFAULT_DT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: Basis,
    amps: CVec,
}

impl StateVector {
    pub fn new(basis: Basis, amps: CVec) -> Result<Self> {
        if amps.len() != basis.len() {
            return Err(Error::BasisMismatch(format!(
                "{} amplitudes for a {}-state basis",
                amps.len(),
                basis.len()
            )));
        }
        Ok(StateVector { basis, amps })
    }

    /// A single basis ket.
    pub fn basis_state(basis: &Basis, s: FockState) -> Result<Self> {
        let i = basis
            .index_of(s)
            .ok_or_else(|| Error::BasisMismatch(format!("{s} is not in the basis")))?;
        let mut amps = CVec::zeros(basis.len());
        amps[i] = C64::new(1.0, 0.0);
        Ok(StateVector {
            basis: basis.clone(),
            amps,
        })
    }

    /// `Σ a_k |s_k⟩`, normalized. Every `s_k` must be in `basis`.
    pub fn superposition(basis: &Basis, terms: &[(FockState, C64)]) -> Result<Self> {
        let mut amps = CVec::zeros(basis.len());
        for &(s, a) in terms {
            let i = basis
                .index_of(s)
                .ok_or_else(|| Error::BasisMismatch(format!("{s} is not in the basis")))?;
            amps[i] += a;
        }
        let norm = amps.norm();
        if norm == 0.0 {
            return Err(Error::InvalidParams("zero superposition".into()));
        }
        Ok(StateVector {
            basis: basis.clone(),
            amps: amps / C64::new(norm, 0.0),
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn amplitude(&self, s: FockState) -> Option<C64> {
        self.basis.index_of(s).map(|i| self.amps[i])
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch("inner product across bases".into()));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// Re-express in `target`, failing if any amplitude would be lost.
    pub fn embed(&self, target: &Basis) -> Result<StateVector> {
        let mut amps = CVec::zeros(target.len());
        for (s, a) in self.basis.states().iter().zip(self.amps.iter()) {
            match target.index_of(*s) {
                Some(i) => amps[i] = *a,
                None if a.norm() == 0.0 => {}
                None => {
                    return Err(Error::BasisMismatch(format!("{s} has no slot in target basis")))
                }
            }
        }
        Ok(StateVector {
            basis: target.clone(),
            amps,
        })
    }

    /// Total probability on states outside `sub`.
    pub fn weight_outside(&self, sub: &Basis) -> f64 {
        self.basis
            .states()
            .iter()
            .zip(self.amps.iter())
            .filter(|(s, _)| sub.index_of(**s).is_none())
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// `|⟨phi|psi⟩|²`, clamped to [0, 1] against round-off.
pub fn squared_overlap(psi: &StateVector, phi: &StateVector) -> Result<f64> {
    Ok(phi.inner(psi)?.norm_sqr().clamp(0.0, 1.0))
}

fn check_hermitian(m: &CMat) -> Result<()> {
    let residual = hermiticity_residual(m);
    if residual > HERMITIAN_TOLERANCE {
        return Err(Error::NonHermitian { residual });
    }
    Ok(())
}

/// Exact propagator for a time-independent Hamiltonian.
#[derive(Debug, Clone)]
pub struct StaticPropagator {
    basis: Basis,
    eig: Eigensystem,
}

impl StaticPropagator {
    pub fn new(h: &HamiltonianMatrix) -> Result<Self> {
        check_hermitian(h.matrix())?;
        Ok(StaticPropagator {
            basis: h.basis().clone(),
            eig: Eigensystem::new(h.matrix()),
        })
    }

    pub fn eigensystem(&self) -> &Eigensystem {
        &self.eig
    }

    pub fn evolve(&self, psi0: &StateVector, tau: f64) -> Result<StateVector> {
        if psi0.basis != self.basis {
            return Err(Error::BasisMismatch("state and Hamiltonian bases differ".into()));
        }
        Ok(StateVector {
            basis: self.basis.clone(),
            amps: self.eig.propagate(&psi0.amps, tau),
        })
    }
}

/// `ψ(τ) = Σ_k e^{-iλ_k τ} ⟨v_k|ψ0⟩ v_k`.
pub fn evolve_static(h: &HamiltonianMatrix, psi0: &StateVector, tau: f64) -> Result<StateVector> {
    StaticPropagator::new(h)?.evolve(psi0, tau)
}

/// A time grid with one recorded series per observable.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `overlaps[i][k]`: observable `i` at `times[k]`.
    pub overlaps: Vec<Vec<f64>>,
    pub final_state: StateVector,
}

/// What to record at each grid point: a squared overlap with a (possibly
/// time-dependent) reference state.
pub trait Observable {
    fn reference(&self, time: f64) -> StateVector;
}

impl Observable for StateVector {
    fn reference(&self, _time: f64) -> StateVector {
        self.clone()
    }
}

impl<F: Fn(f64) -> StateVector> Observable for F {
    fn reference(&self, time: f64) -> StateVector {
        self(time)
    }
}

/// Step `ψ_{k+1} = exp(-i H_k dt) ψ_k` for `n_steps` steps.
///
/// `provider(k)` returns the matrix for step `k` (acting on `psi0`'s basis).
/// Observables are recorded at every grid point `k·dt`, `k = 0..=n_steps`.
pub fn evolve_piecewise<P>(
    mut provider: P,
    psi0: &StateVector,
    dt: f64,
    n_steps: usize,
    observables: &[&dyn Observable],
) -> Result<Trajectory>
where
    P: FnMut(usize) -> Result<CMat>,
{
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidParams(format!("dt must be positive, got {dt}")));
    }
    let basis = psi0.basis.clone();
    let n = basis.len();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut overlaps = vec![Vec::with_capacity(n_steps + 1); observables.len()];
    let mut psi = psi0.amps.clone();

    let mut record = |k: usize, psi: &CVec, overlaps: &mut Vec<Vec<f64>>| -> Result<()> {
        let time = k as f64 * dt;
        times.push(time);
        for (series, obs) in overlaps.iter_mut().zip(observables) {
            let r = obs.reference(time);
            if r.basis != basis {
                return Err(Error::BasisMismatch("observable basis differs".into()));
            }
            series.push(r.amps.dotc(psi).norm_sqr().clamp(0.0, 1.0));
        }
        Ok(())
    };

    record(0, &psi, &mut overlaps)?;
    let norm0 = psi.norm();
    for k in 0..n_steps {
        let h = provider(k)?;
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::BasisMismatch(format!(
                "step {k}: {}x{} matrix for a {n}-state basis",
                h.nrows(),
                h.ncols()
            )));
        }
        check_hermitian(&h)?;
        psi = Eigensystem::new(&h).propagate(&psi, dt);
        let drift = (psi.norm() - norm0).abs();
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift { step: k, drift });
        }
        record(k + 1, &psi, &mut overlaps)?;
    }
    Ok(Trajectory {
        times,
        overlaps,
        final_state: StateVector { basis, amps: psi },
    })
}
