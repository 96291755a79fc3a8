//! Effective three-site t-J model obtained by eliminating double occupancy
//! from the S_z = 0 sector, with its closed-form eigensystem, the analytic
//! gate overlap and gate-time arithmetic.
//!
//! The model space is [`Basis::singly_occupied`]:
//! `A↑C↓, A↓C↑, C↑B↓, C↓B↑, A↑B↓, A↓B↑`.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Basis, BasisKind};
use crate::hubbard::HamiltonianMatrix;
use crate::linalg::{c, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub t: f64,
    /// Exchange `J = t²/U`.
    pub j: f64,
}

impl EffectiveParams {
    pub fn new(t: f64, j: f64) -> Self {
        EffectiveParams { t, j }
    }

    pub fn from_hubbard(t: f64, u: f64) -> Result<Self> {
        if !u.is_finite() || u <= 0.0 {
            return Err(Error::InvalidParams(format!("U must be positive, got {u}")));
        }
        Ok(EffectiveParams { t, j: t * t / u })
    }
}

/// The 6×6 t-J Hamiltonian in the singly-occupied basis.
pub fn effective_hamiltonian(p: &EffectiveParams) -> HamiltonianMatrix {
    let (t, j) = (p.t, p.j);
    #[rustfmt::skip]
    let rows = [
        -2.0 * j,  2.0 * j,       -j,        j,   t, 0.0,
         2.0 * j, -2.0 * j,        j,       -j, 0.0,   t,
              -j,        j, -2.0 * j,  2.0 * j,   t, 0.0,
               j,       -j,  2.0 * j, -2.0 * j, 0.0,   t,
               t,      0.0,        t,      0.0, 0.0, 0.0,
             0.0,        t,      0.0,        t, 0.0, 0.0,
    ];
    let m = CMat::from_row_iterator(6, 6, rows.into_iter().map(c));
    HamiltonianMatrix::new(Basis::singly_occupied(), m).expect("6x6 on six states")
}

/// Leading-order elimination `H_PP - H_PQ H_QQ⁻¹ H_QP` of the three
/// doubly-occupied states from an S_z = 0 Hubbard matrix.
pub fn eliminate_double_occupancy(h9: &HamiltonianMatrix) -> Result<HamiltonianMatrix> {
    if h9.basis().kind() != BasisKind::Sector(crate::fock::Sz::Zero) {
        return Err(Error::BasisMismatch(
            "double-occupancy elimination needs the S_z = 0 sector basis".into(),
        ));
    }
    let m = h9.matrix();
    let hpp = m.view((0, 0), (6, 6)).into_owned();
    let hpq = m.view((0, 6), (6, 3)).into_owned();
    let hqp = m.view((6, 0), (3, 6)).into_owned();
    let hqq = m.view((6, 6), (3, 3)).into_owned();
    let scale = hqq.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lu = hqq.lu();
    let singular = lu.determinant().norm() <= 1e-300 || scale == 0.0;
    let inv = match lu.try_inverse() {
        Some(inv) if !singular => inv,
        _ => return Err(Error::SingularBlock),
    };
    let eff = hpp - hpq * inv * hqp;
    HamiltonianMatrix::new(Basis::singly_occupied(), eff)
}

/// Closed-form eigensystem of [`effective_hamiltonian`].
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSpectrum {
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub xi_plus: f64,
    pub xi_minus: f64,
    /// `{0, -2J, -√2 t, √2 t, η+, η-}`, paired with `eigenvectors`.
    pub eigenvalues: [f64; 6],
    pub eigenvectors: [[f64; 6]; 6],
}

impl AnalyticSpectrum {
    pub fn pairs(&self) -> impl Iterator<Item = (f64, &[f64; 6])> {
        self.eigenvalues.iter().copied().zip(self.eigenvectors.iter())
    }
}

pub fn eta(p: &EffectiveParams) -> (f64, f64) {
    let root = (9.0 * p.j * p.j + 2.0 * p.t * p.t).sqrt();
    (-(3.0 * p.j + root), -(3.0 * p.j - root))
}

pub fn analytic_spectrum(p: &EffectiveParams) -> Result<AnalyticSpectrum> {
    if p.t.is_nan() || p.t <= 0.0 || !p.j.is_finite() {
        return Err(Error::InvalidParams(format!("need t > 0, got t = {}", p.t)));
    }
    let t = p.t;
    let (eta_plus, eta_minus) = eta(p);
    let xi = |e: f64| (2.0 + e * e / (t * t)).sqrt();
    let (xi_plus, xi_minus) = (xi(eta_plus), xi(eta_minus));
    let q = 1.0 / (2.0 * SQRT_2);
    let a = eta_plus / (2.0 * t * xi_plus);
    let b = eta_minus / (2.0 * t * xi_minus);
    // Fifth vector: last two signs are (+, -); see the module tests for the
    // residual of the (-, +) variant.
    let eigenvectors = [
        [0.5, 0.5, -0.5, -0.5, 0.0, 0.0],
        [-0.5, 0.5, 0.5, -0.5, 0.0, 0.0],
        [-q, -q, -q, -q, 0.5, 0.5],
        [q, q, q, q, 0.5, 0.5],
        [a, -a, a, -a, 1.0 / xi_plus, -1.0 / xi_plus],
        [b, -b, b, -b, 1.0 / xi_minus, -1.0 / xi_minus],
    ];
    Ok(AnalyticSpectrum {
        eta_plus,
        eta_minus,
        xi_plus,
        xi_minus,
        eigenvalues: [0.0, -2.0 * p.j, -SQRT_2 * t, SQRT_2 * t, eta_plus, eta_minus],
        eigenvectors,
    })
}

/// `‖H v - λ v‖₂` for a real vector.
pub fn eigen_residual(h: &HamiltonianMatrix, lambda: f64, v: &[f64; 6]) -> f64 {
    let m = h.matrix().map(|z| z.re);
    let v = DMatrix::from_column_slice(6, 1, v);
    (&m * &v - &v * lambda).norm()
}

/// Slow exchange envelope of [`analytic_overlap`]; it reaches 1 when
/// `3Jτ ≡ π/2 (mod 2π)`.
pub fn envelope_factor(tau: f64, j: f64) -> f64 {
    let x = 3.0 * j * tau;
    let a = 1.0 + SQRT_2 * (x - FRAC_PI_4).cos();
    let b = 1.0 - SQRT_2 * (x + FRAC_PI_4).cos();
    (a * a + b * b) / 8.0
}

/// Squared overlap of the evolved `|A↑B↓⟩` with the entangled gate target,
/// to leading order in `t/U`.
pub fn analytic_overlap(tau: f64, p: &EffectiveParams) -> f64 {
    let fast = (SQRT_2 * p.t * tau).cos();
    fast * fast * envelope_factor(tau, p.j)
}

/// Revival times `m·2π/(√2 t)` of the `↑↑` state.
pub fn return_times(t: f64, m: u32) -> Result<f64> {
    if t.is_nan() || t <= 0.0 || m == 0 {
        return Err(Error::InvalidParams(format!(
            "return_times needs t > 0 and m >= 1 (t = {t}, m = {m})"
        )));
    }
    Ok(m as f64 * 2.0 * PI / (SQRT_2 * t))
}

/// Times `(4n+1)π/(6J)` at which [`envelope_factor`] equals one.
pub fn target_times(j: f64, n: u32) -> Result<f64> {
    if j.is_nan() || j <= 0.0 {
        return Err(Error::InvalidParams(format!("target_times needs J > 0, got {j}")));
    }
    Ok((4 * n + 1) as f64 * PI / (6.0 * j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Sz;
    use crate::hubbard::{build_hubbard, HubbardParams};
    use crate::linalg::{max_abs_diff, Eigensystem};

    #[test]
    fn closed_form_entries() {
        let h = effective_hamiltonian(&EffectiveParams::new(SQRT_2, 0.1));
        let m = h.matrix();
        assert!((m[(0, 0)].re + 0.2).abs() < 1e-15);
        assert_eq!(m[(0, 4)], c(SQRT_2));
        assert_eq!(m[(4, 5)], c(0.0));
        assert_eq!(h.hermiticity_residual(), 0.0);
        assert!(m.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn zero_exchange_spectrum() {
        let t = 0.8;
        let h = effective_hamiltonian(&EffectiveParams::new(t, 0.0));
        let e = Eigensystem::new(h.matrix());
        let want = [-SQRT_2 * t, -SQRT_2 * t, 0.0, 0.0, SQRT_2 * t, SQRT_2 * t];
        for (got, want) in e.values.iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let s = analytic_spectrum(&EffectiveParams::new(t, 0.0)).unwrap();
        assert!((s.eta_plus + SQRT_2 * t).abs() < 1e-15);
        assert!((s.eta_minus - SQRT_2 * t).abs() < 1e-15);
        assert!((s.xi_plus - 2.0).abs() < 1e-15);
        assert!((s.xi_minus - 2.0).abs() < 1e-15);
    }

    #[test]
    fn eliminate_zero_hopping_is_zero() {
        let h9 = build_hubbard(&HubbardParams::processing(0.0, 20.0), &Basis::sector(Sz::Zero)).unwrap();
        let eff = eliminate_double_occupancy(&h9).unwrap();
        assert!(eff.matrix().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn eliminate_singular_block() {
        let h9 = build_hubbard(&HubbardParams::processing(1.0, 0.0), &Basis::sector(Sz::Zero)).unwrap();
        assert_eq!(eliminate_double_occupancy(&h9), Err(Error::SingularBlock));
        let h3 = build_hubbard(&HubbardParams::processing(1.0, 1.0), &Basis::sector(Sz::Plus)).unwrap();
        assert!(matches!(eliminate_double_occupancy(&h3), Err(Error::BasisMismatch(_))));
    }

    #[test]
    fn elimination_matches_effective_model() {
        let t = SQRT_2;
        for u in [20.0, 1e6] {
            let h9 = build_hubbard(&HubbardParams::processing(t, u), &Basis::sector(Sz::Zero)).unwrap();
            let eff = eliminate_double_occupancy(&h9).unwrap();
            let model = effective_hamiltonian(&EffectiveParams::from_hubbard(t, u).unwrap());
            let err = max_abs_diff(eff.matrix(), model.matrix());
            assert!(err <= 10.0 * t.powi(3) / (u * u), "u = {u}: {err}");
            assert!(err <= 1e-9);
        }
    }

    #[test]
    fn flipped_fifth_vector_fails_residual() {
        let p = EffectiveParams::new(SQRT_2, 0.1);
        let s = analytic_spectrum(&p).unwrap();
        let h = effective_hamiltonian(&p);
        let mut flipped = s.eigenvectors[4];
        flipped[4] = -flipped[4];
        flipped[5] = -flipped[5];
        assert!(eigen_residual(&h, s.eta_plus, &flipped) > 0.5);
        assert!(eigen_residual(&h, s.eta_plus, &s.eigenvectors[4]) < 1e-12);
    }

    #[test]
    fn spectrum_values_at_reference_point() {
        let s = analytic_spectrum(&EffectiveParams::new(SQRT_2, 0.1)).unwrap();
        // η± = -(0.3 ± √(0.09 + 4))
        let root = 4.09f64.sqrt();
        assert!((s.eta_plus + 0.3 + root).abs() < 1e-15);
        assert!((s.eta_minus + 0.3 - root).abs() < 1e-15);
        assert!((s.eta_plus - (-2.322_374_8)).abs() < 1e-6);
        assert!((s.eta_minus - 1.722_374_8).abs() < 1e-6);
        assert!(analytic_spectrum(&EffectiveParams::new(0.0, 0.1)).is_err());
    }

    #[test]
    fn overlap_reference_values() {
        let p = EffectiveParams::new(SQRT_2, 0.1);
        assert!((analytic_overlap(0.0, &p) - 0.5).abs() < 1e-15);
        // cos²(2·2π) = 1, envelope at 3Jτ = 0.6π
        let x = 0.6 * PI;
        let want = ((1.0 + SQRT_2 * (x - FRAC_PI_4).cos()).powi(2)
            + (1.0 - SQRT_2 * (x + FRAC_PI_4).cos()).powi(2))
            / 8.0;
        assert!((analytic_overlap(2.0 * PI, &p) - want).abs() < 1e-12);
        assert!((want - 0.9755).abs() < 1e-4);
    }

    #[test]
    fn overlap_is_unity_when_both_phases_align() {
        // √2 t τ = 2π k and 3Jτ = π/2 at τ = π/(6J): choose J = 1/6, t = 2√2.
        let p = EffectiveParams::new(2.0 * SQRT_2, 1.0 / 6.0);
        let tau = target_times(p.j, 0).unwrap();
        assert!((tau - PI).abs() < 1e-15);
        assert!((analytic_overlap(tau, &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gate_time_arithmetic() {
        let t = SQRT_2;
        assert!((return_times(t, 1).unwrap() - PI).abs() < 1e-14);
        assert!((return_times(t, 2).unwrap() - 2.0 * PI).abs() < 1e-14);
        for m in 1..5 {
            let a = return_times(t, m).unwrap();
            let b = return_times(2.0 * t, m).unwrap();
            assert!((a - 2.0 * b).abs() < 1e-14);
        }
        assert!(return_times(t, 0).is_err());
        assert!(return_times(-1.0, 1).is_err());

        assert!((target_times(0.1, 0).unwrap() - 5.235_987_755_982_988).abs() < 1e-12);
        for n in 0..=10 {
            let tau = target_times(0.1, n).unwrap();
            assert!((envelope_factor(tau, 0.1) - 1.0).abs() < 1e-12);
        }
        // odd terms of the (2n+1) sequence land on envelope zeros
        assert!(envelope_factor(3.0 * PI / 0.6, 0.1).abs() < 1e-12);
        assert!(target_times(0.0, 0).is_err());
    }
}
