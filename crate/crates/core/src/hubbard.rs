//! Mott-Hubbard Hamiltonian of the three-dot chain and the quasistatic
//! Zeeman term, as dense matrices over a [`Basis`].
//!
//! Energies are in scaled units (10 µeV ≡ 1). Per-dot arrays are indexed
//! A, C, B (see [`Dot::index`]).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{apply_hop, Basis, BasisKind, Dot, FockState, Spin, SpinOrbital, Sz};
use crate::linalg::{c, hermiticity_residual, CMat, C64};

/// Tolerance on S_z off-block couplings accepted by [`sector_block`].
pub const BLOCK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HubbardParams {
    /// Onsite energies `E_A, E_C, E_B`.
    pub e: [f64; 3],
    pub t_ac: f64,
    pub t_cb: f64,
    /// Coulomb repulsion `U_A, U_C, U_B`.
    pub u: [f64; 3],
}

impl HubbardParams {
    /// Processing mode: all onsite energies equal (zero), symmetric tunneling,
    /// one repulsion value for every dot.
    pub fn processing(t: f64, u: f64) -> Self {
        HubbardParams {
            e: [0.0; 3],
            t_ac: t,
            t_cb: t,
            u: [u; 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = self
            .e
            .iter()
            .chain(self.u.iter())
            .chain([&self.t_ac, &self.t_cb]);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite Hubbard parameter".into()));
        }
        if self.u.iter().any(|&u| u < 0.0) {
            return Err(Error::InvalidParams("U must be non-negative".into()));
        }
        Ok(())
    }
}

/// Frozen nuclear (Overhauser) field per dot, folded into energy units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NuclearFields {
    /// `[B_A, B_C, B_B]`, each `[x, y, z]`.
    pub b: [[f64; 3]; 3],
}

impl NuclearFields {
    pub fn on(dot: Dot, field: [f64; 3]) -> Self {
        let mut b = [[0.0; 3]; 3];
        b[dot.index()] = field;
        NuclearFields { b }
    }

    pub fn is_finite(&self) -> bool {
        self.b.iter().flatten().all(|x| x.is_finite())
    }
}

/// A Hermitian matrix together with the basis its rows refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    basis: Basis,
    m: CMat,
}

impl HamiltonianMatrix {
    pub fn new(basis: Basis, m: CMat) -> Result<Self> {
        if m.nrows() != basis.len() || m.ncols() != basis.len() {
            return Err(Error::BasisMismatch(format!(
                "{}x{} matrix for a {}-state basis",
                m.nrows(),
                m.ncols(),
                basis.len()
            )));
        }
        Ok(HamiltonianMatrix { basis, m })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.m)
    }

    /// `⟨x|H|y⟩` for two basis kets.
    pub fn element(&self, x: FockState, y: FockState) -> Option<C64> {
        Some(self.m[(self.basis.index_of(x)?, self.basis.index_of(y)?)])
    }

    pub fn try_add(&self, other: &HamiltonianMatrix) -> Result<HamiltonianMatrix> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch("cannot add matrices on different bases".into()));
        }
        Ok(HamiltonianMatrix {
            basis: self.basis.clone(),
            m: &self.m + &other.m,
        })
    }
}

/// Matrix of `Σ coeff · d†_p d_q` on `basis`.
///
/// Fails with [`Error::BasisNotClosed`] if the operator leaves the basis.
pub fn one_body(basis: &Basis, terms: &[(SpinOrbital, SpinOrbital, C64)]) -> Result<CMat> {
    let n = basis.len();
    let mut m = CMat::zeros(n, n);
    for (col, &y) in basis.states().iter().enumerate() {
        let mut image: BTreeMap<FockState, C64> = BTreeMap::new();
        for &(p, q, coeff) in terms {
            if let Some((x, sign)) = apply_hop(y, p, q) {
                *image.entry(x).or_default() += coeff * sign;
            }
        }
        for (x, amp) in image {
            match basis.index_of(x) {
                Some(row) => m[(row, col)] += amp,
                None if amp.norm() == 0.0 => {}
                None => return Err(Error::BasisNotClosed { state: x.mask() }),
            }
        }
    }
    Ok(m)
}

fn diagonal(basis: &Basis, f: impl Fn(FockState) -> f64) -> CMat {
    let d: Vec<C64> = basis.states().iter().map(|&s| c(f(s))).collect();
    CMat::from_diagonal(&nalgebra::DVector::from_vec(d))
}

fn hopping_terms(a: Dot, b: Dot) -> Vec<(SpinOrbital, SpinOrbital, C64)> {
    [Spin::Up, Spin::Down]
        .into_iter()
        .flat_map(|s| {
            let oa = SpinOrbital::new(a, s);
            let ob = SpinOrbital::new(b, s);
            [(oa, ob, c(1.0)), (ob, oa, c(1.0))]
        })
        .collect()
}

/// The parameter-independent pieces of the Hubbard Hamiltonian on one basis.
///
/// Assembling from these is a handful of matrix additions, which is what the
/// noisy propagation loop does at every step.
#[derive(Debug, Clone)]
pub struct HubbardTerms {
    basis: Basis,
    number: [CMat; 3],
    double: [CMat; 3],
    hop_ac: CMat,
    hop_cb: CMat,
}

impl HubbardTerms {
    pub fn new(basis: &Basis) -> Result<Self> {
        let number = Dot::ALL.map(|d| diagonal(basis, |s| s.dot_occupancy(d) as f64));
        let double = Dot::ALL.map(|d| {
            diagonal(basis, |s| {
                let n = s.dot_occupancy(d) as f64;
                0.5 * n * (n - 1.0)
            })
        });
        Ok(HubbardTerms {
            basis: basis.clone(),
            number,
            double,
            hop_ac: one_body(basis, &hopping_terms(Dot::A, Dot::C))?,
            hop_cb: one_body(basis, &hopping_terms(Dot::C, Dot::B))?,
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Raw matrix for `p`, without validation.
    pub fn assemble_matrix(&self, p: &HubbardParams) -> CMat {
        let mut m = &self.hop_ac * c(p.t_ac) + &self.hop_cb * c(p.t_cb);
        for i in 0..3 {
            m += &self.number[i] * c(p.e[i]);
            m += &self.double[i] * c(p.u[i]);
        }
        m
    }

    pub fn assemble(&self, p: &HubbardParams) -> Result<HamiltonianMatrix> {
        p.validate()?;
        HamiltonianMatrix::new(self.basis.clone(), self.assemble_matrix(p))
    }
}

/// `Σ E_i n_i + Σ t (d†d + h.c.) + ½ Σ U_i n_i (n_i - 1)` on `basis`.
///
/// Hopping connects A-C and C-B only; there is no inter-dot Coulomb term.
pub fn build_hubbard(p: &HubbardParams, basis: &Basis) -> Result<HamiltonianMatrix> {
    HubbardTerms::new(basis)?.assemble(p)
}

/// `Σ_i Σ_{σσ'} (B_i·σ/2)_{σσ'} d†_{iσ} d_{iσ'}` on the full basis.
pub fn build_zeeman(f: &NuclearFields, basis: &Basis) -> Result<HamiltonianMatrix> {
    if basis.kind() != BasisKind::Full {
        return Err(Error::NotFullBasis);
    }
    if !f.is_finite() {
        return Err(Error::InvalidParams("non-finite nuclear field".into()));
    }
    let mut terms = Vec::with_capacity(12);
    for dot in Dot::ALL {
        let [bx, by, bz] = f.b[dot.index()];
        let up = SpinOrbital::new(dot, Spin::Up);
        let dn = SpinOrbital::new(dot, Spin::Down);
        terms.push((up, up, c(0.5 * bz)));
        terms.push((dn, dn, c(-0.5 * bz)));
        terms.push((up, dn, C64::new(0.5 * bx, -0.5 * by)));
        terms.push((dn, up, C64::new(0.5 * bx, 0.5 * by)));
    }
    HamiltonianMatrix::new(basis.clone(), one_body(basis, &terms)?)
}

/// Total `S_z` and `S²` on a basis closed under spin flips (the full basis).
pub fn total_spin_matrices(basis: &Basis) -> Result<(CMat, CMat)> {
    let sz_terms: Vec<_> = SpinOrbital::ALL
        .iter()
        .map(|&o| (o, o, c(0.5 * o.spin.twice_sz() as f64)))
        .collect();
    let raise: Vec<_> = Dot::ALL
        .iter()
        .map(|&d| {
            (
                SpinOrbital::new(d, Spin::Up),
                SpinOrbital::new(d, Spin::Down),
                c(1.0),
            )
        })
        .collect();
    let sz = one_body(basis, &sz_terms)?;
    let sp = one_body(basis, &raise)?;
    let sm = sp.adjoint();
    let s2 = &sz * &sz + (&sp * &sm + &sm * &sp) * c(0.5);
    Ok((sz, s2))
}

/// The sub-matrix of a full-basis operator on one S_z sector.
pub fn sector_block(h: &HamiltonianMatrix, sz: Sz) -> Result<HamiltonianMatrix> {
    if h.basis().kind() != BasisKind::Full {
        return Err(Error::BasisMismatch("sector_block needs a full-basis matrix".into()));
    }
    let sector = Basis::sector(sz);
    let rows: Vec<usize> = sector
        .states()
        .iter()
        .map(|&s| h.basis().index_of(s).expect("full basis contains every sector"))
        .collect();
    let m = h.matrix();
    let mut residual = 0.0f64;
    for &r in &rows {
        for k in 0..h.dim() {
            if !rows.contains(&k) {
                residual = residual.max(m[(r, k)].norm()).max(m[(k, r)].norm());
            }
        }
    }
    if residual > BLOCK_TOLERANCE {
        return Err(Error::NotBlockDiagonal { residual });
    }
    let block = CMat::from_fn(rows.len(), rows.len(), |i, j| m[(rows[i], rows[j])]);
    HamiltonianMatrix::new(sector, block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::orb::*;
    use crate::linalg::max_abs_diff;

    fn ket(a: SpinOrbital, b: SpinOrbital) -> FockState {
        FockState::pair(a, b).unwrap().0
    }

    #[test]
    fn no_hopping_gives_diagonal_energies() {
        let p = HubbardParams {
            e: [0.3, -1.0, 0.7],
            t_ac: 0.0,
            t_cb: 0.0,
            u: [5.0, 7.0, 11.0],
        };
        let h = build_hubbard(&p, &Basis::full()).unwrap();
        for (i, s) in h.basis().states().iter().enumerate() {
            let mut expected = 0.0;
            for d in Dot::ALL {
                let n = s.dot_occupancy(d) as f64;
                expected += p.e[d.index()] * n;
                if n == 2.0 {
                    expected += p.u[d.index()];
                }
            }
            for j in 0..15 {
                let want = if i == j { expected } else { 0.0 };
                assert_eq!(h.matrix()[(i, j)], c(want));
            }
        }
    }

    #[test]
    fn quoted_sign_difference() {
        let t = 0.7;
        let h = build_hubbard(&HubbardParams::processing(t, 20.0), &Basis::sector(Sz::Zero)).unwrap();
        let aa = ket(A_UP, A_DN);
        assert_eq!(h.element(ket(A_UP, C_DN), aa), Some(c(t)));
        assert_eq!(h.element(ket(A_DN, C_UP), aa), Some(c(-t)));
    }

    #[test]
    fn zeeman_examples() {
        let full = Basis::full();
        let zero = build_zeeman(&NuclearFields::default(), &full).unwrap();
        assert!(zero.matrix().iter().all(|z| *z == c(0.0)));

        let b = 0.3;
        let hz = build_zeeman(&NuclearFields::on(Dot::A, [0.0, 0.0, b]), &full).unwrap();
        for (i, s) in full.states().iter().enumerate() {
            let mut want = 0.0;
            if s.is_occupied(A_UP) {
                want += b / 2.0;
            }
            if s.is_occupied(A_DN) {
                want -= b / 2.0;
            }
            assert_eq!(hz.matrix()[(i, i)], c(want));
        }

        let hx = build_zeeman(&NuclearFields::on(Dot::A, [b, 0.0, 0.0]), &full).unwrap();
        // d†_{A↓} d_{A↑} |A↑B↓⟩ = +|A↓B↓⟩ (neither operator passes an occupied orbital)
        assert_eq!(hx.element(ket(A_DN, B_DN), ket(A_UP, B_DN)), Some(c(b / 2.0)));
        assert_eq!(hx.element(ket(A_UP, B_DN), ket(A_DN, B_DN)), Some(c(b / 2.0)));
        assert!(hx.hermiticity_residual() < 1e-15);

        let hy = build_zeeman(&NuclearFields::on(Dot::B, [0.0, b, 0.0]), &full).unwrap();
        assert_eq!(
            hy.element(ket(A_UP, B_DN), ket(A_UP, B_UP)),
            Some(C64::new(0.0, b / 2.0))
        );
        assert!(hy.hermiticity_residual() < 1e-15);
    }

    #[test]
    fn zeeman_rejects_sector_basis() {
        let f = NuclearFields::on(Dot::C, [0.1, 0.0, 0.0]);
        assert_eq!(
            build_zeeman(&f, &Basis::sector(Sz::Zero)),
            Err(Error::NotFullBasis)
        );
    }

    #[test]
    fn sector_block_of_zero_is_zero() {
        let h = HamiltonianMatrix::new(Basis::full(), CMat::zeros(15, 15)).unwrap();
        for sz in Sz::ALL {
            let b = sector_block(&h, sz).unwrap();
            assert!(b.matrix().iter().all(|z| *z == c(0.0)));
        }
    }

    #[test]
    fn sector_block_rejects_transverse_field() {
        let h = build_zeeman(&NuclearFields::on(Dot::A, [0.1, 0.0, 0.0]), &Basis::full()).unwrap();
        assert!(matches!(
            sector_block(&h, Sz::Zero),
            Err(Error::NotBlockDiagonal { .. })
        ));
        let sector = build_hubbard(&HubbardParams::processing(1.0, 5.0), &Basis::sector(Sz::Plus)).unwrap();
        assert!(matches!(sector_block(&sector, Sz::Plus), Err(Error::BasisMismatch(_))));
    }

    #[test]
    fn minus_block_equals_plus_block() {
        let p = HubbardParams {
            e: [0.1, -0.4, 0.25],
            t_ac: 1.1,
            t_cb: 0.9,
            u: [20.0, 18.0, 22.0],
        };
        let full = build_hubbard(&p, &Basis::full()).unwrap();
        let plus = sector_block(&full, Sz::Plus).unwrap();
        let minus = sector_block(&full, Sz::Minus).unwrap();
        assert_eq!(plus.matrix(), minus.matrix());
    }

    #[test]
    fn sector_build_matches_full_block() {
        let p = HubbardParams::processing(2f64.sqrt(), 20.0);
        let full = build_hubbard(&p, &Basis::full()).unwrap();
        for sz in Sz::ALL {
            let direct = build_hubbard(&p, &Basis::sector(sz)).unwrap();
            let block = sector_block(&full, sz).unwrap();
            assert_eq!(max_abs_diff(direct.matrix(), block.matrix()), 0.0);
        }
    }

    #[test]
    fn open_basis_is_rejected() {
        let basis = Basis::custom(vec![ket(A_UP, B_UP)]).unwrap();
        let err = build_hubbard(&HubbardParams::processing(1.0, 1.0), &basis).unwrap_err();
        assert!(matches!(err, Error::BasisNotClosed { .. }));
    }

    #[test]
    fn invalid_params() {
        let mut p = HubbardParams::processing(1.0, 1.0);
        p.u[1] = -1.0;
        assert!(build_hubbard(&p, &Basis::full()).is_err());
        p.u[1] = f64::NAN;
        assert!(build_hubbard(&p, &Basis::full()).is_err());
    }
}
