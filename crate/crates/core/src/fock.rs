//! Two-electron Fock space over the six spin-orbitals of the A-C-B chain.
//!
//! Occupations are stored as a 6-bit mask in the canonical orbital order
//! `A↑ < A↓ < C↑ < C↓ < B↑ < B↓`. A mask denotes the normal-ordered ket
//! `d†_{p1} d†_{p2} ... |0⟩` with `p1 < p2 < ...`, so creating or annihilating
//! orbital `p` picks up `(-1)^(occupied orbitals below p)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dot {
    A,
    C,
    B,
}

impl Dot {
    pub const ALL: [Dot; 3] = [Dot::A, Dot::C, Dot::B];

    /// Position in the A, C, B ordering used for per-dot parameter arrays.
    pub fn index(self) -> usize {
        match self {
            Dot::A => 0,
            Dot::C => 1,
            Dot::B => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    /// Twice the spin projection, so that it stays an integer.
    pub fn twice_sz(self) -> i32 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinOrbital {
    pub dot: Dot,
    pub spin: Spin,
}

impl SpinOrbital {
    pub const fn new(dot: Dot, spin: Spin) -> Self {
        Self { dot, spin }
    }

    /// All six orbitals in canonical order.
    pub const ALL: [SpinOrbital; 6] = [
        SpinOrbital::new(Dot::A, Spin::Up),
        SpinOrbital::new(Dot::A, Spin::Down),
        SpinOrbital::new(Dot::C, Spin::Up),
        SpinOrbital::new(Dot::C, Spin::Down),
        SpinOrbital::new(Dot::B, Spin::Up),
        SpinOrbital::new(Dot::B, Spin::Down),
    ];

    pub fn index(self) -> usize {
        let spin = match self.spin {
            Spin::Up => 0,
            Spin::Down => 1,
        };
        2 * self.dot.index() + spin
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for SpinOrbital {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = match self.spin {
            Spin::Up => '↑',
            Spin::Down => '↓',
        };
        write!(f, "{:?}{}", self.dot, arrow)
    }
}

/// Shorthands for the six orbitals.
pub mod orb {
    use super::{Dot, Spin, SpinOrbital};

    pub const A_UP: SpinOrbital = SpinOrbital::new(Dot::A, Spin::Up);
    pub const A_DN: SpinOrbital = SpinOrbital::new(Dot::A, Spin::Down);
    pub const C_UP: SpinOrbital = SpinOrbital::new(Dot::C, Spin::Up);
    pub const C_DN: SpinOrbital = SpinOrbital::new(Dot::C, Spin::Down);
    pub const B_UP: SpinOrbital = SpinOrbital::new(Dot::B, Spin::Up);
    pub const B_DN: SpinOrbital = SpinOrbital::new(Dot::B, Spin::Down);
}

/// Occupation-number state, bit `i` set iff orbital `i` is occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FockState(u8);

impl FockState {
    pub const VACUUM: FockState = FockState(0);

    pub fn from_mask(mask: u8) -> Option<Self> {
        (mask < 64).then_some(FockState(mask))
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_occupied(self, o: SpinOrbital) -> bool {
        self.0 & (1 << o.index()) != 0
    }

    /// Electrons on `dot` (0, 1 or 2).
    pub fn dot_occupancy(self, dot: Dot) -> u32 {
        ((self.0 >> (2 * dot.index())) & 0b11).count_ones()
    }

    /// Twice the total S_z.
    pub fn twice_sz(self) -> i32 {
        self.orbitals().map(|o| o.spin.twice_sz()).sum()
    }

    pub fn orbitals(self) -> impl Iterator<Item = SpinOrbital> {
        SpinOrbital::ALL
            .into_iter()
            .filter(move |o| self.is_occupied(*o))
    }

    /// The ket `d†_first d†_second |0⟩` as (canonical state, sign).
    pub fn pair(first: SpinOrbital, second: SpinOrbital) -> Option<(FockState, f64)> {
        let (s1, sign1) = apply_creation(FockState::VACUUM, second)?;
        let (s2, sign2) = apply_creation(s1, first)?;
        Some((s2, sign1 * sign2))
    }

    fn parity_below(self, o: SpinOrbital) -> f64 {
        let below = self.0 & ((1u8 << o.index()) - 1);
        if below.count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "|0⟩");
        }
        write!(f, "|")?;
        for o in self.orbitals() {
            write!(f, "{o}")?;
        }
        write!(f, "⟩")
    }
}

/// `d†_orb |state⟩`, or `None` if `orb` is already occupied.
pub fn apply_creation(state: FockState, orb: SpinOrbital) -> Option<(FockState, f64)> {
    if state.is_occupied(orb) {
        return None;
    }
    let sign = state.parity_below(orb);
    Some((FockState(state.0 | (1 << orb.index())), sign))
}

/// `d_orb |state⟩`, or `None` if `orb` is empty.
pub fn apply_annihilation(state: FockState, orb: SpinOrbital) -> Option<(FockState, f64)> {
    if !state.is_occupied(orb) {
        return None;
    }
    let sign = state.parity_below(orb);
    Some((FockState(state.0 & !(1 << orb.index())), sign))
}

/// `d†_p d_q |state⟩`.
pub fn apply_hop(state: FockState, p: SpinOrbital, q: SpinOrbital) -> Option<(FockState, f64)> {
    let (mid, s1) = apply_annihilation(state, q)?;
    let (out, s2) = apply_creation(mid, p)?;
    Some((out, s1 * s2))
}

/// Total spin projection of a two-electron sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sz {
    Minus,
    Zero,
    Plus,
}

impl Sz {
    pub const ALL: [Sz; 3] = [Sz::Plus, Sz::Zero, Sz::Minus];

    pub fn value(self) -> i32 {
        match self {
            Sz::Minus => -1,
            Sz::Zero => 0,
            Sz::Plus => 1,
        }
    }
}

impl TryFrom<i32> for Sz {
    type Error = Error;

    fn try_from(v: i32) -> Result<Self> {
        match v {
            -1 => Ok(Sz::Minus),
            0 => Ok(Sz::Zero),
            1 => Ok(Sz::Plus),
            other => Err(Error::InvalidSz(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Sector(Sz),
    /// All 15 two-electron states: S_z = +1, 0, -1 blocks in that order.
    Full,
    /// The six S_z = 0 states without double occupancy (t-J model space).
    SinglyOccupied,
    Custom,
}

/// An ordered list of basis kets. Each ket is `+1 ×` its canonical mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis {
    kind: BasisKind,
    states: Vec<FockState>,
}

fn pairs(list: &[(SpinOrbital, SpinOrbital)]) -> Vec<FockState> {
    list.iter()
        .map(|&(a, b)| {
            let (s, sign) = FockState::pair(a, b).expect("distinct orbitals");
            // every listed ket has its orbitals in canonical order
            debug_assert_eq!(sign, 1.0);
            s
        })
        .collect()
}

impl Basis {
    pub fn sector(sz: Sz) -> Self {
        use orb::*;
        let states = match sz {
            Sz::Plus => pairs(&[(A_UP, C_UP), (A_UP, B_UP), (C_UP, B_UP)]),
            Sz::Minus => pairs(&[(A_DN, C_DN), (A_DN, B_DN), (C_DN, B_DN)]),
            Sz::Zero => pairs(&[
                (A_UP, C_DN),
                (A_DN, C_UP),
                (C_UP, B_DN),
                (C_DN, B_UP),
                (A_UP, B_DN),
                (A_DN, B_UP),
                (A_UP, A_DN),
                (B_UP, B_DN),
                (C_UP, C_DN),
            ]),
        };
        Basis {
            kind: BasisKind::Sector(sz),
            states,
        }
    }

    pub fn full() -> Self {
        let states = Sz::ALL
            .into_iter()
            .flat_map(|sz| Basis::sector(sz).states)
            .collect();
        Basis {
            kind: BasisKind::Full,
            states,
        }
    }

    pub fn singly_occupied() -> Self {
        let mut states = Basis::sector(Sz::Zero).states;
        states.truncate(6);
        Basis {
            kind: BasisKind::SinglyOccupied,
            states,
        }
    }

    /// Arbitrary ordered basis; states must be distinct.
    pub fn custom(states: Vec<FockState>) -> Result<Self> {
        let mut seen = 0u64;
        for s in &states {
            let bit = 1u64 << s.mask();
            if seen & bit != 0 {
                return Err(Error::BasisMismatch(format!("duplicate state {s}")));
            }
            seen |= bit;
        }
        Ok(Basis {
            kind: BasisKind::Custom,
            states,
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: FockState) -> Option<usize> {
        self.states.iter().position(|&x| x == s)
    }

    /// Single S_z label if every state shares it.
    pub fn sz(&self) -> Option<Sz> {
        let first = self.states.first()?.twice_sz();
        if self.states.iter().all(|s| s.twice_sz() == first) {
            Sz::try_from(first / 2).ok()
        } else {
            None
        }
    }
}

/// The basis of one S_z sector, in the fixed published order.
pub fn enumerate_sector(sz: i32) -> Result<Basis> {
    Ok(Basis::sector(Sz::try_from(sz)?))
}
