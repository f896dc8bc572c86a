use crate::error::{Error, Result};

/// Default mode cap; `2^16` amplitudes per state vector.
pub const DEFAULT_FOCK_CAP: usize = 16;
/// Mode cap that cannot be raised.
pub const HARD_FOCK_CAP: usize = 24;

/// How Fock modes are labelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ModeOrder {
    /// Mode `2x + s` is site `x` with spin `s` (0 up, 1 down).
    Position,
    /// Mode `k` is the `k`-th Hartree-Fock orbital; the first `|Λ|` are
    /// occupied.
    Orbital,
}

/// Occupation-number basis over `modes` fermionic modes.
///
/// Basis state `w` is the bit word with bit `m` set iff mode `m` is
/// occupied, and stands for `c*_{m_1} c*_{m_2} ⋯ Ω` with `m_1 < m_2 < ⋯`.
/// Hence `c*_m |w⟩ = (-1)^{#(bits of w below m)} |w ∪ {m}⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    modes: usize,
    order: ModeOrder,
}

/// Approximate bytes of one complex state vector over `modes` modes.
pub fn state_bytes(modes: usize) -> u128 {
    16u128 << modes.min(100)
}

impl FockSpace {
    pub fn new(modes: usize, order: ModeOrder) -> Result<Self> {
        Self::with_cap(modes, order, DEFAULT_FOCK_CAP)
    }

    pub fn with_cap(modes: usize, order: ModeOrder, cap: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidArgument("a Fock space needs at least one mode".into()));
        }
        if cap > HARD_FOCK_CAP {
            return Err(Error::InvalidArgument(format!(
                "mode cap {cap} exceeds the hard limit {HARD_FOCK_CAP}"
            )));
        }
        if modes > cap {
            return Err(Error::FockCapExceeded {
                modes,
                cap,
                bytes: state_bytes(modes),
            });
        }
        Ok(Self { modes, order })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn order(&self) -> ModeOrder {
        self.order
    }

    pub fn dim(&self) -> usize {
        1 << self.modes
    }

    pub fn vacuum(&self) -> Vec<num_complex::Complex64> {
        let mut v = vec![num_complex::Complex64::new(0.0, 0.0); self.dim()];
        v[0] = num_complex::Complex64::new(1.0, 0.0);
        v
    }
}

/// Applies `c*_m` (`create`) or `c_m` to basis word `w`.
#[inline]
pub fn ladder(w: usize, m: usize, create: bool) -> Option<(usize, f64)> {
    let bit = 1usize << m;
    let occupied = w & bit != 0;
    if occupied == create {
        return None;
    }
    let sign = if (w & (bit - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    Some((w ^ bit, sign))
}

/// Applies a product of ladder operators, written left to right, to `w`.
#[inline]
pub fn ladder_product(w: usize, ops: &[(usize, bool)]) -> Option<(usize, f64)> {
    let mut word = w;
    let mut sign = 1.0;
    for &(m, create) in ops.iter().rev() {
        let (next, s) = ladder(word, m, create)?;
        word = next;
        sign *= s;
    }
    Some((word, sign))
}
