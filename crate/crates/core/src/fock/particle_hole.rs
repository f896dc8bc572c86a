//! Particle-hole operators in the frame where the Hartree-Fock state is the
//! Fock vacuum.
//!
//! The Fock space is built over the HF orbitals, occupied ones first. In this
//! frame `h*_k = a*_k` for `k ∈ I(h)` and `ℓ*_k = a*_k` for `k ∈ I(ℓ)`, and the
//! transformed field is `c*_k ↦ h*_k + ℓ_k`. Position operators follow from
//! `c*_{xσ} = Σ_k conj f_k(xσ) c*_k`:
//!
//! * `h*_{xσ} = Σ_{k∈I(h)} conj f_k(xσ) a*_k`
//! * `ℓ*_{xσ} = Σ_{k∈I(ℓ)} f_k(xσ) a*_k`
//!
//! so that `c*_{xσ} ↦ h*_{xσ} + ℓ_{xσ}`, `{h_{xσ}, h*_{yτ}} = P⊥(xσ, yτ)` and
//! `{ℓ_{xσ}, ℓ*_{yτ}} = conj P(xσ, yτ)`.

use num_complex::Complex64;

use super::ladder::{weighted_number, LadderSum};
use super::space::{FockSpace, ModeOrder};
use super::sparse::SparseOperator;
use crate::error::{Error, Result};
use crate::hartree_fock::HartreeFockSolution;

#[derive(Debug, Clone)]
pub struct ParticleHoleFrame {
    space: FockSpace,
    occupied: usize,
    h_create: Vec<LadderSum>,
    l_create: Vec<LadderSum>,
}

/// Builds the position-space `h*_{xσ}` and `ℓ*_{xσ}` (indexed `2x + s`).
pub fn particle_hole_ops(space: &FockSpace, hf: &HartreeFockSolution) -> Result<ParticleHoleFrame> {
    if space.order() != ModeOrder::Orbital || space.modes() != hf.num_modes() {
        return Err(Error::ModeOrder(format!(
            "expected {} orbital-ordered modes, got {} ({:?})",
            hf.num_modes(),
            space.modes(),
            space.order()
        )));
    }
    let m = hf.num_modes();
    let occ = hf.num_sites();
    let mut h_create = Vec::with_capacity(m);
    let mut l_create = Vec::with_capacity(m);
    for p in 0..m {
        let row = hf.orbitals.row(p);
        let h: Vec<Complex64> = (0..m)
            .map(|k| if k >= occ { row[k].conj() } else { Complex64::new(0.0, 0.0) })
            .collect();
        let l: Vec<Complex64> = (0..m)
            .map(|k| if k < occ { row[k] } else { Complex64::new(0.0, 0.0) })
            .collect();
        h_create.push(LadderSum::creator(&h));
        l_create.push(LadderSum::creator(&l));
    }
    Ok(ParticleHoleFrame {
        space: *space,
        occupied: occ,
        h_create,
        l_create,
    })
}

impl ParticleHoleFrame {
    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    /// `|I(ℓ)| = |Λ|`.
    pub fn occupied(&self) -> usize {
        self.occupied
    }

    /// `h*_{xσ}` for position index `p = 2x + s`.
    pub fn h_star(&self, p: usize) -> &LadderSum {
        &self.h_create[p]
    }

    pub fn h(&self, p: usize) -> LadderSum {
        self.h_create[p].adjoint()
    }

    pub fn l_star(&self, p: usize) -> &LadderSum {
        &self.l_create[p]
    }

    pub fn l(&self, p: usize) -> LadderSum {
        self.l_create[p].adjoint()
    }

    /// Image of `c*_{xσ}` under the particle-hole map, `h*_{xσ} + ℓ_{xσ}`.
    /// The two pieces act on disjoint modes.
    pub fn transformed_creator(&self, p: usize) -> (LadderSum, LadderSum) {
        (self.h_create[p].clone(), self.l(p))
    }

    /// `h*_k` for `k ∈ I(h)` and `ℓ*_k` for `k ∈ I(ℓ)` are both `a*_k`; this
    /// reports which family orbital `k` belongs to.
    pub fn is_l_mode(&self, k: usize) -> bool {
        k < self.occupied
    }

    pub fn number_h(&self) -> SparseOperator {
        let w: Vec<f64> = (0..self.space.modes()).map(|k| (k >= self.occupied) as u8 as f64).collect();
        weighted_number(&self.space, &w)
    }

    pub fn number_l(&self) -> SparseOperator {
        let w: Vec<f64> = (0..self.space.modes()).map(|k| (k < self.occupied) as u8 as f64).collect();
        weighted_number(&self.space, &w)
    }

    pub fn number(&self) -> SparseOperator {
        weighted_number(&self.space, &vec![1.0; self.space.modes()])
    }

    /// Bit mask of the ℓ modes.
    pub fn l_mask(&self) -> usize {
        (1 << self.occupied) - 1
    }

    /// `(#h, #ℓ)` occupation of basis word `w`.
    pub fn counts(&self, w: usize) -> (u32, u32) {
        let l = (w & self.l_mask()).count_ones();
        (w.count_ones() - l, l)
    }
}
