//! The Wick-ordered quartic operators `Q₁ … Q₇`, `T_HF` and the number
//! operators, assembled either from the orbital matrix elements
//! `V_{j,k;m,n}` or from products of the position-space `h`/`ℓ` operators.
//! The two paths share nothing below the ladder layer, so comparing them is a
//! real check.

use num_complex::Complex64;

use super::ladder::{weighted_number, LadderSum};
use super::particle_hole::ParticleHoleFrame;
use super::space::{ladder_product, FockSpace, ModeOrder};
use super::sparse::SparseOperator;
use crate::error::{Error, Result};
use crate::hartree_fock::{slater_energy_density, HartreeFockSolution};
use crate::lattice::TorusLattice;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Mode-count limit of the position-form sparse assembly.
pub const POSITION_FORM_MAX_MODES: usize = 12;

/// Spin-independent pair potential `v_{x-y}`, stored by the site index of
/// `x - y`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPotential {
    pub values: Vec<f64>,
}

impl PairPotential {
    /// On-site repulsion `v_z = δ_{z,0}`.
    pub fn hubbard(lat: &TorusLattice) -> Self {
        let mut values = vec![0.0; lat.num_sites()];
        values[0] = 1.0;
        Self { values }
    }

    pub fn at(&self, lat: &TorusLattice, x: usize, y: usize) -> f64 {
        self.values[lat.difference(x, y)]
    }

    /// `‖v * ρ‖_∞ = max_x |Σ_y v_{x-y} ρ(y)|`.
    pub fn convolve_sup(&self, lat: &TorusLattice, rho: &[f64]) -> f64 {
        (0..lat.num_sites())
            .map(|x| {
                (0..lat.num_sites())
                    .map(|y| self.at(lat, x, y) * rho[y])
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `V_{j,k;m,n} = ⟨f_j ⊗ f_k| v (f_m ⊗ f_n)⟩` over the HF orbitals; entries
/// with modulus below `1e-14` are set to zero.
#[derive(Debug, Clone)]
pub struct VTensor {
    modes: usize,
    data: Vec<Complex64>,
}

impl VTensor {
    pub fn compute(lat: &TorusLattice, hf: &HartreeFockSolution, v: &PairPotential) -> Self {
        let m = hf.num_modes();
        let n = lat.num_sites();
        // a[(j, k)][x] = Σ_σ conj f_j(xσ) f_k(xσ)
        let f = &hf.orbitals;
        let mut a = vec![ZERO; m * m * n];
        for j in 0..m {
            for k in 0..m {
                for x in 0..n {
                    a[(j * m + k) * n + x] = f[(2 * x, j)].conj() * f[(2 * x, k)]
                        + f[(2 * x + 1, j)].conj() * f[(2 * x + 1, k)];
                }
            }
        }
        // b[(k, n)][x] = Σ_y v_{x-y} a[(k, n)][y]
        let mut b = vec![ZERO; m * m * n];
        for pair in 0..m * m {
            for x in 0..n {
                let mut acc = ZERO;
                for y in 0..n {
                    let vxy = v.at(lat, x, y);
                    if vxy != 0.0 {
                        acc += a[pair * n + y] * vxy;
                    }
                }
                b[pair * n + x] = acc;
            }
        }
        let mut data = vec![ZERO; m * m * m * m];
        for j in 0..m {
            for k in 0..m {
                for mm in 0..m {
                    let ajm = &a[(j * m + mm) * n..(j * m + mm + 1) * n];
                    for nn in 0..m {
                        let bkn = &b[(k * m + nn) * n..(k * m + nn + 1) * n];
                        let val: Complex64 = ajm.iter().zip(bkn).map(|(p, q)| p * q).sum();
                        if val.norm() >= 1e-14 {
                            data[((j * m + k) * m + mm) * m + nn] = val;
                        }
                    }
                }
            }
        }
        Self { modes: m, data }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn get(&self, j: usize, k: usize, m: usize, n: usize) -> Complex64 {
        let d = self.modes;
        self.data[((j * d + k) * d + m) * d + n]
    }

    /// Nonzero entries as `([j, k, m, n], V)`.
    pub fn nonzero(&self) -> Vec<([usize; 4], Complex64)> {
        let d = self.modes;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != ZERO)
            .map(|(i, &v)| ([i / (d * d * d), i / (d * d) % d, i / d % d, i % d], v))
            .collect()
    }

    /// The two-body matrix `(jk), (mn)` as a dense Hermitian matrix.
    pub fn two_body_matrix(&self) -> nalgebra::DMatrix<Complex64> {
        let d = self.modes;
        nalgebra::DMatrix::from_fn(d * d, d * d, |r, c| self.get(r / d, r % d, c / d, c % d))
    }

    /// Operator norm `‖v‖` of the two-body matrix.
    pub fn operator_norm(&self) -> f64 {
        self.two_body_matrix()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |a, e| a.max(e.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    H,
    L,
}

/// One factor of an orbital monomial: index variable (0 = j, 1 = k, 2 = m,
/// 3 = n), family and whether it creates.
type OrbitalSlot = (usize, Family, bool);

const J: usize = 0;
const K: usize = 1;
const M: usize = 2;
const N: usize = 3;

use Family::{H, L};

/// `Σ V_{j,k;m,n} (slot₁ slot₂ slot₃ slot₄)` for `Q₁ … Q₇`.
const ORBITAL_TEMPLATES: [[OrbitalSlot; 4]; 7] = [
    // h*_k h*_j h_m h_n
    [(K, H, true), (J, H, true), (M, H, false), (N, H, false)],
    // ℓ*_m ℓ*_n ℓ_k ℓ_j
    [(M, L, true), (N, L, true), (K, L, false), (J, L, false)],
    // h*_k ℓ*_m ℓ_j h_n
    [(K, H, true), (M, L, true), (J, L, false), (N, H, false)],
    // h*_j ℓ*_m ℓ_k h_n
    [(J, H, true), (M, L, true), (K, L, false), (N, H, false)],
    // h*_k ℓ*_m ℓ*_n ℓ_j
    [(K, H, true), (M, L, true), (N, L, true), (J, L, false)],
    // h*_j h_m ℓ_k h_n
    [(J, H, true), (M, H, false), (K, L, false), (N, H, false)],
    // h*_k h*_j ℓ*_m ℓ*_n
    [(K, H, true), (J, H, true), (M, L, true), (N, L, true)],
];

/// One factor of a position monomial: point (0 = (x,σ), 1 = (y,τ)), family,
/// creation flag.
type PositionSlot = (usize, Family, bool);

const X: usize = 0;
const Y: usize = 1;

/// `Σ_{x,y,σ,τ} v_{x-y} (slot₁ slot₂ slot₃ slot₄)` for `Q₁ … Q₇`.
const POSITION_TEMPLATES: [[PositionSlot; 4]; 7] = [
    [(X, H, true), (Y, H, true), (Y, H, false), (X, H, false)],
    [(Y, L, true), (X, L, true), (X, L, false), (Y, L, false)],
    [(X, H, true), (Y, L, true), (Y, L, false), (X, H, false)],
    [(Y, H, true), (Y, L, true), (X, L, false), (X, H, false)],
    [(X, H, true), (Y, L, true), (X, L, true), (Y, L, false)],
    [(Y, H, true), (Y, H, false), (X, L, false), (X, H, false)],
    [(X, H, true), (Y, H, true), (Y, L, true), (X, L, true)],
];

/// Number-grading `s_ν` with `[N, Q_ν] = s_ν Q_ν`.
pub const SECTOR_SHIFTS: [i32; 7] = [0, 0, 0, 0, 2, -2, 4];

/// Coefficients `c_ν` in `Q = Re[Σ c_ν Q_ν]`.
pub const Q_COEFFICIENTS: [f64; 7] = [1.0, 1.0, -2.0, 2.0, 4.0, 4.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BasisForm {
    Orbital,
    Position,
}

fn check_space(space: &FockSpace, hf: &HartreeFockSolution) -> Result<()> {
    if space.order() != ModeOrder::Orbital || space.modes() != hf.num_modes() {
        return Err(Error::ModeOrder(format!(
            "quartics need {} orbital-ordered modes, got {} ({:?})",
            hf.num_modes(),
            space.modes(),
            space.order()
        )));
    }
    Ok(())
}

/// `Q_ν` (1-based) from the orbital matrix elements.
pub fn orbital_quartic(
    space: &FockSpace,
    hf: &HartreeFockSolution,
    v: &VTensor,
    nu: usize,
) -> Result<SparseOperator> {
    check_space(space, hf)?;
    if !(1..=7).contains(&nu) {
        return Err(Error::InvalidArgument(format!("no quartic Q{nu}")));
    }
    if v.modes() != space.modes() {
        return Err(Error::Dimension("V tensor and Fock space disagree on the mode count".into()));
    }
    let occ = hf.num_sites();
    let template = ORBITAL_TEMPLATES[nu - 1];
    let in_family = |k: usize, f: Family| match f {
        L => k < occ,
        H => k >= occ,
    };
    let terms: Vec<([(usize, bool); 4], Complex64)> = v
        .nonzero()
        .into_iter()
        .filter(|(idx, _)| template.iter().all(|&(var, fam, _)| in_family(idx[var], fam)))
        .map(|(idx, val)| {
            let ops = [0, 1, 2, 3].map(|s| (idx[template[s].0], template[s].2));
            (ops, val)
        })
        .collect();
    Ok(SparseOperator::from_columns(space.dim(), |w, out| {
        for (ops, val) in &terms {
            if let Some((w2, sign)) = ladder_product(w, ops) {
                out.push((w2 as u32, val * sign));
            }
        }
    }))
}

/// `Q_ν` (1-based) as a sum of products of position-space operators.
pub fn position_quartic(
    frame: &ParticleHoleFrame,
    lat: &TorusLattice,
    v: &PairPotential,
    nu: usize,
) -> Result<SparseOperator> {
    if !(1..=7).contains(&nu) {
        return Err(Error::InvalidArgument(format!("no quartic Q{nu}")));
    }
    let space = frame.space();
    if space.modes() > POSITION_FORM_MAX_MODES {
        return Err(Error::InvalidArgument(format!(
            "position-form assembly is limited to {POSITION_FORM_MAX_MODES} modes, got {}",
            space.modes()
        )));
    }
    let positions = 2 * lat.num_sites();
    let ladder_op = |p: usize, fam: Family, create: bool| -> SparseOperator {
        let sum = match (fam, create) {
            (H, true) => frame.h_star(p).clone(),
            (H, false) => frame.h(p),
            (L, true) => frame.l_star(p).clone(),
            (L, false) => frame.l(p),
        };
        sum.to_sparse(space)
    };
    let ops: Vec<[SparseOperator; 4]> = (0..positions)
        .map(|p| [ladder_op(p, H, true), ladder_op(p, H, false), ladder_op(p, L, true), ladder_op(p, L, false)])
        .collect();
    let pick = |p: usize, fam: Family, create: bool| -> &SparseOperator {
        let slot = match (fam, create) {
            (H, true) => 0,
            (H, false) => 1,
            (L, true) => 2,
            (L, false) => 3,
        };
        &ops[p][slot]
    };
    let template = POSITION_TEMPLATES[nu - 1];
    let mut total = SparseOperator::zeros(space.dim());
    for p in 0..positions {
        for q in 0..positions {
            let vxy = v.at(lat, p / 2, q / 2);
            if vxy == 0.0 {
                continue;
            }
            let pt = |s: usize| if template[s].0 == X { p } else { q };
            let mut prod = pick(pt(3), template[3].1, template[3].2).clone();
            for s in (0..3).rev() {
                prod = pick(pt(s), template[s].1, template[s].2).mul(&prod)?;
            }
            total = SparseOperator::linear_combination(&[
                (Complex64::new(1.0, 0.0), &total),
                (Complex64::new(vxy, 0.0), &prod),
            ])?;
        }
    }
    Ok(total)
}

/// `Q_ν x` computed from the position-space operators without building a
/// matrix.
pub fn position_quartic_apply(
    frame: &ParticleHoleFrame,
    lat: &TorusLattice,
    v: &PairPotential,
    nu: usize,
    x: &[Complex64],
) -> Result<Vec<Complex64>> {
    if !(1..=7).contains(&nu) {
        return Err(Error::InvalidArgument(format!("no quartic Q{nu}")));
    }
    let positions = 2 * lat.num_sites();
    let template = POSITION_TEMPLATES[nu - 1];
    let op = |p: usize, fam: Family, create: bool| -> LadderSum {
        match (fam, create) {
            (H, true) => frame.h_star(p).clone(),
            (H, false) => frame.h(p),
            (L, true) => frame.l_star(p).clone(),
            (L, false) => frame.l(p),
        }
    };
    let mut out = vec![ZERO; x.len()];
    for p in 0..positions {
        for q in 0..positions {
            let vxy = v.at(lat, p / 2, q / 2);
            if vxy == 0.0 {
                continue;
            }
            let pt = |s: usize| if template[s].0 == X { p } else { q };
            let mut y = x.to_vec();
            for s in (0..4).rev() {
                y = op(pt(s), template[s].1, template[s].2).apply(&y);
            }
            for (o, yi) in out.iter_mut().zip(y) {
                *o += yi * vxy;
            }
        }
    }
    Ok(out)
}

/// `Q₁ … Q₇`, `T_HF`, `N`, `N_h`, `N_ℓ` and the energy offset `E_HF`.
#[derive(Debug, Clone)]
pub struct QuarticSuite {
    pub form: BasisForm,
    pub g: f64,
    /// `Q₁ … Q₇` at indices `0 … 6`.
    pub q: Vec<SparseOperator>,
    /// `Σ_{k∈I(h)} ω_k h*_k h_k + Σ_{k∈I(ℓ)} ω_k ℓ*_k ℓ_k`, `ω_k = |e_k − μ_N|`.
    pub t_hf: SparseOperator,
    pub n: SparseOperator,
    pub n_h: SparseOperator,
    pub n_l: SparseOperator,
    /// `⟨Ω|ℍΩ⟩ = |Λ| (g/4 + F_L(Δ²))`.
    pub e_hf: f64,
}

impl QuarticSuite {
    /// `Q_ν`, 1-based.
    pub fn q(&self, nu: usize) -> &SparseOperator {
        &self.q[nu - 1]
    }

    pub fn q_main(&self) -> SparseOperator {
        self.q[0].add(&self.q[1]).expect("same dimension")
    }

    /// `Q_rem = Q₃ + … + Q₇`.
    pub fn q_rem(&self) -> SparseOperator {
        let one = Complex64::new(1.0, 0.0);
        let terms: Vec<_> = self.q[2..].iter().map(|q| (one, q)).collect();
        SparseOperator::linear_combination(&terms).expect("same dimension")
    }

    /// `Q = Re[Σ c_ν Q_ν]` with the given coefficients.
    pub fn q_total_with(&self, coeffs: &[f64; 7]) -> SparseOperator {
        let terms: Vec<_> = coeffs
            .iter()
            .zip(&self.q)
            .map(|(&c, q)| (Complex64::new(c, 0.0), q))
            .collect();
        SparseOperator::linear_combination(&terms)
            .expect("same dimension")
            .hermitian_part()
    }

    pub fn q_total(&self) -> SparseOperator {
        self.q_total_with(&Q_COEFFICIENTS)
    }

    pub fn dim(&self) -> usize {
        self.n.dim()
    }
}

/// Assembles the suite for the Hubbard interaction.
pub fn assemble_quartics(
    space: &FockSpace,
    hf: &HartreeFockSolution,
    lat: &TorusLattice,
    g: f64,
    form: BasisForm,
) -> Result<QuarticSuite> {
    check_space(space, hf)?;
    let v = PairPotential::hubbard(lat);
    let q = match form {
        BasisForm::Orbital => {
            let tensor = VTensor::compute(lat, hf, &v);
            (1..=7)
                .map(|nu| orbital_quartic(space, hf, &tensor, nu))
                .collect::<Result<Vec<_>>>()?
        }
        BasisForm::Position => {
            let frame = super::particle_hole::particle_hole_ops(space, hf)?;
            (1..=7)
                .map(|nu| position_quartic(&frame, lat, &v, nu))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(QuarticSuite {
        form,
        g,
        q,
        t_hf: hf_kinetic(space, hf)?,
        n: weighted_number(space, &vec![1.0; space.modes()]),
        n_h: weighted_number(space, &indicator(space.modes(), |k| k >= hf.num_sites())),
        n_l: weighted_number(space, &indicator(space.modes(), |k| k < hf.num_sites())),
        e_hf: lat.num_sites() as f64 * slater_energy_density(lat, g, hf.delta),
    })
}

fn indicator(m: usize, f: impl Fn(usize) -> bool) -> Vec<f64> {
    (0..m).map(|k| f(k) as u8 as f64).collect()
}

/// `T_HF = Σ_k ω_k a*_k a_k` in the particle-hole frame.
pub fn hf_kinetic(space: &FockSpace, hf: &HartreeFockSolution) -> Result<SparseOperator> {
    check_space(space, hf)?;
    let w: Vec<f64> = (0..hf.num_modes()).map(|k| hf.excitation_energy(k)).collect();
    Ok(weighted_number(space, &w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::particle_hole::particle_hole_ops;
    use crate::fock::sparse::{norm, LinearMap};

    fn setup(g: f64) -> (TorusLattice, HartreeFockSolution, FockSpace) {
        let lat = TorusLattice::new(1, 4).unwrap();
        let hf = HartreeFockSolution::solve(&lat, g, 1e-12).unwrap();
        let space = FockSpace::new(8, ModeOrder::Orbital).unwrap();
        (lat, hf, space)
    }

    #[test]
    fn v_tensor_symmetries() {
        let (lat, hf, _) = setup(2.0);
        let v = VTensor::compute(&lat, &hf, &PairPotential::hubbard(&lat));
        let m = v.modes();
        for j in 0..m {
            for k in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        let x = v.get(j, k, a, b);
                        assert!((x - v.get(k, j, b, a)).norm() < 1e-13);
                        assert!((x.conj() - v.get(a, b, j, k)).norm() < 1e-13);
                    }
                }
            }
        }
        assert!((v.operator_norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quartics_annihilate_vacuum_except_q7() {
        let (lat, hf, space) = setup(2.0);
        let suite = assemble_quartics(&space, &hf, &lat, 2.0, BasisForm::Orbital).unwrap();
        let omega = space.vacuum();
        for nu in 1..=6 {
            assert_eq!(norm(&suite.q(nu).apply_vec(&omega)), 0.0, "Q{nu}");
        }
        let q7 = suite.q(7).apply_vec(&omega);
        assert!(norm(&q7) > 0.1);
        assert_eq!(norm(&suite.q(7).apply_adjoint_vec(&omega)), 0.0);
        // Q₇Ω has four excitations
        for (w, a) in q7.iter().enumerate() {
            if a.norm() > 0.0 {
                assert_eq!(w.count_ones(), 4);
            }
        }
        assert!(suite.q_total().hermiticity_defect() < 1e-13);
        assert!(suite.q(3).hermiticity_defect() < 1e-13);
        assert!(suite.q(4).hermiticity_defect() < 1e-13);
        assert!(suite.q(7).hermiticity_defect() > 0.1);
    }

    #[test]
    fn position_apply_matches_matrix() {
        let (lat, hf, space) = setup(1.0);
        let frame = particle_hole_ops(&space, &hf).unwrap();
        let v = PairPotential::hubbard(&lat);
        let tensor = VTensor::compute(&lat, &hf, &v);
        let x: Vec<Complex64> = (0..256).map(|i| Complex64::new((i % 7) as f64 - 3.0, (i % 3) as f64)).collect();
        for nu in [5, 7] {
            let a = position_quartic_apply(&frame, &lat, &v, nu, &x).unwrap();
            let b = orbital_quartic(&space, &hf, &tensor, nu).unwrap().apply_vec(&x);
            let diff: f64 = a.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-10, "Q{nu}: {diff}");
        }
    }

    #[test]
    fn pair_potential_sup() {
        let lat = TorusLattice::new(2, 4).unwrap();
        let v = PairPotential::hubbard(&lat);
        assert_eq!(v.convolve_sup(&lat, &vec![1.0; 16]), 1.0);
        assert_eq!(v.at(&lat, 3, 3), 1.0);
        assert_eq!(v.at(&lat, 3, 2), 0.0);
    }
}
