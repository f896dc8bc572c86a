//! Algebraic property suite: CAR, particle-hole anticommutators, number
//! grading, positivity and the agreement of the two quartic assemblies.

use num_complex::Complex64;

use super::ladder::{annihilation, creation, LadderSum};
use super::quartic::{assemble_quartics, position_quartic_apply, BasisForm, PairPotential, POSITION_FORM_MAX_MODES};
use super::quartic::SECTOR_SHIFTS;
use super::space::{FockSpace, ModeOrder};
use super::sparse::{LinearMap, SparseOperator};
use super::spectral::{block_min_eigenvalue, random_unit};
use crate::bounds::{BoundReport, CheckRecord, FockInstance};
use crate::error::Result;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest mode count for the exhaustive CAR check.
pub const CAR_MAX_MODES: usize = 6;
/// Above this mode count the particle-hole anticommutators are checked on
/// seeded random combinations instead of all pairs.
pub const ALL_PAIRS_MAX_MODES: usize = 8;
const RANDOM_COMBINATIONS: usize = 8;
/// Tolerance for identities that hold up to rounding.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Largest entry of `{c_m, c*_n} − δ_{mn}`, `{c_m, c_n}` and `{c*_m, c*_n}`
/// over all `4M²` pairs, as exact sparse matrices.
pub fn car_defect(modes: usize) -> Result<f64> {
    let space = FockSpace::with_cap(modes, ModeOrder::Position, modes)?;
    let c: Vec<SparseOperator> = (0..modes).map(|m| annihilation(&space, m)).collect();
    let cs: Vec<SparseOperator> = (0..modes).map(|m| creation(&space, m)).collect();
    let id = SparseOperator::identity(space.dim());
    let zero = SparseOperator::zeros(space.dim());
    let anti = |a: &SparseOperator, b: &SparseOperator| -> Result<SparseOperator> { a.mul(b)?.add(&b.mul(a)?) };
    let mut worst = 0.0f64;
    for m in 0..modes {
        for n in 0..modes {
            let delta = if m == n { &id } else { &zero };
            worst = worst.max(anti(&c[m], &cs[n])?.max_abs_diff(delta)?);
            worst = worst.max(anti(&cs[m], &c[n])?.max_abs_diff(delta)?);
            worst = worst.max(anti(&c[m], &c[n])?.max_abs());
            worst = worst.max(anti(&cs[m], &cs[n])?.max_abs());
        }
    }
    Ok(worst)
}

/// `Σ_p f_p A_p` for ladder sums of one kind.
fn combine(sums: &[&LadderSum], f: &[Complex64]) -> LadderSum {
    let modes = sums.iter().flat_map(|s| s.terms.iter().map(|t| t.0)).max().map_or(0, |m| m + 1);
    let mut acc = vec![ZERO; modes];
    for (s, &c) in sums.iter().zip(f) {
        for &(m, z) in &s.terms {
            acc[m] += c * z;
        }
    }
    let mut out = LadderSum::creator(&acc);
    out.create = sums.first().map_or(true, |s| s.create);
    out
}

fn anticommutator_defect(a: &LadderSum, b: &LadderSum, expected: Complex64, x: &[Complex64]) -> f64 {
    let ab = a.apply(&b.apply(x));
    let ba = b.apply(&a.apply(x));
    ab.iter()
        .zip(&ba)
        .zip(x)
        .map(|((u, v), xi)| (u + v - xi * expected).norm())
        .fold(0.0, f64::max)
}

/// Largest defect of `{h, h*} = P⊥`, `{ℓ, ℓ*} = conj P` and the vanishing
/// mixed anticommutators, applied to a seeded random vector.
pub fn particle_hole_defect(inst: &FockInstance, seed: u64) -> f64 {
    let m = inst.hf.num_modes();
    let x = random_unit(inst.space.dim(), seed);
    let pc = inst.hf.complement();
    let p = &inst.hf.projector;
    let frame = &inst.frame;
    let hs: Vec<LadderSum> = (0..m).map(|i| frame.h_star(i).clone()).collect();
    let ls: Vec<LadderSum> = (0..m).map(|i| frame.l_star(i).clone()).collect();
    let mut worst = 0.0f64;
    let mut check = |f: &[Complex64], g: &[Complex64]| {
        let hr: Vec<&LadderSum> = hs.iter().collect();
        let lr: Vec<&LadderSum> = ls.iter().collect();
        let (h_f, h_g) = (combine(&hr, f).adjoint(), combine(&hr, g));
        let (l_f, l_g) = (combine(&lr, f).adjoint(), combine(&lr, g));
        let mut e_h = ZERO;
        let mut e_l = ZERO;
        for i in 0..m {
            for j in 0..m {
                let w = f[i].conj() * g[j];
                e_h += w * pc[(i, j)];
                e_l += w * p[(i, j)].conj();
            }
        }
        worst = worst.max(anticommutator_defect(&h_f, &h_g, e_h, &x));
        worst = worst.max(anticommutator_defect(&l_f, &l_g, e_l, &x));
        worst = worst.max(anticommutator_defect(&h_f, &l_g, ZERO, &x));
        worst = worst.max(anticommutator_defect(&h_g, &l_g, ZERO, &x));
        worst = worst.max(anticommutator_defect(&h_f, &l_f, ZERO, &x));
    };
    if m <= ALL_PAIRS_MAX_MODES {
        let unit = |i: usize| -> Vec<Complex64> {
            let mut v = vec![ZERO; m];
            v[i] = Complex64::new(1.0, 0.0);
            v
        };
        for i in 0..m {
            for j in 0..m {
                check(&unit(i), &unit(j));
            }
        }
    } else {
        for r in 0..RANDOM_COMBINATIONS as u64 {
            let f = random_unit(m, seed ^ (2 * r + 1));
            let g = random_unit(m, seed ^ (2 * r + 2));
            check(&f, &g);
        }
    }
    worst
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// The `car` report: operator identities that hold independently of any
/// theorem.
pub fn property_report(inst: &FockInstance, seed: u64) -> Result<BoundReport> {
    let suite = &inst.suite;
    let mut rep = BoundReport::new("car", &inst.lat, suite.g, inst.hf.delta);
    for modes in 1..=CAR_MAX_MODES {
        rep.push(CheckRecord::equal_abs(&format!("car.canonical_m{modes}"), car_defect(modes)?, 0.0, 0.0));
    }
    rep.push(CheckRecord::at_most(
        "car.particle_hole_anticommutators",
        particle_hole_defect(inst, seed),
        0.0,
        IDENTITY_TOL,
    ));

    let n_sum = suite.n_h.add(&suite.n_l)?;
    rep.push(CheckRecord::equal_abs("car.number_decomposition", suite.n.max_abs_diff(&n_sum)?, 0.0, 0.0));
    let modes = inst.space.modes();
    let mut counts = vec![0usize; modes + 1];
    for w in 0..suite.dim() {
        counts[suite.n.get(w, w).re.round() as usize] += 1;
    }
    let miscount: usize = (0..=modes).map(|k| counts[k].abs_diff(binomial(modes, k))).sum();
    rep.push(CheckRecord::equal_abs("car.number_spectrum_binomial", miscount as f64, 0.0, 0.0));

    let vac = inst.space.vacuum();
    for nu in 1..=7 {
        let q = suite.q(nu);
        let qv = q.apply_vec(&vac);
        rep.push(CheckRecord::equal_abs(
            &format!("car.q{nu}_vacuum_expectation"),
            qv[0].norm(),
            0.0,
            IDENTITY_TOL,
        ));
        let s = SECTOR_SHIFTS[nu - 1] as f64;
        let graded = suite.n.commutator(q)?.sub(&q.scale_real(s))?;
        rep.push(CheckRecord::at_most(&format!("car.q{nu}_grading"), graded.max_abs(), 0.0, IDENTITY_TOL));
    }
    let q7 = suite.q(7);
    let q7v = q7.apply_vec(&vac);
    let lifted: f64 = suite
        .n
        .apply_vec(&q7v)
        .iter()
        .zip(&q7v)
        .map(|(a, b)| (a - b * 4.0).norm())
        .fold(0.0, f64::max);
    rep.push(CheckRecord::at_most("car.q7_vacuum_in_four_sector", lifted, 0.0, IDENTITY_TOL));
    let adj = super::sparse::norm(&q7.adjoint().apply_vec(&vac));
    rep.push(CheckRecord::at_most("car.q7_adjoint_annihilates_vacuum", adj, 0.0, IDENTITY_TOL));
    for nu in [3, 4] {
        rep.push(CheckRecord::at_most(
            &format!("car.q{nu}_hermitian"),
            suite.q(nu).hermiticity_defect(),
            0.0,
            IDENTITY_TOL,
        ));
    }

    for nu in [1, 2] {
        let (low, _) = block_min_eigenvalue(suite.q(nu));
        rep.push(CheckRecord::at_least(&format!("car.q{nu}_psd"), low, 0.0, IDENTITY_TOL));
    }
    let gap = inst.hf.gap;
    let (t_low, _) = block_min_eigenvalue(&suite.t_hf);
    rep.push(CheckRecord::at_least("car.t_hf_psd", t_low, 0.0, IDENTITY_TOL));
    let shifted = suite.t_hf.sub(&suite.n.scale_real(gap))?;
    let (s_low, _) = block_min_eigenvalue(&shifted);
    rep.push(CheckRecord::at_least("car.t_hf_minus_gap_number_psd", s_low, 0.0, IDENTITY_TOL));
    let half = suite.t_hf.sub(&suite.n.scale_real(0.5 * gap))?;
    let (h_low, _) = block_min_eigenvalue(&half);
    rep.push(CheckRecord::at_least("car.t_hf_minus_half_gap_number_psd", h_low, 0.0, IDENTITY_TOL));

    if modes <= POSITION_FORM_MAX_MODES {
        let pos = assemble_quartics(&inst.space, &inst.hf, &inst.lat, suite.g, BasisForm::Position)?;
        for nu in 1..=7 {
            rep.push(CheckRecord::at_most(
                &format!("car.q{nu}_orbital_vs_position"),
                suite.q(nu).max_abs_diff(pos.q(nu))?,
                0.0,
                IDENTITY_TOL,
            ));
        }
    } else {
        let v = PairPotential::hubbard(&inst.lat);
        let x = random_unit(suite.dim(), seed ^ 0x0b17);
        for nu in 1..=7 {
            let a = suite.q(nu).apply_vec(&x);
            let b = position_quartic_apply(&inst.frame, &inst.lat, &v, nu, &x)?;
            let diff = a.iter().zip(&b).map(|(u, w)| (u - w).norm()).fold(0.0, f64::max);
            rep.push(CheckRecord::at_most(
                &format!("car.q{nu}_orbital_vs_position"),
                diff,
                0.0,
                IDENTITY_TOL,
            ));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::TorusLattice;

    #[test]
    fn canonical_relations_are_exact() {
        for m in 1..=4 {
            assert_eq!(car_defect(m).unwrap(), 0.0);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(16, 0), 1);
        assert_eq!((0..=10).map(|k| binomial(10, k)).sum::<usize>(), 1024);
    }

    #[test]
    fn suite_passes_small_instance() {
        let lat = TorusLattice::new(1, 4).unwrap();
        let inst = FockInstance::build(&lat, 1.0, 1e-12, 16).unwrap();
        let rep = property_report(&inst, 7).unwrap();
        let failed: Vec<_> = rep.failures().map(|r| (&r.name, r.measured)).collect();
        assert!(failed.is_empty(), "{failed:?}");
    }

    #[test]
    fn anticommutator_defect_detects_a_wrong_projector() {
        let lat = TorusLattice::new(1, 4).unwrap();
        let mut inst = FockInstance::build(&lat, 1.0, 1e-12, 16).unwrap();
        inst.hf.projector[(0, 0)] += Complex64::new(1e-3, 0.0);
        assert!(particle_hole_defect(&inst, 3) > 1e-4);
    }
}
