//! The Wick-identity oracle: `ℍ` built by substituting `c*_{xσ} ↦ h*_{xσ} + ℓ_{xσ}`
//! into the Hubbard Hamiltonian, compared with `E_HF + T_HF + (g/2)Q`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::particle_hole::ParticleHoleFrame;
use super::quartic::{QuarticSuite, Q_COEFFICIENTS};
use super::spectral::{dense_norm, operator_norm};
use super::sparse::{LinearMap, SparseOperator};
use crate::bounds::{BoundReport, CheckRecord};
use crate::error::{Error, Result};
use crate::hartree_fock::{hopping_matrix, spin_index};
use crate::lattice::TorusLattice;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest mode count for which the oracle runs; the residual is a dense
/// singular-value computation on the full space.
pub const WICK_MAX_MODES: usize = 12;
/// Fitted coefficients must match to this absolute tolerance.
pub const COEFFICIENT_TOL: f64 = 1e-8;

/// `ℍ = Σ t_{x-y} b*_{xσ} b_{yσ} + g Σ_x b*_{x↑} b*_{x↓} b_{x↓} b_{x↑}` with
/// `b*_{xσ} = h*_{xσ} + ℓ_{xσ}`.
pub fn substituted_hamiltonian(frame: &ParticleHoleFrame, lat: &TorusLattice, g: f64) -> Result<SparseOperator> {
    let space = frame.space();
    if space.modes() != 2 * lat.num_sites() {
        return Err(Error::Dimension(format!(
            "{} modes for {} sites",
            space.modes(),
            lat.num_sites()
        )));
    }
    let b_star: Vec<SparseOperator> = (0..space.modes())
        .map(|p| {
            let (h, l) = frame.transformed_creator(p);
            h.to_sparse(space).add(&l.to_sparse(space))
        })
        .collect::<Result<_>>()?;
    let b: Vec<SparseOperator> = b_star.iter().map(SparseOperator::adjoint).collect();
    let t = hopping_matrix(lat);
    let mut terms: Vec<(Complex64, SparseOperator)> = Vec::new();
    for x in 0..lat.num_sites() {
        for y in lat.neighbours(x) {
            for s in 0..2 {
                let op = b_star[spin_index(x, s)].mul(&b[spin_index(y, s)])?;
                terms.push((Complex64::new(t[(x, y)], 0.0), op));
            }
        }
        let (up, dn) = (spin_index(x, 0), spin_index(x, 1));
        let pair = b_star[up].mul(&b_star[dn])?;
        let op = pair.mul(&b[dn])?.mul(&b[up])?;
        terms.push((Complex64::new(g, 0.0), op));
    }
    let refs: Vec<(Complex64, &SparseOperator)> = terms.iter().map(|(c, o)| (*c, o)).collect();
    SparseOperator::linear_combination(&refs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFit {
    /// Least-squares coefficients of `(g/2) Re Q_ν`, `ν = 1 … 7`.
    pub q: [f64; 7],
    /// Coefficient of `N_h − N_ℓ`.
    pub shift: f64,
    /// Coefficient of the identity.
    pub constant: f64,
    /// Frobenius norm of what the fit leaves unexplained.
    pub unexplained: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WickReport {
    pub g: f64,
    /// `‖ℍ − (E_HF + T_HF + (g/2)Q)‖` on the full space.
    pub residual: f64,
    /// Same difference from power iteration, as a second opinion.
    pub residual_power: f64,
    /// The difference restricted to states with `N_h = N_ℓ`.
    pub residual_balanced: f64,
    /// `‖ℍ − (E_HF + T_HF + (g/2)(N_h − N_ℓ) + (g/2)Q)‖`.
    pub residual_with_shift: f64,
    pub vacuum_energy: f64,
    pub e_hf: f64,
    pub fit: CoefficientFit,
    pub expected: [f64; 7],
    /// `ν` whose fitted coefficient differs from the expected one by more
    /// than `1e−8`.
    pub offending: Vec<usize>,
    pub tolerance: f64,
    pub passed: bool,
}

fn hermitian_norm(op: &SparseOperator) -> f64 {
    dense_norm(&op.to_dense())
}

fn shift_and_add(a: &SparseOperator, c: f64) -> Result<SparseOperator> {
    let id = SparseOperator::identity(a.dim());
    SparseOperator::linear_combination(&[(ONE, a), (Complex64::new(c, 0.0), &id)])
}

/// Least-squares fit of `ℍ − T_HF` over `{(g/2) Re Q_ν} ∪ {N_h − N_ℓ, 1}` in the
/// Frobenius inner product.
pub fn fit_coefficients(target: &SparseOperator, suite: &QuarticSuite) -> Result<CoefficientFit> {
    let half = suite.g / 2.0;
    let mut basis: Vec<SparseOperator> = suite.q.iter().map(|q| q.hermitian_part().scale_real(half)).collect();
    basis.push(suite.n_h.sub(&suite.n_l)?);
    basis.push(SparseOperator::identity(target.dim()));
    let k = basis.len();
    let gram = DMatrix::from_fn(k, k, |i, j| basis[i].frobenius_inner(&basis[j]).re);
    let rhs = DVector::from_fn(k, |i, _| basis[i].frobenius_inner(target).re);
    let sol = gram
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Solver(format!("coefficient fit: {e}")))?;
    let terms: Vec<(Complex64, &SparseOperator)> =
        sol.iter().zip(&basis).map(|(&c, b)| (Complex64::new(c, 0.0), b)).collect();
    let fitted = SparseOperator::linear_combination(&terms)?;
    let rest = target.sub(&fitted)?;
    let mut q = [0.0; 7];
    q.copy_from_slice(&sol.as_slice()[..7]);
    Ok(CoefficientFit {
        q,
        shift: sol[7],
        constant: sol[8],
        unexplained: rest.frobenius_inner(&rest).re.sqrt(),
    })
}

/// Runs the oracle on an assembled suite.
pub fn wick_identity_check(
    frame: &ParticleHoleFrame,
    lat: &TorusLattice,
    suite: &QuarticSuite,
    tolerance: f64,
) -> Result<WickReport> {
    if frame.space().modes() > WICK_MAX_MODES {
        return Err(Error::InvalidArgument(format!(
            "the Wick oracle is limited to {WICK_MAX_MODES} modes, got {}",
            frame.space().modes()
        )));
    }
    let g = suite.g;
    let hh = substituted_hamiltonian(frame, lat, g)?;
    let q = suite.q_total();
    let rhs = SparseOperator::linear_combination(&[(ONE, &suite.t_hf), (Complex64::new(g / 2.0, 0.0), &q)])?;
    let rhs = shift_and_add(&rhs, suite.e_hf)?;
    let diff = hh.sub(&rhs)?;
    let residual = hermitian_norm(&diff);
    let residual_power = operator_norm(&diff, 1e-13, 17)?;

    let keep: Vec<bool> = (0..hh.dim())
        .map(|w| {
            let (h, l) = frame.counts(w);
            h == l
        })
        .collect();
    let residual_balanced = hermitian_norm(&diff.compress_to(&keep));

    let shift = suite.n_h.sub(&suite.n_l)?;
    let shifted = diff.sub(&shift.scale_real(g / 2.0))?;
    let residual_with_shift = hermitian_norm(&shifted);

    let fit = fit_coefficients(&hh.sub(&suite.t_hf)?, suite)?;
    let offending = (0..7)
        .filter(|&i| (fit.q[i] - Q_COEFFICIENTS[i]).abs() > COEFFICIENT_TOL)
        .map(|i| i + 1)
        .collect();
    Ok(WickReport {
        g,
        residual,
        residual_power,
        residual_balanced,
        residual_with_shift,
        vacuum_energy: hh.get(0, 0).re,
        e_hf: suite.e_hf,
        fit,
        expected: Q_COEFFICIENTS,
        offending,
        tolerance,
        passed: residual < tolerance && (residual - residual_power).abs() <= 1e-8,
    })
}

impl WickReport {
    /// Flat records; a failing coefficient record names the term that
    /// breaks the identity.
    pub fn to_bound_report(&self, lat: &TorusLattice, delta: f64) -> BoundReport {
        let mut rep = BoundReport::new("wick", lat, self.g, delta);
        rep.push(CheckRecord::at_most("wick.residual", self.residual, 0.0, self.tolerance));
        rep.push(CheckRecord::equal_abs("wick.residual_power", self.residual_power, self.residual, 1e-8));
        rep.push(CheckRecord::info("wick.residual_balanced_sector", self.residual_balanced, 0.0));
        rep.push(CheckRecord::info("wick.residual_with_number_shift", self.residual_with_shift, 0.0));
        rep.push(CheckRecord::equal_abs("wick.vacuum_energy", self.vacuum_energy, self.e_hf, 1e-10));
        for (i, (&got, &want)) in self.fit.q.iter().zip(&self.expected).enumerate() {
            rep.push(CheckRecord::equal_abs(
                &format!("wick.coefficient_q{}", i + 1),
                got,
                want,
                COEFFICIENT_TOL,
            ));
        }
        rep.push(CheckRecord::equal_abs(
            "wick.coefficient_number_shift",
            self.fit.shift,
            0.0,
            COEFFICIENT_TOL,
        ));
        rep.push(CheckRecord::equal_abs(
            "wick.coefficient_constant",
            self.fit.constant,
            self.e_hf,
            COEFFICIENT_TOL,
        ));
        rep.push(CheckRecord::at_most("wick.fit_unexplained", self.fit.unexplained, 0.0, COEFFICIENT_TOL));
        rep
    }
}

/// The oracle as a report, with every record skipped when the space is
/// too large for it.
pub fn wick_report(
    frame: &ParticleHoleFrame,
    lat: &TorusLattice,
    suite: &QuarticSuite,
    delta: f64,
    tolerance: f64,
) -> Result<BoundReport> {
    if frame.space().modes() > WICK_MAX_MODES {
        let mut rep = BoundReport::new("wick", lat, suite.g, delta);
        rep.push(CheckRecord::skipped("wick.residual", "cap"));
        return Ok(rep);
    }
    Ok(wick_identity_check(frame, lat, suite, tolerance)?.to_bound_report(lat, delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::hubbard::assemble_hubbard_hamiltonian;
    use crate::fock::particle_hole::particle_hole_ops;
    use crate::fock::quartic::{assemble_quartics, BasisForm};
    use crate::fock::spectral::dense_eigenvalues;
    use crate::fock::space::{FockSpace, ModeOrder};
    use crate::hartree_fock::HartreeFockSolution;

    #[test]
    fn substitution_is_unitary_conjugation() {
        // ℍ and H share a spectrum
        let lat = TorusLattice::new(1, 4).unwrap();
        let g = 1.3;
        let hf = HartreeFockSolution::solve(&lat, g, 1e-13).unwrap();
        let space = FockSpace::new(8, ModeOrder::Orbital).unwrap();
        let frame = particle_hole_ops(&space, &hf).unwrap();
        let hh = substituted_hamiltonian(&frame, &lat, g).unwrap();
        assert!(hh.hermiticity_defect() < 1e-13);
        let pos = FockSpace::new(8, ModeOrder::Position).unwrap();
        let h = assemble_hubbard_hamiltonian(&pos, &lat, g).unwrap();
        let a = dense_eigenvalues(&hh.to_dense());
        let b = dense_eigenvalues(&h.to_dense());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
        // the vacuum carries the Slater energy of the HF state
        let e = lat.num_sites() as f64 * crate::hartree_fock::slater_energy_density(&lat, g, hf.delta);
        assert!((hh.get(0, 0).re - e).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_a_planted_combination() {
        let lat = TorusLattice::new(1, 4).unwrap();
        let g = 1.0;
        let hf = HartreeFockSolution::solve(&lat, g, 1e-13).unwrap();
        let space = FockSpace::new(8, ModeOrder::Orbital).unwrap();
        let suite = assemble_quartics(&space, &hf, &lat, g, BasisForm::Orbital).unwrap();
        let planted = [0.5, 1.0, -2.0, 3.0, 4.0, 1.0, 2.0];
        let target = suite
            .q_total_with(&planted)
            .scale_real(g / 2.0)
            .add(&suite.n_h.sub(&suite.n_l).unwrap().scale_real(0.7))
            .unwrap();
        let target = shift_and_add(&target, -1.5).unwrap();
        let fit = fit_coefficients(&target, &suite).unwrap();
        for (a, b) in fit.q.iter().zip(planted) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!((fit.shift - 0.7).abs() < 1e-9);
        assert!((fit.constant + 1.5).abs() < 1e-9);
        assert!(fit.unexplained < 1e-9);
    }

    #[test]
    fn report_localizes_the_number_shift() {
        let lat = TorusLattice::new(1, 4).unwrap();
        let g = 2.0;
        let hf = HartreeFockSolution::solve(&lat, g, 1e-13).unwrap();
        let space = FockSpace::new(8, ModeOrder::Orbital).unwrap();
        let frame = particle_hole_ops(&space, &hf).unwrap();
        let suite = assemble_quartics(&space, &hf, &lat, g, BasisForm::Orbital).unwrap();
        let w = wick_identity_check(&frame, &lat, &suite, 1e-9).unwrap();
        assert!(w.offending.is_empty(), "{:?}", w.fit.q);
        assert!(w.residual_with_shift < 1e-9);
        assert!((w.fit.shift - g / 2.0).abs() < 1e-9);
        let rep = w.to_bound_report(&lat, hf.delta);
        let failed: Vec<&str> = rep.failures().map(|r| r.name.as_str()).collect();
        assert_eq!(failed, ["wick.residual", "wick.coefficient_number_shift"]);
    }
}
