use num_complex::Complex64;

use super::space::{ladder_product, FockSpace, ModeOrder};
use super::sparse::SparseOperator;
use crate::error::{Error, Result};
use crate::hartree_fock::{hopping_matrix, spin_index};
use crate::lattice::TorusLattice;

/// `H = Σ t_{x-y} c*_{xσ} c_{yσ} + (g/2)·2 Σ_x c*_{x↑} c*_{x↓} c_{x↓} c_{x↑}`
/// on the position-ordered Fock space.
pub fn assemble_hubbard_hamiltonian(space: &FockSpace, lat: &TorusLattice, g: f64) -> Result<SparseOperator> {
    if space.order() != ModeOrder::Position || space.modes() != 2 * lat.num_sites() {
        return Err(Error::ModeOrder(format!(
            "expected {} position-ordered modes, got {} ({:?})",
            2 * lat.num_sites(),
            space.modes(),
            space.order()
        )));
    }
    let t = hopping_matrix(lat);
    let n = lat.num_sites();
    Ok(SparseOperator::from_columns(space.dim(), |w, out| {
        for y in 0..n {
            for x in lat.neighbours(y) {
                let txy = t[(x, y)];
                for s in 0..2 {
                    let ops = [(spin_index(x, s), true), (spin_index(y, s), false)];
                    if let Some((w2, sign)) = ladder_product(w, &ops) {
                        out.push((w2 as u32, Complex64::new(txy * sign, 0.0)));
                    }
                }
            }
        }
        for x in 0..n {
            let (up, dn) = (spin_index(x, 0), spin_index(x, 1));
            let ops = [(up, true), (dn, true), (dn, false), (up, false)];
            if let Some((w2, sign)) = ladder_product(w, &ops) {
                out.push((w2 as u32, Complex64::new(g * sign, 0.0)));
            }
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::sparse::LinearMap;

    #[test]
    fn free_one_particle_spectrum() {
        let lat = TorusLattice::new(1, 4).unwrap();
        let space = FockSpace::new(8, ModeOrder::Position).unwrap();
        let h = assemble_hubbard_hamiltonian(&space, &lat, 0.0).unwrap();
        assert!(h.hermiticity_defect() < 1e-15);
        let one: Vec<usize> = (0..8).map(|m| 1 << m).collect();
        let dense = h.to_dense();
        let block = nalgebra::DMatrix::from_fn(8, 8, |i, j| dense[(one[i], one[j])]);
        let mut ev: Vec<f64> = block.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let want = [-1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_and_full_shell() {
        let lat = TorusLattice::new(1, 4).unwrap();
        let space = FockSpace::new(8, ModeOrder::Position).unwrap();
        let g = 1.7;
        let h = assemble_hubbard_hamiltonian(&space, &lat, g).unwrap();
        assert_eq!(h.get(0, 0), Complex64::new(0.0, 0.0));
        assert!((h.get(255, 255).re - g * 4.0).abs() < 1e-12);
        let wrong = FockSpace::new(8, ModeOrder::Orbital).unwrap();
        assert!(matches!(
            assemble_hubbard_hamiltonian(&wrong, &lat, g),
            Err(Error::ModeOrder(_))
        ));
    }
}
