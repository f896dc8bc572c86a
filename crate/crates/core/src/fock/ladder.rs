use num_complex::Complex64;

use super::space::{ladder, FockSpace};
use super::sparse::SparseOperator;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn creation(space: &FockSpace, m: usize) -> SparseOperator {
    single(space, m, true)
}

pub fn annihilation(space: &FockSpace, m: usize) -> SparseOperator {
    single(space, m, false)
}

fn single(space: &FockSpace, m: usize, create: bool) -> SparseOperator {
    assert!(m < space.modes(), "mode {m} out of range");
    SparseOperator::from_columns(space.dim(), |w, out| {
        if let Some((w2, s)) = ladder(w, m, create) {
            out.push((w2 as u32, Complex64::new(s, 0.0)));
        }
    })
}

/// A linear combination of creators `Σ_m f_m c*_m`, or of annihilators
/// `Σ_m f_m c_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderSum {
    pub terms: Vec<(usize, Complex64)>,
    pub create: bool,
}

impl LadderSum {
    /// `c*(f) = Σ_m f_m c*_m`.
    pub fn creator(f: &[Complex64]) -> Self {
        Self {
            terms: f
                .iter()
                .enumerate()
                .filter(|(_, z)| **z != ZERO)
                .map(|(m, &z)| (m, z))
                .collect(),
            create: true,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|&(m, z)| (m, z.conj())).collect(),
            create: !self.create,
        }
    }

    /// Accumulates `self |w⟩ · amp` into `out`.
    pub fn push_image(&self, w: usize, amp: Complex64, out: &mut Vec<(u32, Complex64)>) {
        for &(m, z) in &self.terms {
            if let Some((w2, s)) = ladder(w, m, self.create) {
                out.push((w2 as u32, z * amp * s));
            }
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; x.len()];
        for (w, &a) in x.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for &(m, z) in &self.terms {
                if let Some((w2, s)) = ladder(w, m, self.create) {
                    y[w2] += z * a * s;
                }
            }
        }
        y
    }

    pub fn to_sparse(&self, space: &FockSpace) -> SparseOperator {
        SparseOperator::from_columns(space.dim(), |w, out| {
            self.push_image(w, Complex64::new(1.0, 0.0), out)
        })
    }
}

/// `c*(f) = Σ_m f_m c*_m` as a sparse operator.
pub fn orbital_operator(space: &FockSpace, f: &[Complex64]) -> Result<SparseOperator> {
    if f.len() != space.modes() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} modes",
            f.len(),
            space.modes()
        )));
    }
    if f.iter().all(|z| *z == ZERO) {
        return Err(Error::InvalidArgument("orbital coefficients vanish".into()));
    }
    Ok(LadderSum::creator(f).to_sparse(space))
}

/// Diagonal operator `Σ_m weight_m c*_m c_m`.
pub fn weighted_number(space: &FockSpace, weights: &[f64]) -> SparseOperator {
    let diag: Vec<f64> = (0..space.dim())
        .map(|w| {
            weights
                .iter()
                .enumerate()
                .filter(|(m, _)| w >> m & 1 == 1)
                .map(|(_, x)| x)
                .sum()
        })
        .collect();
    SparseOperator::from_diagonal(&diag)
}
