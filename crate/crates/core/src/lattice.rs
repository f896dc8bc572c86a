//! The discrete torus `Z_L^d`, its dual lattice and the nearest-neighbour
//! dispersion.
//!
//! Sites and momenta share the same integer labelling: a point is a tuple
//! `n ∈ {0..L-1}^d`, stored in lexicographic order (first coordinate most
//! significant). A momentum `n` stands for the angle vector `2πn/L`, so the
//! shift `ξ ↦ ξ + π` is the exact integer shift `n ↦ n + L/2`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default upper bound on `d * L^d` stored coordinates.
pub const DEFAULT_COORDINATE_CAP: usize = 1 << 24;

/// Tolerance below which a dispersion value counts as a zero mode.
const ZERO_MODE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct TorusLattice {
    dim: usize,
    length: usize,
    coords: Vec<usize>,
    cos_table: Vec<f64>,
    dispersion: Vec<f64>,
}

impl TorusLattice {
    pub fn new(dim: usize, length: usize) -> Result<Self> {
        Self::with_cap(dim, length, DEFAULT_COORDINATE_CAP)
    }

    pub fn with_cap(dim: usize, length: usize, cap: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidLattice("dimension must be at least 1".into()));
        }
        if length == 0 || length % 4 != 0 {
            return Err(Error::LengthNotMultipleOfFour(length));
        }
        let n_sites = (length as u128).checked_pow(dim as u32);
        let n_sites = match n_sites {
            Some(n) if n.saturating_mul(dim as u128) <= cap as u128 => n as usize,
            _ => {
                return Err(Error::InvalidLattice(format!(
                    "d * L^d exceeds the coordinate cap {cap} (d = {dim}, L = {length})"
                )))
            }
        };

        let mut coords = Vec::with_capacity(n_sites * dim);
        for i in 0..n_sites {
            let mut rest = i;
            let start = coords.len();
            coords.resize(start + dim, 0);
            for nu in (0..dim).rev() {
                coords[start + nu] = rest % length;
                rest /= length;
            }
        }

        let cos_table = symmetric_cos_table(length);
        let dispersion = (0..n_sites)
            .map(|i| {
                -coords[i * dim..(i + 1) * dim]
                    .iter()
                    .map(|&n| cos_table[n])
                    .sum::<f64>()
            })
            .collect();

        Ok(Self {
            dim,
            length,
            coords,
            cos_table,
            dispersion,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// `|Λ| = |Λ*| = L^d`.
    pub fn num_sites(&self) -> usize {
        self.dispersion.len()
    }

    /// Integer coordinates of site (or momentum label) `i`.
    pub fn coords(&self, i: usize) -> &[usize] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn index_of(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .fold(0, |acc, &c| acc * self.length + (c % self.length))
    }

    /// Angles `2πn/L` of momentum `i`.
    pub fn momentum_angles(&self, i: usize) -> Vec<f64> {
        self.coords(i)
            .iter()
            .map(|&n| 2.0 * PI * n as f64 / self.length as f64)
            .collect()
    }

    /// `ω_ξ = -Σ_ν cos ξ_ν`.
    pub fn dispersion(&self, i: usize) -> f64 {
        self.dispersion[i]
    }

    pub fn dispersions(&self) -> &[f64] {
        &self.dispersion
    }

    /// `cos(2πn/L)` from the symmetrized table.
    pub fn cos_of(&self, n: usize) -> f64 {
        self.cos_table[n % self.length]
    }

    /// Index of `ξ + π`.
    pub fn shift_by_pi(&self, i: usize) -> usize {
        let half = self.length / 2;
        let shifted: Vec<usize> = self
            .coords(i)
            .iter()
            .map(|&n| (n + half) % self.length)
            .collect();
        self.index_of(&shifted)
    }

    /// `(-1)^{x_1 + ... + x_d}`.
    pub fn gauge_sign(&self, x: usize) -> f64 {
        if self.coords(x).iter().sum::<usize>() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Minimum-image `ℓ¹` distance on the torus.
    pub fn torus_distance(&self, x: usize, y: usize) -> usize {
        self.coords(x)
            .iter()
            .zip(self.coords(y))
            .map(|(&a, &b)| {
                let z = a.abs_diff(b);
                z.min(self.length - z)
            })
            .sum()
    }

    /// Index of the site `x - y` (componentwise mod `L`).
    pub fn difference(&self, x: usize, y: usize) -> usize {
        let l = self.length;
        self.coords(x)
            .iter()
            .zip(self.coords(y))
            .fold(0, |acc, (&a, &b)| acc * l + (a + l - b) % l)
    }

    /// Sites at torus distance one from `x`, in lexicographic order.
    pub fn neighbours(&self, x: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.dim);
        let base = self.coords(x).to_vec();
        for nu in 0..self.dim {
            for step in [1, self.length - 1] {
                let mut c = base.clone();
                c[nu] = (c[nu] + step) % self.length;
                out.push(self.index_of(&c));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Exponent `ξ·x` for momentum `xi` and site `x`, reduced modulo `2π`.
    pub fn phase(&self, xi: usize, x: usize) -> f64 {
        let dot: usize = self
            .coords(xi)
            .iter()
            .zip(self.coords(x))
            .map(|(&n, &c)| n * c)
            .sum();
        2.0 * PI * (dot % self.length) as f64 / self.length as f64
    }

    /// Mean over the dual lattice, `(1/|Λ*|) Σ_ξ f(ω_ξ)`.
    pub fn mean_over_momenta(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.dispersion.iter().map(|&w| f(w)).sum::<f64>() / self.num_sites() as f64
    }

    pub fn momentum_partition(&self) -> MomentumPartition {
        let mut plus = Vec::with_capacity(self.num_sites() / 2);
        let mut minus = Vec::with_capacity(self.num_sites() / 2);
        for xi in 0..self.num_sites() {
            let w = self.dispersion[xi];
            let in_plus = if w.abs() <= ZERO_MODE_TOL {
                xi < self.shift_by_pi(xi)
            } else {
                w > 0.0
            };
            if in_plus {
                plus.push(xi);
            } else {
                minus.push(xi);
            }
        }
        let pairing = plus.iter().map(|&xi| self.shift_by_pi(xi)).collect();
        MomentumPartition {
            plus,
            minus,
            pairing,
        }
    }
}

/// `cos(2πn/L)` for `n ∈ 0..L`, built so that `c[n + L/2] = -c[n]` and
/// `c[L - n] = c[n]` hold bit-for-bit and `c[L/4] = 0` exactly.
fn symmetric_cos_table(length: usize) -> Vec<f64> {
    let quarter = length / 4;
    let half = length / 2;
    let mut c = vec![0.0; length];
    for n in 0..quarter {
        c[n] = (2.0 * PI * n as f64 / length as f64).cos();
    }
    c[quarter] = 0.0;
    for n in quarter + 1..=half {
        c[n] = -c[half - n];
    }
    for n in half + 1..length {
        c[n] = c[length - n];
    }
    c
}

/// Split of `Λ*` into `Λ*₊ ∪ Λ*₋` with `ξ ↦ ξ + π` mapping one onto the other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentumPartition {
    pub plus: Vec<usize>,
    pub minus: Vec<usize>,
    /// `pairing[i]` is the index of `plus[i] + π`.
    pub pairing: Vec<usize>,
}

impl MomentumPartition {
    pub fn contains_plus(&self, xi: usize) -> bool {
        self.plus.binary_search(&xi).is_ok()
    }

    /// Position of `xi` inside `plus`, if present.
    pub fn plus_position(&self, xi: usize) -> Option<usize> {
        self.plus.binary_search(&xi).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_l4() {
        let lat = TorusLattice::new(1, 4).unwrap();
        assert_eq!(lat.num_sites(), 4);
        let angles: Vec<f64> = (0..4).map(|i| lat.momentum_angles(i)[0]).collect();
        for (a, e) in angles.iter().zip([0.0, PI / 2.0, PI, 1.5 * PI]) {
            assert!((a - e).abs() < 1e-15);
        }
        assert_eq!(lat.dispersions(), &[-1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn two_dimensional_sites() {
        let lat = TorusLattice::new(2, 4).unwrap();
        assert_eq!(lat.num_sites(), 16);
        assert_eq!(lat.coords(5), &[1, 1]);
        assert_eq!(lat.index_of(&[3, 2]), 14);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(matches!(
            TorusLattice::new(1, 6),
            Err(Error::LengthNotMultipleOfFour(6))
        ));
        assert!(TorusLattice::new(0, 4).is_err());
        assert!(TorusLattice::with_cap(3, 64, 1000).is_err());
    }

    #[test]
    fn dispersion_extremes() {
        for d in 1..=3 {
            let lat = TorusLattice::new(d, 8).unwrap();
            assert_eq!(lat.dispersion(0), -(d as f64));
            let pi = lat.index_of(&vec![4; d]);
            assert_eq!(lat.dispersion(pi), d as f64);
        }
    }

    #[test]
    fn gauge_signs() {
        let lat = TorusLattice::new(2, 4).unwrap();
        assert_eq!(lat.gauge_sign(0), 1.0);
        assert_eq!(lat.gauge_sign(lat.index_of(&[1, 0])), -1.0);
        assert_eq!(lat.gauge_sign(lat.index_of(&[1, 1])), 1.0);
    }

    #[test]
    fn partition_d1() {
        let lat = TorusLattice::new(1, 4).unwrap();
        let p = lat.momentum_partition();
        assert_eq!(p.plus.len(), 2);
        assert_eq!(p.minus.len(), 2);
        // zero modes 1 and 3 land in different halves
        assert!(p.plus.contains(&1) != p.plus.contains(&3));

        let lat8 = TorusLattice::new(1, 8).unwrap();
        assert_eq!(lat8.momentum_partition().plus.len(), 4);
    }

    #[test]
    fn distance_and_neighbours() {
        let lat = TorusLattice::new(2, 8).unwrap();
        let x = lat.index_of(&[0, 0]);
        let y = lat.index_of(&[7, 1]);
        assert_eq!(lat.torus_distance(x, y), 2);
        for n in lat.neighbours(x) {
            assert_eq!(lat.torus_distance(x, n), 1);
        }
        assert_eq!(lat.neighbours(x).len(), 4);
    }
}
