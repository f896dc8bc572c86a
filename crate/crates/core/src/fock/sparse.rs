//! Compressed-column complex matrices and the `LinearMap` abstraction used by
//! the iterative eigensolvers.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Entries with modulus at or below this are not stored.
pub const DROP_TOL: f64 = 1e-14;

/// A square linear operator on `C^dim` that can be applied with its adjoint.
pub trait LinearMap {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
    /// `y = A* x`.
    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]);

    fn apply_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.dim()];
        self.apply(x, &mut y);
        y
    }

    fn apply_adjoint_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.dim()];
        self.apply_adjoint(x, &mut y);
        y
    }

    /// Dense matrix obtained by applying the map to every basis vector.
    fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut out = DMatrix::from_element(n, n, ZERO);
        let mut e = vec![ZERO; n];
        let mut y = vec![ZERO; n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            self.apply(&e, &mut y);
            for i in 0..n {
                out[(i, j)] = y[i];
            }
            e[j] = ZERO;
        }
        out
    }
}

impl LinearMap for DMatrix<Complex64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..self.ncols()).map(|j| self[(i, j)] * x[j]).sum();
        }
    }

    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = (0..self.nrows()).map(|i| self[(i, j)].conj() * x[i]).sum();
        }
    }

    fn to_dense(&self) -> DMatrix<Complex64> {
        self.clone()
    }
}

/// Square sparse matrix in compressed-column form with sorted row indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    col_ptr: Vec<usize>,
    rows: Vec<u32>,
    vals: Vec<Complex64>,
}

/// Sorts `(row, value)` pairs, merges duplicates and drops negligible sums.
fn compress(entries: &mut Vec<(u32, Complex64)>) {
    entries.sort_unstable_by_key(|e| e.0);
    let mut out = 0;
    let mut i = 0;
    while i < entries.len() {
        let row = entries[i].0;
        let mut acc = entries[i].1;
        i += 1;
        while i < entries.len() && entries[i].0 == row {
            acc += entries[i].1;
            i += 1;
        }
        if acc.norm() > DROP_TOL {
            entries[out] = (row, acc);
            out += 1;
        }
    }
    entries.truncate(out);
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            col_ptr: vec![0; dim + 1],
            rows: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_columns(diag.len(), |j, out| out.push((j as u32, Complex64::new(diag[j], 0.0))))
    }

    /// Builds column `j` from the entries `fill(j, ..)` pushes; duplicates
    /// are summed.
    pub fn from_columns(dim: usize, mut fill: impl FnMut(usize, &mut Vec<(u32, Complex64)>)) -> Self {
        assert!(dim <= u32::MAX as usize + 1, "dimension exceeds u32 row indices");
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut rows = Vec::new();
        let mut vals = Vec::new();
        let mut scratch = Vec::new();
        col_ptr.push(0);
        for j in 0..dim {
            scratch.clear();
            fill(j, &mut scratch);
            compress(&mut scratch);
            for &(r, v) in &scratch {
                rows.push(r);
                vals.push(v);
            }
            col_ptr.push(rows.len());
        }
        rows.shrink_to_fit();
        vals.shrink_to_fit();
        Self { dim, col_ptr, rows, vals }
    }

    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, Complex64)]) -> Result<Self> {
        let mut by_col: Vec<Vec<(u32, Complex64)>> = vec![Vec::new(); dim];
        for &(r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::Dimension(format!("entry ({r}, {c}) outside {dim}×{dim}")));
            }
            by_col[c].push((r as u32, v));
        }
        Ok(Self::from_columns(dim, |j, out| out.extend_from_slice(&by_col[j])))
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        Self::from_columns(m.ncols(), |j, out| {
            for i in 0..m.nrows() {
                out.push((i as u32, m[(i, j)]));
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries of column `j` as `(row, value)`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.rows[range.clone()]
            .iter()
            .zip(&self.vals[range])
            .map(|(&r, &v)| (r as usize, v))
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let range = self.col_ptr[col]..self.col_ptr[col + 1];
        match self.rows[range.clone()].binary_search(&(row as u32)) {
            Ok(p) => self.vals[range.start + p],
            Err(_) => ZERO,
        }
    }

    /// All stored entries as `(row, col, value)`, sorted by row then column.
    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let mut t: Vec<_> = (0..self.dim)
            .flat_map(|j| self.column(j).map(move |(i, v)| (i, j, v)))
            .collect();
        t.sort_unstable_by_key(|e| (e.0, e.1));
        t
    }

    pub fn adjoint(&self) -> Self {
        let mut by_col: Vec<Vec<(u32, Complex64)>> = vec![Vec::new(); self.dim];
        for j in 0..self.dim {
            for (i, v) in self.column(j) {
                by_col[i].push((j as u32, v.conj()));
            }
        }
        Self::from_columns(self.dim, |j, out| out.append(&mut by_col[j]))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= c;
        }
        out
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// `Σ c_i A_i` over operators of equal dimension.
    pub fn linear_combination(terms: &[(Complex64, &SparseOperator)]) -> Result<Self> {
        let dim = terms.first().map(|t| t.1.dim).unwrap_or(0);
        if terms.iter().any(|t| t.1.dim != dim) {
            return Err(Error::Dimension("operators of different dimension".into()));
        }
        Ok(Self::from_columns(dim, |j, out| {
            for (c, a) in terms {
                out.extend(a.column(j).map(|(i, v)| (i as u32, v * c)));
            }
        }))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        Self::linear_combination(&[(one, self), (one, other)])
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::linear_combination(&[(Complex64::new(1.0, 0.0), self), (Complex64::new(-1.0, 0.0), other)])
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension("operators of different dimension".into()));
        }
        Ok(Self::from_columns(self.dim, |j, out| {
            for (k, b) in other.column(j) {
                out.extend(self.column(k).map(|(i, a)| (i as u32, a * b)));
            }
        }))
    }

    /// `Re[A] = (A + A*)/2`.
    pub fn hermitian_part(&self) -> Self {
        let half = Complex64::new(0.5, 0.0);
        Self::linear_combination(&[(half, self), (half, &self.adjoint())]).expect("same dimension")
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Largest entry modulus of `A − B`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self
            .sub(other)?
            .vals
            .iter()
            .fold(0.0f64, |m, v| m.max(v.norm())))
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    /// Frobenius inner product `Tr(A* B)`.
    pub fn frobenius_inner(&self, other: &Self) -> Complex64 {
        let mut acc = ZERO;
        for j in 0..self.dim {
            for (i, a) in self.column(j) {
                acc += a.conj() * other.get(i, j);
            }
        }
        acc
    }

    /// `max |A_ij − conj A_ji|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint()).expect("same dimension")
    }

    /// Keeps the rows and columns for which `keep` is true and zeroes the rest.
    pub fn compress_to(&self, keep: &[bool]) -> Self {
        Self::from_columns(self.dim, |j, out| {
            if keep[j] {
                out.extend(self.column(j).filter(|e| keep[e.0]).map(|(i, v)| (i as u32, v)));
            }
        })
    }

    /// Writes one line `row col re im` per stored entry, sorted by row then
    /// column. Floats use the shortest representation that round-trips.
    pub fn write_coo(&self, mut w: impl Write) -> Result<()> {
        for (i, j, v) in self.triplets() {
            writeln!(w, "{i} {j} {:e} {:e}", v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_coo(dim: usize, text: &str) -> Result<Self> {
        let mut triplets = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Format(format!("line {}: expected `row col re im`", n + 1));
            if f.len() != 4 {
                return Err(bad());
            }
            let r = f[0].parse().map_err(|_| bad())?;
            let c = f[1].parse().map_err(|_| bad())?;
            let re: f64 = f[2].parse().map_err(|_| bad())?;
            let im: f64 = f[3].parse().map_err(|_| bad())?;
            triplets.push((r, c, Complex64::new(re, im)));
        }
        Self::from_triplets(dim, &triplets)
    }
}

impl LinearMap for SparseOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.iter_mut().for_each(|v| *v = ZERO);
        for (j, &xj) in x.iter().enumerate() {
            if xj == ZERO {
                continue;
            }
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.rows[p] as usize] += self.vals[p] * xj;
            }
        }
    }

    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (j, yj) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc += self.vals[p].conj() * x[self.rows[p] as usize];
            }
            *yj = acc;
        }
    }

    fn to_dense(&self) -> DMatrix<Complex64> {
        let mut out = DMatrix::from_element(self.dim, self.dim, ZERO);
        for j in 0..self.dim {
            for (i, v) in self.column(j) {
                out[(i, j)] = v;
            }
        }
        out
    }
}

/// `⟨x|y⟩`, antilinear in `x`.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}
