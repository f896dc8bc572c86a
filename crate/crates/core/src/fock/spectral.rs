//! Norms, extreme eigenvalues and numerical radii of Fock-space operators,
//! plus the `W^{-1/2} A W^{-1/2}` sandwich.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::{inner, norm, LinearMap, SparseOperator};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dimension up to which dense eigensolves are run as a second opinion.
pub const DENSE_CHECK_MAX_DIM: usize = 4096;

/// Seeded random unit vector.
pub fn random_unit(dim: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let n = norm(&x);
    x.iter_mut().for_each(|v| *v /= n);
    x
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn dense_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest singular value.
pub fn dense_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Largest singular value by power iteration on `A*A` from a seeded start.
pub fn operator_norm(a: &dyn LinearMap, tol: f64, seed: u64) -> Result<f64> {
    const MAX_ITER: usize = 20_000;
    let n = a.dim();
    let mut x = random_unit(n, seed);
    let mut y = vec![ZERO; n];
    let mut z = vec![ZERO; n];
    let mut last = f64::NAN;
    for _ in 0..MAX_ITER {
        a.apply(&x, &mut y);
        let rq = inner(&y, &y).re;
        a.apply_adjoint(&y, &mut z);
        let zn = norm(&z);
        if zn == 0.0 {
            return Ok(0.0);
        }
        if (rq - last).abs() <= tol * rq.max(f64::MIN_POSITIVE) {
            return Ok(rq.sqrt());
        }
        last = rq;
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi = zi / zn;
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITER,
        last: last.sqrt(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Krylov vectors per restart cycle.
    pub krylov: usize,
    /// Stop when `‖Hx − θx‖ ≤ tol · max(1, |θ|)`.
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            krylov: 60,
            tol: 1e-11,
            max_restarts: 300,
            seed: 0x5eed,
        }
    }
}

/// Largest eigenvalue of the Hermitian map `h` and a unit eigenvector, by
/// Lanczos with full reorthogonalization and explicit restarts from the
/// current Ritz vector.
pub fn lanczos_max(
    h: &dyn Fn(&[Complex64], &mut [Complex64]),
    dim: usize,
    start: Option<&[Complex64]>,
    opts: LanczosOptions,
) -> Result<(f64, Vec<Complex64>)> {
    let mut x = match start {
        Some(s) if norm(s) > 0.0 => {
            let n = norm(s);
            s.iter().map(|v| v / n).collect()
        }
        _ => random_unit(dim, opts.seed),
    };
    let k_max = opts.krylov.min(dim).max(1);
    let mut theta = f64::NAN;
    let mut w = vec![ZERO; dim];
    for _ in 0..opts.max_restarts {
        let mut basis: Vec<Vec<Complex64>> = vec![x.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        loop {
            let j = basis.len() - 1;
            h(&basis[j], &mut w);
            let a = inner(&basis[j], &w).re;
            alpha.push(a);
            // full reorthogonalization, twice
            for _ in 0..2 {
                for b in &basis {
                    let c = inner(b, &w);
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= bi * c;
                    }
                }
            }
            let bnorm = norm(&w);
            if basis.len() == k_max {
                beta.push(bnorm);
                break;
            }
            if bnorm <= 1e-12 * a.abs().max(1.0) {
                // invariant subspace: continue with a fresh direction so a
                // warm start that is already an eigenvector cannot trap us
                let mut r = random_unit(dim, opts.seed ^ (basis.len() as u64).wrapping_mul(0x9e37_79b9));
                for _ in 0..2 {
                    for b in &basis {
                        let c = inner(b, &r);
                        for (ri, bi) in r.iter_mut().zip(b) {
                            *ri -= bi * c;
                        }
                    }
                }
                let rn = norm(&r);
                if rn < 1e-8 {
                    beta.push(0.0);
                    break;
                }
                beta.push(0.0);
                basis.push(r.iter().map(|v| v / rn).collect());
                continue;
            }
            beta.push(bnorm);
            basis.push(w.iter().map(|v| v / bnorm).collect());
        }
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        let (imax, &tmax) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        theta = tmax;
        let s = eig.eigenvectors.column(imax);
        let mut ritz = vec![ZERO; dim];
        for (i, b) in basis.iter().enumerate() {
            let c = s[i];
            for (r, bi) in ritz.iter_mut().zip(b) {
                *r += bi * c;
            }
        }
        let rn = norm(&ritz);
        ritz.iter_mut().for_each(|v| *v /= rn);
        h(&ritz, &mut w);
        let res: f64 = w
            .iter()
            .zip(&ritz)
            .map(|(hv, v)| (hv - v * theta).norm_sqr())
            .sum::<f64>()
            .sqrt();
        x = ritz;
        if res <= opts.tol * theta.abs().max(1.0) {
            return Ok((theta, x));
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_restarts,
        last: theta,
    })
}

/// Smallest eigenvalue of a Hermitian map.
pub fn lanczos_min(
    h: &dyn Fn(&[Complex64], &mut [Complex64]),
    dim: usize,
    opts: LanczosOptions,
) -> Result<f64> {
    let neg = |x: &[Complex64], y: &mut [Complex64]| {
        h(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
    };
    lanczos_max(&neg, dim, None, opts).map(|(t, _)| -t)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RadiusEstimate {
    /// Largest value of `λ_max(Re(e^{iθ}A))` found; a lower bound for `w(A)`.
    pub estimate: f64,
    /// `sec(π/θ_points)` times the grid maximum; an upper bound for `w(A)`.
    pub upper_bound: f64,
    /// Angle where the estimate was attained.
    pub theta: f64,
}

const GOLDEN_STEPS: usize = 24;

fn radius_search(
    theta_points: usize,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<RadiusEstimate> {
    if theta_points < 16 {
        return Err(Error::InvalidArgument(format!(
            "at least 16 angles are required, got {theta_points}"
        )));
    }
    let step = 2.0 * PI / theta_points as f64;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..theta_points {
        let th = step * i as f64;
        let v = f(th)?;
        if v > best.0 {
            best = (v, th);
        }
    }
    let grid_max = best.0;
    // golden-section refinement on the two neighbouring grid cells
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..GOLDEN_STEPS {
        if fc > best.0 {
            best = (fc, c);
        }
        if fd > best.0 {
            best = (fd, d);
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    for (v, t) in [(fc, c), (fd, d)] {
        if v > best.0 {
            best = (v, t);
        }
    }
    Ok(RadiusEstimate {
        estimate: best.0,
        upper_bound: grid_max.max(0.0) / (PI / theta_points as f64).cos(),
        theta: best.1.rem_euclid(2.0 * PI),
    })
}

/// Numerical radius `w(A) = sup_{‖ψ‖=1} |⟨ψ|Aψ⟩|` of a linear map.
pub fn numerical_radius(a: &dyn LinearMap, theta_points: usize, opts: LanczosOptions) -> Result<RadiusEstimate> {
    let n = a.dim();
    let mut warm: Option<Vec<Complex64>> = None;
    radius_search(theta_points, |th| {
        let e = Complex64::from_polar(0.5, th);
        let h = |x: &[Complex64], y: &mut [Complex64]| {
            a.apply(x, y);
            let mut t = vec![ZERO; x.len()];
            a.apply_adjoint(x, &mut t);
            for (yi, ti) in y.iter_mut().zip(&t) {
                *yi = *yi * e + ti * e.conj();
            }
        };
        // keep a random component so no eigenvector of the previous angle
        // can hide the top of the spectrum at this one
        let start = warm.as_ref().map(|w| {
            let r = random_unit(n, opts.seed ^ th.to_bits());
            w.iter().zip(&r).map(|(a, b)| a + b * 0.3).collect::<Vec<_>>()
        });
        let (val, vec) = lanczos_max(&h, n, start.as_deref(), opts)?;
        warm = Some(vec);
        Ok(val)
    })
}

/// Structure that collapses the angle search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusStructure {
    General,
    /// `A = A*`, so `w(A) = max(λ_max, −λ_min)`.
    Hermitian,
    /// `e^{iθN} A e^{−iθN} = e^{isθ} A` with `s ≠ 0`: every angle gives the
    /// same `λ_max(Re(e^{iθ}A))`.
    Graded,
}

pub fn numerical_radius_structured(
    a: &dyn LinearMap,
    theta_points: usize,
    opts: LanczosOptions,
    structure: RadiusStructure,
) -> Result<RadiusEstimate> {
    let n = a.dim();
    let re = |x: &[Complex64], y: &mut [Complex64]| {
        a.apply(x, y);
        let mut t = vec![ZERO; x.len()];
        a.apply_adjoint(x, &mut t);
        for (yi, ti) in y.iter_mut().zip(&t) {
            *yi = (*yi + ti) * 0.5;
        }
    };
    match structure {
        RadiusStructure::General => numerical_radius(a, theta_points, opts),
        RadiusStructure::Hermitian => {
            // w(A) = ‖A‖; the top of A only fixes the phase. Going through
            // λ_min instead stalls when the bottom sits in a large kernel.
            let (top, _) = lanczos_max(&re, n, None, opts)?;
            let estimate = norm_lanczos(a, opts)?.max(top.abs());
            let theta = if top >= estimate - opts.tol.sqrt() { 0.0 } else { PI };
            Ok(RadiusEstimate {
                estimate,
                upper_bound: estimate,
                theta,
            })
        }
        RadiusStructure::Graded => {
            let (top, _) = lanczos_max(&re, n, None, opts)?;
            Ok(RadiusEstimate {
                estimate: top,
                upper_bound: top,
                theta: 0.0,
            })
        }
    }
}

/// `‖A‖ = λ_max(A*A)^{1/2}` by Lanczos.
pub fn norm_lanczos(a: &dyn LinearMap, opts: LanczosOptions) -> Result<f64> {
    let n = a.dim();
    let h = |x: &[Complex64], y: &mut [Complex64]| {
        let mut t = vec![ZERO; x.len()];
        a.apply(x, &mut t);
        a.apply_adjoint(&t, y);
    };
    lanczos_max(&h, n, None, opts).map(|(t, _)| t.max(0.0).sqrt())
}

/// Numerical radius of a dense matrix by the same angle search with dense
/// eigensolves.
pub fn dense_numerical_radius(m: &DMatrix<Complex64>, theta_points: usize) -> Result<RadiusEstimate> {
    let adj = m.adjoint();
    radius_search(theta_points, |th| {
        let e = Complex64::from_polar(0.5, th);
        let h = m * e + &adj * e.conj();
        Ok(*dense_eigenvalues(&h).last().unwrap_or(&0.0))
    })
}

/// Spectral data of one connected block of a positive semidefinite `W`.
#[derive(Debug, Clone)]
struct Block {
    states: Vec<usize>,
    vectors: DMatrix<Complex64>,
    /// `μ^{-1/2}` for `μ > kernel_tol`, else 0.
    scale: Vec<f64>,
}

/// `W^{-1/2}` on `ker(W)^⊥` (zero on the kernel), computed block by block
/// over the connected components of the sparsity graph of `W`.
#[derive(Debug, Clone)]
pub struct InverseSqrt {
    dim: usize,
    blocks: Vec<Block>,
    kernel_dim: usize,
    min_positive: f64,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Basis states grouped into the connected components of the sparsity graph
/// of `op`, each sorted; components are ordered by their smallest state.
pub fn coupled_blocks(op: &SparseOperator) -> Vec<Vec<usize>> {
    let n = op.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    for j in 0..n {
        for (i, _) in op.column(j) {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        members[r].push(i);
    }
    members.into_iter().filter(|m| !m.is_empty()).collect()
}

/// Smallest eigenvalue of a Hermitian operator by dense eigensolves of its
/// coupled blocks, together with the largest block size.
pub fn block_min_eigenvalue(op: &SparseOperator) -> (f64, usize) {
    let mut low = f64::INFINITY;
    let mut largest = 0;
    for states in coupled_blocks(op) {
        let k = states.len();
        largest = largest.max(k);
        let sub = DMatrix::from_fn(k, k, |a, b| op.get(states[a], states[b]));
        let top = if k == 1 { sub[(0, 0)].re } else { dense_eigenvalues(&sub)[0] };
        low = low.min(top);
    }
    (low, largest)
}

impl InverseSqrt {
    pub fn new(w: &SparseOperator, kernel_tol: f64) -> Result<Self> {
        let n = w.dim();
        let mut blocks = Vec::new();
        let mut kernel_dim = 0;
        let mut min_positive = f64::INFINITY;
        for states in coupled_blocks(w) {
            let k = states.len();
            let sub = DMatrix::from_fn(k, k, |a, b| w.get(states[a], states[b]));
            let eig = sub.symmetric_eigen();
            let mut scale = Vec::with_capacity(k);
            for &mu in eig.eigenvalues.iter() {
                if mu < -kernel_tol {
                    return Err(Error::InvalidArgument(format!(
                        "weight operator has negative eigenvalue {mu:e}"
                    )));
                }
                if mu <= kernel_tol {
                    kernel_dim += 1;
                    scale.push(0.0);
                } else {
                    min_positive = min_positive.min(mu);
                    scale.push(1.0 / mu.sqrt());
                }
            }
            blocks.push(Block {
                states,
                vectors: eig.eigenvectors,
                scale,
            });
        }
        Ok(Self {
            dim: n,
            blocks,
            kernel_dim,
            min_positive,
        })
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    pub fn min_positive_eigenvalue(&self) -> f64 {
        self.min_positive
    }

    pub fn largest_block(&self) -> usize {
        self.blocks.iter().map(|b| b.states.len()).max().unwrap_or(0)
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for b in &self.blocks {
            if b.states.len() == 1 {
                let s = b.states[0];
                y[s] = x[s] * b.scale[0];
                continue;
            }
            let k = b.states.len();
            // coefficients in the eigenbasis
            let mut c = vec![ZERO; k];
            for (e, ce) in c.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (a, &s) in b.states.iter().enumerate() {
                    acc += b.vectors[(a, e)].conj() * x[s];
                }
                *ce = acc * b.scale[e];
            }
            for (a, &s) in b.states.iter().enumerate() {
                let mut acc = ZERO;
                for (e, ce) in c.iter().enumerate() {
                    acc += b.vectors[(a, e)] * ce;
                }
                y[s] = acc;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `W^{-1/2} A W^{-1/2}` restricted to `ker(W)^⊥`, applied lazily.
pub struct Sandwich<'a> {
    a: &'a dyn LinearMap,
    w: InverseSqrt,
}

impl<'a> Sandwich<'a> {
    pub fn new(a: &'a dyn LinearMap, w: &SparseOperator) -> Result<Self> {
        if a.dim() != w.dim() {
            return Err(Error::Dimension("sandwich operands differ in dimension".into()));
        }
        Ok(Self {
            a,
            w: InverseSqrt::new(w, 1e-9)?,
        })
    }

    pub fn weight(&self) -> &InverseSqrt {
        &self.w
    }
}

impl LinearMap for Sandwich<'_> {
    fn dim(&self) -> usize {
        self.w.dim()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.dim();
        let mut t = vec![ZERO; n];
        let mut u = vec![ZERO; n];
        self.w.apply(x, &mut t);
        self.a.apply(&t, &mut u);
        self.w.apply(&u, y);
    }

    fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.dim();
        let mut t = vec![ZERO; n];
        let mut u = vec![ZERO; n];
        self.w.apply(x, &mut t);
        self.a.apply_adjoint(&t, &mut u);
        self.w.apply(&u, y);
    }
}

/// Dense `W^{-1/2} A W^{-1/2}` from one eigendecomposition of `W`, dropping
/// eigenvalues at or below `kernel_tol`.
pub fn dense_sandwich(a: &DMatrix<Complex64>, w: &DMatrix<Complex64>, kernel_tol: f64) -> DMatrix<Complex64> {
    let eig = w.clone().symmetric_eigen();
    let n = w.nrows();
    let mut s = DMatrix::from_element(n, n, ZERO);
    for (i, &mu) in eig.eigenvalues.iter().enumerate() {
        if mu > kernel_tol {
            let v = eig.eigenvectors.column(i);
            s += (&v * v.adjoint()) * Complex64::new(1.0 / mu.sqrt(), 0.0);
        }
    }
    &s * a * &s
}
