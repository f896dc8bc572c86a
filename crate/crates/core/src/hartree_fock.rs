//! Hartree-Fock solution of the half-filled Hubbard model on the torus.
//!
//! One-particle vectors live in `ℓ²(Λ × {↑,↓})` with index `2x + s`, where
//! `s = 0` is spin up (`σ = +1`) and `s = 1` is spin down (`σ = -1`).

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{MomentumPartition, TorusLattice};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Index of `(x, σ)` in the position⊗spin basis; `s = 0` is up.
pub fn spin_index(x: usize, s: usize) -> usize {
    2 * x + s
}

/// `σ = +1` for `s = 0`, `-1` for `s = 1`.
pub fn spin_sign(s: usize) -> f64 {
    if s == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_coupling(g: f64) -> Result<()> {
    if g > 0.0 && g.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveCoupling(g))
    }
}

/// `mean_ξ g / √(ω_ξ² + g²Δ²) − 2`.
pub fn gap_residual(lat: &TorusLattice, g: f64, delta: f64) -> Result<f64> {
    check_coupling(g)?;
    if !(delta > 0.0) {
        return Err(Error::NonPositiveDelta(delta));
    }
    let r2 = (g * delta).powi(2);
    Ok(lat.mean_over_momenta(|w| g / (w * w + r2).sqrt()) - 2.0)
}

fn gap_residual_slope(lat: &TorusLattice, g: f64, delta: f64) -> f64 {
    let r2 = (g * delta).powi(2);
    -lat.mean_over_momenta(|w| g * g * g * delta / (w * w + r2).powf(1.5))
}

/// Root of the gap equation in `(0, 1/2)`.
///
/// Bisection on `(lo, 1/2]`, with `lo` halved from `1/4` until the residual
/// is positive, then a few Newton steps.
pub fn solve_gap(lat: &TorusLattice, g: f64, tol: f64) -> Result<f64> {
    check_coupling(g)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut hi = 0.5;
    let r_hi = gap_residual(lat, g, hi)?;
    if r_hi >= 0.0 {
        return Err(Error::Solver(format!(
            "residual at delta = 1/2 is {r_hi:e}, expected negative"
        )));
    }
    let mut lo = 0.25;
    let mut r_lo = gap_residual(lat, g, lo)?;
    let mut steps = 0;
    while !(r_lo > 0.0 && r_lo.is_finite()) {
        if r_lo <= 0.0 {
            hi = lo;
        }
        lo *= 0.5;
        steps += 1;
        if steps > 1000 || lo == 0.0 {
            return Err(Error::Solver("could not bracket the root from below".into()));
        }
        r_lo = gap_residual(lat, g, lo)?;
    }

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = gap_residual(lat, g, mid)?;
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }

    let mut delta = 0.5 * (lo + hi);
    for _ in 0..8 {
        let r = gap_residual(lat, g, delta)?;
        if r.abs() < 0.01 * tol {
            break;
        }
        let step = r / gap_residual_slope(lat, g, delta);
        let next = delta - step;
        if !(next > lo && next < hi) {
            break;
        }
        delta = next;
    }

    let r = gap_residual(lat, g, delta)?;
    if !(r.abs() < tol) || !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Solver(format!(
            "residual {r:e} at delta = {delta} does not meet tolerance {tol:e}"
        )));
    }
    Ok(delta)
}

/// `F_L(η) = gη − mean_ξ √(ω_ξ² + g²η)`.
pub fn f_l(lat: &TorusLattice, g: f64, eta: f64) -> f64 {
    g * eta - lat.mean_over_momenta(|w| (w * w + g * g * eta).sqrt())
}

/// `g/2 + gΔ² − mean_ξ √(ω_ξ² + g²Δ²)`, the closed-form energy density in the
/// normalization where the interaction energy is `(g/2) Σ_x (ρ_x² − |v_x|²)`.
pub fn hf_energy_density(lat: &TorusLattice, g: f64, delta: f64) -> f64 {
    0.5 * g + f_l(lat, g, delta * delta)
}

/// `⟨Φ_HF| H |Φ_HF⟩ / |Λ|` for `H = T + g Σ n↑ n↓`, which is
/// `g/4 + F_L(Δ²)`.
pub fn slater_energy_density(lat: &TorusLattice, g: f64, delta: f64) -> f64 {
    0.25 * g + f_l(lat, g, delta * delta)
}

/// Hopping matrix on `ℓ²(Λ)`: `-1/2` between torus neighbours, so that its
/// symbol is `ω_ξ = -Σ cos ξ_ν`.
pub fn hopping_matrix(lat: &TorusLattice) -> DMatrix<f64> {
    let n = lat.num_sites();
    let mut t = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in lat.neighbours(x) {
            // for L = 2 per axis both directions hit the same site; L ≥ 4 here
            t[(x, y)] = -0.5;
        }
    }
    t
}

/// Diagonal gauge `G = diag((-1)^x)`.
pub fn gauge_matrix(lat: &TorusLattice) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_iterator(
        lat.num_sites(),
        (0..lat.num_sites()).map(|x| lat.gauge_sign(x)),
    ))
}

/// `A ⊗ 1₂` in the position⊗spin basis.
fn spin_lift(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let mut out = DMatrix::from_element(2 * n, 2 * n, ZERO);
    for x in 0..n {
        for y in 0..n {
            let v = a[(x, y)];
            if v != 0.0 {
                out[(2 * x, 2 * y)] = Complex64::new(v, 0.0);
                out[(2 * x + 1, 2 * y + 1)] = Complex64::new(v, 0.0);
            }
        }
    }
    out
}

/// `T ⊗ 1` on `ℓ²(Λ × {↑,↓})`.
pub fn spin_hopping(lat: &TorusLattice) -> DMatrix<Complex64> {
    spin_lift(&hopping_matrix(lat))
}

/// `H_r = T ⊗ 1 + r G ⊗ σ³`.
pub fn one_particle_hamiltonian(lat: &TorusLattice, r: f64) -> DMatrix<Complex64> {
    let mut h = spin_hopping(lat);
    for x in 0..lat.num_sites() {
        let gx = lat.gauge_sign(x);
        h[(2 * x, 2 * x)] += r * gx;
        h[(2 * x + 1, 2 * x + 1)] -= r * gx;
    }
    h
}

/// Plane wave `φ_ξ(y) = e^{-iξ·y} / √|Λ|`, evaluated at every site.
pub fn plane_wave(lat: &TorusLattice, xi: usize) -> Vec<Complex64> {
    let norm = 1.0 / (lat.num_sites() as f64).sqrt();
    (0..lat.num_sites())
        .map(|y| Complex64::from_polar(norm, -lat.phase(xi, y)))
        .collect()
}

/// `a_{ξ,κ} = √(1 + κ ω / λ)`.
fn amplitude(omega: f64, lambda: f64, kappa: f64) -> f64 {
    (1.0 + kappa * omega / lambda).max(0.0).sqrt()
}

/// `ψ_{ξ,σ,κ}` and its energy `κ λ_ξ`, for `ξ ∈ Λ*₊`.
pub fn eigenpair(
    lat: &TorusLattice,
    partition: &MomentumPartition,
    r: f64,
    xi: usize,
    sigma: f64,
    kappa: f64,
) -> Result<(DVector<Complex64>, f64)> {
    if !partition.contains_plus(xi) {
        return Err(Error::NotInPlusHalf(xi));
    }
    let omega = lat.dispersion(xi);
    let lambda = (omega * omega + r * r).sqrt();
    let s = if sigma > 0.0 { 0 } else { 1 };
    let c1 = sigma * amplitude(omega, lambda, kappa) / 2f64.sqrt();
    let c2 = kappa * amplitude(omega, lambda, -kappa) / 2f64.sqrt();
    let phi = plane_wave(lat, xi);
    let phi_pi = plane_wave(lat, lat.shift_by_pi(xi));
    let mut psi = DVector::from_element(2 * lat.num_sites(), ZERO);
    for y in 0..lat.num_sites() {
        psi[spin_index(y, s)] = phi[y] * c1 + phi_pi[y] * c2;
    }
    Ok((psi, kappa * lambda))
}

/// Labels of one HF orbital.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalLabel {
    pub xi: usize,
    pub sigma: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone)]
pub struct HartreeFockSolution {
    pub dim: usize,
    pub length: usize,
    pub g: f64,
    pub delta: f64,
    /// `r = gΔ`.
    pub gap: f64,
    /// Fermi level of `H_r`, whose spectrum is symmetric about zero.
    pub fermi_level: f64,
    /// Constant `g/2` separating `H_r` from the full self-consistent
    /// one-particle operator `h_HF(P_HF) = H_r + g/2`.
    pub hartree_shift: f64,
    /// Orbital `k` has label `labels[k]`, energy `orbital_energies[k]` and
    /// coefficient column `orbitals.column(k)`. Order is `(κ, ξ, σ)` with
    /// `κ = -1` first, so occupied orbitals are `0..|Λ|`.
    pub labels: Vec<OrbitalLabel>,
    pub orbital_energies: Vec<f64>,
    pub orbitals: DMatrix<Complex64>,
    pub projector: DMatrix<Complex64>,
}

impl HartreeFockSolution {
    pub fn solve(lat: &TorusLattice, g: f64, tol: f64) -> Result<Self> {
        let delta = solve_gap(lat, g, tol)?;
        hf_projector(lat, g, delta)
    }

    pub fn num_sites(&self) -> usize {
        self.labels.len() / 2
    }

    pub fn num_modes(&self) -> usize {
        self.labels.len()
    }

    pub fn occupied(&self) -> std::ops::Range<usize> {
        0..self.num_sites()
    }

    pub fn unoccupied(&self) -> std::ops::Range<usize> {
        self.num_sites()..self.num_modes()
    }

    pub fn is_occupied(&self, k: usize) -> bool {
        k < self.num_sites()
    }

    /// `ω_k = |e_k − μ_N|`.
    pub fn excitation_energy(&self, k: usize) -> f64 {
        (self.orbital_energies[k] - self.fermi_level).abs()
    }

    /// `P⊥ = 1 − P_HF`.
    pub fn complement(&self) -> DMatrix<Complex64> {
        DMatrix::identity(self.projector.nrows(), self.projector.ncols()) - &self.projector
    }

    /// `ρ_HF(x) = Σ_σ ⟨δ_{x,σ}|P_HF δ_{x,σ}⟩`.
    pub fn density(&self) -> Vec<f64> {
        (0..self.num_sites())
            .map(|x| self.projector[(2 * x, 2 * x)].re + self.projector[(2 * x + 1, 2 * x + 1)].re)
            .collect()
    }

    /// Third component of the spin density, `P_{x↑,x↑} − P_{x↓,x↓}`.
    pub fn spin_density(&self) -> Vec<f64> {
        (0..self.num_sites())
            .map(|x| self.projector[(2 * x, 2 * x)].re - self.projector[(2 * x + 1, 2 * x + 1)].re)
            .collect()
    }

    pub fn energy_density(&self, lat: &TorusLattice) -> f64 {
        hf_energy_density(lat, self.g, self.delta)
    }
}

/// Builds the orbital table and `P_HF = Σ_{ξ∈Λ*₊, σ} |ψ_{ξ,σ,-}⟩⟨ψ_{ξ,σ,-}|`.
pub fn hf_projector(lat: &TorusLattice, g: f64, delta: f64) -> Result<HartreeFockSolution> {
    check_coupling(g)?;
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    let r = g * delta;
    let part = lat.momentum_partition();
    let n = lat.num_sites();
    let mut labels = Vec::with_capacity(2 * n);
    let mut energies = Vec::with_capacity(2 * n);
    let mut orbitals = DMatrix::from_element(2 * n, 2 * n, ZERO);
    for kappa in [-1.0, 1.0] {
        for &xi in &part.plus {
            for sigma in [1.0, -1.0] {
                let (psi, e) = eigenpair(lat, &part, r, xi, sigma, kappa)?;
                orbitals.set_column(labels.len(), &psi);
                labels.push(OrbitalLabel { xi, sigma, kappa });
                energies.push(e);
            }
        }
    }
    let occ = orbitals.columns(0, n);
    let projector = &occ * occ.adjoint();
    Ok(HartreeFockSolution {
        dim: lat.dim(),
        length: lat.length(),
        g,
        delta,
        gap: r,
        fermi_level: 0.0,
        hartree_shift: 0.5 * g,
        labels,
        orbital_energies: energies,
        orbitals,
        projector,
    })
}

/// Spectral projector `1[H < 0]` from a dense eigensolve.
pub fn spectral_projector(h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut p = DMatrix::from_element(n, n, ZERO);
    for (i, &e) in eig.eigenvalues.iter().enumerate() {
        if e < 0.0 {
            let v = eig.eigenvectors.column(i);
            p += &v * v.adjoint();
        }
    }
    p
}

/// `(ρ, v⃗)` with `γ_x = (ρ 1 + v⃗·σ⃗)/2`, i.e. `ρ = Tr γ_x`, `v_i = Tr σ_i γ_x`.
pub fn pauli_decompose(block: &[[Complex64; 2]; 2]) -> (f64, [f64; 3]) {
    let rho = block[0][0].re + block[1][1].re;
    let v1 = block[1][0].re + block[0][1].re;
    // Tr(σ₂ γ) = i γ₀₁ − i γ₁₀
    let v2 = (Complex64::i() * (block[0][1] - block[1][0])).re;
    let v3 = block[0][0].re - block[1][1].re;
    (rho, [v1, v2, v3])
}

/// The 2×2 spin block of `γ` at site `x`.
pub fn site_block(gamma: &DMatrix<Complex64>, x: usize) -> [[Complex64; 2]; 2] {
    [
        [gamma[(2 * x, 2 * x)], gamma[(2 * x, 2 * x + 1)]],
        [gamma[(2 * x + 1, 2 * x)], gamma[(2 * x + 1, 2 * x + 1)]],
    ]
}

fn check_admissible(lat: &TorusLattice, gamma: &DMatrix<Complex64>) -> Result<()> {
    let n = 2 * lat.num_sites();
    if gamma.nrows() != n || gamma.ncols() != n {
        return Err(Error::Dimension(format!(
            "expected a {n}×{n} density matrix, got {}×{}",
            gamma.nrows(),
            gamma.ncols()
        )));
    }
    let herm = (gamma - gamma.adjoint()).norm();
    if herm > 1e-9 {
        return Err(Error::Inadmissible(format!("not Hermitian (deviation {herm:e})")));
    }
    let trace = gamma.trace().re;
    if (trace - lat.num_sites() as f64).abs() > 1e-9 {
        return Err(Error::Inadmissible(format!(
            "trace {trace} differs from |Λ| = {}",
            lat.num_sites()
        )));
    }
    let eig = gamma.clone().symmetric_eigen().eigenvalues;
    let lo = eig.min();
    let hi = eig.max();
    if lo < -1e-9 || hi > 1.0 + 1e-9 {
        return Err(Error::Inadmissible(format!("spectrum [{lo}, {hi}] leaves [0, 1]")));
    }
    Ok(())
}

/// Slater-determinant energy `Tr[(T⊗1)γ] + (g/4) Σ_x (ρ_x² − |v⃗_x|²)`.
///
/// This is `⟨Φ|T + g Σ n↑n↓|Φ⟩` for the Slater determinant with one-particle
/// density matrix `γ`, since `Σ_x det γ_x = (1/4) Σ_x (ρ_x² − |v⃗_x|²)`.
pub fn hf_functional(lat: &TorusLattice, g: f64, gamma: &DMatrix<Complex64>) -> Result<f64> {
    check_admissible(lat, gamma)?;
    let t = hopping_matrix(lat);
    let mut kinetic = 0.0;
    for x in 0..lat.num_sites() {
        for y in lat.neighbours(x) {
            let txy = t[(x, y)];
            kinetic += txy * (gamma[(2 * y, 2 * x)].re + gamma[(2 * y + 1, 2 * x + 1)].re);
        }
    }
    let interaction: f64 = (0..lat.num_sites())
        .map(|x| {
            let (rho, v) = pauli_decompose(&site_block(gamma, x));
            rho * rho - v.iter().map(|c| c * c).sum::<f64>()
        })
        .sum();
    Ok(kinetic + 0.25 * g * interaction)
}

/// Gradient of [`hf_functional`]: `T⊗1 + g(ρ_x 1 − γ_x)` on each site block.
pub fn effective_hamiltonian(lat: &TorusLattice, g: f64, gamma: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut h = spin_hopping(lat);
    for x in 0..lat.num_sites() {
        let b = site_block(gamma, x);
        let rho = b[0][0] + b[1][1];
        for s in 0..2 {
            for t in 0..2 {
                let id = if s == t { rho } else { ZERO };
                h[(2 * x + s, 2 * x + t)] += (id - b[s][t]) * g;
            }
        }
    }
    h
}

/// The two readings of the constant `a`, `mean_ξ ω²/(ω² + c)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConstantA {
    /// `c = (g/2)²`, the variant used for the lower-bound check.
    pub half_coupling: f64,
    /// `c = g²`.
    pub full_coupling: f64,
}

pub fn lower_bound_constant_a(lat: &TorusLattice, g: f64) -> ConstantA {
    let h2 = 0.25 * g * g;
    let f2 = g * g;
    ConstantA {
        half_coupling: lat.mean_over_momenta(|w| w * w / (w * w + h2)),
        full_coupling: lat.mean_over_momenta(|w| w * w / (w * w + f2)),
    }
}

/// `4^{-d} d² / (d² + g²)`.
pub fn a_lower_bound(d: usize, g: f64) -> f64 {
    let d2 = (d * d) as f64;
    4f64.powi(-(d as i32)) * d2 / (d2 + g * g)
}

/// Random Hermitian matrix with operator norm at most one.
pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let mut k = DMatrix::from_element(n, n, ZERO);
    for i in 0..n {
        k[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            k[(i, j)] = z;
            k[(j, i)] = z.conj();
        }
    }
    let norm = k
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, e| m.max(e.abs()));
    if norm > 0.0 {
        k /= Complex64::new(norm, 0.0);
    }
    k
}

/// Rank-`rank` projector onto the lowest eigenvectors of `h`.
pub fn lowest_projector(h: &DMatrix<Complex64>, rank: usize) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = h.nrows();
    let mut p = DMatrix::from_element(n, n, ZERO);
    for &i in &order[..rank] {
        let v = eig.eigenvectors.column(i);
        p += &v * v.adjoint();
    }
    p
}

/// Seeded projector perturbations of `P_HF`: the occupied spaces of
/// `H_{gΔ} + εK` with random Hermitian `‖K‖ ≤ 1`, alternating
/// `ε ∈ {0.01, 0.1}`.
pub fn perturbed_projectors(
    lat: &TorusLattice,
    hf: &HartreeFockSolution,
    count: usize,
    seed: u64,
) -> Vec<DMatrix<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = one_particle_hamiltonian(lat, hf.gap);
    let n = h.nrows();
    (0..count)
        .map(|i| {
            let eps = if i % 2 == 0 { 0.01 } else { 0.1 };
            let k = random_hermitian(n, &mut rng);
            lowest_projector(&(&h + k * Complex64::new(eps, 0.0)), lat.num_sites())
        })
        .collect()
}

/// Header of a projector file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorHeader {
    pub dim: u64,
    pub length: u64,
    pub g: f64,
    pub delta: f64,
}

/// Writes `d, L` as little-endian `u64`, then `g, Δ` and the matrix entries
/// as little-endian `f64`, row-major with real and imaginary parts
/// interleaved.
pub fn write_projector(
    mut w: impl Write,
    header: ProjectorHeader,
    p: &DMatrix<Complex64>,
) -> Result<()> {
    w.write_all(&header.dim.to_le_bytes())?;
    w.write_all(&header.length.to_le_bytes())?;
    w.write_all(&header.g.to_le_bytes())?;
    w.write_all(&header.delta.to_le_bytes())?;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let z = p[(i, j)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_projector(mut r: impl Read) -> Result<(ProjectorHeader, DMatrix<Complex64>)> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() < 32 {
        return Err(Error::Format("file shorter than the 32-byte header".into()));
    }
    let word = |i: usize| -> [u8; 8] { buf[8 * i..8 * i + 8].try_into().unwrap() };
    let header = ProjectorHeader {
        dim: u64::from_le_bytes(word(0)),
        length: u64::from_le_bytes(word(1)),
        g: f64::from_le_bytes(word(2)),
        delta: f64::from_le_bytes(word(3)),
    };
    let sites = (header.length as u128)
        .checked_pow(header.dim as u32)
        .ok_or_else(|| Error::Format("lattice size overflows".into()))?;
    let n = 2 * sites;
    let expected = 32u128 + 16 * n * n;
    if buf.len() as u128 != expected {
        return Err(Error::Format(format!(
            "expected {expected} bytes for d = {}, L = {}, found {}",
            header.dim,
            header.length,
            buf.len()
        )));
    }
    let n = n as usize;
    let mut p = DMatrix::from_element(n, n, ZERO);
    for i in 0..n {
        for j in 0..n {
            let base = 4 + 2 * (i * n + j);
            p[(i, j)] = Complex64::new(f64::from_le_bytes(word(base)), f64::from_le_bytes(word(base + 1)));
        }
    }
    Ok((header, p))
}
