//! Quasi-momentum mode basis and exact Fock-space basis changes.
//!
//! A [`ModeMatrix`] `U` defines new annihilators `α_k = Σ_j U[k][j] a_j`. Site
//! creators then expand as `a_j† = Σ_k U[k][j] α_k†`, so any number state in
//! the site basis is a homogeneous polynomial in the `α_k†`. [`MonomialPoly`]
//! carries those polynomials with a running log-scale factor so large powers
//! neither overflow nor lose the small coefficients relative to the largest.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockBasis, LogFactorials, QuantumState};
use crate::grid::SimplexGrid;
use crate::par::map_indices;

/// Tolerated drift of the norm produced by the polynomial route.
pub const NORM_TOLERANCE: f64 = 1e-6;
/// Tolerated drift of the norm through [`fock_basis_change`].
pub const UNITARY_NORM_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square complex matrix mapping site modes to new modes, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

/// Parameters of the quasi-momentum basis: number of sites and the free angle `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiMomentumParams {
    pub n_modes: usize,
    pub xi: f64,
}

impl QuasiMomentumParams {
    pub fn new(n_modes: usize, xi: f64) -> Self {
        Self { n_modes, xi }
    }
}

impl ModeMatrix {
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "{} entries do not form a {n}x{n} matrix",
                entries.len()
            )));
        }
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.n).map(|r| self.get(r, col)).collect()
    }

    /// Largest entry of `|U†U - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let s: Complex64 = (0..n).map(|k| self.get(k, i).conj() * self.get(k, j)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    /// Reorder rows: row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n || perm.iter().any(|&p| p >= self.n) {
            return Err(Error::InvalidArgument(format!("bad row permutation {perm:?}")));
        }
        let entries = perm.iter().flat_map(|&p| self.row(p).iter().copied()).collect();
        Self::new(self.n, entries)
    }
}

/// Quasi-momentum basis for `n` sites.
///
/// Row `j`, column `k` is `exp(-i k (ξ - 2πj/n)) / √n`. For three sites the rows
/// are α (j = 0), β (offset −2π/3 per site) and γ (offset +2π/3 ≡ −4π/3).
pub fn quasimomentum_matrix(params: QuasiMomentumParams) -> Result<ModeMatrix> {
    let n = params.n_modes;
    if n < 2 {
        return Err(Error::InvalidArgument(
            "quasi-momentum basis needs at least 2 modes".into(),
        ));
    }
    if !params.xi.is_finite() {
        return Err(Error::NonFinite("xi".into()));
    }
    let norm = 1.0 / (n as f64).sqrt();
    let mut entries = Vec::with_capacity(n * n);
    for j in 0..n {
        let offset = params.xi - 2.0 * PI * j as f64 / n as f64;
        for k in 0..n {
            entries.push(Complex64::from_polar(norm, -(k as f64) * offset));
        }
    }
    ModeMatrix::new(n, entries)
}

/// Homogeneous polynomial in `n_vars` commuting variables.
///
/// The value represented is `exp(log_scale) * Σ_m coeffs[m] x^m`, with `m`
/// ranging over the [`FockBasis`] of the polynomial's degree.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialPoly {
    basis: Arc<FockBasis>,
    coeffs: Vec<Complex64>,
    log_scale: f64,
}

impl MonomialPoly {
    pub fn constant(n_vars: usize) -> Result<Self> {
        let basis = Arc::new(FockBasis::new(n_vars, 0)?);
        Ok(Self {
            basis,
            coeffs: vec![Complex64::new(1.0, 0.0)],
            log_scale: 0.0,
        })
    }

    /// `Σ_k coeffs[k] x_k`.
    pub fn linear(coeffs: &[Complex64]) -> Result<Self> {
        let basis = Arc::new(FockBasis::new(coeffs.len(), 1)?);
        // basis element k of the degree-1 sector is x_k
        let mut p = Self {
            basis,
            coeffs: coeffs.to_vec(),
            log_scale: 0.0,
        };
        p.rescale();
        Ok(p)
    }

    pub fn n_vars(&self) -> usize {
        self.basis.n_modes()
    }

    pub fn degree(&self) -> u32 {
        self.basis.total_atoms()
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Coefficients relative to `exp(log_scale)`.
    pub fn scaled_coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Actual coefficient of `x^exponents`; may overflow for huge polynomials.
    pub fn coeff(&self, exponents: &[u32]) -> Complex64 {
        self.basis
            .index_of(exponents)
            .map_or(ZERO, |i| self.coeffs[i] * self.log_scale.exp())
    }

    fn rescale(&mut self) {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max > 0.0 && max.is_finite() {
            let inv = 1.0 / max;
            for c in &mut self.coeffs {
                *c *= inv;
            }
            self.log_scale += max.ln();
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n_vars() != other.n_vars() {
            return Err(Error::InvalidArgument("polynomials over different variables".into()));
        }
        let n = self.n_vars();
        let basis = Arc::new(FockBasis::new(n, self.degree() + other.degree())?);
        let mut coeffs = vec![ZERO; basis.dim()];
        let mut sum = vec![0u32; n];
        let rhs: Vec<(&[u32], Complex64)> = other
            .basis
            .iter()
            .zip(other.coeffs.iter().copied())
            .filter(|(_, c)| *c != ZERO)
            .collect();
        for (ea, &ca) in self.basis.iter().zip(&self.coeffs) {
            if ca == ZERO {
                continue;
            }
            for &(eb, cb) in &rhs {
                for ((s, a), b) in sum.iter_mut().zip(ea).zip(eb) {
                    *s = a + b;
                }
                let k = basis.index_of(&sum).expect("exponent sum has the product degree");
                coeffs[k] += ca * cb;
            }
        }
        let mut p = Self {
            basis,
            coeffs,
            log_scale: self.log_scale + other.log_scale,
        };
        p.rescale();
        Ok(p)
    }

    /// `self^e` by repeated multiplication.
    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::constant(self.n_vars())?;
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Read the polynomial as creators acting on vacuum: `x^m → √(m!) |m⟩`,
    /// times `exp(extra_log)`.
    pub fn to_fock_state(&self, extra_log: f64) -> Result<QuantumState> {
        let lf = LogFactorials::new(self.degree());
        let amplitudes = self
            .basis
            .iter()
            .zip(&self.coeffs)
            .map(|(m, c)| {
                if *c == ZERO {
                    return ZERO;
                }
                let log_mag = c.norm().ln() + self.log_scale + 0.5 * lf.of_occupations(m) + extra_log;
                Complex64::from_polar(log_mag.exp(), c.arg())
            })
            .collect();
        QuantumState::new(Arc::clone(&self.basis), amplitudes)
    }
}

/// `|N, …, N⟩` (site basis) rewritten in the occupation basis of the new modes of `u`.
pub fn product_fock_in_new_basis(u: &ModeMatrix, atoms_per_site: u32) -> Result<QuantumState> {
    let n = u.size();
    let mut site_product = MonomialPoly::constant(n)?;
    for j in 0..n {
        site_product = site_product.mul(&MonomialPoly::linear(&u.column(j))?)?;
    }
    let poly = site_product.pow(atoms_per_site)?;
    let extra = -0.5 * n as f64 * LogFactorials::new(atoms_per_site).get(atoms_per_site);
    let state = poly.to_fock_state(extra)?;
    let (normalized, norm) = state.normalize()?;
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::PrecisionLoss { norm, expected: 1.0 });
    }
    Ok(normalized)
}

/// Express `state` (site occupations) in the occupation basis of the new modes of `u`.
///
/// `u` is factored into two-mode rotations and phases; each rotation acts on
/// blocks of fixed pair occupation through the exponential of its generator.
pub fn fock_basis_change(u: &ModeMatrix, state: &QuantumState) -> Result<QuantumState> {
    let n = u.size();
    if state.n_modes() != n {
        return Err(Error::BasisMismatch(format!(
            "{n}x{n} mode matrix applied to a {}-mode state",
            state.n_modes()
        )));
    }
    let basis = state.basis_arc().clone();
    let mut amps = state.amplitudes().to_vec();
    let (rotations, phases) = givens_factors(u);
    for g in &rotations {
        apply_phases(&basis, &mut amps, &g.pair_phase(1.0));
        apply_rotation(&basis, &mut amps, g.p, g.q, g.theta);
        apply_phases(&basis, &mut amps, &g.pair_phase(-1.0));
    }
    apply_phases(&basis, &mut amps, &phases);
    let out = QuantumState::new(basis, amps)?;
    let (before, after) = (state.norm(), out.norm());
    if (before - after).abs() > UNITARY_NORM_TOLERANCE * before.max(1.0) {
        return Err(Error::PrecisionLoss {
            norm: after,
            expected: before,
        });
    }
    Ok(out)
}

/// `D R(θ) D†` on modes `(p, q)` with `D = diag(1, e^{−iφ})`.
struct Givens {
    p: usize,
    q: usize,
    theta: f64,
    phi: f64,
    n: usize,
}

impl Givens {
    fn pair_phase(&self, sign: f64) -> Vec<Complex64> {
        let mut d = vec![Complex64::new(1.0, 0.0); self.n];
        d[self.q] = Complex64::from_polar(1.0, -sign * self.phi);
        d
    }
}

/// `V = G_1 ⋯ G_k Λ` for the substitution matrix `V[j][k] = U[k][j]`.
fn givens_factors(u: &ModeMatrix) -> (Vec<Givens>, Vec<Complex64>) {
    let n = u.size();
    let mut m: Vec<Complex64> = (0..n * n).map(|i| u.get(i % n, i / n)).collect();
    let mut out = Vec::new();
    for c in 0..n {
        for r in (c + 1..n).rev() {
            let (p, q) = (r - 1, r);
            let (x, y) = (m[p * n + c], m[q * n + c]);
            if y.norm() == 0.0 {
                continue;
            }
            let (theta, phi) = if x.norm() == 0.0 {
                (PI / 2.0, -(-y).arg())
            } else {
                let t = -y / x;
                (t.norm().atan(), -t.arg())
            };
            let (cs, sn) = (theta.cos(), theta.sin());
            // rows ← W rows with W = [[c, −s e^{iφ}], [s e^{−iφ}, c]]
            for k in 0..n {
                let (a, b) = (m[p * n + k], m[q * n + k]);
                m[p * n + k] = a * cs - b * Complex64::from_polar(sn, phi);
                m[q * n + k] = a * Complex64::from_polar(sn, -phi) + b * cs;
            }
            m[q * n + c] = ZERO;
            out.push(Givens { p, q, theta, phi, n });
        }
    }
    let diag = (0..n).map(|i| m[i * n + i]).collect();
    (out, diag)
}

/// Multiply each amplitude by `Π_j d_j^{s_j}`.
fn apply_phases(basis: &FockBasis, amps: &mut [Complex64], d: &[Complex64]) {
    if d.iter().all(|z| *z == Complex64::new(1.0, 0.0)) {
        return;
    }
    for (occ, a) in basis.iter().zip(amps.iter_mut()) {
        let angle: f64 = occ.iter().zip(d).map(|(&s, z)| s as f64 * z.arg()).sum();
        *a *= Complex64::from_polar(1.0, angle);
    }
}

/// `exp(θ L)` with `L = a_q†a_p − a_p†a_q` on the `m`-atom block, ordered by `s_q`.
fn rotation_block(m: usize, theta: f64) -> nalgebra::DMatrix<Complex64> {
    let dim = m + 1;
    // H = iL is Hermitian
    let mut h = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
    for k in 0..m {
        let v = (((m - k) * (k + 1)) as f64).sqrt();
        h[(k + 1, k)] = Complex64::new(0.0, v);
        h[(k, k + 1)] = Complex64::new(0.0, -v);
    }
    let eig = h.symmetric_eigen();
    let q = &eig.eigenvectors;
    let phases = nalgebra::DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -theta * l)));
    q * phases * q.adjoint()
}

fn apply_rotation(basis: &FockBasis, amps: &mut [Complex64], p: usize, q: usize, theta: f64) {
    let total = basis.total_atoms() as usize;
    let mut blocks: Vec<Option<nalgebra::DMatrix<Complex64>>> = vec![None; total + 1];
    let mut occ = vec![0u32; basis.n_modes()];
    let mut idx = Vec::new();
    let mut v = Vec::new();
    for i in 0..basis.dim() {
        let rep = basis.occupations(i);
        if rep[q] != 0 {
            continue;
        }
        let m = rep[p] as usize;
        if m == 0 {
            continue;
        }
        occ.copy_from_slice(rep);
        idx.clear();
        v.clear();
        for k in 0..=m {
            occ[p] = (m - k) as u32;
            occ[q] = k as u32;
            let j = basis.index_of(&occ).expect("same sector");
            idx.push(j);
            v.push(amps[j]);
        }
        let e = blocks[m].get_or_insert_with(|| rotation_block(m, theta));
        for (r, &j) in idx.iter().enumerate() {
            amps[j] = (0..=m).map(|k| e[(r, k)] * v[k]).sum();
        }
    }
}

/// The same basis change through explicit polynomial expansion of every
/// new-mode number state. Exact in principle but subject to cancellation
/// once the sector holds tens of atoms; kept as an independent cross-check.
pub fn fock_basis_change_monomial(u: &ModeMatrix, state: &QuantumState) -> Result<QuantumState> {
    let n = u.size();
    if state.n_modes() != n {
        return Err(Error::BasisMismatch(format!(
            "{n}x{n} mode matrix applied to a {}-mode state",
            state.n_modes()
        )));
    }
    let total = state.total_atoms();
    let lf = LogFactorials::new(total);
    let site_basis = state.basis();

    let half_log: Vec<f64> = site_basis.iter().map(|occ| 0.5 * lf.of_occupations(occ)).collect();
    let shift = half_log.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<Complex64> = state
        .amplitudes()
        .iter()
        .zip(&half_log)
        .map(|(a, h)| a * (h - shift).exp())
        .collect();

    // powers[k][e] = (α_k† in site creators)^e
    let mut powers = Vec::with_capacity(n);
    for k in 0..n {
        let lin = MonomialPoly::linear(&u.row(k).iter().map(|c| c.conj()).collect::<Vec<_>>())?;
        let mut list = Vec::with_capacity(total as usize + 1);
        list.push(MonomialPoly::constant(n)?);
        for e in 1..=total as usize {
            let next = list[e - 1].mul(&lin)?;
            list.push(next);
        }
        powers.push(list);
    }

    let target = Arc::new(FockBasis::new(n, total)?);
    let amplitudes: Vec<Result<Complex64>> = map_indices(target.dim(), |idx| {
        let m = target.occupations(idx);
        let mut head = MonomialPoly::constant(n)?;
        for k in 0..n - 1 {
            head = head.mul(&powers[k][m[k] as usize])?;
        }
        let last = &powers[n - 1][m[n - 1] as usize];
        let mut sum = vec![0u32; n];
        let mut acc = ZERO;
        for (ea, &ca) in head.basis.iter().zip(&head.coeffs) {
            if ca == ZERO {
                continue;
            }
            for (eb, &cb) in last.basis.iter().zip(&last.coeffs) {
                if cb == ZERO {
                    continue;
                }
                for ((s, a), b) in sum.iter_mut().zip(ea).zip(eb) {
                    *s = a + b;
                }
                let i = site_basis.index_of(&sum).expect("same total");
                acc += (ca * cb).conj() * weights[i];
            }
        }
        let log_factor = head.log_scale + last.log_scale + shift - 0.5 * lf.of_occupations(m);
        Ok(acc * log_factor.exp())
    });
    let amplitudes = amplitudes.into_iter().collect::<Result<Vec<_>>>()?;
    let out = QuantumState::new(target, amplitudes)?;

    let (before, after) = (state.norm(), out.norm());
    if (before - after).abs() > UNITARY_NORM_TOLERANCE * before.max(1.0) {
        return Err(Error::PrecisionLoss {
            norm: after,
            expected: before,
        });
    }
    Ok(out)
}

/// `P(N_α, N_β) = |amplitude(N_α, N_β, T − N_α − N_β)|²` for a three-mode state.
pub fn occupation_distribution(state: &QuantumState) -> Result<SimplexGrid> {
    SimplexGrid::from_three_mode_state(state)
}

/// The hat state: occupation distribution of `|N, N, N⟩` in the quasi-momentum basis.
pub fn hat_distribution(atoms_per_site: u32, xi: f64) -> Result<SimplexGrid> {
    let u = quasimomentum_matrix(QuasiMomentumParams::new(3, xi))?;
    occupation_distribution(&product_fock_in_new_basis(&u, atoms_per_site)?)
}
