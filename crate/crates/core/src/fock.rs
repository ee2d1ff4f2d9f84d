//! Fixed-total-number bosonic Fock space.
//!
//! A [`FockBasis`] enumerates every occupation vector of `n_modes` modes holding
//! exactly `total_atoms` atoms. Elements are ordered lexicographically
//! *descending*, so for three modes and two atoms the order is
//!
//! ```text
//! (2,0,0) (1,1,0) (1,0,1) (0,2,0) (0,1,1) (0,0,2)
//! ```
//!
//! Indexing is a combinatorial ranking, so `index_of` never searches.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Minimum norm accepted by [`QuantumState::normalize`].
pub const MIN_NORM: f64 = 1e-300;

/// `ln(k!)`.
///
/// Exact summation of logarithms below 1024, Stirling series above. Both
/// branches stay well inside 1e-13 relative error.
pub fn log_factorial(k: u32) -> f64 {
    if k < 2 {
        return 0.0;
    }
    if k < 1024 {
        return (2..=k).map(|i| (i as f64).ln()).sum();
    }
    let n = k as f64;
    let inv = 1.0 / n;
    let inv2 = inv * inv;
    // ln n! = n ln n - n + ln(2 pi n)/2 + 1/12n - 1/360n^3 + 1/1260n^5
    n * n.ln() - n
        + 0.5 * (2.0 * std::f64::consts::PI * n).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// Cached `ln(k!)` for `k <= max`.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(max: u32) -> Self {
        let mut table = Vec::with_capacity(max as usize + 1);
        let mut acc = 0.0;
        table.push(0.0);
        for k in 1..=max {
            acc += (k as f64).ln();
            table.push(acc);
        }
        Self { table }
    }

    #[inline]
    pub fn get(&self, k: u32) -> f64 {
        self.table[k as usize]
    }

    /// `sum_j ln(occ_j!)`.
    pub fn of_occupations(&self, occ: &[u32]) -> f64 {
        occ.iter().map(|&k| self.get(k)).sum()
    }
}

/// One basis element: atoms per mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationVector(pub Vec<u32>);

impl OccupationVector {
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for OccupationVector {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, "⟩")
    }
}

/// All occupation vectors of a fixed-total sector, in descending lexicographic order.
#[derive(Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_modes: usize,
    total_atoms: u32,
    dim: usize,
    /// `counts[m * (total + 1) + t]` = number of ways to put `t` atoms in `m` modes.
    counts: Vec<usize>,
    /// Flat `dim x n_modes` occupation table.
    occupations: Vec<u32>,
}

impl fmt::Debug for FockBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FockBasis")
            .field("n_modes", &self.n_modes)
            .field("total_atoms", &self.total_atoms)
            .field("dim", &self.dim)
            .finish()
    }
}

impl FockBasis {
    pub fn new(n_modes: usize, total_atoms: u32) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidArgument("n_modes must be at least 1".into()));
        }
        let overflow = || Error::DimensionOverflow { n_modes, total_atoms };
        let dim = binomial(total_atoms as u64 + n_modes as u64 - 1, n_modes as u64 - 1)
            .and_then(|d| usize::try_from(d).ok())
            .ok_or_else(overflow)?;
        let width = total_atoms as usize + 1;
        let table_len = (n_modes + 1).checked_mul(width).ok_or_else(overflow)?;
        let mut counts = Vec::new();
        counts.try_reserve_exact(table_len).map_err(|_| overflow())?;
        counts.resize(table_len, 0usize);
        counts[0] = 1;
        for m in 1..=n_modes {
            // count(m, t) = sum_{k<=t} count(m-1, k)
            let mut acc = 0usize;
            for t in 0..width {
                acc = acc.checked_add(counts[(m - 1) * width + t]).ok_or_else(overflow)?;
                counts[m * width + t] = acc;
            }
        }
        debug_assert_eq!(dim, counts[n_modes * width + total_atoms as usize]);
        let len = dim.checked_mul(n_modes).ok_or_else(overflow)?;
        let mut occupations = Vec::new();
        occupations.try_reserve_exact(len).map_err(|_| overflow())?;

        let mut current = vec![0u32; n_modes];
        current[0] = total_atoms;
        loop {
            occupations.extend_from_slice(&current);
            if !next_descending(&mut current) {
                break;
            }
        }
        debug_assert_eq!(occupations.len(), len);
        Ok(Self {
            n_modes,
            total_atoms,
            dim,
            counts,
            occupations,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn total_atoms(&self) -> u32 {
        self.total_atoms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Occupations of the `i`-th basis element.
    #[inline]
    pub fn occupations(&self, i: usize) -> &[u32] {
        &self.occupations[i * self.n_modes..(i + 1) * self.n_modes]
    }

    pub fn vector_at(&self, i: usize) -> OccupationVector {
        OccupationVector(self.occupations(i).to_vec())
    }

    #[inline]
    fn count(&self, modes: usize, atoms: u32) -> usize {
        self.counts[modes * (self.total_atoms as usize + 1) + atoms as usize]
    }

    /// Rank of an occupation vector, `None` if it does not belong to this sector.
    pub fn index_of(&self, occ: &[u32]) -> Option<usize> {
        if occ.len() != self.n_modes {
            return None;
        }
        let mut remaining = self.total_atoms;
        let mut index = 0;
        for (i, &k) in occ[..self.n_modes - 1].iter().enumerate() {
            if k > remaining {
                return None;
            }
            if k < remaining {
                index += self.count(self.n_modes - i, remaining - k - 1);
            }
            remaining -= k;
        }
        (occ[self.n_modes - 1] == remaining).then_some(index)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.occupations.chunks_exact(self.n_modes)
    }

    /// Same layout, sector shifted by `delta` atoms.
    pub fn shifted(&self, delta: i64) -> Result<Self> {
        let total = self.total_atoms as i64 + delta;
        if total < 0 {
            return Err(Error::EmptySector);
        }
        let total = u32::try_from(total).map_err(|_| Error::DimensionOverflow {
            n_modes: self.n_modes,
            total_atoms: u32::MAX,
        })?;
        Self::new(self.n_modes, total)
    }
}

/// `C(n, k)` or `None` on overflow.
fn binomial(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact: acc * (n - i) is divisible by (i + 1)
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Advance to the next occupation vector in descending lexicographic order.
fn next_descending(occ: &mut [u32]) -> bool {
    let n = occ.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| occ[i] > 0) else {
        return false;
    };
    let tail: u32 = occ[i + 1..].iter().sum();
    occ[i] -= 1;
    occ[i + 1] = tail + 1;
    for x in &mut occ[i + 2..] {
        *x = 0;
    }
    true
}

/// Complex amplitudes over a [`FockBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    basis: Arc<FockBasis>,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn new(basis: Arc<FockBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::BasisMismatch(format!(
                "{} amplitudes for a basis of dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("state amplitude".into()));
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let dim = basis.dim();
        Self {
            basis,
            amplitudes: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    /// The number state `|occ⟩` with unit amplitude.
    pub fn fock(occ: &[u32]) -> Result<Self> {
        let total = occ.iter().sum();
        let basis = Arc::new(FockBasis::new(occ.len(), total)?);
        let mut state = Self::zeros(basis);
        let i = state.basis.index_of(occ).expect("occupation belongs to its own sector");
        state.amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// `|N, N, ..., N⟩` over `n_modes` sites.
    pub fn uniform_fock(n_modes: usize, atoms_per_site: u32) -> Result<Self> {
        Self::fock(&vec![atoms_per_site; n_modes])
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn basis_arc(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn n_modes(&self) -> usize {
        self.basis.n_modes()
    }

    pub fn total_atoms(&self) -> u32 {
        self.basis.total_atoms()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    #[allow(dead_code)]
    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn amplitude(&self, occ: &[u32]) -> Complex64 {
        self.basis
            .index_of(occ)
            .map_or(Complex64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_sector(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn check_same_sector(&self, other: &Self) -> Result<()> {
        if self.n_modes() != other.n_modes() || self.total_atoms() != other.total_atoms() {
            return Err(Error::BasisMismatch(format!(
                "sector ({}, {}) vs ({}, {})",
                self.n_modes(),
                self.total_atoms(),
                other.n_modes(),
                other.total_atoms()
            )));
        }
        Ok(())
    }

    /// Unit-norm copy together with the norm it had before.
    pub fn normalize(&self) -> Result<(Self, f64)> {
        let norm = self.norm();
        if !(norm >= MIN_NORM) {
            return Err(Error::Annihilated { norm });
        }
        let inv = 1.0 / norm;
        let amplitudes = self.amplitudes.iter().map(|a| a * inv).collect();
        Ok((
            Self {
                basis: Arc::clone(&self.basis),
                amplitudes,
            },
            norm,
        ))
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
    }

    /// Multiply by a global phase so the largest-magnitude amplitude is real and positive.
    pub fn fix_global_phase(&mut self) {
        let Some(max) = self
            .amplitudes
            .iter()
            .copied()
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        else {
            return;
        };
        if max.norm() > 0.0 {
            self.scale(max.conj() / max.norm());
        }
    }

    /// Relabel modes: mode `j` of the result holds what mode `perm[j]` held.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_modes();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of {n} modes"
            )));
        }
        let mut out = Self::zeros(Arc::clone(&self.basis));
        let mut target = vec![0u32; n];
        for (i, occ) in self.basis.iter().enumerate() {
            for (j, t) in target.iter_mut().enumerate() {
                *t = occ[perm[j]];
            }
            let k = self.basis.index_of(&target).expect("permutation preserves the sector");
            out.amplitudes[k] = self.amplitudes[i];
        }
        Ok(out)
    }

    /// `Σ_i c_i |ψ_i⟩` for states sharing a sector.
    pub fn linear_combination(terms: &[(Complex64, &QuantumState)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        let mut out = Self::zeros(Arc::clone(&first.basis));
        for (c, s) in terms {
            out.check_same_sector(s)?;
            for (o, a) in out.amplitudes.iter_mut().zip(&s.amplitudes) {
                *o += c * a;
            }
        }
        Ok(out)
    }
}

fn check_mode(state: &QuantumState, mode: usize) -> Result<()> {
    if mode >= state.n_modes() {
        return Err(Error::InvalidArgument(format!(
            "mode {mode} out of range for {} modes",
            state.n_modes()
        )));
    }
    Ok(())
}

/// `a_mode |ψ⟩`, unnormalized, in the sector with one atom fewer.
pub fn apply_annihilation(state: &QuantumState, mode: usize) -> Result<QuantumState> {
    let target = Arc::new(state.basis.shifted(-1)?);
    apply_annihilation_into(state, mode, &target)
}

/// As [`apply_annihilation`], reusing an already built target basis.
pub fn apply_annihilation_into(state: &QuantumState, mode: usize, target: &Arc<FockBasis>) -> Result<QuantumState> {
    check_mode(state, mode)?;
    if state.total_atoms() == 0 {
        return Err(Error::EmptySector);
    }
    if target.n_modes() != state.n_modes() || target.total_atoms() + 1 != state.total_atoms() {
        return Err(Error::BasisMismatch("annihilation target sector".into()));
    }
    let mut out = QuantumState::zeros(Arc::clone(target));
    let mut occ = vec![0u32; state.n_modes()];
    for (i, src) in state.basis.iter().enumerate() {
        let k = src[mode];
        if k == 0 {
            continue;
        }
        occ.copy_from_slice(src);
        occ[mode] -= 1;
        let j = target.index_of(&occ).expect("lowered vector lies in target sector");
        out.amplitudes[j] += state.amplitudes[i] * (k as f64).sqrt();
    }
    Ok(out)
}

/// `a†_mode |ψ⟩`, unnormalized, in the sector with one atom more.
pub fn apply_creation(state: &QuantumState, mode: usize) -> Result<QuantumState> {
    check_mode(state, mode)?;
    let target = Arc::new(state.basis.shifted(1)?);
    let mut out = QuantumState::zeros(Arc::clone(&target));
    let mut occ = vec![0u32; state.n_modes()];
    for (i, src) in state.basis.iter().enumerate() {
        occ.copy_from_slice(src);
        occ[mode] += 1;
        let j = target.index_of(&occ).expect("raised vector lies in target sector");
        out.amplitudes[j] += state.amplitudes[i] * (occ[mode] as f64).sqrt();
    }
    Ok(out)
}

/// Free-function form of [`QuantumState::normalize`].
pub fn normalize(state: &QuantumState) -> Result<(QuantumState, f64)> {
    state.normalize()
}
