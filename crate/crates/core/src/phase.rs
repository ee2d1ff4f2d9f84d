//! Joint relative-phase distribution of a three-mode state.
//!
//! `⟨φ|ψ⟩ = Σ_{pqr} ψ_{pqr} e^{−iq φ_ba} e^{−ir(φ_ba + φ_cb)}` over the state's
//! fixed-total sector. The distribution `|⟨φ|ψ⟩|²` is tabulated on an `M x M`
//! grid over `[−π, π)²` and rescaled so its mean is 1.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::QuantumState;
use crate::par::map_indices;

pub const DEFAULT_PHASE_GRID: usize = 256;
pub const MIN_PHASE_GRID: usize = 16;
/// `max / mean` at or below which a grid counts as flat.
pub const CAT_THRESHOLD: f64 = 1.5;

/// Wrap an angle into `[−π, π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y >= PI {
        y - 2.0 * PI
    } else {
        y
    }
}

fn require_three_modes(state: &QuantumState) -> Result<()> {
    if state.n_modes() != 3 {
        return Err(Error::InvalidArgument(format!(
            "phase analysis needs 3 modes, got {}",
            state.n_modes()
        )));
    }
    Ok(())
}

pub fn phase_overlap(state: &QuantumState, phi_ba: f64, phi_cb: f64) -> Result<Complex64> {
    require_three_modes(state)?;
    let basis = state.basis();
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let occ = basis.occupations(i);
            let (q, r) = (occ[1] as f64, occ[2] as f64);
            a * Complex64::from_polar(1.0, -q * phi_ba - r * (phi_ba + phi_cb))
        })
        .sum())
}

/// `P(φ_ba, φ_cb)` on the grid `φ = −π + 2πi/M`, mean 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    m: usize,
    /// Row-major: `values[i * M + j]` is at `(φ_ba_i, φ_cb_j)`.
    values: Vec<f64>,
}

impl PhaseGrid {
    /// Wrap raw non-negative values and rescale to mean 1.
    pub fn from_values(m: usize, values: Vec<f64>) -> Result<Self> {
        if m < 2 || values.len() != m * m {
            return Err(Error::InvalidArgument(format!(
                "{} values for a {m}x{m} grid",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFinite(
                "phase grid values must be finite and non-negative".into(),
            ));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if !(mean > 0.0) {
            return Err(Error::Annihilated { norm: mean });
        }
        Ok(Self {
            m,
            values: values.into_iter().map(|v| v / mean).collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    /// Periodic access.
    fn at(&self, i: isize, j: isize) -> f64 {
        let m = self.m as isize;
        self.get(i.rem_euclid(m) as usize, j.rem_euclid(m) as usize)
    }

    pub fn angle(&self, i: usize) -> f64 {
        -PI + 2.0 * PI * i as f64 / self.m as f64
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.m as f64
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Cell index nearest to angle `x`.
    pub fn nearest_cell(&self, x: f64) -> usize {
        (((wrap_angle(x) + PI) / self.spacing()).round() as usize) % self.m
    }

    fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = k;
            }
        }
        (best / self.m, best % self.m)
    }

    /// Cells that are at least as large as their 8 periodic neighbours, strongest first.
    pub fn local_maxima(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.m {
            for j in 0..self.m {
                let v = self.get(i, j);
                let is_max = (-1..=1).all(|di: isize| {
                    (-1..=1).all(|dj: isize| (di == 0 && dj == 0) || self.at(i as isize + di, j as isize + dj) <= v)
                });
                if is_max {
                    out.push((i, j, v));
                }
            }
        }
        out.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
        out
    }
}

/// Evaluate the distribution on an `m x m` grid.
///
/// Separable in the two angles: with `s = q + r`, the overlap is
/// `Σ_s e^{−is φ_ba} Σ_r ψ_{T−s, s−r, r} e^{−ir φ_cb}`.
pub fn phase_distribution(state: &QuantumState, m: usize) -> Result<PhaseGrid> {
    require_three_modes(state)?;
    if m < MIN_PHASE_GRID {
        return Err(Error::InvalidArgument(format!(
            "phase grid size {m} is below {MIN_PHASE_GRID}"
        )));
    }
    let t = state.total_atoms() as usize;
    let basis = state.basis();
    let zero = Complex64::new(0.0, 0.0);
    // a[s][r] = ψ_{T−s, s−r, r}
    let mut a = vec![vec![zero; t + 1]; t + 1];
    for (i, amp) in state.amplitudes().iter().enumerate() {
        let occ = basis.occupations(i);
        let (q, r) = (occ[1] as usize, occ[2] as usize);
        a[q + r][r] = *amp;
    }
    let angle = |i: usize| -PI + 2.0 * PI * i as f64 / m as f64;
    // b[j][s] = Σ_r a[s][r] e^{−ir φ_cb_j}
    let b: Vec<Vec<Complex64>> = map_indices(m, |j| {
        let step = Complex64::from_polar(1.0, -angle(j));
        a.iter()
            .enumerate()
            .map(|(s, row)| {
                let mut w = Complex64::new(1.0, 0.0);
                let mut acc = zero;
                for amp in &row[..=s] {
                    acc += amp * w;
                    w *= step;
                }
                acc
            })
            .collect()
    });
    let rows: Vec<Vec<f64>> = map_indices(m, |i| {
        let phases: Vec<Complex64> = (0..=t)
            .map(|s| Complex64::from_polar(1.0, -(s as f64) * angle(i)))
            .collect();
        b.iter()
            .map(|bj| bj.iter().zip(&phases).map(|(x, p)| x * p).sum::<Complex64>().norm_sqr())
            .collect()
    });
    PhaseGrid::from_values(m, rows.concat())
}

/// Largest `|P(φ₁, φ₂) − P(φ₂, φ₁)|`.
pub fn swap_asymmetry(grid: &PhaseGrid) -> f64 {
    let m = grid.size();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            worst = worst.max((grid.get(i, j) - grid.get(j, i)).abs());
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatPeaks {
    pub phi1: f64,
    pub phi2: f64,
    /// Height of the global maximum (grid mean is 1).
    pub peak_height: f64,
    /// Height at the cell nearest to `(phi2, phi1)`.
    pub mirror_height: f64,
    /// Toroidal distance between `(phi1, phi2)` and `(phi2, phi1)`.
    pub separation: f64,
    /// The peak sits within 2 cells of the diagonal.
    pub degenerate: bool,
    /// Strongest local maximum away from the main peak, if any.
    pub partner: Option<(f64, f64, f64)>,
}

impl CatPeaks {
    /// `wrap(phi1 − phi2)`.
    pub fn difference(&self) -> f64 {
        wrap_angle(self.phi1 - self.phi2)
    }
}

/// Offset of the vertex of the parabola through `(−1, l), (0, c), (1, r)`, clamped to half a cell.
fn parabola_offset(l: f64, c: f64, r: f64) -> f64 {
    let denom = l - 2.0 * c + r;
    if denom < 0.0 {
        (0.5 * (l - r) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    }
}

fn toroidal_cells(a: usize, b: usize, m: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(m - d)
}

pub fn find_cat_peaks(grid: &PhaseGrid) -> Result<CatPeaks> {
    let ratio = grid.max() / grid.mean();
    if !(ratio > CAT_THRESHOLD) {
        return Err(Error::NoCatStructure { ratio });
    }
    let m = grid.size();
    let (i, j) = grid.argmax();
    let (ii, jj) = (i as isize, j as isize);
    let di = parabola_offset(grid.at(ii - 1, jj), grid.get(i, j), grid.at(ii + 1, jj));
    let dj = parabola_offset(grid.at(ii, jj - 1), grid.get(i, j), grid.at(ii, jj + 1));
    let phi1 = wrap_angle(grid.angle(i) + di * grid.spacing());
    let phi2 = wrap_angle(grid.angle(j) + dj * grid.spacing());
    let mirror_height = grid.get(grid.nearest_cell(phi2), grid.nearest_cell(phi1));
    let diff = wrap_angle(phi1 - phi2).abs();
    let partner = grid
        .local_maxima()
        .into_iter()
        .find(|&(a, b, _)| toroidal_cells(a, i, m).max(toroidal_cells(b, j, m)) > 2)
        .map(|(a, b, v)| (grid.angle(a), grid.angle(b), v));
    Ok(CatPeaks {
        phi1,
        phi2,
        peak_height: grid.get(i, j),
        mirror_height,
        separation: 2f64.sqrt() * diff,
        degenerate: diff < 2.0 * grid.spacing(),
        partner,
    })
}
