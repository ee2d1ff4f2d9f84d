//! Number-space signatures of the relative-phase cat.
//!
//! A superposition of the phase assignments `(Φ₁, Φ₂)` and `(Φ₂, Φ₁)` shows up
//! in `P(N_a, N_b)` as fringes `1 + cos[(T − N_b)(Φ₁ − Φ₂) + δ]` that run along
//! `N_b` only. [`fringe_analysis`] measures them line by line: along each line
//! the profile is fitted by a Gaussian envelope times `1 + a cos ωq + b sin ωq`,
//! and the explained variance, weighted by line mass, forms the spectrum.
//!
//! [`coherent_pattern`] is the analytic single-atom pattern of `n` coherent
//! modes with phases `φ_j`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::QuantumState;
use crate::grid::SimplexGrid;
use crate::par::map_indices;
use crate::phase::{wrap_angle, CatPeaks};

/// `P(N_a, N_b)` indexed `[N_a][N_b]`.
pub type NumberDistribution = SimplexGrid;

/// Visibility below which an axis is reported as fringeless (frequency 0).
pub const MIN_FRINGE_CONTRAST: f64 = 0.5;
/// Frequency grid points per natural bin `1/(T+1)`.
const OVERSAMPLE: usize = 8;
/// Lines with fewer resolved points than this are skipped.
const MIN_LINE_POINTS: usize = 6;

pub fn number_distribution(state: &QuantumState) -> Result<NumberDistribution> {
    SimplexGrid::from_three_mode_state(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// Lines of fixed `N_b`, varying `N_a`.
    A,
    /// Lines of fixed `N_a`, varying `N_b`.
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpectrum {
    /// Cycles per atom, `0` when no fringe clears [`MIN_FRINGE_CONTRAST`].
    pub dominant_frequency: f64,
    /// Location of the spectral maximum, regardless of contrast.
    pub peak_frequency: f64,
    /// Mass-weighted fringe visibility at `peak_frequency`, in `[0, 1]`.
    pub contrast: f64,
    /// Mass-weighted fraction of line variance explained at `peak_frequency`.
    pub explained: f64,
    /// Fitted offset of `cos(2π f q + offset)` along the line coordinate `q`.
    pub offset: f64,
    /// Lowest frequency searched.
    pub min_frequency: f64,
    /// Mass-weighted DFT bin `1/length` of the analysed lines.
    pub bin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeReport {
    pub dominant_frequency_b: f64,
    pub contrast_b: f64,
    pub dominant_frequency_a: f64,
    pub contrast_a: f64,
    /// `|wrap(Φ₁ − Φ₂)| / 2π`.
    pub predicted_frequency: f64,
    /// `δ` in `1 + cos[(T − N_b)(Φ₁ − Φ₂) + δ]`, using the measured frequency.
    pub delta_estimate: f64,
    /// DFT bin of the analysed `N_b` lines, `1/(T − N_a + 1)` averaged over line mass.
    pub spectral_bin: f64,
    pub total_atoms: u32,
}

impl FringeReport {
    /// `|measured − predicted|` in units of [`Self::spectral_bin`].
    pub fn frequency_error_bins(&self) -> f64 {
        (self.dominant_frequency_b - self.predicted_frequency).abs() / self.spectral_bin
    }
}

/// One line of the distribution prepared for fitting.
struct Line {
    /// Length of the full line, `T − fixed + 1`.
    length: usize,
    mean: f64,
    /// Envelope-only residual with the Gaussian centre and width optimized.
    free_baseline: f64,
    mass: f64,
    sd: f64,
    coord: Vec<f64>,
    /// Envelope columns `g, g x, g x²`.
    envelope: DMatrix<f64>,
    gauss: Vec<f64>,
    target: DVector<f64>,
    baseline_rss: f64,
    total_ss: f64,
}

fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let svd = a.clone().svd(true, true);
    let x = svd.solve(b, 1e-12).expect("u and v requested");
    let rss = (a * &x - b).norm_squared();
    (x, rss)
}

impl Line {
    fn new(values: &[f64], floor: f64) -> Option<Self> {
        let mass: f64 = values.iter().sum();
        if !(mass > floor) {
            return None;
        }
        let (mean, sd) = moments(values.iter().enumerate().map(|(q, v)| (q as f64, *v)));
        Self::with_envelope(values, mass, mean, sd)
    }

    fn with_envelope(values: &[f64], mass: f64, mean: f64, sd: f64) -> Option<Self> {
        if !(sd >= 0.5) {
            return None;
        }
        let peak = values.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..values.len())
            .filter(|&q| (q as f64 - mean).abs() <= 6.0 * sd && values[q] > 1e-12 * peak)
            .collect();
        if keep.len() < MIN_LINE_POINTS {
            return None;
        }
        let coord: Vec<f64> = keep.iter().map(|&q| q as f64).collect();
        let x: Vec<f64> = coord.iter().map(|q| (q - mean) / sd).collect();
        let gauss: Vec<f64> = x.iter().map(|x| (-0.5 * x * x).exp()).collect();
        let envelope = DMatrix::from_fn(keep.len(), 3, |i, k| gauss[i] * x[i].powi(k as i32));
        let target = DVector::from_iterator(keep.len(), keep.iter().map(|&q| values[q] / mass));
        let (_, baseline_rss) = lstsq(&envelope, &target);
        let total_ss = target.norm_squared();
        let mut line = Self {
            length: values.len(),
            mean,
            free_baseline: 0.0,
            mass,
            sd,
            coord,
            envelope,
            gauss,
            target,
            baseline_rss,
            total_ss,
        };
        line.free_baseline = line.fit_free(f64::NAN).rss;
        Some(line)
    }

    /// Coefficients `[c0, c1, c2, a, b]` and residual at frequency `f`.
    fn fit(&self, f: f64) -> (DVector<f64>, f64) {
        let rows = self.coord.len();
        let w = 2.0 * PI * f;
        let a = DMatrix::from_fn(rows, 5, |i, k| match k {
            0..=2 => self.envelope[(i, k)],
            3 => self.gauss[i] * (w * self.coord[i]).cos(),
            _ => self.gauss[i] * (w * self.coord[i]).sin(),
        });
        lstsq(&a, &self.target)
    }

    fn explained(&self, f: f64) -> f64 {
        ((self.baseline_rss - self.fit(f).1) / self.total_ss).max(0.0)
    }
}

struct FreeFit {
    /// `[c0, a, b]`.
    coeffs: DVector<f64>,
    rss: f64,
}

impl Line {
    /// Least squares of `g (c0 + a cos 2πfq + b sin 2πfq)` (just `c0 g` when `f`
    /// is NaN) with `g` the Gaussian of centre `mean` and width `sd`.
    fn fit_shaped(&self, f: f64, mean: f64, sd: f64) -> (DVector<f64>, f64) {
        let cols = if f.is_nan() { 1 } else { 3 };
        let w = 2.0 * PI * f;
        let a = DMatrix::from_fn(self.coord.len(), cols, |i, k| {
            let q = self.coord[i];
            let x = (q - mean) / sd;
            let g = (-0.5 * x * x).exp();
            match k {
                0 => g,
                1 => g * (w * q).cos(),
                _ => g * (w * q).sin(),
            }
        });
        lstsq(&a, &self.target)
    }

    /// [`Self::fit_shaped`] minimized over the Gaussian centre and log-width.
    fn fit_free(&self, f: f64) -> FreeFit {
        let objective = |p: [f64; 2]| self.fit_shaped(f, p[0], p[1].exp()).1;
        let best = nelder_mead(objective, [self.mean, self.sd.ln()], [0.3 * self.sd, 0.1], 120);
        let (coeffs, rss) = self.fit_shaped(f, best[0], best[1].exp());
        FreeFit { coeffs, rss }
    }
}

/// Minimize a function of two variables.
fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: F, start: [f64; 2], scale: [f64; 2], iterations: usize) -> [f64; 2] {
    let mut pts = [start, [start[0] + scale[0], start[1]], [start[0], start[1] + scale[1]]];
    let mut vals = pts.map(&f);
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..iterations {
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = order.map(|i| pts[i]);
        vals = order.map(|i| vals[i]);
        let centroid = lerp(pts[0], pts[1], 0.5);
        let reflected = lerp(centroid, pts[2], -1.0);
        let fr = f(reflected);
        if fr < vals[0] {
            let expanded = lerp(centroid, pts[2], -2.0);
            let fe = f(expanded);
            (pts[2], vals[2]) = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < vals[1] {
            (pts[2], vals[2]) = (reflected, fr);
        } else {
            let contracted = lerp(centroid, pts[2], 0.5);
            let fc = f(contracted);
            if fc < vals[2] {
                (pts[2], vals[2]) = (contracted, fc);
            } else {
                for k in 1..3 {
                    pts[k] = lerp(pts[0], pts[k], 0.5);
                    vals[k] = f(pts[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    pts[best]
}

fn moments(points: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let mass: f64 = points.clone().map(|(_, w)| w).sum();
    let mean = points.clone().map(|(q, w)| q * w).sum::<f64>() / mass;
    let var = points.map(|(q, w)| (q - mean).powi(2) * w).sum::<f64>() / mass;
    (mean, var.sqrt())
}

fn lines_along(dist: &NumberDistribution, axis: Axis) -> Vec<Line> {
    let t = dist.total();
    let floor = 1e-4 * dist.sum();
    (0..=t)
        .filter_map(|fixed| {
            let values: Vec<f64> = (0..=t - fixed)
                .map(|v| match axis {
                    Axis::B => dist.get(fixed, v),
                    Axis::A => dist.get(v, fixed),
                })
                .collect();
            Line::new(&values, floor)
        })
        .collect()
}

fn weighted_spectrum(lines: &[Line], f: f64) -> f64 {
    let mass: f64 = lines.iter().map(|l| l.mass).sum();
    lines.iter().map(|l| l.mass * l.explained(f)).sum::<f64>() / mass
}

/// Fringe spectrum of `dist` along one axis.
pub fn axis_spectrum(dist: &NumberDistribution, axis: Axis) -> AxisSpectrum {
    let lines = lines_along(dist, axis);
    let empty = AxisSpectrum {
        dominant_frequency: 0.0,
        peak_frequency: 0.0,
        contrast: 0.0,
        explained: 0.0,
        offset: 0.0,
        min_frequency: 0.0,
        bin: 1.0 / (dist.total() as f64 + 1.0),
    };
    if lines.is_empty() {
        return empty;
    }
    let mass: f64 = lines.iter().map(|l| l.mass).sum();
    let sd = lines.iter().map(|l| l.mass * l.sd).sum::<f64>() / mass;
    let bin = lines.iter().map(|l| l.mass / l.length as f64).sum::<f64>() / mass;
    let empty = AxisSpectrum { bin, ..empty };
    // a fringe longer than the envelope cannot be told apart from it
    let min_frequency = (1.0 / (8.0 * sd)).min(0.25);
    let step = 1.0 / (OVERSAMPLE as f64 * (dist.total() as f64 + 1.0));
    let grid: Vec<f64> = (0..)
        .map(|k| min_frequency + k as f64 * step)
        .take_while(|&f| f <= 0.5 + 1e-12)
        .collect();
    if grid.len() < 3 {
        return AxisSpectrum { min_frequency, ..empty };
    }
    let coarse = scan_peak(&lines, &grid);
    if coarse_contrast(&lines, coarse) < 0.5 * MIN_FRINGE_CONTRAST {
        return AxisSpectrum {
            peak_frequency: coarse,
            contrast: coarse_contrast(&lines, coarse),
            explained: weighted_spectrum(&lines, coarse),
            min_frequency,
            ..empty
        };
    }
    let fits = |f: f64| map_indices(lines.len(), |i| lines[i].fit_free(f));
    let peak = golden_max(
        |f| {
            let fs = fits(f);
            lines
                .iter()
                .zip(&fs)
                .map(|(l, x)| l.mass * (l.free_baseline - x.rss) / l.total_ss)
                .sum::<f64>()
        },
        (0.8 * coarse - step).max(min_frequency),
        (1.25 * coarse + step).min(0.5),
        30,
    );
    let final_fits = fits(peak);
    let explained = lines
        .iter()
        .zip(&final_fits)
        .map(|(l, x)| l.mass * ((l.free_baseline - x.rss) / l.total_ss).max(0.0))
        .sum::<f64>()
        / mass;

    let mut contrast = 0.0;
    let mut phasor = num_complex::Complex64::new(0.0, 0.0);
    for (l, x) in lines.iter().zip(&final_fits) {
        let c = &x.coeffs;
        if c[0] > 0.0 {
            let v = c[1].hypot(c[2]) / c[0];
            contrast += l.mass * v.min(1.0);
            // a cos θ + b sin θ = V cos(θ − atan2(b, a))
            phasor += num_complex::Complex64::from_polar(l.mass * v, -c[2].atan2(c[1]));
        }
    }
    contrast /= mass;
    AxisSpectrum {
        dominant_frequency: if contrast >= MIN_FRINGE_CONTRAST { peak } else { 0.0 },
        peak_frequency: peak,
        contrast,
        explained,
        offset: phasor.arg(),
        min_frequency,
        bin,
    }
}

fn coarse_contrast(lines: &[Line], f: f64) -> f64 {
    let mass: f64 = lines.iter().map(|l| l.mass).sum();
    lines
        .iter()
        .map(|l| {
            let (c, _) = l.fit(f);
            if c[0] > 0.0 {
                l.mass * (c[3].hypot(c[4]) / c[0]).min(1.0)
            } else {
                0.0
            }
        })
        .sum::<f64>()
        / mass
}

fn scan_peak(lines: &[Line], grid: &[f64]) -> f64 {
    let spectrum = map_indices(grid.len(), |k| weighted_spectrum(lines, grid[k]));
    let k = (0..grid.len())
        .max_by(|&a, &b| spectrum[a].total_cmp(&spectrum[b]))
        .expect("non-empty grid");
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    golden_max(|f| weighted_spectrum(lines, f), lo, hi, 40)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iterations: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iterations {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub fn fringe_analysis(dist: &NumberDistribution, peaks: &CatPeaks) -> Result<FringeReport> {
    if peaks.degenerate {
        return Err(Error::FringePeriodUndefined {
            separation: peaks.separation,
        });
    }
    let diff = peaks.difference();
    let b = axis_spectrum(dist, Axis::B);
    let a = axis_spectrum(dist, Axis::A);
    let t = dist.total() as f64;
    // measured cos(ωq + offset) against cos((T − q)Δ + δ) with Δ = ±ω
    let delta_m = diff.signum() * 2.0 * PI * b.peak_frequency;
    let delta = if delta_m >= 0.0 {
        -b.offset - t * delta_m
    } else {
        b.offset - t * delta_m
    };
    Ok(FringeReport {
        dominant_frequency_b: b.dominant_frequency,
        contrast_b: b.contrast,
        dominant_frequency_a: a.dominant_frequency,
        contrast_a: a.contrast,
        predicted_frequency: diff.abs() / (2.0 * PI),
        delta_estimate: wrap_angle(delta),
        spectral_bin: b.bin,
        total_atoms: dist.total(),
    })
}

/// `(1/2π)(1 + (2/n) F Σ_{j<k} cos((k−j)u − (φ_k − φ_j)))` for per-mode phases `φ_j`.
pub fn coherent_pattern(phases: &[f64], f_value: f64, u: f64) -> Result<f64> {
    let n = phases.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 modes".into()));
    }
    if !(0.0..=1.0).contains(&f_value) {
        return Err(Error::InvalidArgument(format!("F = {f_value} outside [0, 1]")));
    }
    let mut sum = 0.0;
    for j in 0..n {
        for k in j + 1..n {
            sum += ((k - j) as f64 * u - (phases[k] - phases[j])).cos();
        }
    }
    let p = (1.0 + 2.0 / n as f64 * f_value * sum) / (2.0 * PI);
    if p < -1e-12 {
        return Err(Error::NonFinite(format!("negative density {p} at u = {u}")));
    }
    Ok(p.max(0.0))
}

/// Per-mode phases from relative phases `φ_{j+1} − φ_j`, starting at 0.
pub fn phases_from_relative(relative: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(relative.len() + 1);
    out.push(0.0);
    for r in relative {
        out.push(out.last().unwrap() + r);
    }
    out
}

/// Relative phases `φ_{j+1} − φ_j`.
pub fn relative_phases(phases: &[f64]) -> Vec<f64> {
    phases.windows(2).map(|w| w[1] - w[0]).collect()
}

/// The exchange of relative phases that leaves the pattern invariant: first with last.
pub fn symmetric_swap(n_modes: usize) -> (usize, usize) {
    (0, n_modes.saturating_sub(2))
}

/// Largest pattern change over `grid_points` values of `u` when relative phases
/// `i` and `j` (indices into `φ_{k+1} − φ_k`) are exchanged.
pub fn pattern_swap_check(phases: &[f64], f_value: f64, grid_points: usize, swap: (usize, usize)) -> Result<f64> {
    let mut rel = relative_phases(phases);
    if swap.0 >= rel.len() || swap.1 >= rel.len() {
        return Err(Error::InvalidArgument(format!(
            "swap {swap:?} out of range for {} modes",
            phases.len()
        )));
    }
    if grid_points == 0 {
        return Err(Error::InvalidArgument("empty u grid".into()));
    }
    rel.swap(swap.0, swap.1);
    let swapped = phases_from_relative(&rel);
    let mut worst: f64 = 0.0;
    for i in 0..grid_points {
        let u = -PI + 2.0 * PI * i as f64 / grid_points as f64;
        worst = worst.max((coherent_pattern(phases, f_value, u)? - coherent_pattern(&swapped, f_value, u)?).abs());
    }
    Ok(worst)
}
