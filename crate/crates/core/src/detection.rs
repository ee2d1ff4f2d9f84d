//! Sequential far-field detection of atoms released from the lattice.
//!
//! Detecting one atom at phase variable `u = ηθ` applies
//! `Ω(u) = Σ_j e^{−iju} a_j / √n` and renormalizes. The position is drawn from
//! the current single-atom density `⟨Ω†(u)Ω(u)⟩`, which is a trigonometric
//! polynomial in `u` of degree `n − 1`; it is tabulated on a uniform grid over
//! `[−π, π)` and sampled by inverting its piecewise-linear CDF.
//!
//! Randomness comes from a `ChaCha20Rng` seeded with `seed_from_u64`. Each
//! detection consumes, in order, the draws needed for `η` and then exactly one
//! uniform `f64` for `u`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{apply_annihilation_into, FockBasis, QuantumState};

/// Default number of grid points for the detection density.
pub const DEFAULT_GRID_POINTS: usize = 1024;

/// The portable generator behind every detection run.
pub type DetectionRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> DetectionRng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    /// 1-based position in the sequence.
    pub index: usize,
    /// Phase variable `ηθ`, in `[−π, π)`.
    pub u: f64,
    pub eta: f64,
    /// `u / η`.
    pub theta: f64,
}

/// Distribution `F(η)` of the far-field scale across detections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EtaDistribution {
    Delta {
        eta: f64,
    },
    /// Normal distribution truncated to `η > 0`.
    Gaussian {
        mean: f64,
        sd: f64,
    },
    /// Discrete values with non-negative weights (normalized on construction).
    Table {
        values: Vec<f64>,
        weights: Vec<f64>,
    },
}

impl Default for EtaDistribution {
    fn default() -> Self {
        Self::Delta { eta: 1.0 }
    }
}

impl EtaDistribution {
    pub fn delta(eta: f64) -> Result<Self> {
        let d = Self::Delta { eta };
        d.validate()?;
        Ok(d)
    }

    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        let d = Self::Gaussian { mean, sd };
        d.validate()?;
        Ok(d)
    }

    pub fn table(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        let d = Self::Table {
            values,
            weights: weights.iter().map(|w| w / total).collect(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match self {
            Self::Delta { eta } if !(*eta > 0.0 && eta.is_finite()) => {
                bad(format!("delta at η = {eta} must be positive"))
            }
            Self::Gaussian { mean, sd } if !(mean.is_finite() && *sd >= 0.0 && sd.is_finite()) => {
                bad(format!("gaussian({mean}, {sd}) is not a valid distribution"))
            }
            Self::Gaussian { mean, sd } if *sd == 0.0 && *mean <= 0.0 => bad("degenerate gaussian at η ≤ 0".into()),
            // a mean this many sd below zero would make rejection sampling hang
            Self::Gaussian { mean, sd } if *sd > 0.0 && *mean < -5.0 * sd => {
                bad(format!("gaussian({mean}, {sd}) has almost no mass at η > 0"))
            }
            Self::Table { values, weights } => {
                if values.is_empty() || values.len() != weights.len() {
                    return bad("table needs equally many values and weights".into());
                }
                if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return bad("table values must be positive".into());
                }
                if weights.iter().any(|w| !(*w >= 0.0)) || !(weights.iter().sum::<f64>() > 0.0) {
                    return bad("table weights must be non-negative with positive sum".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Delta { eta } => *eta,
            Self::Gaussian { mean, sd } => {
                if *sd == 0.0 {
                    return *mean;
                }
                let normal = Normal::new(*mean, *sd).expect("validated parameters");
                loop {
                    let x = normal.sample(rng);
                    if x > 0.0 {
                        return x;
                    }
                }
            }
            Self::Table { values, weights } => {
                let r: f64 = rng.random();
                let mut acc = 0.0;
                for (v, w) in values.iter().zip(weights) {
                    acc += w;
                    if r < acc {
                        return *v;
                    }
                }
                *values.last().expect("non-empty table")
            }
        }
    }
}

impl FromStr for EtaDistribution {
    type Err = Error;

    /// `delta:1.0`, `gauss:1.0,0.05` or `table:0.9=1,1.1=2`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("eta distribution '{s}' lacks a ':'")))?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("'{t}' is not a number")))
        };
        match kind {
            "delta" => Self::delta(num(args)?),
            "gauss" | "gaussian" => {
                let (m, sd) = args
                    .split_once(',')
                    .ok_or_else(|| Error::InvalidArgument("gauss needs 'mean,sd'".into()))?;
                Self::gaussian(num(m)?, num(sd)?)
            }
            "table" => {
                let mut values = Vec::new();
                let mut weights = Vec::new();
                for entry in args.split(',') {
                    let (v, w) = entry
                        .split_once('=')
                        .ok_or_else(|| Error::InvalidArgument(format!("table entry '{entry}' is not value=weight")))?;
                    values.push(num(v)?);
                    weights.push(num(w)?);
                }
                Self::table(values, weights)
            }
            other => Err(Error::InvalidArgument(format!("unknown eta distribution '{other}'"))),
        }
    }
}

impl fmt::Display for EtaDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Delta { eta } => write!(f, "delta:{eta}"),
            Self::Gaussian { mean, sd } => write!(f, "gauss:{mean},{sd}"),
            Self::Table { values, weights } => {
                write!(f, "table:")?;
                for (i, (v, w)) in values.iter().zip(weights).enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}={w}")?;
                }
                Ok(())
            }
        }
    }
}

/// Coefficients `e^{−iju}/√n` of `Ω(u)` on the site annihilators.
pub fn detection_operator_coeffs(n_modes: usize, u: f64) -> Result<Vec<Complex64>> {
    if n_modes < 2 {
        return Err(Error::InvalidArgument("detection needs at least 2 modes".into()));
    }
    let norm = 1.0 / (n_modes as f64).sqrt();
    Ok((0..n_modes)
        .map(|j| Complex64::from_polar(norm, -(j as f64) * u))
        .collect())
}

/// Grid angle `−π + 2πi/points`.
#[inline]
pub fn grid_angle(i: usize, points: usize) -> f64 {
    -PI + 2.0 * PI * i as f64 / points as f64
}

/// The lowered states `a_j |ψ⟩` and their Gram matrix `⟨a_j† a_k⟩`.
#[derive(Debug, Clone)]
pub struct LoweredStates {
    lowered: Vec<QuantumState>,
    /// Row-major `n x n`, entry `(j, k)` = `⟨ψ| a_j† a_k |ψ⟩`.
    gram: Vec<Complex64>,
}

impl LoweredStates {
    pub fn new(state: &QuantumState) -> Result<Self> {
        let n = state.n_modes();
        if n < 2 {
            return Err(Error::InvalidArgument("detection needs at least 2 modes".into()));
        }
        if state.total_atoms() == 0 {
            return Err(Error::EmptySector);
        }
        let target = Arc::new(state.basis().shifted(-1)?);
        let lowered = (0..n)
            .map(|j| apply_annihilation_into(state, j, &target))
            .collect::<Result<Vec<_>>>()?;
        let mut gram = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            for k in 0..n {
                gram[j * n + k] = lowered[j].inner(&lowered[k])?;
            }
        }
        Ok(Self { lowered, gram })
    }

    pub fn n_modes(&self) -> usize {
        self.lowered.len()
    }

    /// `⟨a_j† a_k⟩`.
    pub fn correlation(&self, j: usize, k: usize) -> Complex64 {
        self.gram[j * self.n_modes() + k]
    }

    /// `‖Ω(u)|ψ⟩‖²`.
    pub fn intensity(&self, u: f64) -> f64 {
        let n = self.n_modes();
        let mut acc = 0.0;
        for j in 0..n {
            for k in 0..n {
                let phase = Complex64::from_polar(1.0, (j as f64 - k as f64) * u);
                acc += (phase * self.gram[j * n + k]).re;
            }
        }
        (acc / n as f64).max(0.0)
    }

    /// `Ω(u)|ψ⟩`, unnormalized.
    pub fn apply(&self, u: f64) -> Result<QuantumState> {
        let coeffs = detection_operator_coeffs(self.n_modes(), u)?;
        let terms: Vec<(Complex64, &QuantumState)> = coeffs.into_iter().zip(&self.lowered).collect();
        QuantumState::linear_combination(&terms)
    }
}

/// Single-atom detection density on `[−π, π)`, normalized to unit integral.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionDensity {
    values: Vec<f64>,
}

impl DetectionDensity {
    pub fn from_lowered(lowered: &LoweredStates, grid_points: usize) -> Result<Self> {
        if grid_points < 2 * lowered.n_modes() {
            return Err(Error::InvalidArgument(format!(
                "{grid_points} grid points cannot resolve a {}-mode density",
                lowered.n_modes()
            )));
        }
        let raw: Vec<f64> = (0..grid_points)
            .map(|i| lowered.intensity(grid_angle(i, grid_points)))
            .collect();
        let h = 2.0 * PI / grid_points as f64;
        // periodic trapezoid rule
        let integral: f64 = raw.iter().sum::<f64>() * h;
        if !(integral > 0.0) {
            return Err(Error::Annihilated { norm: integral });
        }
        Ok(Self {
            values: raw.iter().map(|v| v / integral).collect(),
        })
    }

    pub fn points(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn angle(&self, i: usize) -> f64 {
        grid_angle(i, self.points())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points() as f64
    }

    /// CDF at the grid nodes, `cdf[0] = 0` and `cdf[points] = 1`.
    pub fn cdf(&self) -> Vec<f64> {
        let g = self.points();
        let h = self.spacing();
        let mut cdf = Vec::with_capacity(g + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 0..g {
            acc += 0.5 * h * (self.values[i] + self.values[(i + 1) % g]);
            cdf.push(acc);
        }
        cdf
    }

    /// Inverse CDF with linear interpolation inside each cell; `r` in `[0, 1)`.
    pub fn quantile(&self, r: f64) -> f64 {
        let cdf = self.cdf();
        let target = r * cdf[self.points()];
        let cell = cdf
            .partition_point(|&c| c <= target)
            .saturating_sub(1)
            .min(self.points() - 1);
        let (lo, hi) = (cdf[cell], cdf[cell + 1]);
        let frac = if hi > lo { (target - lo) / (hi - lo) } else { 0.0 };
        let u = self.angle(cell) + frac.clamp(0.0, 1.0) * self.spacing();
        if u >= PI {
            u - 2.0 * PI
        } else {
            u
        }
    }
}

pub fn detection_density(state: &QuantumState, grid_points: usize) -> Result<DetectionDensity> {
    DetectionDensity::from_lowered(&LoweredStates::new(state)?, grid_points)
}

/// `Ω(u)|ψ⟩ / ‖Ω(u)|ψ⟩‖`.
pub fn apply_detection(state: &QuantumState, u: f64) -> Result<QuantumState> {
    Ok(LoweredStates::new(state)?.apply(u)?.normalize()?.0)
}

/// Draw one detection and return the event with the post-detection state.
pub fn sample_detection<R: Rng + ?Sized>(
    state: &QuantumState,
    eta: &EtaDistribution,
    grid_points: usize,
    index: usize,
    rng: &mut R,
) -> Result<(DetectionEvent, QuantumState)> {
    let lowered = LoweredStates::new(state)?;
    let density = DetectionDensity::from_lowered(&lowered, grid_points)?;
    let eta_value = eta.sample(rng);
    let u = density.quantile(rng.random::<f64>());
    let (next, _) = lowered.apply(u)?.normalize()?;
    Ok((
        DetectionEvent {
            index,
            u,
            eta: eta_value,
            theta: u / eta_value,
        },
        next,
    ))
}

/// Occupation sector a run started from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorDescriptor {
    pub n_modes: usize,
    pub total_atoms: u32,
}

impl SectorDescriptor {
    pub fn of(basis: &FockBasis) -> Self {
        Self {
            n_modes: basis.n_modes(),
            total_atoms: basis.total_atoms(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRun {
    pub seed: u64,
    pub initial: SectorDescriptor,
    pub events: Vec<DetectionEvent>,
    pub final_state: QuantumState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub eta: EtaDistribution,
    pub grid_points: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            eta: EtaDistribution::default(),
            grid_points: DEFAULT_GRID_POINTS,
        }
    }
}

/// `n_detections` sequential detections from `state` with a fresh generator seeded by `seed`.
pub fn run_sequence(state: &QuantumState, n_detections: u32, opts: &RunOptions, seed: u64) -> Result<DetectionRun> {
    run_sequence_with(state, n_detections, opts, seed, |_, _| {})
}

/// As [`run_sequence`], calling `observe(event, state_after)` after every detection.
pub fn run_sequence_with<F>(
    state: &QuantumState,
    n_detections: u32,
    opts: &RunOptions,
    seed: u64,
    mut observe: F,
) -> Result<DetectionRun>
where
    F: FnMut(&DetectionEvent, &QuantumState),
{
    if n_detections > state.total_atoms() {
        return Err(Error::InvalidArgument(format!(
            "{n_detections} detections requested from {} atoms",
            state.total_atoms()
        )));
    }
    opts.eta.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut current = state.clone();
    let mut events = Vec::with_capacity(n_detections as usize);
    for k in 1..=n_detections as usize {
        let (event, next) = sample_detection(&current, &opts.eta, opts.grid_points, k, &mut rng)?;
        observe(&event, &next);
        events.push(event);
        current = next;
    }
    Ok(DetectionRun {
        seed,
        initial: SectorDescriptor::of(state.basis()),
        events,
        final_state: current,
    })
}

/// Replay known detection phases without sampling.
pub fn replay(state: &QuantumState, us: &[f64]) -> Result<QuantumState> {
    us.iter().try_fold(state.clone(), |s, &u| apply_detection(&s, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn operator_coefficients() {
        let s = 1.0 / 3f64.sqrt();
        let k = detection_operator_coeffs(3, 0.0).unwrap();
        assert!(k.iter().all(|x| (x - c(s, 0.0)).norm() < 1e-15));
        let k = detection_operator_coeffs(3, PI).unwrap();
        for (x, e) in k.iter().zip([s, -s, s]) {
            assert!((x - c(e, 0.0)).norm() < 1e-15);
        }
        let k = detection_operator_coeffs(4, PI / 2.0).unwrap();
        for (x, e) in k.iter().zip([c(0.5, 0.0), c(0.0, -0.5), c(-0.5, 0.0), c(0.0, 0.5)]) {
            assert!((x - e).norm() < 1e-15);
        }
        assert!(detection_operator_coeffs(1, 0.0).is_err());
    }

    #[test]
    fn localized_atom_has_flat_density() {
        let d = detection_density(&QuantumState::fock(&[1, 0, 0]).unwrap(), 64).unwrap();
        for v in d.values() {
            assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_number_state_has_flat_density() {
        let d = detection_density(&QuantumState::uniform_fock(3, 7).unwrap(), 128).unwrap();
        for v in d.values() {
            assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-13);
        }
    }

    #[test]
    fn empty_sector_is_an_error() {
        assert!(detection_density(&QuantumState::fock(&[0, 0, 0]).unwrap(), 64).is_err());
    }

    #[test]
    fn first_detection_produces_three_term_superposition() {
        let n = 4;
        let start = QuantumState::uniform_fock(3, n).unwrap();
        for u in [0.0, 0.9, -2.3] {
            let post = apply_detection(&start, u).unwrap();
            let s = 1.0 / 3f64.sqrt();
            assert!((post.amplitude(&[n - 1, n, n]) - c(s, 0.0)).norm() < 1e-14);
            assert!((post.amplitude(&[n, n - 1, n]) - Complex64::from_polar(s, -u)).norm() < 1e-14);
            assert!((post.amplitude(&[n, n, n - 1]) - Complex64::from_polar(s, -2.0 * u)).norm() < 1e-14);
        }
    }

    #[test]
    fn quantile_inverts_the_cdf() {
        let post = apply_detection(&QuantumState::uniform_fock(3, 2).unwrap(), 0.4).unwrap();
        let d = detection_density(&post, 256).unwrap();
        let cdf = d.cdf();
        assert!((cdf[256] - 1.0).abs() < 1e-12);
        for r in [0.0, 0.1, 0.5, 0.77, 0.999_999] {
            let u = d.quantile(r);
            assert!((-PI..PI).contains(&u));
            let cell = ((u + PI) / d.spacing()).floor() as usize;
            let frac = (u - d.angle(cell)) / d.spacing();
            let back = cdf[cell] + frac * (cdf[cell + 1] - cdf[cell]);
            assert!((back - r).abs() < 1e-9, "r={r} back={back}");
        }
    }

    #[test]
    fn eta_distributions_parse_and_sample() {
        let mut rng = rng_from_seed(3);
        let d: EtaDistribution = "delta:1.5".parse().unwrap();
        assert_eq!(d.sample(&mut rng), 1.5);
        let g: EtaDistribution = "gauss:1.0,0.05".parse().unwrap();
        let xs: Vec<f64> = (0..4000).map(|_| g.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(xs.iter().all(|&x| x > 0.0));
        assert!((mean - 1.0).abs() < 0.01);
        let t: EtaDistribution = "table:0.5=1,2.0=3".parse().unwrap();
        let xs: Vec<f64> = (0..4000).map(|_| t.sample(&mut rng)).collect();
        let frac = xs.iter().filter(|&&x| x == 2.0).count() as f64 / xs.len() as f64;
        assert!((frac - 0.75).abs() < 0.03);
        assert_eq!(t.to_string().parse::<EtaDistribution>().unwrap(), t);
        for bad in [
            "delta:-1",
            "delta",
            "gauss:1",
            "table:1",
            "table:0=1",
            "poisson:3",
            "gauss:-10,1",
        ] {
            assert!(bad.parse::<EtaDistribution>().is_err(), "{bad}");
        }
    }

    #[test]
    fn too_many_detections_is_an_error() {
        let s = QuantumState::uniform_fock(3, 1).unwrap();
        assert!(run_sequence(&s, 4, &RunOptions::default(), 0).is_err());
    }

    #[test]
    fn zero_detections_echo_the_input() {
        let s = QuantumState::uniform_fock(3, 2).unwrap();
        let run = run_sequence(&s, 0, &RunOptions::default(), 9).unwrap();
        assert!(run.events.is_empty());
        assert_eq!(run.final_state, s);
    }

    #[test]
    fn single_atom_detection_leaves_vacuum() {
        let s = QuantumState::fock(&[1, 0, 0]).unwrap();
        let run = run_sequence(&s, 1, &RunOptions::default(), 5).unwrap();
        assert_eq!(run.final_state.total_atoms(), 0);
        assert!((run.final_state.norm() - 1.0).abs() < 1e-15);
    }
}
