//! Brute-force reference implementation.
//!
//! Everything here works on the full tensor-product space of `n` modes, each
//! truncated at `cutoff` atoms, with dense `nalgebra` matrices. It shares no
//! code with the library's sector-indexed path.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Product space of `n` modes with occupations `0..=cutoff`.
#[derive(Debug, Clone, Copy)]
pub struct ProductSpace {
    pub n: usize,
    pub cutoff: u32,
}

impl ProductSpace {
    pub fn dim(&self) -> usize {
        (self.cutoff as usize + 1).pow(self.n as u32)
    }

    pub fn occ(&self, mut idx: usize) -> Vec<u32> {
        let base = self.cutoff as usize + 1;
        (0..self.n)
            .map(|_| {
                let k = idx % base;
                idx /= base;
                k as u32
            })
            .collect()
    }

    pub fn index(&self, occ: &[u32]) -> Option<usize> {
        let base = self.cutoff as usize + 1;
        let mut idx = 0;
        for &k in occ.iter().rev() {
            if k > self.cutoff {
                return None;
            }
            idx = idx * base + k as usize;
        }
        Some(idx)
    }

    pub fn annihilator(&self, mode: usize) -> DMatrix<C> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for col in 0..d {
            let mut occ = self.occ(col);
            if occ[mode] == 0 {
                continue;
            }
            let k = occ[mode];
            occ[mode] -= 1;
            let row = self.index(&occ).unwrap();
            m[(row, col)] = c((k as f64).sqrt(), 0.0);
        }
        m
    }

    pub fn number_state(&self, occ: &[u32]) -> DVector<C> {
        let mut v = DVector::zeros(self.dim());
        v[self.index(occ).unwrap()] = c(1.0, 0.0);
        v
    }

    /// `Σ_j e^{-i j u} a_j / √n`.
    pub fn detection_operator(&self, u: f64) -> DMatrix<C> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for j in 0..self.n {
            m += self.annihilator(j) * C::from_polar(1.0 / (self.n as f64).sqrt(), -(j as f64) * u);
        }
        m
    }

    /// Bose-Hubbard matrix restricted to the `total`-atom sector, with the sector's
    /// product-space indices.
    pub fn hubbard_sector(&self, total: u32, j: f64, u: f64, periodic: bool) -> (DMatrix<f64>, Vec<usize>) {
        let n = self.n;
        let a: Vec<DMatrix<C>> = (0..n).map(|k| self.annihilator(k)).collect();
        let mut h = DMatrix::<C>::zeros(self.dim(), self.dim());
        let mut bonds = vec![];
        for s in 0..n - 1 {
            bonds.push((s, s + 1));
        }
        if periodic && n > 2 {
            bonds.push((n - 1, 0));
        }
        for (p, q) in bonds {
            let hop = a[p].adjoint() * &a[q];
            h -= (&hop + hop.adjoint()) * c(j, 0.0);
        }
        for ak in &a {
            let ad = ak.adjoint();
            h += &ad * &ad * ak * ak * c(u / 2.0, 0.0);
        }
        let idx: Vec<usize> = (0..self.dim())
            .filter(|&i| self.occ(i).iter().sum::<u32>() == total)
            .collect();
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, col| h[(idx[r], idx[col])].re);
        (sub, idx)
    }
}

pub fn normalized(v: DVector<C>) -> DVector<C> {
    let n = v.norm();
    v / c(n, 0.0)
}

/// `Ω(u_k) … Ω(u_1) |N,N,N⟩`, renormalized after each step.
pub fn detect_sequence(space: &ProductSpace, start: &[u32], us: &[f64]) -> DVector<C> {
    let mut v = space.number_state(start);
    for &u in us {
        v = normalized(space.detection_operator(u) * v);
    }
    v
}

/// `⟨Ω†(u)Ω(u)⟩ / Σ_j ⟨n_j⟩ · n / 2π`: detection density with unit integral.
pub fn detection_density(space: &ProductSpace, v: &DVector<C>, u: f64) -> f64 {
    let w = space.detection_operator(u) * v;
    let total: f64 = (0..space.dim())
        .map(|i| v[i].norm_sqr() * space.occ(i).iter().sum::<u32>() as f64)
        .sum();
    w.norm_squared() * space.n as f64 / total / (2.0 * PI)
}

/// `|Σ_{pqr} ψ e^{-iqx} e^{-ir(x+y)}|²` over a three-mode product vector.
pub fn phase_value(space: &ProductSpace, v: &DVector<C>, x: f64, y: f64) -> f64 {
    assert_eq!(space.n, 3);
    let mut acc = c(0.0, 0.0);
    for i in 0..space.dim() {
        if v[i].norm_sqr() == 0.0 {
            continue;
        }
        let occ = space.occ(i);
        let (q, r) = (occ[1] as f64, occ[2] as f64);
        acc += v[i] * C::from_polar(1.0, -q * x - r * (x + y));
    }
    acc.norm_sqr()
}

/// Phase grid over `(−π + 2πi/M, −π + 2πj/M)` rescaled to mean 1.
pub fn phase_grid(space: &ProductSpace, v: &DVector<C>, m: usize) -> Vec<f64> {
    let ang = |i: usize| -PI + 2.0 * PI * i as f64 / m as f64;
    let mut g = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            g.push(phase_value(space, v, ang(i), ang(j)));
        }
    }
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    g.iter().map(|x| x / mean).collect()
}

/// `P(N_a, N_b)` as a map keyed by `(N_a, N_b)`.
pub fn number_distribution(space: &ProductSpace, v: &DVector<C>) -> std::collections::BTreeMap<(u32, u32), f64> {
    let mut out = std::collections::BTreeMap::new();
    for i in 0..space.dim() {
        let p = v[i].norm_sqr();
        if p == 0.0 {
            continue;
        }
        let occ = space.occ(i);
        *out.entry((occ[0], occ[1])).or_insert(0.0) += p;
    }
    out
}

/// The one-detection phase distribution in closed form.
pub fn one_detection_closed_form(u: f64, x: f64, y: f64) -> f64 {
    1.0 + 2.0 / 3.0 * ((u - x).cos() + (u - y).cos() + (2.0 * u - x - y).cos())
}

/// Exact hat-state amplitudes at ξ = 0 from expanding (α³+β³+γ³−3αβγ)^N by hand.
///
/// Returns `(occupation, amplitude)` for every nonzero entry.
pub fn hat_amplitudes_exact(n: u32) -> Vec<([u32; 3], f64)> {
    match n {
        1 => {
            let a = (2.0f64 / 9.0).sqrt();
            vec![
                ([3, 0, 0], a),
                ([0, 3, 0], a),
                ([0, 0, 3], a),
                ([1, 1, 1], -(1.0f64 / 3.0).sqrt()),
            ]
        }
        2 => {
            // X² = Σα⁶ + 2Σα³β³ − 6Σα⁴βγ + 9α²β²γ², over √((3²·2!)³) = √5832
            let d = 5832f64.sqrt();
            let six = 720f64.sqrt() / d;
            let pair = 2.0 * 36f64.sqrt() / d;
            let four = -6.0 * 24f64.sqrt() / d;
            let mid = 9.0 * 8f64.sqrt() / d;
            vec![
                ([6, 0, 0], six),
                ([0, 6, 0], six),
                ([0, 0, 6], six),
                ([3, 3, 0], pair),
                ([3, 0, 3], pair),
                ([0, 3, 3], pair),
                ([4, 1, 1], four),
                ([1, 4, 1], four),
                ([1, 1, 4], four),
                ([2, 2, 2], mid),
            ]
        }
        _ => panic!("exact expansion only tabulated for N = 1, 2"),
    }
}
