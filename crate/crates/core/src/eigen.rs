//! Lowest eigenpair of a Hermitian [`SparseOperator`].
//!
//! Small problems go through a dense Hermitian eigendecomposition. Larger ones
//! use explicitly restarted Lanczos with full reorthogonalization, restarting
//! from the current Ritz vector until the true residual `‖Hx − θx‖` is below
//! tolerance. The first excited level is then estimated by a Lanczos pass on
//! the operator deflated against the converged vector.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Dimensions up to this use the dense solver.
    pub dense_limit: usize,
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Required `‖Hx − Ex‖`.
    pub tolerance: f64,
    /// Seed of the Lanczos start vector.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_limit: 600,
            krylov_dim: 80,
            max_restarts: 400,
            tolerance: 1e-9,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub energy: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
    /// Estimate of the next level, `None` for one-dimensional problems.
    pub next_energy: Option<f64>,
    /// Operator applications (Lanczos) or 0 for the dense path.
    pub iterations: usize,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn residual_of(op: &SparseOperator, x: &[Complex64]) -> (f64, f64) {
    let mut hx = vec![Complex64::new(0.0, 0.0); x.len()];
    op.matvec(x, &mut hx);
    let theta = dot(x, &hx).re;
    axpy(Complex64::new(-theta, 0.0), x, &mut hx);
    (theta, norm(&hx))
}

pub fn lowest_eigenpair(op: &SparseOperator, opts: &EigenOptions) -> Result<Eigenpair> {
    if !op.is_hermitian() {
        return Err(Error::InvalidArgument("eigensolver needs a Hermitian operator".into()));
    }
    if op.dim() == 0 {
        return Err(Error::InvalidArgument("empty operator".into()));
    }
    if op.dim() <= opts.dense_limit {
        dense_lowest(op)
    } else {
        lanczos_lowest(op, opts)
    }
}

fn dense_lowest(op: &SparseOperator) -> Result<Eigenpair> {
    let eig = op.to_dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..op.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let k = order[0];
    let vector: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
    let (energy, residual) = residual_of(op, &vector);
    Ok(Eigenpair {
        energy,
        vector,
        residual,
        next_energy: order.get(1).map(|&i| eig.eigenvalues[i]),
        iterations: 0,
    })
}

/// One Lanczos cycle from unit vector `start`, optionally orthogonal to `deflate`.
/// Returns the basis and the tridiagonal eigen-decomposition.
fn lanczos_cycle(
    op: &SparseOperator,
    start: Vec<Complex64>,
    steps: usize,
    deflate: Option<&[Complex64]>,
    applications: &mut usize,
) -> (Vec<Vec<Complex64>>, DVector<f64>, DMatrix<f64>) {
    let dim = op.dim();
    let scale = op.norm_bound().max(f64::MIN_POSITIVE);
    let mut basis = vec![start];
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    loop {
        let j = basis.len() - 1;
        op.matvec(&basis[j], &mut w);
        *applications += 1;
        if let Some(d) = deflate {
            let h = dot(d, &w);
            axpy(-h, d, &mut w);
        }
        let alpha = dot(&basis[j], &w).re;
        alphas.push(alpha);
        for _ in 0..2 {
            if let Some(d) = deflate {
                let h = dot(d, &w);
                axpy(-h, d, &mut w);
            }
            for v in &basis {
                let h = dot(v, &w);
                axpy(-h, v, &mut w);
            }
        }
        let beta = norm(&w);
        let limit = deflate.map_or(dim, |_| dim - 1);
        if beta <= 1e-13 * scale || basis.len() >= steps || basis.len() >= limit {
            break;
        }
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = t.symmetric_eigen();
    (basis, eig.eigenvalues, eig.eigenvectors)
}

fn ritz_vector(basis: &[Vec<Complex64>], coeffs: nalgebra::DVectorView<'_, f64>) -> Vec<Complex64> {
    let mut x = vec![Complex64::new(0.0, 0.0); basis[0].len()];
    for (v, &c) in basis.iter().zip(coeffs.iter()) {
        axpy(Complex64::new(c, 0.0), v, &mut x);
    }
    let n = norm(&x);
    x.iter_mut().for_each(|xi| *xi /= n);
    x
}

fn argmin(values: &DVector<f64>) -> usize {
    (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("non-empty spectrum")
}

fn random_unit(dim: usize, seed: u64, against: Option<&[Complex64]>) -> Vec<Complex64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    if let Some(d) = against {
        let h = dot(d, &v);
        axpy(-h, d, &mut v);
    }
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

fn lanczos_lowest(op: &SparseOperator, opts: &EigenOptions) -> Result<Eigenpair> {
    let dim = op.dim();
    let steps = opts.krylov_dim.clamp(2, dim);
    let mut applications = 0;
    let mut x = random_unit(dim, opts.seed, None);
    let mut last_residual = f64::INFINITY;
    for _ in 0..opts.max_restarts {
        let (basis, values, vectors) = lanczos_cycle(op, x, steps, None, &mut applications);
        let k = argmin(&values);
        x = ritz_vector(&basis, vectors.column(k));
        let (energy, residual) = residual_of(op, &x);
        last_residual = residual;
        if residual < opts.tolerance {
            let next_energy = if dim > 1 {
                let start = random_unit(dim, opts.seed ^ 0x9e37_79b9, Some(&x));
                let (_, values, _) = lanczos_cycle(op, start, steps.max(120).min(dim - 1), Some(&x), &mut applications);
                Some(values[argmin(&values)])
            } else {
                None
            };
            return Ok(Eigenpair {
                energy,
                vector: x,
                residual,
                next_energy,
                iterations: applications,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: applications,
        residual: last_residual,
    })
}
