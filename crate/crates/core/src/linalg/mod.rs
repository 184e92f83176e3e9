//! Dense linear algebra helpers on top of `faer`, plus an in-crate complex Schur
//! factorization and matrix exponential.

mod expm;
mod schur;

pub use expm::expm;
pub use schur::{givens, Schur};

use faer::Mat;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type CMat = Mat<C64>;

pub fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { C64::new(1.0, 0.0) } else { zero() })
}

pub fn scale(a: &CMat, s: C64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn shifted(a: &CMat, z: C64) -> CMat {
    let mut b = a.clone();
    for i in 0..a.nrows() {
        b[(i, i)] -= z;
    }
    b
}

pub fn adjoint(a: &CMat) -> CMat {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

pub fn max_abs(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn frobenius(a: &CMat) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// `max|A − A*| / max(max|A|, tiny)`.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut d = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            d = d.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    d / max_abs(a).max(f64::MIN_POSITIVE)
}

pub fn matvec(a: &CMat, v: &[C64]) -> Vec<C64> {
    let mut out = vec![zero(); a.nrows()];
    for j in 0..a.ncols() {
        let vj = v[j];
        if vj == zero() {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += a[(i, j)] * vj;
        }
    }
    out
}

pub fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Deterministic complex Gaussian vector.
pub fn seeded_vector(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect()
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    a.singular_values().map_err(|e| Error::LinAlg(format!("svd failed: {e:?}")))
}

/// Smallest singular value of `A − zI` by full SVD (reference path).
pub fn sigma_min_svd(a: &CMat, z: C64) -> Result<f64> {
    let s = singular_values(&shifted(a, z))?;
    Ok(*s.last().unwrap_or(&0.0))
}

/// Spectral norm `‖A‖₂` by full SVD.
pub fn norm2(a: &CMat) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Eigenvalues and right eigenvectors (columns), unsorted.
pub fn eigen(a: &CMat) -> Result<(Vec<C64>, CMat)> {
    let e = a.eigen().map_err(|e| Error::Convergence(format!("eigendecomposition: {e:?}")))?;
    let s = e.S();
    let vals = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn eigenvalues(a: &CMat) -> Result<Vec<C64>> {
    a.eigenvalues().map_err(|e| Error::Convergence(format!("eigenvalues: {e:?}")))
}

/// Eigenvalues of a Hermitian matrix, nondecreasing.
pub fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Convergence(format!("hermitian eigenvalues: {e:?}")))
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = (a.nrows(), a.ncols());
    let (rb, cb) = (b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

pub fn submatrix(a: &CMat, rows: usize, cols: usize) -> CMat {
    Mat::from_fn(rows, cols, |i, j| a[(i, j)])
}

pub fn inverse(a: &CMat) -> CMat {
    use faer::linalg::solvers::DenseSolveCore;
    a.partial_piv_lu().inverse()
}
