use num_complex::Complex64 as C64;
use serde::Serialize;

use super::resolvent::norm2_estimate;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::quantize::{Basis, OperatorMatrix};

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub size_cap: usize,
    /// Residual tolerance relative to `‖P‖`.
    pub residual_rel: f64,
    pub tail_max: f64,
    pub keep_vectors: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { size_cap: 4096, residual_rel: 1e-8, tail_max: 1e-6, keep_vectors: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<C64>,
    pub residuals: Vec<f64>,
    pub tail_mass: Vec<f64>,
    pub accepted: Vec<bool>,
    pub norm: f64,
    pub tau_eig: f64,
    #[serde(skip)]
    pub vectors: Option<CMat>,
}

impl SpectrumReport {
    pub fn accepted_values(&self) -> Vec<C64> {
        self.eigenvalues
            .iter()
            .zip(&self.accepted)
            .filter(|(_, a)| **a)
            .map(|(v, _)| *v)
            .collect()
    }

    /// Distance from `z` to the accepted spectrum (infinite when empty).
    pub fn distance(&self, z: C64) -> f64 {
        self.accepted_values().iter().map(|l| (l - z).norm()).fold(f64::INFINITY, f64::min)
    }
}

/// Fraction of the squared norm of `v` carried by the top 10% of Hermite modes
/// (any axis) or by grid points in the outer 10% of the box (any axis).
pub fn tail_mass(basis: &Basis, v: &[C64]) -> f64 {
    let m = basis.per_axis();
    let n = basis.dim();
    let cut = m - (m / 10).max(1);
    let in_tail = |k: usize| -> bool {
        match basis {
            Basis::Hermite { .. } => k >= cut,
            Basis::FourierGrid { .. } => {
                let x = (k as f64 + 0.5) / m as f64;
                !(0.05..=0.95).contains(&x)
            }
        }
    };
    let mut tail = 0.0;
    let mut total = 0.0;
    for (idx, c) in v.iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        let mut r = idx;
        let mut hit = false;
        for _ in 0..n {
            hit |= in_tail(r % m);
            r /= m;
        }
        if hit {
            tail += e;
        }
    }
    if total == 0.0 {
        1.0
    } else {
        tail / total
    }
}

pub fn eigendecompose(p: &OperatorMatrix) -> Result<SpectrumReport> {
    eigendecompose_with(p, EigenOptions::default())
}

pub fn eigendecompose_with(p: &OperatorMatrix, opts: EigenOptions) -> Result<SpectrumReport> {
    let n = p.size();
    if n > opts.size_cap {
        return Err(Error::InvalidInput(format!("matrix size {n} exceeds cap {}", opts.size_cap)));
    }
    let a = &p.matrix;
    if a.col_iter().any(|c| c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    let norm = norm2_estimate(a);
    let tau = opts.residual_rel * norm;
    let (vals, vecs) = linalg::eigen(a)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        vals[i].re.total_cmp(&vals[j].re).then(vals[i].im.total_cmp(&vals[j].im))
    });
    let mut eigenvalues = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut tails = Vec::with_capacity(n);
    let mut accepted = Vec::with_capacity(n);
    for &k in &order {
        let v: Vec<C64> = (0..n).map(|i| vecs[(i, k)]).collect();
        let av = linalg::matvec(a, &v);
        let r: Vec<C64> = av.iter().zip(&v).map(|(x, y)| x - vals[k] * y).collect();
        let res = linalg::vnorm(&r) / linalg::vnorm(&v);
        let tail = tail_mass(&p.basis, &v);
        eigenvalues.push(vals[k]);
        residuals.push(res);
        tails.push(tail);
        accepted.push(res <= tau && tail <= opts.tail_max);
    }
    let vectors = opts
        .keep_vectors
        .then(|| CMat::from_fn(n, n, |i, j| vecs[(i, order[j])]));
    Ok(SpectrumReport { eigenvalues, residuals, tail_mass: tails, accepted, norm, tau_eig: tau, vectors })
}
