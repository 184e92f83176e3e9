use std::time::Instant;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Schur};
use crate::quantize::OperatorMatrix;

const START_SEED: u64 = 0x5eed_5eed;
const MAX_ITERS: usize = 80;
/// Relative change of the Lanczos estimate treated as converged.
const LANCZOS_TOL: f64 = 1e-13;

/// Deterministic estimate of `‖A‖₂` by power iteration on `A*A`.
pub fn norm2_estimate(a: &CMat) -> f64 {
    let n = a.ncols();
    if n == 0 {
        return 0.0;
    }
    let ah = linalg::adjoint(a);
    let mut v = linalg::seeded_vector(n, START_SEED);
    let mut est = 0.0;
    for _ in 0..100 {
        let nv = linalg::vnorm(&v);
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|c| *c /= nv);
        let w = linalg::matvec(a, &v);
        let next = linalg::vnorm(&w);
        v = linalg::matvec(&ah, &w);
        if (next - est).abs() <= 1e-12 * next {
            est = next;
            break;
        }
        est = next;
    }
    est
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMethod {
    /// Full SVD of `P − z` per node (reference path).
    Svd,
    /// One Schur factorization, inverse Lanczos with triangular solves per node.
    Schur,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaValue {
    pub value: f64,
    pub floored: bool,
    /// The fast path fell back to a full SVD.
    pub fallback: bool,
}

/// Reusable σ_min(P − z) evaluator.
pub struct SigmaEngine {
    matrix: CMat,
    schur: Option<Schur>,
    norm: f64,
    floor: f64,
}

impl SigmaEngine {
    pub fn new(p: &CMat, method: SigmaMethod) -> Result<SigmaEngine> {
        let norm = norm2_estimate(p);
        let schur = match method {
            SigmaMethod::Schur => Some(Schur::new(p)?),
            SigmaMethod::Svd => None,
        };
        Ok(SigmaEngine { matrix: p.clone(), schur, norm, floor: 1e3 * f64::EPSILON * norm })
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Values below this are reported as the floor with a flag.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    fn clamp(&self, v: f64, fallback: bool) -> SigmaValue {
        if v < self.floor || !v.is_finite() {
            SigmaValue { value: self.floor, floored: true, fallback }
        } else {
            SigmaValue { value: v, floored: false, fallback }
        }
    }

    pub fn sigma_min(&self, z: C64) -> Result<SigmaValue> {
        match &self.schur {
            None => Ok(self.clamp(linalg::sigma_min_svd(&self.matrix, z)?, false)),
            Some(s) => match inverse_lanczos(s, z) {
                Some(v) => Ok(self.clamp(v, false)),
                None => {
                    log::debug!("inverse Lanczos did not converge at z = {z}; using SVD");
                    Ok(self.clamp(linalg::sigma_min_svd(&self.matrix, z)?, true))
                }
            },
        }
    }
}

/// σ_min(T − z) as `λ_max^{−1/2}` of `B = (T − z)⁻¹(T − z)⁻*`, by Lanczos with full
/// reorthogonalization; `None` without convergence.
fn inverse_lanczos(s: &Schur, z: C64) -> Option<f64> {
    let n = s.n();
    if n == 0 {
        return Some(0.0);
    }
    let steps = n.min(MAX_ITERS);
    let mut q = linalg::seeded_vector(n, START_SEED);
    let nq = linalg::vnorm(&q);
    q.iter_mut().for_each(|c| *c /= nq);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(steps);
    let mut alpha: Vec<f64> = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut prev = f64::NAN;
    let mut calm = 0;
    for k in 0..steps {
        let mut w = q.clone();
        s.solve_upper_adjoint(z, &mut w);
        s.solve_upper(z, &mut w);
        if w.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            // exactly singular in floating point
            return Some(0.0);
        }
        let a = linalg::vdot(&q, &w).re;
        basis.push(q);
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = linalg::vdot(v, &w);
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let lam = tridiagonal_max(&alpha, &beta);
        if !(lam > 0.0) || !lam.is_finite() {
            return if lam.is_infinite() { Some(0.0) } else { None };
        }
        let b = linalg::vnorm(&w);
        if k + 1 == n || b <= LANCZOS_TOL * lam {
            // the Krylov space is invariant: the estimate is exact
            return Some(lam.sqrt().recip());
        }
        if prev.is_finite() && (lam - prev).abs() <= LANCZOS_TOL * lam {
            calm += 1;
            if calm >= 2 {
                return Some(lam.sqrt().recip());
            }
        } else {
            calm = 0;
        }
        prev = lam;
        beta.push(b);
        q = w.into_iter().map(|c| c / b).collect();
    }
    None
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal `a` and
/// off-diagonal `b`, by Sturm-sequence bisection.
fn tridiagonal_max(a: &[f64], b: &[f64]) -> f64 {
    let k = a.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + if i + 1 < k { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    // number of eigenvalues below x
    let below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..k {
            let off = if i > 0 { b[i - 1] * b[i - 1] } else { 0.0 };
            d = a[i] - x - if i > 0 { off / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * (x.abs() + 1.0);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// σ_min(P − z) by the requested method.
pub fn resolvent_norm(p: &OperatorMatrix, z: C64, method: SigmaMethod) -> Result<SigmaValue> {
    SigmaEngine::new(&p.matrix, method)?.sigma_min(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolventGrid {
    pub rect: Rect,
    /// `(n_re, n_im)`.
    pub shape: (usize, usize),
    /// Row-major: `values[j * n_re + i]` at `z = corner + (i·dRe, j·dIm)`.
    pub values: Vec<f64>,
    pub floored: Vec<bool>,
    pub h: f64,
    pub floor: f64,
    pub fallbacks: usize,
    pub method: SigmaMethod,
    #[serde(skip)]
    pub elapsed_seconds: f64,
}

impl ResolventGrid {
    pub fn node(&self, i: usize, j: usize) -> C64 {
        let (nr, ni) = self.shape;
        let dre = if nr > 1 { (self.rect.re_max - self.rect.re_min) / (nr - 1) as f64 } else { 0.0 };
        let dim = if ni > 1 { (self.rect.im_max - self.rect.im_min) / (ni - 1) as f64 } else { 0.0 };
        C64::new(self.rect.re_min + i as f64 * dre, self.rect.im_min + j as f64 * dim)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.shape.0 + i]
    }

    /// Builds a grid from a scalar field (for synthetic tests and replays).
    pub fn from_field(rect: Rect, shape: (usize, usize), f: impl Fn(C64) -> f64) -> ResolventGrid {
        let mut g = ResolventGrid {
            rect,
            shape,
            values: vec![0.0; shape.0 * shape.1],
            floored: vec![false; shape.0 * shape.1],
            h: 0.0,
            floor: 0.0,
            fallbacks: 0,
            method: SigmaMethod::Svd,
            elapsed_seconds: 0.0,
        };
        for j in 0..shape.1 {
            for i in 0..shape.0 {
                g.values[j * shape.0 + i] = f(g.node(i, j));
            }
        }
        g
    }
}

pub fn pseudospectrum_grid(p: &OperatorMatrix, rect: Rect, shape: (usize, usize)) -> Result<ResolventGrid> {
    pseudospectrum_grid_with(p, rect, shape, SigmaMethod::Schur)
}

pub fn pseudospectrum_grid_with(
    p: &OperatorMatrix,
    rect: Rect,
    shape: (usize, usize),
    method: SigmaMethod,
) -> Result<ResolventGrid> {
    if !(rect.re_max > rect.re_min && rect.im_max > rect.im_min) || shape.0 < 2 || shape.1 < 2 {
        return Err(Error::InvalidInput("degenerate rectangle or shape".into()));
    }
    let start = Instant::now();
    let engine = SigmaEngine::new(&p.matrix, method)?;
    let mut grid = ResolventGrid::from_field(rect, shape, |_| 0.0);
    grid.h = p.h;
    grid.floor = engine.floor();
    grid.method = method;
    let nodes: Vec<C64> = (0..shape.0 * shape.1).map(|k| grid.node(k % shape.0, k / shape.0)).collect();
    let vals: Vec<SigmaValue> = nodes
        .par_iter()
        .map(|&z| engine.sigma_min(z))
        .collect::<Result<Vec<_>>>()?;
    grid.values = vals.iter().map(|v| v.value).collect();
    grid.floored = vals.iter().map(|v| v.floored).collect();
    grid.fallbacks = vals.iter().filter(|v| v.fallback).count();
    if grid.fallbacks > 0 {
        log::info!("{} grid nodes fell back to SVD", grid.fallbacks);
    }
    grid.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(grid)
}
