//! Matrix-free action of Weyl quantized ξ-polynomial symbols on grid vectors.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use super::grid::{dual_points, grid_points};
use super::Basis;
use crate::error::{Error, Result};
use crate::symbol::jet::binomial;
use crate::symbol::Poly;

/// Spectral multiplier `F⁻¹ diag(ξ^k) F` along one axis of a flattened `m^n` array.
fn xi_power(u: &mut [C64], m: usize, n: usize, axis: usize, xi: &[f64], k: u32, planner: &mut FftPlanner<f64>) {
    if k == 0 {
        return;
    }
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let stride = if n == 2 && axis == 0 { m } else { 1 };
    let lines = u.len() / m;
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for line in 0..lines {
        let start = if stride == 1 { line * m } else { line };
        for (q, b) in buf.iter_mut().enumerate() {
            *b = u[start + q * stride];
        }
        fwd.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(xi) {
            *b *= s.powi(k as i32) / m as f64;
        }
        inv.process(&mut buf);
        for (q, b) in buf.iter().enumerate() {
            u[start + q * stride] = *b;
        }
    }
}

/// `p^w(x, hD) u` for `p` polynomial in ξ, on `FourierGrid{L, M, n}`, `n ∈ {1, 2}`.
///
/// Each `c(x) ξ^β` is applied in the symmetrized form
/// `2^{−|β|} Σ_j C(β, j) (hD)^j c (hD)^{β−j}`, which is its Weyl quantization.
pub fn apply_weyl_poly_grid(p: &Poly<C64>, basis: Basis, h: f64, u: &[C64]) -> Result<Vec<C64>> {
    let Basis::FourierGrid { half_width, points: m, n } = basis else {
        return Err(Error::InvalidInput("matrix-free application needs a grid basis".into()));
    };
    if !(1..=2).contains(&n) || p.nvars() != 2 * n {
        return Err(Error::InvalidInput("symbol and grid dimensions differ".into()));
    }
    if u.len() != m.pow(n as u32) {
        return Err(Error::InvalidInput("vector length does not match the grid".into()));
    }
    let xs = grid_points(half_width, m);
    let xi = dual_points(half_width, m, h);
    // group by ξ-exponent: coefficient functions c_β(x) on the grid
    let mut groups: BTreeMap<Vec<u32>, Vec<C64>> = BTreeMap::new();
    for (e, c) in p.terms() {
        let coef = groups.entry(e[n..].to_vec()).or_insert_with(|| vec![C64::new(0.0, 0.0); u.len()]);
        for (idx, v) in coef.iter_mut().enumerate() {
            let mut mono = *c;
            for a in 0..n {
                let xa = if n == 2 && a == 0 { xs[idx / m] } else { xs[idx % m] };
                mono *= xa.powi(e[a] as i32);
            }
            *v += mono;
        }
    }
    let mut planner = FftPlanner::new();
    let mut out = vec![C64::new(0.0, 0.0); u.len()];
    for (beta, coef) in &groups {
        let b1 = beta[0];
        let b2 = if n == 2 { beta[1] } else { 0 };
        for j1 in 0..=b1 {
            for j2 in 0..=b2 {
                let w = binomial(b1 as usize, j1 as usize) * binomial(b2 as usize, j2 as usize)
                    / 2f64.powi((b1 + b2) as i32);
                let mut v = u.to_vec();
                xi_power(&mut v, m, n, 0, &xi, b1 - j1, &mut planner);
                if n == 2 {
                    xi_power(&mut v, m, n, 1, &xi, b2 - j2, &mut planner);
                }
                for (vi, ci) in v.iter_mut().zip(coef) {
                    *vi *= ci;
                }
                xi_power(&mut v, m, n, 0, &xi, j1, &mut planner);
                if n == 2 {
                    xi_power(&mut v, m, n, 1, &xi, j2, &mut planner);
                }
                for (o, vi) in out.iter_mut().zip(&v) {
                    *o += vi * w;
                }
            }
        }
    }
    Ok(out)
}
