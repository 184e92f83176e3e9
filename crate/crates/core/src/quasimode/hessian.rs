use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbol::jet::bracket;
use crate::symbol::SymbolExpr;

#[derive(Debug, Clone, Serialize)]
pub struct HessianReport {
    /// Symmetric `n × n` matrix `A = φ''(x⁰)`.
    pub matrix: Vec<Vec<C64>>,
    pub min_im_eig: f64,
    /// `max |A ∇_ξ p + ∇_x p|`.
    pub constraint_residual: f64,
    /// Imaginary part of the free block (n = 2 only).
    pub delta: Option<f64>,
    pub bracket: f64,
}

fn min_eig_sym2(a: f64, b: f64, c: f64) -> f64 {
    // [[a, b], [b, c]]
    let m = 0.5 * (a + c);
    let r = (0.25 * (a - c).powi(2) + b * b).sqrt();
    m - r
}

/// Hessian of the phase at `w0`: symmetric, `A ∇_ξ p = −∇_x p`, `Im A ≻ 0`.
pub fn hessian_construct(p: &SymbolExpr, w0: &[f64]) -> Result<HessianReport> {
    let n = p.dim();
    if w0.len() != 2 * n {
        return Err(Error::InvalidInput("base point has the wrong dimension".into()));
    }
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidInput("Hessian construction supports n ≤ 2".into()));
    }
    let jet = p.eval_jet(w0, 1)?;
    let g = jet.gradient();
    let (a, b) = (&g[..n], &g[n..]);
    let br = bracket(&jet.re(), &jet.im()).value().re;
    let g2: f64 = g.iter().map(|c| c.norm_sqr()).sum();
    let tau = 1e-8 * g2.max(1.0);
    if br >= -tau {
        return Err(Error::Hypothesis(format!(
            "{{Re p, Im p}} = {br:.3e} is not negative at the base point"
        )));
    }
    let bn: f64 = b.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if bn <= 1e-12 * g2.sqrt() {
        return Err(Error::Hypothesis("∇_ξ p vanishes at the base point".into()));
    }
    let residual = |h: &[Vec<C64>]| -> f64 {
        (0..n)
            .map(|i| (0..n).map(|j| h[i][j] * b[j]).sum::<C64>() + a[i])
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    };
    if n == 1 {
        let m = -a[0] / b[0];
        let matrix = vec![vec![m]];
        return Ok(HessianReport { constraint_residual: residual(&matrix), matrix, min_im_eig: m.im, delta: None, bracket: br });
    }
    // pivot on the larger ξ-derivative; y is the remaining coordinate
    let (i1, iy) = if b[0].norm() >= b[1].norm() { (0, 1) } else { (1, 0) };
    let (a1, ay, b1, by) = (a[i1], a[iy], b[i1], b[iy]);
    // real coupling coefficients: i(z − z̄)/|b1| = −2 Im z / |b1|
    let ca = -2.0 * (b1 * ay.conj()).im / b1.norm();
    let cb = -2.0 * (b1 * by.conj()).im / b1.norm();
    let re_phi = if cb.abs() > 1e-12 * bn { -ca / cb } else { 0.0 };
    let scale_a = a.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let mut delta = 1.0;
    for _ in 0..60 {
        let phi = C64::new(re_phi, delta);
        let ay1 = -(ay + phi * by) / b1;
        let a11 = -(a1 + ay1 * by) / b1;
        let mut h = vec![vec![C64::new(0.0, 0.0); 2]; 2];
        h[i1][i1] = a11;
        h[i1][iy] = ay1;
        h[iy][i1] = ay1;
        h[iy][iy] = phi;
        let ev = min_eig_sym2(h[0][0].im, h[0][1].im, h[1][1].im);
        let res = residual(&h);
        if ev > 0.0 && res <= 1e-10 * scale_a {
            return Ok(HessianReport { matrix: h, min_im_eig: ev, constraint_residual: res, delta: Some(delta), bracket: br });
        }
        delta *= 0.5;
    }
    Err(Error::Construction("no admissible imaginary part found for the free Hessian block".into()))
}
