//! Anti-Wick quantization: Weyl quantization of the symbol smoothed by the unit
//! Gaussian `π^{−n} e^{−|x−y|²−|ξ−η|²}`.

use num_complex::Complex64 as C64;

use super::grid::weyl_quantize_grid_table;
use super::hermite::quantize_poly;
use super::{Basis, OperatorMatrix, PhaseSymbol};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::symbol::{Poly, SymbolExpr};

/// Constant added to a quadratic `x_j²` or `ξ_j²` by the smoothing (half the
/// Gaussian variance sum per coordinate).
pub const WICK_QUADRATIC_SHIFT: f64 = 0.5;

/// Gaussian extension of the convolution window, in units of the unit Gaussian.
const WINDOW: f64 = 6.5;

/// Moments `E[Y^k]` of `Y ~ N(0, 1/2)`.
fn half_gaussian_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    // (k−1)!! / 2^{k/2}
    let mut r = 1.0;
    let mut j = k as i64 - 1;
    while j > 0 {
        r *= j as f64;
        j -= 2;
    }
    r / 2f64.powi((k / 2) as i32)
}

/// Exact Gaussian smoothing of a polynomial symbol.
pub fn gaussian_smooth_poly(p: &Poly<C64>) -> Poly<C64> {
    let nv = p.nvars();
    let mut out = Poly::zero(nv);
    for (e, c) in p.terms() {
        // expand Π_v (w_v + Y_v)^{e_v} and take expectations
        let mut acc = Poly::constant(nv, *c);
        for (v, &k) in e.iter().enumerate() {
            let mut factor = Poly::zero(nv);
            for j in 0..=k {
                let mom = half_gaussian_moment(k - j);
                if mom == 0.0 {
                    continue;
                }
                let mut ex = vec![0u32; nv];
                ex[v] = j;
                let coef = crate::symbol::jet::binomial(k as usize, j as usize) * mom;
                factor.add_term(ex, C64::new(coef, 0.0));
            }
            acc = acc.mul(&factor);
        }
        out = out.add(&acc);
    }
    out
}

fn gaussian_weights(step: f64) -> Vec<f64> {
    let k = (WINDOW / step).ceil() as i64;
    let w: Vec<f64> = (-k..=k).map(|i| (-(i as f64 * step).powi(2)).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Anti-Wick quantization of `a` on `basis`.
///
/// Hermite bases take polynomial symbols (smoothed exactly); one-dimensional
/// grids take any symbol that is polynomial in ξ or has a ξ-limit `a∞(x)`;
/// two-dimensional grids take x-only symbols.
pub fn wick_quantize(
    a: &dyn PhaseSymbol,
    xi_limit: Option<&dyn PhaseSymbol>,
    basis: Basis,
    h: f64,
) -> Result<OperatorMatrix> {
    match basis {
        Basis::Hermite { .. } => Err(Error::InvalidInput(
            "Hermite Wick quantization needs a polynomial symbol; use wick_quantize_expr".into(),
        )),
        Basis::FourierGrid { half_width, points, n } => {
            if a.dim() != n {
                return Err(Error::InvalidInput("dimension mismatch between symbol and basis".into()));
            }
            if n == 1 {
                wick_grid_1d(a, xi_limit, half_width, points, basis, h)
            } else if !a.depends_on_xi() {
                wick_grid_x_only(a, half_width, points, n, basis, h)
            } else {
                Err(Error::InvalidInput(
                    "two-dimensional grid Wick quantization supports x-only symbols".into(),
                ))
            }
        }
    }
}

/// Anti-Wick quantization of an expression: exact smoothing on Hermite bases,
/// numerical smoothing on grids.
pub fn wick_quantize_expr(a: &SymbolExpr, basis: Basis, h: f64) -> Result<OperatorMatrix> {
    match basis {
        Basis::Hermite { .. } => {
            let p = a
                .to_poly()
                .ok_or_else(|| Error::InvalidInput(format!("Hermite Wick path needs a polynomial: {a}")))?;
            let mut op = quantize_poly(&gaussian_smooth_poly(&p), basis, h)?;
            op.provenance.path = "wick_hermite".into();
            op.provenance.symbol = a.to_string();
            Ok(op)
        }
        _ => wick_quantize(a, None, basis, h),
    }
}

fn wick_grid_1d(
    a: &dyn PhaseSymbol,
    xi_limit: Option<&dyn PhaseSymbol>,
    l: f64,
    m: usize,
    basis: Basis,
    h: f64,
) -> Result<OperatorMatrix> {
    let polynomial = a.polynomial_in_xi();
    if !polynomial && xi_limit.is_none() && a.depends_on_xi() {
        return Err(Error::InvalidInput("Wick quantization needs a ξ-limit for this symbol".into()));
    }
    let dx = l / m as f64;
    let dxi = h * std::f64::consts::PI / l;
    let wx = gaussian_weights(dx);
    let wxi = gaussian_weights(dxi);
    let kx = (wx.len() / 2) as i64;
    let kxi = (wxi.len() / 2) as i64;
    let ns = 2 * m - 1;
    let nx = ns + 2 * kx as usize;
    let half = (m / 2) as i64;
    let nxi = m + 2 * kxi as usize;
    let xval = |i: usize| -l + dx * (i as f64 - kx as f64);
    let xival = |i: usize| dxi * ((i as i64 - kxi - half) as f64);
    let inf = |x: f64| xi_limit.map(|q| q.eval(&[x, 0.0])).unwrap_or(C64::new(0.0, 0.0));
    // a − a∞ on the extended lattice, smoothed along ξ then along x
    let mut rows: Vec<Vec<C64>> = (0..nx)
        .map(|i| {
            let x = xval(i);
            let ai = inf(x);
            let line: Vec<C64> = (0..nxi).map(|j| a.eval(&[x, xival(j)]) - ai).collect();
            (0..m)
                .map(|t| (0..wxi.len()).map(|q| line[t + q] * wxi[q]).sum())
                .collect()
        })
        .collect();
    let table: Vec<Vec<C64>> = (0..ns)
        .map(|s| (0..m).map(|t| (0..wx.len()).map(|q| rows[s + q][t] * wx[q]).sum()).collect())
        .collect();
    rows.clear();
    let limit: Vec<C64> = (0..ns)
        .map(|s| (0..wx.len()).map(|q| inf(xval(s + q)) * wx[q]).sum())
        .collect();
    // table columns are ordered by increasing ξ from −M/2; map FFT order onto them
    let fft_to_sorted = |k: usize| if k < m / 2 { k + m / 2 } else { k - m / 2 };
    let mut op = weyl_quantize_grid_table(
        basis,
        h,
        &|s, k| table[s][fft_to_sorted(k)] + limit[s],
        &|s| limit[s],
        !polynomial,
        &a.label(),
    )?;
    op.provenance.path = "wick_grid".into();
    Ok(op)
}

fn wick_grid_x_only(
    a: &dyn PhaseSymbol,
    l: f64,
    m: usize,
    n: usize,
    basis: Basis,
    h: f64,
) -> Result<OperatorMatrix> {
    let step = 0.1;
    let k = (WINDOW / step).ceil() as i64;
    let nodes: Vec<(f64, f64)> = (-k..=k)
        .map(|i| {
            let y = i as f64 * step;
            (y, (-y * y).exp())
        })
        .collect();
    let wsum: f64 = nodes.iter().map(|v| v.1).sum();
    let xs = super::grid::grid_points(l, m);
    let size = m.pow(n as u32);
    let mut mat = CMat::zeros(size, size);
    for idx in 0..size {
        let (i1, i2) = (idx / m, idx % m);
        let mut acc = C64::new(0.0, 0.0);
        for &(y1, w1) in &nodes {
            for &(y2, w2) in &nodes {
                acc += a.eval(&[xs[i1] + y1, xs[i2] + y2, 0.0, 0.0]) * (w1 * w2);
            }
        }
        mat[(idx, idx)] = acc / (wsum * wsum);
    }
    Ok(OperatorMatrix {
        matrix: mat,
        h,
        basis,
        provenance: super::Provenance { path: "wick_grid".into(), symbol: a.label() },
        warnings: Vec::new(),
    })
}
