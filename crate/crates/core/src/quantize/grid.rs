//! Weyl quantization on periodic Fourier grids.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::{Basis, OperatorMatrix, PhaseSymbol, Provenance};
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Spatial points `x_j = −L + 2Lj/M`.
pub fn grid_points(half_width: f64, points: usize) -> Vec<f64> {
    (0..points).map(|j| -half_width + 2.0 * half_width * j as f64 / points as f64).collect()
}

/// Dual frequencies `ξ_m = hπm/L` in FFT order (`m = 0..M/2−1, −M/2..−1`).
pub fn dual_points(half_width: f64, points: usize, h: f64) -> Vec<f64> {
    let m = points as i64;
    (0..m)
        .map(|k| {
            let f = if k < m / 2 { k } else { k - m };
            h * std::f64::consts::PI * f as f64 / half_width
        })
        .collect()
}

/// Limit `p∞(x) = lim_{|ξ|→∞} p(x, ξ)` subtracted before the transform.
pub enum XiLimit<'a> {
    /// No limit: the symbol is polynomial in ξ or decays.
    Absent,
    Given(&'a dyn PhaseSymbol),
    /// Average of the symbol at the two extreme dual frequencies.
    Numeric,
}

/// Relative kernel energy at offsets `|x − y| ≥ L/2` above which the dual window is
/// declared too small.
const TAIL_LIMIT: f64 = 1e-2;

fn grid_params(basis: Basis) -> Result<(f64, usize, usize)> {
    match basis {
        Basis::FourierGrid { half_width, points, n } => {
            if points < 4 || points % 2 != 0 {
                return Err(Error::InvalidInput("grid needs an even number of points ≥ 4".into()));
            }
            if half_width <= 0.0 {
                return Err(Error::InvalidInput("grid half-width must be positive".into()));
            }
            Ok((half_width, points, n))
        }
        Basis::Hermite { .. } => Err(Error::InvalidInput("grid path requires a FourierGrid basis".into())),
    }
}

/// Weyl quantization `A_jk = M⁻¹ Σ_m p((x_j+x_k)/2, ξ_m) e^{i(x_j−x_k)ξ_m/h}` on
/// `FourierGrid{L, M, n}`, `n ∈ {1, 2}`.
pub fn weyl_quantize_grid(
    p: &dyn PhaseSymbol,
    basis: Basis,
    h: f64,
    limit: XiLimit<'_>,
) -> Result<OperatorMatrix> {
    let (l, m, n) = grid_params(basis)?;
    if p.dim() != n {
        return Err(Error::InvalidInput("dimension mismatch between symbol and basis".into()));
    }
    if h <= 0.0 {
        return Err(Error::InvalidInput("h must be positive".into()));
    }
    let xi = dual_points(l, m, h);
    let exact = p.polynomial_in_xi();
    let pinf = |mid: &[f64]| -> C64 {
        match &limit {
            XiLimit::Absent => C64::new(0.0, 0.0),
            XiLimit::Given(q) => {
                let mut w = mid.to_vec();
                w.extend(std::iter::repeat(0.0).take(n));
                q.eval(&w)
            }
            XiLimit::Numeric => {
                let mut acc = C64::new(0.0, 0.0);
                let k = m / 2;
                for s in [xi[k], xi[k - 1]] {
                    let mut w = mid.to_vec();
                    w.extend(std::iter::repeat(s).take(n));
                    acc += p.eval(&w);
                }
                acc * 0.5
            }
        }
    };
    let matrix = match n {
        1 => {
            let table = |s: usize, k: usize| -> C64 {
                let mid = -l + l * s as f64 / m as f64;
                p.eval(&[mid, xi[k]])
            };
            let inf = |s: usize| pinf(&[-l + l * s as f64 / m as f64]);
            kernel_1d(m, &table, &inf, !exact)?
        }
        2 => kernel_2d(m, l, &xi, p, &pinf, !exact)?,
        _ => return Err(Error::InvalidInput("grid quantization supports n = 1, 2".into())),
    };
    Ok(OperatorMatrix {
        matrix,
        h,
        basis,
        provenance: Provenance { path: "weyl_grid".into(), symbol: p.label() },
        warnings: Vec::new(),
    })
}

/// Grid Weyl quantization from a tabulated symbol (n = 1): `table(s, k)` is the
/// symbol at midpoint `x = −L + Ls/M`, `s = 0..2M−2`, and dual frequency index `k`
/// (FFT order); `limit(s)` is the ξ-limit at that midpoint.
pub fn weyl_quantize_grid_table(
    basis: Basis,
    h: f64,
    table: &(dyn Fn(usize, usize) -> C64 + Sync),
    limit: &(dyn Fn(usize) -> C64 + Sync),
    check_tail: bool,
    label: &str,
) -> Result<OperatorMatrix> {
    let (_, m, n) = grid_params(basis)?;
    if n != 1 {
        return Err(Error::InvalidInput("tabulated grid quantization is one-dimensional".into()));
    }
    Ok(OperatorMatrix {
        matrix: kernel_1d(m, table, limit, check_tail)?,
        h,
        basis,
        provenance: Provenance { path: "weyl_grid".into(), symbol: label.into() },
        warnings: Vec::new(),
    })
}

fn tail_energy(f: &[C64], m: usize) -> (f64, f64) {
    let mut total = 0.0;
    let mut tail = 0.0;
    for (d, v) in f.iter().enumerate() {
        let off = d.min(m - d);
        let e = v.norm_sqr();
        total += e;
        if 4 * off >= m {
            tail += e;
        }
    }
    (tail, total)
}

fn kernel_1d(
    m: usize,
    table: &(dyn Fn(usize, usize) -> C64 + Sync),
    limit: &(dyn Fn(usize) -> C64 + Sync),
    check_tail: bool,
) -> Result<CMat> {
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_inverse(m);
    let cols: Vec<(Vec<C64>, C64, f64, f64)> = (0..2 * m - 1)
        .into_par_iter()
        .map(|s| {
            let inf = limit(s);
            let mut f: Vec<C64> = (0..m).map(|k| table(s, k) - inf).collect();
            fft.process(&mut f);
            for v in f.iter_mut() {
                *v /= m as f64;
            }
            let (tail, total) = tail_energy(&f, m);
            (f, inf, tail, total)
        })
        .collect();
    if check_tail {
        let total: f64 = cols.iter().map(|c| c.3).sum();
        let tail: f64 = cols.iter().map(|c| c.2).sum();
        if total > 0.0 && tail / total > TAIL_LIMIT {
            return Err(Error::Resolution(format!(
                "dual-grid window too small or ξ-limit missing: kernel tail energy {:.3e} > {TAIL_LIMIT}",
                tail / total
            )));
        }
    }
    let mut a = CMat::zeros(m, m);
    for j in 0..m {
        for k in 0..m {
            let (f, inf, _, _) = &cols[j + k];
            let d = (j + m - k) % m;
            a[(j, k)] = f[d];
            if j == k {
                a[(j, k)] += inf;
            }
        }
    }
    if a.col_iter().any(|c| c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    Ok(a)
}

fn kernel_2d(
    m: usize,
    l: f64,
    xi: &[f64],
    p: &dyn PhaseSymbol,
    pinf: &(dyn Fn(&[f64]) -> C64 + Sync),
    check_tail: bool,
) -> Result<CMat> {
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_inverse(m);
    let nm = 2 * m - 1;
    let blocks: Vec<(Vec<C64>, C64, f64, f64)> = (0..nm * nm)
        .into_par_iter()
        .map(|idx| {
            let (s1, s2) = (idx / nm, idx % nm);
            let mid = [-l + l * s1 as f64 / m as f64, -l + l * s2 as f64 / m as f64];
            let inf = pinf(&mid);
            let mut f: Vec<C64> = (0..m * m)
                .map(|k| p.eval(&[mid[0], mid[1], xi[k / m], xi[k % m]]) - inf)
                .collect();
            for row in f.chunks_mut(m) {
                fft.process(row);
            }
            let mut col = vec![C64::new(0.0, 0.0); m];
            for c in 0..m {
                for r in 0..m {
                    col[r] = f[r * m + c];
                }
                fft.process(&mut col);
                for r in 0..m {
                    f[r * m + c] = col[r] / (m * m) as f64;
                }
            }
            let mut tail = 0.0;
            let mut total = 0.0;
            for (k, v) in f.iter().enumerate() {
                let (d1, d2) = (k / m, k % m);
                let off = d1.min(m - d1).max(d2.min(m - d2));
                total += v.norm_sqr();
                if 4 * off >= m {
                    tail += v.norm_sqr();
                }
            }
            (f, inf, tail, total)
        })
        .collect();
    if check_tail {
        let total: f64 = blocks.iter().map(|c| c.3).sum();
        let tail: f64 = blocks.iter().map(|c| c.2).sum();
        if total > 0.0 && tail / total > TAIL_LIMIT {
            return Err(Error::Resolution(format!(
                "dual-grid window too small or ξ-limit missing: kernel tail energy {:.3e} > {TAIL_LIMIT}",
                tail / total
            )));
        }
    }
    let size = m * m;
    let mut a = CMat::zeros(size, size);
    for j in 0..size {
        let (j1, j2) = (j / m, j % m);
        for k in 0..size {
            let (k1, k2) = (k / m, k % m);
            let (f, inf, _, _) = &blocks[(j1 + k1) * nm + j2 + k2];
            let d = ((j1 + m - k1) % m) * m + (j2 + m - k2) % m;
            a[(j, k)] = f[d];
            if j == k {
                a[(j, k)] += inf;
            }
        }
    }
    Ok(a)
}

/// `−h²Δ + V(x)` with periodic spectral differentiation on `FourierGrid{L, M, n}`.
pub fn schrodinger_matrix(v: &dyn PhaseSymbol, basis: Basis, h: f64) -> Result<OperatorMatrix> {
    let (l, m, n) = grid_params(basis)?;
    if v.dim() != n || !(1..=2).contains(&n) {
        return Err(Error::InvalidInput("potential must match the grid dimension (1 or 2)".into()));
    }
    if v.depends_on_xi() {
        return Err(Error::InvalidInput("potential must depend on x only".into()));
    }
    let xs = grid_points(l, m);
    let xi = dual_points(l, m, h);
    // dense 1-D multiplier matrix F⁻¹ diag(ξ²) F
    let d2 = CMat::from_fn(m, m, |j, k| {
        let mut acc = C64::new(0.0, 0.0);
        for (q, &s) in xi.iter().enumerate() {
            let ph = 2.0 * std::f64::consts::PI * (q as f64) * (j as f64 - k as f64) / m as f64;
            acc += C64::from_polar(s * s, ph);
        }
        acc / m as f64
    });
    let matrix = if n == 1 {
        let mut a = d2;
        for j in 0..m {
            a[(j, j)] += v.eval(&[xs[j], 0.0]);
        }
        a
    } else {
        let id = crate::linalg::identity(m);
        let mut a = crate::linalg::kron(&d2, &id) + crate::linalg::kron(&id, &d2);
        for j1 in 0..m {
            for j2 in 0..m {
                let j = j1 * m + j2;
                a[(j, j)] += v.eval(&[xs[j1], xs[j2], 0.0, 0.0]);
            }
        }
        a
    };
    Ok(OperatorMatrix {
        matrix,
        h,
        basis,
        provenance: Provenance { path: "schrodinger_grid".into(), symbol: v.label() },
        warnings: Vec::new(),
    })
}
