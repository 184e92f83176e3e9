//! Weyl quantization of polynomial symbols on the h-scaled Hermite basis.

use std::collections::HashMap;

use num_complex::Complex64 as C64;

use super::{Basis, OperatorMatrix, Provenance};
use crate::error::{Error, Result};
use crate::linalg::{kron, scale, submatrix, CMat};
use crate::symbol::jet::binomial;
use crate::symbol::{Poly, SymbolExpr};

/// h-scaled Hermite functions `ψ_k(x) = h^{−1/4} φ_k(x/√h)`, `k < m`, sampled at `xs`.
pub fn hermite_functions(m: usize, h: f64, xs: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; xs.len()]; m];
    let s = h.sqrt();
    let norm = h.powf(-0.25) * std::f64::consts::PI.powf(-0.25);
    for (i, &x) in xs.iter().enumerate() {
        let y = x / s;
        let mut prev = 0.0;
        let mut cur = norm * (-0.5 * y * y).exp();
        for (k, row) in out.iter_mut().enumerate() {
            row[i] = cur;
            let kf = (k + 1) as f64;
            let next = (2.0 / kf).sqrt() * y * cur - ((kf - 1.0) / kf).sqrt() * prev;
            prev = cur;
            cur = next;
        }
    }
    out
}

/// Position and momentum matrices `X = √(h/2)(a + a†)`, `P = i√(h/2)(a† − a)`
/// truncated to `m` modes.
pub fn ladder_matrices(m: usize, h: f64) -> (CMat, CMat) {
    let c = (h / 2.0).sqrt();
    let x = CMat::from_fn(m, m, |i, j| {
        if j == i + 1 {
            C64::new(c * (j as f64).sqrt(), 0.0)
        } else if i == j + 1 {
            C64::new(c * (i as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let p = CMat::from_fn(m, m, |i, j| {
        if j == i + 1 {
            C64::new(0.0, -c * (j as f64).sqrt())
        } else if i == j + 1 {
            C64::new(0.0, c * (i as f64).sqrt())
        } else {
            C64::new(0.0, 0.0)
        }
    });
    (x, p)
}

fn powers(a: &CMat, k: usize) -> Vec<CMat> {
    let n = a.nrows();
    let mut out = vec![crate::linalg::identity(n)];
    for i in 1..=k {
        let next = &out[i - 1] * a;
        out.push(next);
    }
    out
}

/// One-axis Weyl quantization of `x^a ξ^b`, compressed to `m` modes.
///
/// Products are formed in a basis of `m + a + b` modes before truncation so the
/// result is the exact compression of the unbounded operator.
fn weyl_monomial_1d(m: usize, h: f64, a: usize, b: usize) -> CMat {
    let big = m + a + b;
    let (x, p) = ladder_matrices(big, h);
    let (lo, hi, outer, inner) = if a <= b { (a, b, &x, &p) } else { (b, a, &p, &x) };
    let op = powers(outer, lo);
    let ip = powers(inner, hi);
    let mut acc = CMat::zeros(big, big);
    for j in 0..=lo {
        let term = &op[j] * &ip[hi] * &op[lo - j];
        acc += scale(&term, C64::new(binomial(lo, j), 0.0));
    }
    let factor = 0.5f64.powi(lo as i32);
    let acc = scale(&acc, C64::new(factor, 0.0));
    submatrix(&acc, m, m)
}

/// Weyl quantization of a polynomial symbol on `Hermite{m, n}`.
pub fn weyl_quantize_poly(p: &SymbolExpr, basis: Basis, h: f64) -> Result<OperatorMatrix> {
    let poly = p
        .to_poly()
        .ok_or_else(|| Error::InvalidInput(format!("symbol is not a polynomial: {p}")))?;
    let mut op = quantize_poly(&poly, basis, h)?;
    op.provenance.symbol = p.to_string();
    Ok(op)
}

pub(crate) fn quantize_poly(poly: &Poly<C64>, basis: Basis, h: f64) -> Result<OperatorMatrix> {
    let Basis::Hermite { m, n } = basis else {
        return Err(Error::InvalidInput("polynomial path requires a Hermite basis".into()));
    };
    if !(1..=2).contains(&n) || poly.nvars() != 2 * n {
        return Err(Error::InvalidInput("dimension mismatch between symbol and basis".into()));
    }
    if h <= 0.0 {
        return Err(Error::InvalidInput("h must be positive".into()));
    }
    let size = m.pow(n as u32);
    let mut cache: HashMap<(usize, usize), CMat> = HashMap::new();
    let mut total = CMat::zeros(size, size);
    let mut warnings = Vec::new();
    let degree = poly.degree() as usize;
    if 4 * degree > m {
        warnings.push(format!(
            "degree {degree} is large for {m} modes: top basis coefficients carry a large share of the monomial"
        ));
    }
    for (e, c) in poly.terms() {
        let mut factor: Option<CMat> = None;
        for axis in 0..n {
            let key = (e[axis] as usize, e[n + axis] as usize);
            let mat = cache
                .entry(key)
                .or_insert_with(|| weyl_monomial_1d(m, h, key.0, key.1))
                .clone();
            factor = Some(match factor {
                None => mat,
                Some(f) => kron(&f, &mat),
            });
        }
        let f = factor.expect("n >= 1");
        total += scale(&f, *c);
    }
    Ok(OperatorMatrix {
        matrix: total,
        h,
        basis,
        provenance: Provenance { path: "weyl_hermite".into(), symbol: String::new() },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_functions_orthonormal() {
        let h = 0.1;
        let dx = 0.005;
        let xs: Vec<f64> = (0..2000).map(|i| -5.0 + dx * i as f64).collect();
        let psi = hermite_functions(10, h, &xs);
        for a in 0..10 {
            for b in 0..10 {
                let s: f64 = psi[a].iter().zip(&psi[b]).map(|(u, v)| u * v).sum::<f64>() * dx;
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-10, "{a} {b} {s}");
            }
        }
    }

    #[test]
    fn canonical_commutator() {
        let (x, p) = ladder_matrices(30, 0.2);
        let c = &x * &p - &p * &x;
        for i in 0..29 {
            assert!((c[(i, i)] - C64::new(0.0, 0.2)).norm() < 1e-14);
        }
    }
}
