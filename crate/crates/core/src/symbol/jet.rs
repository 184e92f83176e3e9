//! Truncated multivariate Taylor jets (forward-mode automatic differentiation).

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Ordering of multi-indices for a given number of variables and degree.
///
/// Multi-indices are sorted by total degree, then lexicographically in
/// descending order of the leading exponent. A layout of degree `d` is a
/// prefix of the layout of degree `d + 1`, so truncation is slicing.
#[derive(Debug)]
pub struct Layout {
    nvars: usize,
    degree: usize,
    indices: Vec<Vec<u32>>,
    lookup: HashMap<Vec<u32>, usize>,
    mul: Vec<(u32, u32, u32)>,
    shift: Vec<Vec<u32>>,
    lower: Option<Arc<Layout>>,
}

fn monomials_of_degree(nvars: usize, d: usize) -> Vec<Vec<u32>> {
    if nvars == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in monomials_of_degree(nvars - 1, d - first) {
            let mut v = Vec::with_capacity(nvars);
            v.push(first as u32);
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

/// Binomial coefficient as f64 (exact for the small arguments used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

impl Layout {
    pub fn new(nvars: usize, degree: usize) -> Arc<Layout> {
        let mut layout: Option<Arc<Layout>> = None;
        for d in 0..=degree {
            layout = Some(Arc::new(Layout::extend(nvars, d, layout)));
        }
        layout.expect("degree loop runs at least once")
    }

    fn extend(nvars: usize, degree: usize, lower: Option<Arc<Layout>>) -> Layout {
        let mut indices: Vec<Vec<u32>> = match &lower {
            Some(l) => l.indices.clone(),
            None => Vec::new(),
        };
        indices.extend(monomials_of_degree(nvars, degree));
        let lookup: HashMap<Vec<u32>, usize> =
            indices.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let mut mul = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            let da: u32 = a.iter().sum();
            for (j, b) in indices.iter().enumerate() {
                let db: u32 = b.iter().sum();
                if (da + db) as usize > degree {
                    continue;
                }
                let c: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                mul.push((i as u32, j as u32, lookup[&c] as u32));
            }
        }
        let below = if degree == 0 { 0 } else { count(nvars, degree - 1) };
        let shift = (0..nvars)
            .map(|v| {
                (0..below)
                    .map(|i| {
                        let mut a = indices[i].clone();
                        a[v] += 1;
                        lookup[&a] as u32
                    })
                    .collect()
            })
            .collect();
        Layout { nvars, degree, indices, lookup, mul, shift, lower }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn multi_index(&self, i: usize) -> &[u32] {
        &self.indices[i]
    }

    pub fn index_of(&self, alpha: &[u32]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// Layout of degree `d ≤ self.degree`.
    pub fn at_degree(self: &Arc<Self>, d: usize) -> Arc<Layout> {
        let mut cur = self.clone();
        while cur.degree > d {
            cur = cur.lower.clone().expect("lower layouts exist down to degree 0");
        }
        cur
    }
}

/// Number of monomials of total degree ≤ `degree` in `nvars` variables.
pub fn count(nvars: usize, degree: usize) -> usize {
    binomial(nvars + degree, degree) as usize
}

/// Taylor jet of a complex function of real variables at a base point.
#[derive(Debug, Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    base: Arc<[f64]>,
    coeffs: Vec<C64>,
}

impl Jet {
    pub fn constant(layout: &Arc<Layout>, base: &Arc<[f64]>, c: C64) -> Jet {
        let mut coeffs = vec![C64::new(0.0, 0.0); layout.len()];
        coeffs[0] = c;
        Jet { layout: layout.clone(), base: base.clone(), coeffs }
    }

    /// The coordinate function `w_v` expanded at the base point.
    pub fn variable(layout: &Arc<Layout>, base: &Arc<[f64]>, v: usize) -> Jet {
        let mut j = Jet::constant(layout, base, C64::new(base[v], 0.0));
        if layout.degree >= 1 {
            let mut a = vec![0u32; layout.nvars];
            a[v] = 1;
            j.coeffs[layout.lookup[&a]] = C64::new(1.0, 0.0);
        }
        j
    }

    pub fn from_coeffs(layout: Arc<Layout>, base: Arc<[f64]>, coeffs: Vec<C64>) -> Jet {
        assert_eq!(layout.len(), coeffs.len());
        Jet { layout, base, coeffs }
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn degree(&self) -> usize {
        self.layout.degree
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn value(&self) -> C64 {
        self.coeffs[0]
    }

    /// Taylor coefficient of `(w − base)^α`; zero beyond the truncation degree.
    pub fn coeff(&self, alpha: &[u32]) -> C64 {
        self.layout
            .index_of(alpha)
            .map(|i| self.coeffs[i])
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Partial derivative `∂^α` at the base point.
    pub fn derivative(&self, alpha: &[u32]) -> C64 {
        let fact: f64 = alpha.iter().map(|&a| (1..=a).map(f64::from).product::<f64>()).product();
        self.coeff(alpha) * fact
    }

    pub fn gradient(&self) -> Vec<C64> {
        (0..self.nvars())
            .map(|v| {
                let mut a = vec![0u32; self.nvars()];
                a[v] = 1;
                self.coeff(&a)
            })
            .collect()
    }

    pub fn truncate(&self, d: usize) -> Jet {
        if d >= self.degree() {
            return self.clone();
        }
        let layout = self.layout.at_degree(d);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Jet { layout, base: self.base.clone(), coeffs }
    }

    /// Jet of `∂f/∂w_v`, one degree lower.
    pub fn partial(&self, v: usize) -> Jet {
        assert!(self.degree() >= 1, "cannot differentiate a degree-0 jet");
        let layout = self.layout.at_degree(self.degree() - 1);
        let coeffs = (0..layout.len())
            .map(|i| {
                let k = self.layout.shift[v][i] as usize;
                self.coeffs[k] * f64::from(layout.indices[i][v] + 1)
            })
            .collect();
        Jet { layout, base: self.base.clone(), coeffs }
    }

    pub fn map_coeffs(&self, f: impl Fn(C64) -> C64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            base: self.base.clone(),
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
        }
    }

    /// Real part (the base point is real, so this is the jet of `Re f`).
    pub fn re(&self) -> Jet {
        self.map_coeffs(|c| C64::new(c.re, 0.0))
    }

    pub fn im(&self) -> Jet {
        self.map_coeffs(|c| C64::new(c.im, 0.0))
    }

    pub fn scale(&self, s: C64) -> Jet {
        self.map_coeffs(|c| c * s)
    }

    fn zip(&self, other: &Jet, f: impl Fn(C64, C64) -> C64) -> Jet {
        let d = self.degree().min(other.degree());
        let layout = self.layout.at_degree(d);
        let coeffs = (0..layout.len()).map(|i| f(self.coeffs[i], other.coeffs[i])).collect();
        Jet { layout, base: self.base.clone(), coeffs }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.zip(other, |a, b| a - b)
    }

    pub fn add_const(&self, c: C64) -> Jet {
        let mut j = self.clone();
        j.coeffs[0] += c;
        j
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let d = self.degree().min(other.degree());
        let layout = self.layout.at_degree(d);
        let mut coeffs = vec![C64::new(0.0, 0.0); layout.len()];
        for &(i, j, k) in &layout.mul {
            coeffs[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        Jet { layout, base: self.base.clone(), coeffs }
    }

    /// Composition `g(f)` for an analytic `g` given by its Taylor coefficients at `f(base)`.
    fn compose(&self, series: &[C64]) -> Jet {
        let mut r = self.clone();
        r.coeffs[0] = C64::new(0.0, 0.0);
        let mut acc = Jet::constant(&self.layout, &self.base, series[0]);
        let mut power = Jet::constant(&self.layout, &self.base, C64::new(1.0, 0.0));
        for s in series.iter().skip(1) {
            power = power.mul(&r);
            acc = acc.add(&power.scale(*s));
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet> {
        let c = self.coeffs[0];
        if c.norm() == 0.0 {
            return Err(Error::JetDivision);
        }
        let inv = 1.0 / c;
        let series: Vec<C64> = (0..=self.degree())
            .map(|k| inv * (-inv).powi(k as i32))
            .collect();
        Ok(self.compose(&series))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn exp(&self) -> Jet {
        let e = self.coeffs[0].exp();
        let mut series = Vec::with_capacity(self.degree() + 1);
        let mut f = 1.0;
        for k in 0..=self.degree() {
            if k > 0 {
                f *= k as f64;
            }
            series.push(e / f);
        }
        self.compose(&series)
    }

    pub fn powi(&self, k: i32) -> Result<Jet> {
        if k < 0 {
            return self.powi(-k)?.recip();
        }
        let mut result = Jet::constant(&self.layout, &self.base, C64::new(1.0, 0.0));
        let mut b = self.clone();
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        Ok(result)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Poisson bracket `{f, g} = Σ ∂ξ_j f ∂x_j g − ∂x_j f ∂ξ_j g` of two jets in `2n` variables.
pub fn bracket(f: &Jet, g: &Jet) -> Jet {
    let n = f.nvars() / 2;
    let mut acc: Option<Jet> = None;
    for j in 0..n {
        let t = f.partial(n + j).mul(&g.partial(j)).sub(&f.partial(j).mul(&g.partial(n + j)));
        acc = Some(match acc {
            None => t,
            Some(a) => a.add(&t),
        });
    }
    acc.expect("dimension is positive")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_matches_binomial() {
        for nv in 1..5 {
            for d in 0..6 {
                assert_eq!(Layout::new(nv, d).len(), count(nv, d));
            }
        }
    }

    #[test]
    fn layouts_are_prefixes() {
        let l = Layout::new(3, 4);
        let l2 = l.at_degree(2);
        for i in 0..l2.len() {
            assert_eq!(l.multi_index(i), l2.multi_index(i));
        }
    }

    #[test]
    fn recip_series() {
        let l = Layout::new(1, 5);
        let base: Arc<[f64]> = Arc::from(vec![0.0]);
        let one_minus_x = Jet::constant(&l, &base, C64::new(1.0, 0.0))
            .sub(&Jet::variable(&l, &base, 0));
        let r = one_minus_x.recip().unwrap();
        for c in r.coeffs() {
            assert!((c - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }
}
