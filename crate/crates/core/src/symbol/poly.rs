//! Sparse multivariate polynomials with generic coefficients.

use std::collections::BTreeMap;

use num_traits::Num;

/// Polynomial in `nvars` variables; keys are exponent vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, T>,
}

/// `k` as an element of a ring, by binary doubling.
pub fn ring_int<T: Num + Clone>(mut k: u64) -> T {
    let mut acc = T::zero();
    let mut unit = T::one();
    while k > 0 {
        if k & 1 == 1 {
            acc = acc + unit.clone();
        }
        unit = unit.clone() + unit;
        k >>= 1;
    }
    acc
}

impl<T: Num + Clone> Poly<T> {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn variable(nvars: usize, v: usize) -> Self {
        let mut e = vec![0; nvars];
        e[v] = 1;
        Self::monomial(e, T::one())
    }

    pub fn monomial(exponents: Vec<u32>, c: T) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, c: T) {
        assert_eq!(exponents.len(), self.nvars);
        let entry = self.terms.entry(exponents).or_insert_with(T::zero);
        *entry = entry.clone() + c;
        self.terms.retain(|_, v| !v.is_zero());
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &T)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exponents: &[u32]) -> T {
        self.terms.get(exponents).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn as_constant(&self) -> Option<T> {
        match self.terms.len() {
            0 => Some(T::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().expect("one term");
                e.iter().all(|&k| k == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            let entry = r.terms.entry(e.clone()).or_insert_with(T::zero);
            *entry = entry.clone() + c.clone();
        }
        r.terms.retain(|_, v| !v.is_zero());
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            let entry = r.terms.entry(e.clone()).or_insert_with(T::zero);
            *entry = entry.clone() - c.clone();
        }
        r.terms.retain(|_, v| !v.is_zero());
        r
    }

    pub fn scale(&self, s: T) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let v = c.clone() * s.clone();
            if !v.is_zero() {
                r.terms.insert(e.clone(), v);
            }
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.nvars, o.nvars);
        let mut terms: BTreeMap<Vec<u32>, T> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let entry = terms.entry(e).or_insert_with(T::zero);
                *entry = entry.clone() + ca.clone() * cb.clone();
            }
        }
        terms.retain(|_, v| !v.is_zero());
        Poly { nvars: self.nvars, terms }
    }

    /// `∂/∂w_v`.
    pub fn partial(&self, v: usize) -> Self {
        let mut r = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[v] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[v] -= 1;
            r.terms.insert(e2, c.clone() * ring_int::<T>(u64::from(e[v])));
        }
        r
    }

    /// Re-indexes variables: variable `i` of `self` becomes variable `map[i]` in a
    /// polynomial of `nvars` variables; variables mapped to the same target merge.
    pub fn remap(&self, nvars: usize, map: &[usize]) -> Self {
        let mut r = Self::zero(nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0u32; nvars];
            for (i, &k) in e.iter().enumerate() {
                e2[map[i]] += k;
            }
            let entry = r.terms.entry(e2).or_insert_with(T::zero);
            *entry = entry.clone() + c.clone();
        }
        r.terms.retain(|_, v| !v.is_zero());
        r
    }

    pub fn map<U: Num + Clone>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        let mut r = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let v = f(c);
            if !v.is_zero() {
                r.terms.insert(e.clone(), v);
            }
        }
        r
    }
}

impl Poly<num_complex::Complex64> {
    pub fn eval(&self, w: &[f64]) -> num_complex::Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: f64 = e.iter().zip(w).map(|(&k, &x)| x.powi(k as i32)).product();
                c * m
            })
            .sum()
    }

    /// Largest coefficient modulus (zero for the zero polynomial).
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}
