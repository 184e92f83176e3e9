use num_complex::Complex64 as C64;
use serde::Serialize;

use super::expr::SymbolExpr;
use super::jet::{bracket, Jet};
use crate::error::{Error, Result};

/// `{f, g}(w) = Σ_j (∂ξ_j f ∂x_j g − ∂x_j f ∂ξ_j g)(w)`.
pub fn poisson_bracket(f: &SymbolExpr, g: &SymbolExpr, w: &[f64]) -> Result<C64> {
    if f.dim() != g.dim() {
        return Err(Error::InvalidInput("symbols of different dimension".into()));
    }
    let jf = f.eval_jet(w, 1)?;
    let jg = g.eval_jet(w, 1)?;
    Ok(bracket(&jf, &jg).value())
}

/// `{Re p, Im p}(w)`, computed from a single degree-1 jet of `p`.
pub fn real_bracket(p: &SymbolExpr, w: &[f64]) -> Result<f64> {
    let j = p.eval_jet(w, 1)?;
    Ok(bracket(&j.re(), &j.im()).value().re)
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketValue {
    /// Multi-index `I` with entries in {1, 2}.
    pub index: Vec<u8>,
    pub value: C64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketReport {
    pub point: Vec<f64>,
    pub z0: C64,
    pub j_max: usize,
    /// All `p_I` for `|I| ≤ j_max`, grouped by length, lexicographic within a length.
    pub values: Vec<BracketValue>,
    pub tolerance: f64,
    /// Largest `j` such that every `p_I` with `|I| ≤ j` vanishes; `None` when all
    /// brackets up to `j_max` vanish.
    pub order: Option<usize>,
    /// Length of the shortest non-vanishing bracket (`order + 1`).
    pub first_nonvanishing_length: Option<usize>,
    pub finite_type: bool,
}

impl BracketReport {
    pub fn get(&self, index: &[u8]) -> Option<C64> {
        self.values.iter().find(|b| b.index == index).map(|b| b.value)
    }
}

/// Repeated brackets `p_I = H_{p_{i1}} ⋯ H_{p_{i(j−1)}} p_{ij}` with `p_1 = Re(p − z0)`,
/// `p_2 = Im(p − z0)`, all taken from one jet of degree `j_max + 1`.
pub fn repeated_brackets(p: &SymbolExpr, z0: C64, w: &[f64], j_max: usize) -> Result<BracketReport> {
    repeated_brackets_with_degree(p, z0, w, j_max, j_max + 1)
}

pub fn repeated_brackets_with_degree(
    p: &SymbolExpr,
    z0: C64,
    w: &[f64],
    j_max: usize,
    degree: usize,
) -> Result<BracketReport> {
    if j_max == 0 {
        return Err(Error::InvalidInput("j_max must be at least 1".into()));
    }
    if degree < j_max + 1 {
        return Err(Error::InvalidInput(format!(
            "jet degree {degree} insufficient for brackets of length {j_max}"
        )));
    }
    let jet = p.eval_jet(w, degree)?.add_const(-z0);
    let base = [jet.re(), jet.im()];
    let mut level: Vec<(Vec<u8>, Jet)> = vec![(vec![1], base[0].clone()), (vec![2], base[1].clone())];
    let mut values = Vec::new();
    for j in 1..=j_max {
        if j > 1 {
            let mut next = Vec::with_capacity(level.len() * 2);
            for (i, f) in base.iter().enumerate() {
                for (idx, g) in &level {
                    let mut index = vec![i as u8 + 1];
                    index.extend_from_slice(idx);
                    next.push((index, bracket(f, g)));
                }
            }
            level = next;
        }
        values.extend(level.iter().map(|(idx, g)| BracketValue { index: idx.clone(), value: g.value() }));
    }
    let scale = values.iter().map(|b| b.value.norm()).fold(0.0, f64::max);
    let tolerance = 1e-9 * scale.max(1.0);
    let mut order = None;
    for j in 1..=j_max {
        if values.iter().any(|b| b.index.len() == j && b.value.norm() > tolerance) {
            order = Some(j - 1);
            break;
        }
    }
    Ok(BracketReport {
        point: w.to_vec(),
        z0,
        j_max,
        values,
        tolerance,
        order,
        first_nonvanishing_length: order.map(|k| k + 1),
        finite_type: order.is_some(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FiniteTypeOrder {
    pub order: usize,
    pub even: bool,
    pub per_sample: Vec<usize>,
}

/// Maximum of the bracket order over points of `p⁻¹(z0)`.
pub fn finite_type_order(
    p: &SymbolExpr,
    z0: C64,
    samples: &[Vec<f64>],
    j_max: usize,
    tau_level: f64,
) -> Result<FiniteTypeOrder> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("empty sample list".into()));
    }
    let mut per_sample = Vec::with_capacity(samples.len());
    for w in samples {
        let v = p.eval(w);
        if (v - z0).norm() > tau_level {
            return Err(Error::InvalidInput(format!(
                "sample {w:?} is not on the level set: |p(w) - z0| = {:e}",
                (v - z0).norm()
            )));
        }
        let r = repeated_brackets(p, z0, w, j_max)?;
        match r.order {
            Some(k) => per_sample.push(k),
            None => {
                return Err(Error::Degenerate(format!(
                    "order exceeds j_max = {j_max} at {w:?}"
                )))
            }
        }
    }
    let order = per_sample.iter().copied().max().expect("nonempty");
    Ok(FiniteTypeOrder { order, even: order % 2 == 0, per_sample })
}
