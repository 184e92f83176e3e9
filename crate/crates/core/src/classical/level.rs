use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::PhaseBox;
use crate::error::{Error, Result};
use crate::symbol::jet::bracket;
use crate::symbol::SymbolExpr;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LevelSetOptions {
    pub seeds_per_axis: usize,
    /// Accepted `|p(w) − z|`, relative to `max(1, |z|)`.
    pub tau_level: f64,
    /// Root separation, relative to the box diameter.
    pub dedupe_rel: f64,
    pub max_iter: usize,
}

impl Default for LevelSetOptions {
    fn default() -> Self {
        LevelSetOptions { seeds_per_axis: 41, tau_level: 1e-10, dedupe_rel: 1e-6, max_iter: 100 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelRoot {
    pub point: Vec<f64>,
    pub residual: f64,
    pub bracket: f64,
    /// Sign of `{Re p, Im p}`, zero when it vanishes within tolerance.
    pub sign: i8,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSet {
    pub z: C64,
    pub roots: Vec<LevelRoot>,
    pub tau_level: f64,
    pub dedupe: f64,
    pub seeds: usize,
    pub singular_seeds: usize,
}

impl LevelSet {
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.roots.iter().map(|r| r.point.clone()).collect()
    }
}

pub fn solve_level_set(p: &SymbolExpr, z: C64, bounds: &PhaseBox, seeds_per_axis: usize) -> Result<LevelSet> {
    solve_level_set_with(p, z, bounds, LevelSetOptions { seeds_per_axis, ..Default::default() })
}

enum Seed {
    Root(Vec<f64>, f64),
    Singular,
    Lost,
}

/// Newton (minimum-norm steps when n = 2) on `(Re(p − z), Im(p − z))` from a seed grid.
pub fn solve_level_set_with(p: &SymbolExpr, z: C64, bounds: &PhaseBox, opts: LevelSetOptions) -> Result<LevelSet> {
    let n = p.dim();
    if n > 2 {
        return Err(Error::InvalidInput("level sets are limited to n ≤ 2".into()));
    }
    if bounds.dim() != n {
        return Err(Error::InvalidInput("box dimension does not match the symbol".into()));
    }
    if opts.seeds_per_axis < 1 {
        return Err(Error::InvalidInput("need at least one seed per axis".into()));
    }
    let tol = opts.tau_level * z.norm().max(1.0);
    let diam = bounds.diameter();
    // cell centres: symmetric boxes get symmetric seeds
    let s = opts.seeds_per_axis;
    let seeds: Vec<Vec<f64>> = PhaseBox::new(
        bounds
            .bounds
            .iter()
            .map(|(a, b)| {
                let hw = 0.5 * (b - a) / s as f64;
                (a + hw, b - hw + if s == 1 { 2.0 * hw } else { 0.0 })
            })
            .collect(),
    )
    .map(|cb| if s == 1 { vec![cb.bounds.iter().map(|(a, _)| *a).collect()] } else { cb.grid(s) })?;
    let results: Vec<Seed> = seeds.par_iter().map(|w| newton(p, z, w, bounds, tol, diam, opts.max_iter)).collect();
    let singular_seeds = results.iter().filter(|r| matches!(r, Seed::Singular)).count();
    let mut found: Vec<(Vec<f64>, f64)> = results
        .into_iter()
        .filter_map(|r| match r {
            Seed::Root(w, res) => Some((w, res)),
            _ => None,
        })
        .collect();
    found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let dedupe = opts.dedupe_rel * diam;
    let mut kept: Vec<(Vec<f64>, f64)> = Vec::new();
    for (w, res) in found {
        let dup = kept.iter().any(|(k, _)| dist(k, &w) < dedupe);
        if !dup {
            kept.push((w, res));
        }
    }
    let roots = kept
        .into_iter()
        .map(|(w, residual)| {
            let j = p.eval_jet(&w, 1)?;
            let g2: f64 = j.gradient().iter().map(|c| c.norm_sqr()).sum();
            let b = bracket(&j.re(), &j.im()).value().re;
            let tau_brk = 1e-8 * g2.max(1.0);
            let sign = if b > tau_brk {
                1
            } else if b < -tau_brk {
                -1
            } else {
                0
            };
            Ok(LevelRoot { point: w, residual, bracket: b, sign })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelSet { z, roots, tau_level: tol, dedupe, seeds: seeds.len(), singular_seeds })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn residual(p: &SymbolExpr, z: C64, w: &[f64]) -> (C64, f64) {
    let f = p.eval(w) - z;
    (f, f.norm())
}

fn newton(p: &SymbolExpr, z: C64, w0: &[f64], bounds: &PhaseBox, tol: f64, diam: f64, max_iter: usize) -> Seed {
    let mut w = w0.to_vec();
    let (mut f, mut r) = residual(p, z, &w);
    for _ in 0..max_iter {
        if !r.is_finite() || dist(&w, w0) > 4.0 * diam {
            return Seed::Lost;
        }
        let Ok(jet) = p.eval_jet(&w, 1) else { return Seed::Lost };
        let g = jet.gradient();
        // J rows: Re ∇p, Im ∇p; min-norm step δ = −Jᵀ (J Jᵀ)⁻¹ F
        let a: Vec<f64> = g.iter().map(|c| c.re).collect();
        let b: Vec<f64> = g.iter().map(|c| c.im).collect();
        let (aa, ab, bb) = (dot(&a, &a), dot(&a, &b), dot(&b, &b));
        let det = aa * bb - ab * ab;
        if !(det > 1e-28 * (aa + bb).powi(2)) {
            return if r <= tol { Seed::Root(w, r) } else { Seed::Singular };
        }
        let (f1, f2) = (f.re, f.im);
        let y1 = (bb * f1 - ab * f2) / det;
        let y2 = (aa * f2 - ab * f1) / det;
        let step: Vec<f64> = a.iter().zip(&b).map(|(ai, bi)| -(ai * y1 + bi * y2)).collect();
        let snorm = step.iter().map(|s| s * s).sum::<f64>().sqrt();
        // damped update
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = w.iter().zip(&step).map(|(wi, si)| wi + t * si).collect();
            let (ft, rt) = residual(p, z, &trial);
            if rt.is_finite() && (rt < r || rt <= tol * 1e-3) {
                w = trial;
                f = ft;
                r = rt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || snorm * t <= 1e-15 * diam.max(1.0) {
            break;
        }
    }
    let margin = 1e-9 * diam;
    let inside = w
        .iter()
        .zip(&bounds.bounds)
        .all(|(v, (lo, hi))| *v >= lo - margin && *v <= hi + margin);
    if r <= tol && inside {
        Seed::Root(w, r)
    } else {
        Seed::Lost
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σ sgn {Re p, Im p}` over `p⁻¹(z)` inside the box (n = 1).
pub fn sign_sum(p: &SymbolExpr, z: C64, bounds: &PhaseBox) -> Result<i64> {
    if p.dim() != 1 {
        return Err(Error::InvalidInput("sign sum needs n = 1".into()));
    }
    let ls = solve_level_set(p, z, bounds, LevelSetOptions::default().seeds_per_axis)?;
    if let Some(r) = ls.roots.iter().find(|r| r.sign == 0) {
        return Err(Error::Degenerate(format!("bracket vanishes at root {:?}", r.point)));
    }
    Ok(ls.roots.iter().map(|r| r.sign as i64).sum())
}
