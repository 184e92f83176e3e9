use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::PhaseBox;
use crate::error::{Error, Result};
use crate::symbol::{real_bracket, SymbolExpr};

#[derive(Debug, Clone, Serialize)]
pub struct RangeSample {
    pub point: Vec<f64>,
    pub value: C64,
    /// `{Re p, Im p}`; the complex bracket `{p, p̄}` is `−2i` times this.
    pub bracket: f64,
}

impl RangeSample {
    pub fn conj_bracket(&self) -> C64 {
        C64::new(0.0, -2.0 * self.bracket)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeTest {
    pub z0: C64,
    pub theta0: f64,
    pub eps0: f64,
    /// True when no sampled Λ value lies in `z0 + (0, ε₀)·e^{i(θ₀−ε₀, θ₀+ε₀)}`.
    pub empty: bool,
    pub hits: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RangeAtlas {
    pub bounds: PhaseBox,
    pub resolution: usize,
    pub samples: Vec<RangeSample>,
    /// Brackets at or below this magnitude count as vanishing.
    pub tolerance: f64,
    pub lambda_plus: Vec<usize>,
    pub lambda_minus: Vec<usize>,
    pub skipped: usize,
    pub cone: Option<ConeTest>,
}

impl RangeAtlas {
    pub fn values(&self, idx: &[usize]) -> Vec<C64> {
        idx.iter().map(|&i| self.samples[i].value).collect()
    }

    /// Sampled Λ(p): values at points with nonvanishing bracket.
    pub fn lambda_values(&self) -> Vec<C64> {
        let mut v = self.values(&self.lambda_plus);
        v.extend(self.values(&self.lambda_minus));
        v
    }

    pub fn range_values(&self) -> Vec<C64> {
        self.samples.iter().map(|s| s.value).collect()
    }

    /// Empirical exterior cone test against the sampled Λ values. Records the result.
    pub fn cone_test(&mut self, z0: C64, theta0: f64, eps0: f64) -> ConeTest {
        let hits = self
            .lambda_values()
            .into_iter()
            .filter(|&z| in_cone(z - z0, theta0, eps0))
            .count();
        let t = ConeTest { z0, theta0, eps0, empty: hits == 0, hits };
        self.cone = Some(t.clone());
        t
    }
}

fn in_cone(d: C64, theta0: f64, eps0: f64) -> bool {
    let r = d.norm();
    if !(r > 0.0 && r < eps0) {
        return false;
    }
    let mut a = d.arg() - theta0;
    a = (a + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
    a.abs() < eps0
}

pub fn sample_symbol_range(p: &SymbolExpr, bounds: &PhaseBox, resolution: usize) -> Result<RangeAtlas> {
    if bounds.dim() != p.dim() {
        return Err(Error::InvalidInput(format!(
            "box has dimension {} but the symbol has {}",
            bounds.dim(),
            p.dim()
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidInput("resolution must be at least 2".into()));
    }
    let pts = bounds.grid(resolution);
    let raw: Vec<Option<RangeSample>> = pts
        .into_par_iter()
        .map(|w| {
            let value = p.eval(&w);
            match real_bracket(p, &w) {
                Ok(b) if value.re.is_finite() && value.im.is_finite() => {
                    Some(RangeSample { point: w, value, bracket: b })
                }
                _ => {
                    log::debug!("skipping grid point {w:?}");
                    None
                }
            }
        })
        .collect();
    let skipped = raw.iter().filter(|s| s.is_none()).count();
    let samples: Vec<RangeSample> = raw.into_iter().flatten().collect();
    let bmax = samples.iter().fold(0.0f64, |m, s| m.max(s.bracket.abs()));
    let tolerance = 1e-10 * bmax.max(1.0);
    let mut lambda_plus = Vec::new();
    let mut lambda_minus = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        if s.bracket > tolerance {
            lambda_plus.push(i);
        } else if s.bracket < -tolerance {
            lambda_minus.push(i);
        }
    }
    Ok(RangeAtlas {
        bounds: bounds.clone(),
        resolution,
        samples,
        tolerance,
        lambda_plus,
        lambda_minus,
        skipped,
        cone: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaInfinity {
    pub radii: Vec<f64>,
    pub cluster_tol: f64,
    /// Values at the largest radius along directions where the last two radii agree.
    pub candidates: Vec<C64>,
    pub candidate_directions: Vec<Vec<f64>>,
    pub unbounded_directions: Vec<Vec<f64>>,
}

impl SigmaInfinity {
    pub fn contains(&self, z: C64, tol: f64) -> bool {
        self.candidates.iter().any(|c| (c - z).norm() <= tol)
    }
}

/// Unit directions in `ℝ^{2n}`: a fine circle for n = 1, a Hopf-coordinate net for n = 2.
fn directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    match d {
        2 => (0..count)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        4 => {
            let m = ((count as f64).powf(1.0 / 3.0).ceil() as usize).max(4);
            let mut out = Vec::new();
            for a in 0..=m {
                let eta = 0.5 * PI * a as f64 / m as f64;
                for b in 0..m {
                    let t1 = 2.0 * PI * b as f64 / m as f64;
                    for c in 0..m {
                        let t2 = 2.0 * PI * c as f64 / m as f64;
                        // (x1, x2, ξ1, ξ2)
                        out.push(vec![eta.cos() * t1.cos(), eta.sin() * t2.cos(), eta.cos() * t1.sin(), eta.sin() * t2.sin()]);
                    }
                }
            }
            out
        }
        _ => Vec::new(),
    }
}

fn tangents(d: &[f64]) -> Vec<Vec<f64>> {
    match d.len() {
        2 => vec![vec![-d[1], d[0]]],
        _ => vec![vec![-d[2], -d[3], d[0], d[1]], vec![-d[1], d[0], -d[3], d[2]]],
    }
}

/// Σ∞ candidates by sampling spheres `|w| = R` at increasing radii.
pub fn sigma_infinity(p: &SymbolExpr, radii: &[f64], cluster_tol: f64) -> Result<SigmaInfinity> {
    if radii.len() < 3 {
        return Err(Error::InvalidInput("sigma_infinity needs at least three radii".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] <= 0.0 {
        return Err(Error::InvalidInput("radii must be positive and increasing".into()));
    }
    let dirs = directions(2 * p.dim(), 720);
    let (r1, r2) = (radii[radii.len() - 2], radii[radii.len() - 1]);
    let mut out = SigmaInfinity {
        radii: radii.to_vec(),
        cluster_tol,
        candidates: Vec::new(),
        candidate_directions: Vec::new(),
        unbounded_directions: Vec::new(),
    };
    let persists = |d: &[f64]| -> Option<C64> {
        let at = |r: f64| p.eval(&d.iter().map(|v| v * r).collect::<Vec<_>>());
        let (a, b) = (at(r1), at(r2));
        (a.is_finite() && b.is_finite() && (a - b).norm() <= cluster_tol * b.norm().max(1.0)).then_some(b)
    };
    for d in dirs {
        // a limit must also exist along slightly rotated rays, which rules out
        // isolated directions where an unbounded symbol happens to stay fixed
        let stable = tangents(&d).iter().all(|t| {
            [-1e-2, 1e-2].iter().all(|&e| {
                let q: Vec<f64> = d.iter().zip(t).map(|(a, b)| a + e * b).collect();
                let nq = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                persists(&q.iter().map(|v| v / nq).collect::<Vec<_>>()).is_some()
            })
        });
        match persists(&d) {
            Some(b) if stable => {
                out.candidates.push(b);
                out.candidate_directions.push(d);
            }
            _ => out.unbounded_directions.push(d),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_is_monotone_in_aperture() {
        let d = C64::new(0.05, 0.01);
        assert!(in_cone(d, 0.0, 0.5));
        assert!(!in_cone(d, 0.0, 0.04));
        assert!(!in_cone(C64::new(-0.1, 0.0), 0.0, 1.0));
    }
}
