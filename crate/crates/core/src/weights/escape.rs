//! Escape weights: real `G` with `H_{Re p} G > 0` on `p⁻¹(z₀)`.
//!
//! Each level-set sample gets a local weight that grows linearly along the
//! `H_{Re p}` flow line through it (straight flow-box coordinates), cut off in
//! time and transversally. The sum is checked on a fresh, denser sample.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::classical::{solve_level_set_with, LevelSetOptions, PhaseBox};
use crate::error::{Error, Result};
use crate::quantize::PhaseSymbol;
use crate::symbol::SymbolExpr;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EscapeOptions {
    /// Escape-time bound `T₀`.
    pub t0: f64,
    /// Width of the characteristic band `|Im(p − z₀)| ≤ τ`.
    pub tau: f64,
    pub seeds_per_axis: usize,
    /// Transverse radius relative to the time length.
    pub kappa: f64,
    /// Allowed drift of `Re p` along one trajectory.
    pub energy_tol: f64,
}

impl EscapeOptions {
    pub fn new(dim: usize, t0: f64) -> EscapeOptions {
        EscapeOptions {
            t0,
            tau: 0.1,
            seeds_per_axis: if dim == 1 { 41 } else { 9 },
            kappa: 0.5,
            energy_tol: 1e-8,
        }
    }
}

/// Local weight `t·F(|t|/T)·B(σ/r)`, with `t` the flow time from `center` along the
/// frozen field `velocity` and `σ` the transverse distance.
#[derive(Debug, Clone, Serialize)]
pub struct Bump {
    pub center: Vec<f64>,
    /// `H_{Re p}` at the center.
    pub velocity: Vec<f64>,
    pub length: f64,
    pub radius: f64,
    /// First time the trajectory left the band.
    pub exit_time: f64,
}

/// `(s, s')` for the flat-top step: 1 on `s ≤ 1/2`, 0 on `s ≥ 1`.
fn step(s: f64) -> (f64, f64) {
    let u = 2.0 * s - 1.0;
    if u <= 0.0 {
        return (1.0, 0.0);
    }
    if u >= 1.0 {
        return (0.0, 0.0);
    }
    let g = |t: f64| (-1.0 / t).exp();
    let dg = |t: f64| (-1.0 / t).exp() / (t * t);
    let (a, b) = (g(1.0 - u), g(u));
    let val = a / (a + b);
    let der = -(dg(1.0 - u) * b + a * dg(u)) / (a + b).powi(2);
    (val, 2.0 * der)
}

impl Bump {
    fn frame(&self, w: &[f64]) -> (f64, Vec<f64>, f64) {
        let v2: f64 = self.velocity.iter().map(|v| v * v).sum();
        let d: Vec<f64> = w.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let t = d.iter().zip(&self.velocity).map(|(a, b)| a * b).sum::<f64>() / v2;
        let perp: Vec<f64> = d.iter().zip(&self.velocity).map(|(a, v)| a - t * v).collect();
        let sigma = perp.iter().map(|c| c * c).sum::<f64>().sqrt();
        (t, perp, sigma)
    }

    pub fn value(&self, w: &[f64]) -> f64 {
        let (t, _, sigma) = self.frame(w);
        let (f, _) = step(t.abs() / self.length);
        let (b, _) = step(sigma / self.radius);
        t * f * b
    }

    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let (t, perp, sigma) = self.frame(w);
        let v2: f64 = self.velocity.iter().map(|v| v * v).sum();
        let a = t.abs() / self.length;
        let (f, df) = step(a);
        let (b, db) = step(sigma / self.radius);
        if f == 0.0 || b == 0.0 {
            return vec![0.0; w.len()];
        }
        let along = b * (f + a * df) / v2;
        let across = if sigma > 0.0 { t * f * db / (self.radius * sigma) } else { 0.0 };
        self.velocity.iter().zip(&perp).map(|(v, q)| along * v + across * q).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EscapeWeight {
    pub dim: usize,
    pub z0: C64,
    pub t0: f64,
    pub tau: f64,
    pub bounds: Vec<(f64, f64)>,
    pub bumps: Vec<Bump>,
    /// `min H_{Re p} G` over the verification sample; `None` when that sample is empty.
    pub gamma: Option<f64>,
    /// Empty level set: success holds vacuously.
    pub vacuous: bool,
    pub samples: usize,
    pub verify_samples: usize,
    pub max_energy_drift: f64,
}

impl EscapeWeight {
    pub fn value(&self, w: &[f64]) -> f64 {
        self.bumps.iter().map(|b| b.value(w)).sum()
    }

    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; w.len()];
        for b in &self.bumps {
            for (gi, bi) in g.iter_mut().zip(b.gradient(w)) {
                *gi += bi;
            }
        }
        g
    }

    /// `H_{Re p} G` at `w`.
    pub fn flow_derivative(&self, p: &SymbolExpr, w: &[f64]) -> Result<f64> {
        let (v, _) = field(p, w)?;
        Ok(v.iter().zip(self.gradient(w)).map(|(a, b)| a * b).sum())
    }
}

impl PhaseSymbol for EscapeWeight {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, w: &[f64]) -> C64 {
        C64::new(self.value(w), 0.0)
    }

    fn polynomial_in_xi(&self) -> bool {
        self.bumps.is_empty()
    }

    fn depends_on_xi(&self) -> bool {
        !self.bumps.is_empty()
    }

    fn label(&self) -> String {
        format!("escape weight ({} bumps, z0 = {})", self.bumps.len(), self.z0)
    }
}

/// `(H_{Re p}(w), p(w))`.
fn field(p: &SymbolExpr, w: &[f64]) -> Result<(Vec<f64>, C64)> {
    let n = p.dim();
    let jet = p.eval_jet(w, 1)?;
    let g = jet.gradient();
    let mut v = vec![0.0; 2 * n];
    for j in 0..n {
        v[j] = g[n + j].re;
        v[n + j] = -g[j].re;
    }
    Ok((v, jet.value()))
}

fn rk4(p: &SymbolExpr, w: &[f64], dt: f64) -> Result<Vec<f64>> {
    let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
    let (k1, _) = field(p, w)?;
    let (k2, _) = field(p, &add(w, &k1, 0.5 * dt))?;
    let (k3, _) = field(p, &add(w, &k2, 0.5 * dt))?;
    let (k4, _) = field(p, &add(w, &k3, dt))?;
    Ok((0..w.len())
        .map(|i| w[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// First time in `(0, T₀]` at which the flow from `start` leaves the band, with the
/// accumulated drift of `Re p`.
fn exit_time(p: &SymbolExpr, z0: C64, start: &[f64], opts: &EscapeOptions) -> Result<(Option<f64>, f64)> {
    let e0 = p.eval(start).re;
    let scale = e0.abs().max(1.0);
    let dt_max = opts.t0 / 50.0;
    let mut dt = opts.t0 / 200.0;
    let mut t = 0.0;
    let mut w = start.to_vec();
    let mut e = e0;
    while t < opts.t0 {
        let h = dt.min(opts.t0 - t);
        let next = rk4(p, &w, h)?;
        let val = p.eval(&next);
        if !val.re.is_finite() || !val.im.is_finite() {
            return Err(Error::NonFinite);
        }
        let drift = (val.re - e).abs();
        if drift > opts.energy_tol * scale * h / opts.t0 {
            dt = 0.5 * h;
            if dt < 1e-12 * opts.t0 {
                return Err(Error::Convergence("flow step underflow while holding the energy drift".into()));
            }
            continue;
        }
        t += h;
        w = next;
        e = val.re;
        if (val - z0).im.abs() > opts.tau {
            return Ok((Some(t), (e - e0).abs() / scale));
        }
        dt = (1.5 * h).min(dt_max);
    }
    Ok((None, (e - e0).abs() / scale))
}

fn level_points(p: &SymbolExpr, z0: C64, bounds: &PhaseBox, seeds: usize) -> Result<Vec<Vec<f64>>> {
    let opts = LevelSetOptions { seeds_per_axis: seeds, ..Default::default() };
    Ok(solve_level_set_with(p, z0, bounds, opts)?.points())
}

pub fn escape_weight(p: &SymbolExpr, z0: C64, bounds: &PhaseBox, t0: f64) -> Result<EscapeWeight> {
    escape_weight_with(p, z0, bounds, EscapeOptions::new(p.dim(), t0))
}

pub fn escape_weight_with(p: &SymbolExpr, z0: C64, bounds: &PhaseBox, opts: EscapeOptions) -> Result<EscapeWeight> {
    let n = p.dim();
    if !(opts.t0 > 0.0 && opts.tau > 0.0 && opts.kappa > 0.0) {
        return Err(Error::InvalidInput("T0, tau and kappa must be positive".into()));
    }
    let points = level_points(p, z0, bounds, opts.seeds_per_axis)?;
    let exits: Vec<(Option<f64>, f64)> =
        points.par_iter().map(|w| exit_time(p, z0, w, &opts)).collect::<Result<Vec<_>>>()?;
    if let Some((w, _)) = points.iter().zip(&exits).find(|(_, e)| e.0.is_none()) {
        return Err(Error::DynamicalCondition(format!(
            "the H_Re p trajectory from {w:?} stays in |Im(p - z0)| <= {} up to T0 = {}",
            opts.tau, opts.t0
        )));
    }
    let max_energy_drift = exits.iter().map(|e| e.1).fold(0.0, f64::max);
    let mut bumps = Vec::with_capacity(points.len());
    for (i, w) in points.iter().enumerate() {
        let jet = p.eval_jet(w, 1)?;
        let g = jet.gradient();
        let (v, _) = field(p, w)?;
        let speed = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if speed <= 1e-12 {
            return Err(Error::Construction(format!("H_Re p vanishes at the level point {w:?}")));
        }
        let d_other = points
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, q)| q.iter().zip(w).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(f64::INFINITY, f64::min);
        let length = 0.5f64.min(0.5 * opts.t0).min(0.25 * d_other / speed);
        // transverse size from the rate at which Im p grows along the flow
        let grad_im: Vec<f64> = g.iter().map(|c| c.im).collect();
        let gi = grad_im.iter().map(|c| c * c).sum::<f64>().sqrt();
        let rate = v.iter().zip(&grad_im).map(|(a, b)| a * b).sum::<f64>().abs();
        let ratio = if gi > 1e-12 && rate > 1e-12 * gi * speed { rate / gi } else { speed };
        let radius = (opts.kappa * length * ratio).max(1e-3 * length * speed);
        bumps.push(Bump { center: w.clone(), velocity: v, length, radius, exit_time: exits[i].0.unwrap_or(0.0) });
    }
    let mut weight = EscapeWeight {
        dim: n,
        z0,
        t0: opts.t0,
        tau: opts.tau,
        bounds: bounds.bounds.clone(),
        bumps,
        gamma: None,
        vacuous: points.is_empty(),
        samples: points.len(),
        verify_samples: 0,
        max_energy_drift,
    };
    let (gamma, count) = escape_gamma(&weight, p, bounds, 2 * opts.seeds_per_axis)?;
    weight.gamma = gamma;
    weight.verify_samples = count;
    weight.vacuous = count == 0;
    if let Some(g) = gamma {
        if !(g > 0.0) {
            return Err(Error::Construction(format!(
                "min H_Re p G = {g:e} over {count} level points with {} bumps",
                weight.bumps.len()
            )));
        }
    }
    Ok(weight)
}

/// `min H_{Re p} G` over a level-set sample with `seeds_per_axis` seeds, and the
/// sample size. `None` for an empty sample.
pub fn escape_gamma(
    weight: &EscapeWeight,
    p: &SymbolExpr,
    bounds: &PhaseBox,
    seeds_per_axis: usize,
) -> Result<(Option<f64>, usize)> {
    let points = level_points(p, weight.z0, bounds, seeds_per_axis)?;
    let vals = points
        .par_iter()
        .map(|w| weight.flow_derivative(p, w))
        .collect::<Result<Vec<f64>>>()?;
    let gamma = vals.iter().copied().reduce(f64::min);
    Ok((gamma, points.len()))
}
