//! σ_min(P_h − z) along a list of h, with the basis chosen per h.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{scaling_fit_flagged, FitModel, ScalingFit};
use super::resolvent::{norm2_estimate, SigmaEngine, SigmaMethod};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::quantize::{grid_points, weyl_quantize_with_limit, Basis, OperatorMatrix};
use crate::symbol::SymbolExpr;

/// How the discretization follows h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisRule {
    Hermite { m: usize, n: usize },
    Grid { half_width: f64, points: usize, n: usize },
    /// `M` = next power of two with `ξ_max ≤ hπM/(2L)`, at least `min_points`.
    GridAuto { half_width: f64, xi_max: f64, n: usize, min_points: usize },
}

impl BasisRule {
    pub fn basis(&self, h: f64) -> Basis {
        match *self {
            BasisRule::Hermite { m, n } => Basis::Hermite { m, n },
            BasisRule::Grid { half_width, points, n } => Basis::FourierGrid { half_width, points, n },
            BasisRule::GridAuto { half_width, xi_max, n, min_points } => {
                let need = (2.0 * half_width * xi_max / (std::f64::consts::PI * h)).ceil() as usize;
                Basis::FourierGrid { half_width, points: need.max(min_points).max(4).next_power_of_two(), n }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSample {
    pub h: f64,
    pub size: usize,
    pub sigma_min: f64,
    pub floored: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolventSweep {
    pub z: C64,
    pub rule: BasisRule,
    /// Columns kept when the test functions are restricted to `|x| ≤ restrict`.
    pub restrict: Option<f64>,
    pub samples: Vec<SweepSample>,
}

impl ResolventSweep {
    pub fn fit(&self, model: FitModel) -> Result<ScalingFit> {
        let pts: Vec<(f64, f64)> = self.samples.iter().map(|s| (s.h, s.sigma_min)).collect();
        let flags: Vec<bool> = self.samples.iter().map(|s| s.floored).collect();
        scaling_fit_flagged(&pts, &flags, model)
    }
}

/// Smallest singular value of `(P − z)E`, with `E` selecting the grid points in
/// `|x_i| ≤ a` (test functions supported there). Returns `(σ, floored)`.
pub fn restricted_sigma_min(p: &OperatorMatrix, z: C64, a: f64) -> Result<(f64, bool)> {
    let Basis::FourierGrid { half_width, points, n } = p.basis else {
        return Err(Error::InvalidInput("support restriction needs a grid basis".into()));
    };
    let xs = grid_points(half_width, points);
    let keep: Vec<usize> = (0..p.size())
        .filter(|&k| {
            let mut idx = k;
            (0..n).all(|_| {
                let j = idx % points;
                idx /= points;
                xs[j].abs() <= a
            })
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::InvalidInput(format!("no grid points with |x| ≤ {a}")));
    }
    let shifted = linalg::shifted(&p.matrix, z);
    let sub = CMat::from_fn(p.size(), keep.len(), |i, j| shifted[(i, keep[j])]);
    let sv = linalg::singular_values(&sub)?;
    let s = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let floor = 1e3 * f64::EPSILON * norm2_estimate(&p.matrix);
    Ok(if s < floor { (floor, true) } else { (s, false) })
}

/// Weyl-quantizes `p` at each h (`xi_limit` as the ξ-limit for non-polynomial
/// symbols on grids) and records σ_min(P − z).
pub fn resolvent_sweep(
    p: &SymbolExpr,
    xi_limit: Option<&SymbolExpr>,
    z: C64,
    rule: BasisRule,
    hs: &[f64],
    restrict: Option<f64>,
    method: SigmaMethod,
) -> Result<ResolventSweep> {
    if hs.is_empty() || hs.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::InvalidInput("h list must be nonempty and positive".into()));
    }
    let samples = hs
        .par_iter()
        .map(|&h| {
            let op = weyl_quantize_with_limit(p, xi_limit, rule.basis(h), h)?;
            let (sigma_min, floored) = match restrict {
                Some(a) => restricted_sigma_min(&op, z, a)?,
                None => {
                    let v = SigmaEngine::new(&op.matrix, method)?.sigma_min(z)?;
                    (v.value, v.floored)
                }
            };
            Ok(SweepSample { h, size: op.size(), sigma_min, floored })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResolventSweep { z, rule, restrict, samples })
}
