//! Conjugation `P_ε = e^{εG/h} P e^{−εG/h}` and the boundary-exclusion experiment.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::escape::EscapeWeight;
use crate::error::{Error, Result};
use crate::linalg::{self, expm, CMat};
use crate::quantize::{
    project_to_hermite, weyl_quantize, weyl_quantize_grid, Basis, OperatorMatrix, PhaseSymbol, XiLimit,
};
use crate::spectral::{eigendecompose, SigmaEngine, SigmaMethod};
use crate::symbol::SymbolExpr;

/// Largest `cond(E)` accepted before the weight is declared too strong.
pub const COND_CAP: f64 = 1e12;

/// Weyl quantization of a real weight on `basis`. Hermite bases (n = 1) use the
/// Galerkin projection of a fine-grid quantization.
pub fn quantize_weight(g: &dyn PhaseSymbol, basis: Basis, h: f64) -> Result<CMat> {
    match basis {
        Basis::Hermite { m, n } => {
            if n != 1 {
                return Err(Error::InvalidInput("Hermite weights are one-dimensional".into()));
            }
            project_to_hermite(g, m, h)
        }
        Basis::FourierGrid { .. } => Ok(weyl_quantize_grid(g, basis, h, XiLimit::Absent)?.matrix),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugationReport {
    pub epsilon: f64,
    pub h: f64,
    /// `cond₂(E)`.
    pub cond: f64,
    /// Largest distance from an accepted eigenvalue of `P` to the spectrum of `P_ε`.
    pub displacement: f64,
    /// `1e−6·cond(E)`.
    pub displacement_tol: f64,
    pub accepted: usize,
    /// `(z, σ_min(P_ε − z))`.
    pub sigma: Vec<(C64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Conjugation {
    pub op: OperatorMatrix,
    pub e: CMat,
    pub e_inv: CMat,
    pub report: ConjugationReport,
}

/// `P_ε = E P E⁻¹`, `E = exp((ε/h) G)`, with `G` already quantized on P's basis.
pub fn conjugate_operator(p: &OperatorMatrix, g: &CMat, epsilon: f64, zs: &[C64]) -> Result<Conjugation> {
    let n = p.size();
    if g.nrows() != n || g.ncols() != n {
        return Err(Error::InvalidInput("weight matrix does not match the operator".into()));
    }
    let s = C64::new(epsilon / p.h, 0.0);
    let e = expm(&linalg::scale(g, s));
    let e_inv = expm(&linalg::scale(g, -s));
    let sv = linalg::singular_values(&e)?;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let cond = smax / smin;
    if !(cond <= COND_CAP) {
        return Err(Error::WeightTooStrong(cond));
    }
    let matrix = if epsilon == 0.0 { p.matrix.clone() } else { &e * &(&p.matrix * &e_inv) };
    let op = p.with_matrix(matrix, "conjugated");
    let before = eigendecompose(p)?;
    let after = linalg::eigenvalues(&op.matrix)?;
    let displacement = before
        .accepted_values()
        .iter()
        .map(|l| after.iter().map(|m| (m - l).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let engine = SigmaEngine::new(&op.matrix, SigmaMethod::Schur)?;
    let sigma = zs
        .iter()
        .map(|&z| Ok((z, engine.sigma_min(z)?.value)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Conjugation {
        report: ConjugationReport {
            epsilon,
            h: p.h,
            cond,
            displacement,
            displacement_tol: 1e-6 * cond,
            accepted: before.accepted_values().len(),
            sigma,
        },
        op,
        e,
        e_inv,
    })
}

/// `ε = min(C₂ h log(1/h), ε_cond)`, with `ε_cond` keeping `cond(E)` below `cond_cap`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EpsilonRule {
    pub c2: f64,
    pub cond_cap: f64,
}

impl Default for EpsilonRule {
    fn default() -> Self {
        EpsilonRule { c2: 1.0, cond_cap: 1e8 }
    }
}

impl EpsilonRule {
    /// `spread` is `max − min` of the spectrum of the quantized weight.
    pub fn epsilon(&self, h: f64, spread: f64) -> f64 {
        let window = self.c2 * h * (1.0 / h).ln();
        if spread <= 0.0 {
            window
        } else {
            window.min(h * self.cond_cap.ln() / spread)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExclusionSettings {
    pub rule: EpsilonRule,
    /// `M` in `m(h) ≥ M h log(1/h)`.
    pub m_factor: f64,
    pub circle_radius: f64,
    pub circle_points: usize,
    pub c_fit: f64,
}

impl Default for ExclusionSettings {
    fn default() -> Self {
        ExclusionSettings { rule: EpsilonRule::default(), m_factor: 1.0, circle_radius: 0.05, circle_points: 16, c_fit: 10.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExclusionRow {
    pub h: f64,
    pub size: usize,
    /// `min |λ − z₀|` over the accepted spectrum; `None` when nothing is accepted.
    pub distance: Option<f64>,
    pub threshold: f64,
    pub excluded: bool,
    pub epsilon: f64,
    pub cond: f64,
    /// `min σ_min(P_ε − z)` on the circle.
    pub sigma_min: f64,
    pub sigma_over_epsilon: f64,
    pub estimate_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExclusionReport {
    pub z0: C64,
    pub settings: ExclusionSettings,
    pub weight_bumps: usize,
    pub vacuous_weight: bool,
    pub rows: Vec<ExclusionRow>,
}

/// For each `(h, basis)`: build `P`, conjugate by the escape weight, record the
/// distance from `z₀` to the spectrum and `σ_min(P_ε − z)` on a circle around `z₀`.
pub fn boundary_exclusion_experiment(
    p: &SymbolExpr,
    z0: C64,
    escape: &EscapeWeight,
    runs: &[(f64, Basis)],
    settings: &ExclusionSettings,
) -> Result<ExclusionReport> {
    if escape.dim != p.dim() {
        return Err(Error::InvalidInput("escape weight and symbol differ in dimension".into()));
    }
    let circle: Vec<C64> = (0..settings.circle_points)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / settings.circle_points as f64;
            z0 + C64::from_polar(settings.circle_radius, t)
        })
        .collect();
    let rows = runs
        .par_iter()
        .map(|&(h, basis)| -> Result<ExclusionRow> {
            let op = weyl_quantize(p, basis, h)?;
            let g = quantize_weight(escape, basis, h)?;
            let ev = linalg::hermitian_eigenvalues(&linalg::scale(&(&g + &linalg::adjoint(&g)), C64::new(0.5, 0.0)))?;
            let spread = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - ev.iter().copied().fold(f64::INFINITY, f64::min);
            let epsilon = settings.rule.epsilon(h, spread);
            let conj = conjugate_operator(&op, &g, epsilon, &circle)?;
            let spec = eigendecompose(&op)?;
            let acc = spec.accepted_values();
            let distance = (!acc.is_empty()).then(|| spec.distance(z0));
            let threshold = settings.m_factor * h * (1.0 / h).ln();
            let sigma_min = conj.report.sigma.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
            let sigma_over_epsilon = if epsilon > 0.0 { sigma_min / epsilon } else { f64::INFINITY };
            Ok(ExclusionRow {
                h,
                size: op.size(),
                distance,
                threshold,
                excluded: distance.is_some_and(|d| d >= threshold),
                epsilon,
                cond: conj.report.cond,
                sigma_min,
                sigma_over_epsilon,
                estimate_holds: sigma_min >= epsilon / settings.c_fit,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExclusionReport {
        z0,
        settings: settings.clone(),
        weight_bumps: escape.bumps.len(),
        vacuous_weight: escape.vacuous,
        rows,
    })
}
