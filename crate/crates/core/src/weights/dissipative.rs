//! Dissipative operators `P = Q − iW` with `Q` Hermitian and `W ≥ 0`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::classical::PhaseBox;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::quantize::{weyl_quantize, wick_quantize, wick_quantize_expr, Basis, OperatorMatrix, PhaseSymbol};
use crate::spectral::{eigendecompose, norm2_estimate, SigmaEngine, SigmaMethod};
use crate::symbol::SymbolExpr;

#[derive(Debug, Clone)]
pub struct DissipativeOperator {
    pub q: OperatorMatrix,
    pub w: OperatorMatrix,
    pub p: OperatorMatrix,
    /// `max|Q − Q*| / max|Q|`.
    pub hermitian_defect: f64,
    /// Smallest eigenvalue of the Hermitian part of `W`.
    pub w_min_eig: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certification {
    pub hermitian_defect: f64,
    pub w_min_eig: f64,
    pub norm: f64,
    /// `w_min_eig ≥ −1e−10·‖W‖`.
    pub w_psd: bool,
}

impl DissipativeOperator {
    pub fn certification(&self) -> Certification {
        let wn = norm2_estimate(&self.w.matrix).max(1e-300);
        Certification {
            hermitian_defect: self.hermitian_defect,
            w_min_eig: self.w_min_eig,
            norm: self.norm,
            w_psd: self.w_min_eig >= -1e-10 * wn,
        }
    }

    /// `max Im⟨Pu, u⟩/‖u‖²` over `count` seeded random vectors.
    pub fn dissipativity_probe(&self, count: usize, seed: u64) -> f64 {
        (0..count)
            .map(|k| {
                let u = linalg::seeded_vector(self.p.size(), seed.wrapping_add(k as u64));
                let pu = linalg::matvec(&self.p.matrix, &u);
                (linalg::vdot(&u, &pu) / linalg::vdot(&u, &u).re).im
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn sample_points(window: &PhaseBox) -> Vec<Vec<f64>> {
    window.grid(if window.dim() == 1 { 41 } else { 11 })
}

fn assemble(q: OperatorMatrix, w: OperatorMatrix) -> Result<DissipativeOperator> {
    if q.size() != w.size() {
        return Err(Error::InvalidInput("Q and W live on different bases".into()));
    }
    let hermitian_defect = linalg::hermitian_defect(&q.matrix);
    if hermitian_defect > 1e-10 {
        return Err(Error::Hypothesis(format!("Q is not Hermitian: defect {hermitian_defect:e}")));
    }
    let wh = linalg::scale(&(&w.matrix + &linalg::adjoint(&w.matrix)), C64::new(0.5, 0.0));
    let w_min_eig = linalg::hermitian_eigenvalues(&wh)?.into_iter().fold(f64::INFINITY, f64::min);
    let matrix = &q.matrix - &linalg::scale(&w.matrix, C64::new(0.0, 1.0));
    let p = q.with_matrix(matrix, "dissipative");
    let norm = norm2_estimate(&p.matrix);
    Ok(DissipativeOperator { q, w, p, hermitian_defect, w_min_eig, norm })
}

fn check_q(q: &SymbolExpr, pts: &[Vec<f64>]) -> Result<()> {
    for w in pts {
        let v = q.eval(w);
        if v.im.abs() > 1e-12 * v.re.abs().max(1.0) {
            return Err(Error::Hypothesis(format!("q is not real at {w:?}: {v}")));
        }
    }
    Ok(())
}

fn check_a(a: &dyn PhaseSymbol, pts: &[Vec<f64>]) -> Result<()> {
    for w in pts {
        let v = a.eval(w);
        if v.re < -1e-12 || v.im.abs() > 1e-12 * v.re.abs().max(1.0) {
            return Err(Error::Hypothesis(format!("a is not nonnegative at {w:?}: {v}")));
        }
    }
    Ok(())
}

/// `P = q^w − i a^{Wick}` with sampled checks of `q` real and `a ≥ 0` on `window`.
pub fn dissipative_build(
    q: &SymbolExpr,
    a: &SymbolExpr,
    basis: Basis,
    h: f64,
    window: &PhaseBox,
) -> Result<DissipativeOperator> {
    let pts = sample_points(window);
    check_q(q, &pts)?;
    check_a(a, &pts)?;
    assemble(weyl_quantize(q, basis, h)?, wick_quantize_expr(a, basis, h)?)
}

/// As [`dissipative_build`] for a damping symbol outside the expression grammar,
/// Wick-quantized on a grid with ξ-limit `a_limit` when needed.
pub fn dissipative_build_with(
    q: &SymbolExpr,
    a: &dyn PhaseSymbol,
    a_limit: Option<&dyn PhaseSymbol>,
    basis: Basis,
    h: f64,
    window: &PhaseBox,
) -> Result<DissipativeOperator> {
    let pts = sample_points(window);
    check_q(q, &pts)?;
    check_a(a, &pts)?;
    assemble(weyl_quantize(q, basis, h)?, wick_quantize(a, a_limit, basis, h)?)
}

/// `P = Q − iW` from given matrices (certified like the built operators).
pub fn dissipative_from_parts(q: OperatorMatrix, w: OperatorMatrix) -> Result<DissipativeOperator> {
    assemble(q, w)
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolventCheckPoint {
    pub z: C64,
    pub sigma_min: f64,
    /// `σ_min − Im z`.
    pub margin: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolventCheck {
    pub tau: f64,
    pub points: Vec<ResolventCheckPoint>,
    /// False flags a discretization artifact (W not PSD numerically).
    pub all_ok: bool,
}

/// Checks `σ_min(P − z) ≥ Im z − τ` for `Im z > 0`, `τ = 1e−10·max(1, ‖P‖)`.
pub fn dissipative_resolvent_check(
    op: &DissipativeOperator,
    zs: &[C64],
    method: SigmaMethod,
) -> Result<ResolventCheck> {
    if zs.iter().any(|z| !(z.im > 0.0)) {
        return Err(Error::InvalidInput("resolvent check needs Im z > 0".into()));
    }
    let tau = 1e-10 * op.norm.max(1.0);
    let engine = SigmaEngine::new(&op.p.matrix, method)?;
    let points = zs
        .iter()
        .map(|&z| {
            let s = engine.sigma_min(z)?.value;
            Ok(ResolventCheckPoint { z, sigma_min: s, margin: s - z.im, ok: s >= z.im - tau })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_ok = points.iter().all(|p| p.ok);
    Ok(ResolventCheck { tau, points, all_ok })
}

#[derive(Debug, Clone, Serialize)]
pub struct Proximity {
    pub h: f64,
    pub dim: usize,
    pub lambda: C64,
    /// `‖(P − λ)u‖/‖u‖`.
    pub residual: f64,
    /// Distance from `λ` to the accepted spectrum.
    pub distance: f64,
    /// `distance / (residual·h^{−n})`.
    pub ratio: f64,
}

/// Distance from `λ` to the accepted spectrum of `P` next to the quasimode residual.
pub fn quasimode_spectrum_proximity(p: &OperatorMatrix, u: &[C64], lambda: C64) -> Result<Proximity> {
    if u.len() != p.size() {
        return Err(Error::InvalidInput("vector does not match the operator".into()));
    }
    let nu = linalg::vnorm(u);
    if nu == 0.0 {
        return Err(Error::InvalidInput("zero quasimode".into()));
    }
    let shifted: CMat = linalg::shifted(&p.matrix, lambda);
    let residual = linalg::vnorm(&linalg::matvec(&shifted, u)) / nu;
    let distance = eigendecompose(p)?.distance(lambda);
    let n = p.basis.dim() as i32;
    let scale = residual * p.h.powi(-n);
    Ok(Proximity {
        h: p.h,
        dim: n as usize,
        lambda,
        residual,
        distance,
        ratio: if scale > 0.0 { distance / scale } else { f64::INFINITY },
    })
}
