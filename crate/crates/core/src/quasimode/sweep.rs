use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::wkb::{build_quasimode, Quasimode};
use crate::error::{Error, Result};
use crate::linalg;
use crate::quantize::{apply_weyl_poly_grid, fbi_transform, weyl_quantize_grid, Basis, FbiGrid, XiLimit};
use crate::spectral::{scaling_fit, FitModel, ScalingFit};
use crate::symbol::SymbolExpr;

/// How the operator is applied to the sampled quasimode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ResidualPath {
    /// Matrix-free for ξ-polynomial symbols, dense grid Weyl otherwise.
    #[default]
    Auto,
    /// Dense grid Weyl matrix.
    DenseGrid,
}

const DENSE_CAP: usize = 2048;
const MATRIX_FREE_CAP: usize = 1 << 15;

/// Grid resolving the beam: at least 16 points per width `√h` and dual window
/// covering the local frequencies on the cutoff support.
pub fn quasimode_grid(qm: &Quasimode, h: f64) -> Basis {
    let n = qm.dim;
    let xmax = qm.base[..n].iter().map(|v| v.abs()).fold(0.0, f64::max);
    let l = xmax + 2.0 * qm.delta + 1.0;
    let amax = qm.hessian.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    let ximax = qm.base[n..].iter().map(|v| v.abs()).fold(0.0, f64::max);
    let xi_req = ximax + amax * 2.0 * qm.delta + 8.0 * h.sqrt();
    let need = (32.0 * l / h.sqrt()).max(2.0 * l * xi_req / (std::f64::consts::PI * h));
    let points = (need.ceil() as usize).next_power_of_two().max(32);
    Basis::FourierGrid { half_width: l, points, n }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualSample {
    pub h: f64,
    /// `‖(P − z)u‖ / ‖u‖`.
    pub residual: f64,
    pub norm: f64,
    pub points: usize,
    /// Residual on the refined grid (doubled point count), when computed.
    pub refined: Option<f64>,
}

fn apply(p: &SymbolExpr, basis: Basis, h: f64, u: &[C64], path: ResidualPath) -> Result<Vec<C64>> {
    if path == ResidualPath::Auto {
        if let Some(poly) = p.to_poly() {
            return apply_weyl_poly_grid(&poly, basis, h, u);
        }
    }
    if basis.size() > DENSE_CAP {
        return Err(Error::Resolution(format!(
            "dense residual path needs {} unknowns (cap {DENSE_CAP})",
            basis.size()
        )));
    }
    let limit = if p.is_polynomial_in_xi() { XiLimit::Absent } else { XiLimit::Numeric };
    let op = weyl_quantize_grid(p, basis, h, limit)?;
    Ok(linalg::matvec(&op.matrix, u))
}

fn residual_on(p: &SymbolExpr, qm: &Quasimode, basis: Basis, h: f64, path: ResidualPath) -> Result<(f64, f64, f64)> {
    let u = qm.sample(basis, h)?;
    let pu = apply(p, basis, h, &u, path)?;
    let nu = linalg::vnorm(&u);
    if nu == 0.0 {
        return Err(Error::Resolution("quasimode vanishes on the grid".into()));
    }
    let r: Vec<C64> = pu.iter().zip(&u).map(|(a, b)| a - qm.z * b).collect();
    let dx = match basis {
        Basis::FourierGrid { half_width, points, n } => (2.0 * half_width / points as f64).powi(n as i32),
        Basis::Hermite { .. } => 1.0,
    };
    Ok((linalg::vnorm(&r) / nu, nu * dx.sqrt(), linalg::vnorm(&pu) / nu))
}

/// Residual of the sampled quasimode at one `h`, with a grid-refinement check.
pub fn quasimode_residual(p: &SymbolExpr, qm: &Quasimode, h: f64, path: ResidualPath) -> Result<ResidualSample> {
    let basis = quasimode_grid(qm, h);
    let Basis::FourierGrid { half_width, points, n } = basis else { unreachable!() };
    let cap = if path == ResidualPath::Auto && p.to_poly().is_some() { MATRIX_FREE_CAP } else { DENSE_CAP };
    if basis.size() > cap {
        return Err(Error::Resolution(format!("h = {h} needs {} grid unknowns (cap {cap})", basis.size())));
    }
    let (r1, norm, scale) = residual_on(p, qm, basis, h, path)?;
    let fine = Basis::FourierGrid { half_width, points: 2 * points, n };
    let refined = if fine.size() <= cap {
        let (r2, _, _) = residual_on(p, qm, fine, h, path)?;
        let floor = 1e-11 * (scale + qm.z.norm());
        if (r1 - r2).abs() > 0.1 * r1.max(r2) && r1.max(r2) > floor {
            return Err(Error::Resolution(format!(
                "grid refinement changes the residual from {r1:.3e} to {r2:.3e} at h = {h}"
            )));
        }
        Some(r2)
    } else {
        log::info!("refinement check skipped at h = {h}: refined grid over the cap");
        None
    };
    Ok(ResidualSample { h, residual: r1, norm, points, refined })
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualSweep {
    pub quasimode: Quasimode,
    pub samples: Vec<ResidualSample>,
    pub fit: ScalingFit,
}

/// Builds the quasimode once and measures `‖(P − z)u‖/‖u‖` over `hs`.
pub fn residual_sweep(
    p: &SymbolExpr,
    w0: &[f64],
    order: usize,
    delta: f64,
    path: ResidualPath,
    hs: &[f64],
    model: FitModel,
) -> Result<ResidualSweep> {
    let qm = build_quasimode(p, w0, order, delta)?;
    let samples = hs
        .par_iter()
        .map(|&h| quasimode_residual(p, &qm, h, path))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.h, s.residual)).collect();
    let fit = scaling_fit(&pairs, model)?;
    Ok(ResidualSweep { quasimode: qm, samples, fit })
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalizationReport {
    pub h: f64,
    pub center: (f64, f64),
    pub radii: Vec<f64>,
    /// Fraction of FBI mass outside each radius.
    pub outside: Vec<f64>,
    pub peak: (f64, f64),
    /// FBI mass over `‖u‖²`.
    pub mass_ratio: f64,
}

/// FBI mass statistics of the sampled quasimode around its base point (n = 1).
pub fn localization_report(qm: &Quasimode, h: f64) -> Result<LocalizationReport> {
    if qm.dim != 1 {
        return Err(Error::InvalidInput("localization is reported for n = 1".into()));
    }
    let basis = quasimode_grid(qm, h);
    let Basis::FourierGrid { half_width, points, .. } = basis else { unreachable!() };
    let (x0, xi0) = (qm.base[0], qm.base[1]);
    let margin = 3.0 * h.sqrt();
    let xi_top = h * std::f64::consts::PI * (points / 2 - 1) as f64 / half_width;
    if x0.abs() + margin >= half_width || xi0.abs() + margin >= xi_top {
        return Err(Error::Resolution("FBI grid does not cover the base point with a 3-width margin".into()));
    }
    let u = qm.sample(basis, h)?;
    let stride = (points / 512).max(1);
    let field = fbi_transform(&u, basis, h, FbiGrid { x_stride: stride })?;
    let dx = 2.0 * half_width / points as f64;
    let unorm2 = u.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx;
    let radii = vec![0.25, 0.5, 1.0];
    let outside = radii.iter().map(|&r| field.mass_fraction_outside((x0, xi0), r)).collect();
    Ok(LocalizationReport {
        h,
        center: (x0, xi0),
        radii,
        outside,
        peak: field.argmax(),
        mass_ratio: field.mass() / unorm2,
    })
}
