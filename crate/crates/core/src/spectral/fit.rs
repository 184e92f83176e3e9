use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `value ≈ C h^s`, least squares on `(log h, log value)`.
    Power,
    /// `value ≈ C e^{−c/h}`, least squares on `(1/h, log value)`.
    Exponential,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    pub model: FitModel,
    pub samples: Vec<(f64, f64)>,
    /// Samples dropped as nonpositive or floored.
    pub excluded: Vec<(f64, f64)>,
    /// Slope of the regression line in the model's coordinates.
    pub slope: f64,
    pub intercept: f64,
    /// Power exponent `s` (power model).
    pub exponent: Option<f64>,
    /// Rate `c = −slope` (exponential model).
    pub rate: Option<f64>,
    pub r2: f64,
    pub residuals: Vec<f64>,
    pub h_range: (f64, f64),
}

impl ScalingFit {
    /// Model value at `h`; refuses to extrapolate outside the sampled range.
    pub fn predict(&self, h: f64) -> Result<f64> {
        let (lo, hi) = self.h_range;
        if h < lo * (1.0 - 1e-12) || h > hi * (1.0 + 1e-12) {
            return Err(Error::InvalidInput(format!("h = {h} outside the fitted range [{lo}, {hi}]")));
        }
        let t = match self.model {
            FitModel::Power => h.ln(),
            FitModel::Exponential => 1.0 / h,
        };
        Ok((self.intercept + self.slope * t).exp())
    }
}

pub fn scaling_fit(samples: &[(f64, f64)], model: FitModel) -> Result<ScalingFit> {
    scaling_fit_flagged(samples, &vec![false; samples.len()], model)
}

/// Like [`scaling_fit`], excluding samples flagged as floored.
pub fn scaling_fit_flagged(samples: &[(f64, f64)], floored: &[bool], model: FitModel) -> Result<ScalingFit> {
    if floored.len() != samples.len() {
        return Err(Error::InvalidInput("flag list length mismatch".into()));
    }
    let mut used = Vec::new();
    let mut excluded = Vec::new();
    for (&(h, v), &f) in samples.iter().zip(floored) {
        if h <= 0.0 || !h.is_finite() {
            return Err(Error::InvalidInput(format!("nonpositive h = {h}")));
        }
        if f || v <= 0.0 || !v.is_finite() {
            excluded.push((h, v));
        } else {
            used.push((h, v));
        }
    }
    if used.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 usable samples, have {} ({} excluded)",
            used.len(),
            excluded.len()
        )));
    }
    let hmin = used.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hmax = used.iter().map(|s| s.0).fold(0.0, f64::max);
    if hmax < 4.0 * hmin * (1.0 - 1e-12) {
        return Err(Error::InvalidInput(format!("h values span a factor {} < 4", hmax / hmin)));
    }
    let pts: Vec<(f64, f64)> = used
        .iter()
        .map(|&(h, v)| {
            let t = match model {
                FitModel::Power => h.ln(),
                FitModel::Exponential => 1.0 / h,
            };
            (t, v.ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let residuals: Vec<f64> = pts.iter().map(|p| p.1 - intercept - slope * p.0).collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ssr / syy };
    Ok(ScalingFit {
        model,
        samples: used,
        excluded,
        slope,
        intercept,
        exponent: (model == FitModel::Power).then_some(slope),
        rate: (model == FitModel::Exponential).then_some(-slope),
        r2,
        residuals,
        h_range: (hmin, hmax),
    })
}
