//! Experiment configuration: one strict JSON document per run.
//!
//! Complex numbers are written as `[re, im]`, phase-space boxes as a list of
//! `[lo, hi]` intervals ordered `(x1..xn, ξ1..ξn)`.

use std::path::Path;

use semiclassical::quasimode::ResidualPath;
use semiclassical::spectral::{BasisRule, FitModel, Rect, SigmaMethod};
use semiclassical::C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub symbol: Option<String>,
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(default)]
    pub quantization: Quantization,
    /// Semiclassical parameters, used in order; single-h commands take the first.
    #[serde(default)]
    pub h: Vec<f64>,
    pub grid: Option<GridConfig>,
    pub atlas: Option<AtlasConfig>,
    pub quasimode: Option<QuasimodeConfig>,
    pub weight: Option<WeightConfig>,
    pub scaling: Option<ScalingConfig>,
    pub dissipative: Option<DissipativeConfig>,
    pub fbi: Option<FbiConfig>,
    #[serde(default = "default_output")]
    pub output: String,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

fn default_output() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantization {
    pub basis: BasisRule,
    /// ξ-limit of a non-polynomial symbol on grids, as an expression in x.
    #[serde(default)]
    pub xi_limit: Option<String>,
    /// Largest matrix accepted by the eigensolver.
    #[serde(default = "size_cap")]
    pub size_cap: usize,
}

fn size_cap() -> usize {
    4096
}

impl Default for Quantization {
    fn default() -> Self {
        Quantization { basis: BasisRule::Hermite { m: 100, n: 1 }, xi_limit: None, size_cap: size_cap() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub rect: Rect,
    /// `[n_re, n_im]`.
    pub shape: [usize; 2],
    #[serde(default = "schur")]
    pub method: SigmaMethod,
    /// σ-levels for isolines.
    #[serde(default)]
    pub levels: Vec<f64>,
}

fn schur() -> SigmaMethod {
    SigmaMethod::Schur
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeConfig {
    pub z0: [f64; 2],
    pub theta0: f64,
    pub eps0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasConfig {
    pub bounds: Vec<[f64; 2]>,
    #[serde(default = "resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub cone: Option<ConeConfig>,
    /// Radii for the Σ∞ probe; empty skips it.
    #[serde(default)]
    pub sigma_radii: Vec<f64>,
    /// Values z at which level sets, sign sums and (n = 1) winding numbers are reported.
    #[serde(default)]
    pub probes: Vec<[f64; 2]>,
    #[serde(default = "winding_radius")]
    pub winding_radius: f64,
    #[serde(default = "seeds")]
    pub seeds_per_axis: usize,
}

fn resolution() -> usize {
    101
}

fn winding_radius() -> f64 {
    10.0
}

fn seeds() -> usize {
    21
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasimodeConfig {
    /// Base point `(x⁰, ξ⁰)`.
    pub point: Vec<f64>,
    #[serde(default)]
    pub order: usize,
    #[serde(default = "half")]
    pub cutoff: f64,
    #[serde(default)]
    pub path: ResidualPath,
    #[serde(default = "power")]
    pub model: FitModel,
}

fn half() -> f64 {
    0.5
}

fn power() -> FitModel {
    FitModel::Power
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub z0: [f64; 2],
    #[serde(default = "t0")]
    pub t0: f64,
    pub bounds: Vec<[f64; 2]>,
    /// `C₂` in `ε = C₂ h log(1/h)`.
    #[serde(default = "unit")]
    pub c2: f64,
    #[serde(default = "cond_cap")]
    pub cond_cap: f64,
    #[serde(default = "unit")]
    pub m_factor: f64,
    #[serde(default = "circle_radius")]
    pub circle_radius: f64,
    #[serde(default = "circle_points")]
    pub circle_points: usize,
    #[serde(default = "c_fit")]
    pub c_fit: f64,
}

fn t0() -> f64 {
    5.0
}

fn unit() -> f64 {
    1.0
}

fn cond_cap() -> f64 {
    1e8
}

fn circle_radius() -> f64 {
    0.05
}

fn circle_points() -> usize {
    16
}

fn c_fit() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub z: [f64; 2],
    #[serde(default = "power")]
    pub model: FitModel,
    /// Keep only test functions supported in `|x| ≤ restrict` (grid bases).
    #[serde(default)]
    pub restrict: Option<f64>,
    #[serde(default = "svd")]
    pub method: SigmaMethod,
}

fn svd() -> SigmaMethod {
    SigmaMethod::Svd
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipativeConfig {
    /// Real part `q`; Weyl-quantized.
    pub q: String,
    /// Damping `a ≥ 0`; Wick-quantized.
    pub a: String,
    /// Window on which `q` real and `a ≥ 0` are sampled.
    pub window: Vec<[f64; 2]>,
    /// Points with `Im z > 0` for the resolvent bound.
    #[serde(default)]
    pub zs: Vec<[f64; 2]>,
    #[serde(default = "probes")]
    pub probes: usize,
}

fn probes() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FbiConfig {
    #[serde(default = "stride")]
    pub x_stride: usize,
}

fn stride() -> usize {
    1
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<ExperimentConfig, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn empty() -> ExperimentConfig {
        Self::from_json("{}").expect("empty config parses")
    }

    pub fn symbol_text(&self) -> Result<&str, CliError> {
        self.symbol.as_deref().ok_or_else(|| CliError::Config("no symbol given".into()))
    }

    pub fn first_h(&self) -> Result<f64, CliError> {
        let h = *self.h.first().ok_or_else(|| CliError::Config("no h given".into()))?;
        if !(h > 0.0) {
            return Err(CliError::Config(format!("h must be positive, got {h}")));
        }
        Ok(h)
    }

    pub fn section<'a, T>(&self, s: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        s.as_ref().ok_or_else(|| CliError::Config(format!("config has no \"{name}\" section")))
    }
}

pub fn complex(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

pub fn intervals(v: &[[f64; 2]]) -> Vec<(f64, f64)> {
    v.iter().map(|b| (b[0], b[1])).collect()
}
