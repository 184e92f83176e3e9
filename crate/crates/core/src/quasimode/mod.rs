//! WKB quasimodes at points where `{Re p, Im p} < 0`, their residuals and localization.

mod hessian;
mod sweep;
mod wkb;

pub use hessian::{hessian_construct, HessianReport};
pub use sweep::{
    localization_report, quasimode_grid, quasimode_residual, residual_sweep, LocalizationReport, ResidualPath,
    ResidualSample, ResidualSweep,
};
pub use wkb::{build_quasimode, smooth_cutoff, Quasimode};
