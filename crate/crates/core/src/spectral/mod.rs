//! Eigenvalues with spurious-mode filtering, σ_min sweeps, scaling fits and contours.

mod contour;
mod eigen;
mod fit;
mod resolvent;
mod sweep;

pub use contour::{contour_extract, point_in_polygon, Polyline};
pub use eigen::{eigendecompose, eigendecompose_with, tail_mass, EigenOptions, SpectrumReport};
pub use fit::{scaling_fit, scaling_fit_flagged, FitModel, ScalingFit};
pub use resolvent::{
    norm2_estimate, pseudospectrum_grid, pseudospectrum_grid_with, resolvent_norm, Rect, ResolventGrid,
    SigmaEngine, SigmaMethod, SigmaValue,
};
pub use sweep::{resolvent_sweep, restricted_sigma_min, BasisRule, ResolventSweep, SweepSample};
