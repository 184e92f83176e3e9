//! Escape weights, conjugation by `e^{εG/h}` and dissipative operators.

mod conjugate;
mod dissipative;
mod escape;

pub use conjugate::{
    boundary_exclusion_experiment, conjugate_operator, quantize_weight, Conjugation, ConjugationReport,
    EpsilonRule, ExclusionReport, ExclusionRow, ExclusionSettings, COND_CAP,
};
pub use dissipative::{
    dissipative_build, dissipative_build_with, dissipative_from_parts, dissipative_resolvent_check,
    quasimode_spectrum_proximity, Certification, DissipativeOperator, Proximity, ResolventCheck,
    ResolventCheckPoint,
};
pub use escape::{escape_gamma, escape_weight, escape_weight_with, Bump, EscapeOptions, EscapeWeight};
