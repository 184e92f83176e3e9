//! Semiclassical pseudospectra at desk scale.
//!
//! Symbols `p(x, ξ)` are parsed into [`SymbolExpr`], differentiated with
//! truncated Taylor [`Jet`]s, quantized into dense matrices and probed for
//! resolvent growth, quasimodes and escape weights.

pub mod classical;
pub mod error;
pub mod io;
pub mod linalg;
pub mod quantize;
pub mod quasimode;
pub mod spectral;
pub mod symbol;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use symbol::{Jet, SymbolExpr};
