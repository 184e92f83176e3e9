//! Classical pseudospectrum sets sampled from the symbol: Λ(p), Λ±(p), Σ∞(p), level sets and winding.

mod level;
mod range;
mod winding;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use level::{sign_sum, solve_level_set, solve_level_set_with, LevelRoot, LevelSet, LevelSetOptions};
pub use range::{sample_symbol_range, sigma_infinity, ConeTest, RangeAtlas, RangeSample, SigmaInfinity};
pub use winding::{winding_number, Winding};

/// Axis-aligned box in phase space, ordered `(x1..xn, ξ1..ξn)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseBox {
    pub bounds: Vec<(f64, f64)>,
}

impl PhaseBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<PhaseBox> {
        if bounds.is_empty() || bounds.len() % 2 != 0 {
            return Err(Error::InvalidInput("phase box needs 2n intervals".into()));
        }
        if bounds.iter().any(|(a, b)| !(a.is_finite() && b.is_finite() && b > a)) {
            return Err(Error::InvalidInput("phase box is degenerate".into()));
        }
        Ok(PhaseBox { bounds })
    }

    /// The cube `[a, b]^{2n}`.
    pub fn cube(n: usize, a: f64, b: f64) -> Result<PhaseBox> {
        PhaseBox::new(vec![(a, b); 2 * n])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len() / 2
    }

    pub fn diameter(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        w.iter().zip(&self.bounds).all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    /// Tensor grid with `res` nodes per axis (endpoints included), in lexicographic order.
    pub fn grid(&self, res: usize) -> Vec<Vec<f64>> {
        let d = self.bounds.len();
        let total = res.pow(d as u32);
        (0..total)
            .map(|mut k| {
                let mut w = vec![0.0; d];
                for a in (0..d).rev() {
                    let (lo, hi) = self.bounds[a];
                    let i = k % res;
                    k /= res;
                    w[a] = lo + (hi - lo) * i as f64 / (res - 1) as f64;
                }
                w
            })
            .collect()
    }
}
