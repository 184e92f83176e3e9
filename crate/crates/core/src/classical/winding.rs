use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symbol::SymbolExpr;

#[derive(Debug, Clone, Serialize)]
pub struct Winding {
    pub index: i64,
    /// Accumulated `Δarg / 2π` before rounding.
    pub raw: f64,
    pub arcs: usize,
    pub max_step: f64,
    pub min_modulus: f64,
}

const MAX_DEPTH: u32 = 40;

/// Winding of `p − z` along `|w| = R`, traversed counterclockwise in the `(ξ, x)` plane.
///
/// With this orientation `ξ + ix` winds once positively, so the winding counts
/// preimages with the sign of the bracket.
pub fn winding_number(p: &SymbolExpr, z: C64, radius: f64) -> Result<Winding> {
    if p.dim() != 1 {
        return Err(Error::InvalidInput("winding number needs n = 1".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidInput("radius must be positive".into()));
    }
    let f = |t: f64| p.eval(&[radius * t.sin(), radius * t.cos()]) - z;
    let scale = (0..64)
        .map(|k| (f(2.0 * PI * k as f64 / 64.0) + z).norm())
        .fold(z.norm(), f64::max)
        .max(1e-300);
    let floor = 1e-12 * scale;
    let mut total = 0.0;
    let mut arcs = 0;
    let mut max_step = 0.0f64;
    let mut min_modulus = f64::INFINITY;
    let n0 = 256;
    let mut stack: Vec<(f64, f64, C64, C64, u32)> = Vec::new();
    for k in (0..n0).rev() {
        let (a, b) = (2.0 * PI * k as f64 / n0 as f64, 2.0 * PI * (k + 1) as f64 / n0 as f64);
        stack.push((a, b, f(a), f(b), 0));
    }
    while let Some((a, b, fa, fb, depth)) = stack.pop() {
        min_modulus = min_modulus.min(fa.norm()).min(fb.norm());
        if fa.norm() <= floor || fb.norm() <= floor || !fa.is_finite() || !fb.is_finite() {
            return Err(Error::Degenerate(format!("p − z vanishes on the contour near angle {a:.6}")));
        }
        let step = (fb / fa).arg();
        let m = 0.5 * (a + b);
        let fm = f(m);
        let halves = (fm / fa).arg() + (fb / fm).arg();
        // accept only small steps whose halves agree with the whole
        if step.abs() < PI / 4.0 && (halves - step).abs() < 1e-6 {
            total += step;
            arcs += 1;
            max_step = max_step.max(step.abs());
            continue;
        }
        if depth >= MAX_DEPTH {
            return Err(Error::Convergence(format!("winding refinement stalled near angle {a:.6}")));
        }
        stack.push((m, b, fm, fb, depth + 1));
        stack.push((a, m, fa, fm, depth + 1));
    }
    let raw = total / (2.0 * PI);
    let index = raw.round() as i64;
    if (raw - index as f64).abs() >= 0.01 {
        return Err(Error::Convergence(format!("winding {raw} is not within 0.01 of an integer")));
    }
    Ok(Winding { index, raw, arcs, max_step, min_modulus })
}
