//! FBI (Gaussian-windowed Fourier) transform on one-dimensional grids.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use super::grid::grid_points;
use super::Basis;
use crate::error::{Error, Result};

/// Output lattice: every `x_stride`-th spatial grid point, all dual frequencies.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FbiGrid {
    pub x_stride: usize,
}

impl Default for FbiGrid {
    fn default() -> Self {
        FbiGrid { x_stride: 1 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FbiField {
    pub xs: Vec<f64>,
    /// Ascending dual frequencies.
    pub xis: Vec<f64>,
    /// `values[i * xis.len() + k] = Tu(xs[i], xis[k])`.
    pub values: Vec<C64>,
    pub h: f64,
    pub normalization: f64,
    pub dx: f64,
    pub dxi: f64,
}

impl FbiField {
    pub fn value(&self, i: usize, k: usize) -> C64 {
        self.values[i * self.xis.len() + k]
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx * self.dxi
    }

    /// Fraction of the squared mass outside the closed ball of radius `r` around `center`.
    pub fn mass_fraction_outside(&self, center: (f64, f64), r: f64) -> f64 {
        let nk = self.xis.len();
        let mut out = 0.0;
        let mut total = 0.0;
        for (i, &x) in self.xs.iter().enumerate() {
            for (k, &xi) in self.xis.iter().enumerate() {
                let e = self.values[i * nk + k].norm_sqr();
                total += e;
                if (x - center.0).hypot(xi - center.1) > r {
                    out += e;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            out / total
        }
    }

    /// Lattice point of maximal |Tu|.
    pub fn argmax(&self) -> (f64, f64) {
        let nk = self.xis.len();
        let (idx, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, v)| if v.norm() > acc.1 { (i, v.norm()) } else { acc });
        (self.xs[idx / nk], self.xis[idx % nk])
    }
}

fn raw_transform(u: &[C64], l: f64, m: usize, h: f64, stride: usize) -> (Vec<f64>, Vec<f64>, Vec<C64>) {
    let ys = grid_points(l, m);
    let dy = 2.0 * l / m as f64;
    let fft = FftPlanner::new().plan_fft_forward(m);
    let order: Vec<usize> = (0..m).map(|k| (k + m / 2) % m).collect();
    let xis: Vec<f64> = order
        .iter()
        .map(|&k| {
            let f = if k < m / 2 { k as i64 } else { k as i64 - m as i64 };
            h * std::f64::consts::PI * f as f64 / l
        })
        .collect();
    let out_idx: Vec<usize> = (0..m).step_by(stride.max(1)).collect();
    let xs: Vec<f64> = out_idx.iter().map(|&i| ys[i]).collect();
    let pref = h.powf(-0.75) * dy;
    let rows: Vec<Vec<C64>> = out_idx
        .par_iter()
        .map(|&a| {
            let xa = ys[a];
            let mut g: Vec<C64> = ys
                .iter()
                .zip(u)
                .map(|(&y, &v)| v * (-(xa - y).powi(2) / (2.0 * h)).exp())
                .collect();
            fft.process(&mut g);
            order
                .iter()
                .zip(&xis)
                .map(|(&k, &xi)| {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    g[k] * C64::from_polar(pref * sign, xa * xi / h)
                })
                .collect()
        })
        .collect();
    (xs, xis, rows.into_iter().flatten().collect())
}

/// Normalization constant that makes the discrete transform of a unit-norm Gaussian
/// have unit mass (theoretical value `2^{−1/2} π^{−3/4}`).
pub fn fbi_calibration(half_width: f64, points: usize, h: f64, stride: usize) -> f64 {
    let ys = grid_points(half_width, points);
    let dy = 2.0 * half_width / points as f64;
    let mut g: Vec<C64> = ys.iter().map(|&y| C64::new((-y * y / (2.0 * h)).exp(), 0.0)).collect();
    let nrm = (g.iter().map(|v| v.norm_sqr()).sum::<f64>() * dy).sqrt();
    for v in g.iter_mut() {
        *v /= nrm;
    }
    let (_, _, vals) = raw_transform(&g, half_width, points, h, stride);
    let dxi = h * std::f64::consts::PI / half_width;
    let mass = vals.iter().map(|v| v.norm_sqr()).sum::<f64>() * dy * stride as f64 * dxi;
    1.0 / mass.sqrt()
}

/// `Tu(x, ξ) = c h^{−3/4} ∫ e^{(i/h)(x−y)ξ − |x−y|²/2h} u(y) dy` of grid samples `u`.
pub fn fbi_transform(u: &[C64], basis: Basis, h: f64, grid: FbiGrid) -> Result<FbiField> {
    let Basis::FourierGrid { half_width, points, n: 1 } = basis else {
        return Err(Error::InvalidInput("FBI transform needs a one-dimensional grid".into()));
    };
    if u.len() != points {
        return Err(Error::InvalidInput("vector length does not match the grid".into()));
    }
    let umax = u.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if umax == 0.0 {
        return Err(Error::InvalidInput("zero vector".into()));
    }
    if u[0].norm().max(u[points - 1].norm()) > 1e-8 * umax {
        return Err(Error::Resolution("window leakage: vector does not vanish at the grid boundary".into()));
    }
    let stride = grid.x_stride.max(1);
    let c = fbi_calibration(half_width, points, h, stride);
    let (xs, xis, mut values) = raw_transform(u, half_width, points, h, stride);
    for v in values.iter_mut() {
        *v *= c;
    }
    Ok(FbiField {
        xs,
        xis,
        values,
        h,
        normalization: c,
        dx: 2.0 * half_width / points as f64 * stride as f64,
        dxi: h * std::f64::consts::PI / half_width,
    })
}
