use num_complex::Complex64 as C64;
use serde::Serialize;

use super::hessian::hessian_construct;
use crate::error::{Error, Result};
use crate::quantize::{grid_points, Basis};
use crate::symbol::jet::binomial;
use crate::symbol::SymbolExpr;

/// Polynomial in `(h, s)`: `c[k][d]` multiplies `h^k s^d`.
type HPoly = Vec<Vec<C64>>;

fn zero(k: usize, s: usize) -> HPoly {
    vec![vec![C64::new(0.0, 0.0); s + 1]; k + 1]
}

/// Conjugated operator `e^{−iφ/h} (p^w − z) e^{iφ/h}` acting on amplitudes in the
/// shifted coordinate `s = x − x⁰`, truncated to `h^k, k ≤ kmax` and `s^d, d ≤ smax`.
struct Conjugated<'a> {
    /// Taylor coefficients `(a, b, c)` of `p(x⁰ + s, ξ⁰ + η) − z`: `c s^a η^b`.
    taylor: &'a [(u32, u32, C64)],
    /// `ψ = φ' − ξ⁰` coefficients.
    psi: &'a [C64],
    kmax: usize,
    smax: usize,
}

impl Conjugated<'_> {
    fn mul_s(&self, f: &HPoly, a: u32) -> HPoly {
        let mut g = zero(self.kmax, self.smax);
        for k in 0..=self.kmax {
            for d in 0..=self.smax {
                let t = d + a as usize;
                if t <= self.smax {
                    g[k][t] = f[k][d];
                }
            }
        }
        g
    }

    /// `T f = ψ f − i h f'`.
    fn t(&self, f: &HPoly) -> HPoly {
        let mut g = zero(self.kmax, self.smax);
        for k in 0..=self.kmax {
            for d in 0..=self.smax {
                let v = f[k][d];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for (e, c) in self.psi.iter().enumerate() {
                    if d + e <= self.smax {
                        g[k][d + e] += v * c;
                    }
                }
                if d > 0 && k < self.kmax {
                    g[k + 1][d - 1] += C64::new(0.0, -(d as f64)) * v;
                }
            }
        }
        g
    }

    fn apply(&self, f: &HPoly) -> HPoly {
        let mut out = zero(self.kmax, self.smax);
        for &(a, b, c) in self.taylor {
            // Weyl ordering of s^a η^b: 2^{−a} Σ_i C(a, i) s^i T^b s^{a−i}
            for i in 0..=a {
                let mut g = self.mul_s(f, a - i);
                for _ in 0..b {
                    g = self.t(&g);
                }
                let g = self.mul_s(&g, i);
                let w = c * binomial(a as usize, i as usize) / 2f64.powi(a as i32);
                for k in 0..=self.kmax {
                    for d in 0..=self.smax {
                        out[k][d] += w * g[k][d];
                    }
                }
            }
        }
        out
    }
}

/// `p(x⁰ + s, ξ⁰ + ψ(s)) − z` as a polynomial in `s` through degree `smax`.
fn eikonal(taylor: &[(u32, u32, C64)], psi: &[C64], smax: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); smax + 1];
    let maxb = taylor.iter().map(|t| t.1).max().unwrap_or(0) as usize;
    // powers of ψ
    let mut pows = vec![{
        let mut one = vec![C64::new(0.0, 0.0); smax + 1];
        one[0] = C64::new(1.0, 0.0);
        one
    }];
    for b in 1..=maxb {
        let prev = &pows[b - 1];
        let mut next = vec![C64::new(0.0, 0.0); smax + 1];
        for (i, u) in prev.iter().enumerate() {
            for (j, v) in psi.iter().enumerate() {
                if i + j <= smax {
                    next[i + j] += u * v;
                }
            }
        }
        pows.push(next);
    }
    for &(a, b, c) in taylor {
        for (d, v) in pows[b as usize].iter().enumerate() {
            if d + a as usize <= smax {
                out[d + a as usize] += c * v;
            }
        }
    }
    out
}

/// `χ(r)`: 1 for `r ≤ δ`, 0 for `r ≥ 2δ`, C∞ in between.
pub fn smooth_cutoff(r: f64, delta: f64) -> f64 {
    let g = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let t = r / delta - 1.0;
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        g(1.0 - t) / (g(1.0 - t) + g(t))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Quasimode {
    pub dim: usize,
    /// `(x⁰, ξ⁰)`.
    pub base: Vec<f64>,
    pub z: C64,
    pub order: usize,
    /// Phase coefficients `φ_k` of `s^k` (n = 1); `φ_0 = 0`, `φ_1 = ξ⁰`, `φ_2 = A/2`.
    pub phase: Vec<C64>,
    pub hessian: Vec<Vec<C64>>,
    /// Minimum eigenvalue of `Im A`.
    pub gamma_a: f64,
    /// Amplitude jets `a_j` as coefficients of `s^d`.
    pub amplitudes: Vec<Vec<C64>>,
    pub delta: f64,
    /// Largest transport/eikonal coefficient left after solving, relative to the symbol scale.
    pub solve_defect: f64,
    /// Sampled `Im φ ≥ γ_A |s|²/4` on the cutoff support.
    pub phase_positive: bool,
    /// Largest sampled radius up to `2δ` on which that bound holds.
    pub positive_radius: f64,
    #[serde(skip)]
    taylor: Vec<(u32, u32, C64)>,
}

impl Quasimode {
    pub fn phase_degree(&self) -> usize {
        self.phase.len() - 1
    }

    fn shift(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.base).map(|(a, b)| a - b).collect()
    }

    /// `φ(x⁰ + s)`.
    pub fn phase_at(&self, s: &[f64]) -> C64 {
        if self.dim == 1 {
            self.phase.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * s[0] + c)
        } else {
            let mut v = C64::new(0.0, 0.0);
            for i in 0..self.dim {
                v += self.base[self.dim + i] * s[i];
                for j in 0..self.dim {
                    v += 0.5 * self.hessian[i][j] * s[i] * s[j];
                }
            }
            v
        }
    }

    /// `Σ_j h^j a_j(s)`.
    pub fn amplitude_at(&self, s: &[f64], h: f64) -> C64 {
        if self.dim != 1 {
            return C64::new(1.0, 0.0);
        }
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| a.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * s[0] + c) * h.powi(j as i32))
            .sum()
    }

    /// `χ(x) e^{iφ(x)/h} a(x, h)`.
    pub fn value(&self, x: &[f64], h: f64) -> C64 {
        let s = self.shift(x);
        let r = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let chi = smooth_cutoff(r, self.delta);
        if chi == 0.0 {
            return C64::new(0.0, 0.0);
        }
        (C64::new(0.0, 1.0) * self.phase_at(&s) / h).exp() * self.amplitude_at(&s, h) * chi
    }

    /// Samples on a grid basis (row-major for n = 2).
    pub fn sample(&self, basis: Basis, h: f64) -> Result<Vec<C64>> {
        let Basis::FourierGrid { half_width, points, n } = basis else {
            return Err(Error::InvalidInput("quasimodes are sampled on grid bases".into()));
        };
        if n != self.dim {
            return Err(Error::InvalidInput("grid dimension differs from the quasimode".into()));
        }
        let xs = grid_points(half_width, points);
        let u: Vec<C64> = match n {
            1 => xs.iter().map(|&x| self.value(&[x], h)).collect(),
            _ => (0..points * points).map(|k| self.value(&[xs[k / points], xs[k % points]], h)).collect(),
        };
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(u)
    }

    /// `max_{s = ±ρ} |p(x⁰ + s, φ'(x⁰ + s)) − z|` from the stored Taylor polynomial (n = 1).
    pub fn eikonal_defect(&self, rho: f64) -> f64 {
        let psi: Vec<C64> = (1..self.phase.len())
            .map(|k| if k == 1 { C64::new(0.0, 0.0) } else { self.phase[k] * k as f64 })
            .collect();
        [-rho, rho]
            .iter()
            .map(|&s| {
                let mut ps = C64::new(0.0, 0.0);
                for (k, c) in psi.iter().enumerate() {
                    ps += c * s.powi(k as i32);
                }
                self.taylor
                    .iter()
                    .map(|&(a, b, c)| c * s.powi(a as i32) * ps.powi(b as i32))
                    .sum::<C64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Affine probe: the value `v` of the unknown making `f(v)` vanish, assuming `f` affine.
fn solve_affine(f: impl Fn(C64) -> C64) -> Result<C64> {
    let f0 = f(C64::new(0.0, 0.0));
    let f1 = f(C64::new(1.0, 0.0));
    let slope = f1 - f0;
    if slope.norm() == 0.0 {
        return Err(Error::JetDivision);
    }
    Ok(-f0 / slope)
}

/// WKB quasimode of order `order` at `w0` with cutoff radius `delta`.
///
/// The phase is solved through degree `2N + 2` and the amplitudes `a_{k−1}` through degree
/// `2(N − k) + 2`, so every term of the residual is `O(h^{N+1})` on the beam scale `|s| ~ √h`.
pub fn build_quasimode(p: &SymbolExpr, w0: &[f64], order: usize, delta: f64) -> Result<Quasimode> {
    let n = p.dim();
    if !(delta > 0.0) {
        return Err(Error::InvalidInput("cutoff radius must be positive".into()));
    }
    if order > 0 && n != 1 {
        return Err(Error::InvalidInput("higher-order quasimodes are one-dimensional".into()));
    }
    let hess = hessian_construct(p, w0)?;
    let z = p.eval(w0);
    if n == 2 {
        let mut phase = vec![C64::new(0.0, 0.0)];
        phase.extend(w0[2..].iter().map(|&v| C64::new(v, 0.0)));
        return Ok(Quasimode {
            dim: 2,
            base: w0.to_vec(),
            z,
            order: 0,
            phase,
            hessian: hess.matrix,
            gamma_a: hess.min_im_eig,
            amplitudes: vec![vec![C64::new(1.0, 0.0)]],
            delta,
            solve_defect: hess.constraint_residual,
            phase_positive: true,
            positive_radius: 2.0 * delta,
            taylor: Vec::new(),
        });
    }
    let big_e = 2 * order + 1;
    let big_d = 4 * order + 2;
    let smax = big_e + big_d + 1;
    let jet = p.eval_jet(w0, big_d)?;
    let mut taylor = Vec::new();
    for a in 0..=big_d as u32 {
        for b in 0..=(big_d as u32 - a) {
            let mut c = jet.coeff(&[a, b]);
            if a == 0 && b == 0 {
                c -= z;
            }
            if c.norm() > 0.0 {
                taylor.push((a, b, c));
            }
        }
    }
    let scale = taylor.iter().map(|t| t.2.norm()).fold(1e-300, f64::max);
    // eikonal: ψ through degree E
    let mut psi = vec![C64::new(0.0, 0.0); big_e + 1];
    psi[1] = hess.matrix[0][0];
    for d in 2..=big_e {
        psi[d] = solve_affine(|v| {
            let mut q = psi.clone();
            q[d] = v;
            eikonal(&taylor, &q, d)[d]
        })?;
    }
    let eik = eikonal(&taylor, &psi, big_e);
    let mut defect = eik.iter().map(|c| c.norm()).fold(0.0, f64::max) / scale;
    // transport hierarchy
    let kmax = order;
    let mut amps: Vec<Vec<C64>> = (0..order.max(1))
        .map(|j| {
            let mut a = vec![C64::new(0.0, 0.0); 2 * (order - j.min(order)) + 1];
            if j == 0 {
                a[0] = C64::new(1.0, 0.0);
            }
            a
        })
        .collect();
    if order == 0 {
        amps = vec![vec![C64::new(1.0, 0.0)]];
    }
    let op = Conjugated { taylor: &taylor, psi: &psi, kmax, smax };
    let residual = |amps: &[Vec<C64>]| -> HPoly {
        let mut f = zero(kmax, smax);
        for (j, a) in amps.iter().enumerate() {
            for (d, c) in a.iter().enumerate() {
                if j <= kmax && d <= smax {
                    f[j][d] = *c;
                }
            }
        }
        op.apply(&f)
    };
    for k in 1..=order {
        let j = k - 1;
        for d in 0..=2 * (order - k) + 1 {
            let v = solve_affine(|v| {
                let mut trial = amps.clone();
                trial[j][d + 1] = v;
                residual(&trial)[k][d]
            })?;
            amps[j][d + 1] = v;
        }
    }
    if order > 0 {
        let r = residual(&amps);
        for (k, row) in r.iter().enumerate() {
            let top = if k == 0 { big_e } else { 2 * (order - k) + 1 };
            for c in row.iter().take(top + 1) {
                defect = defect.max(c.norm() / scale);
            }
        }
    }
    if defect > 1e-8 {
        return Err(Error::Construction(format!("WKB jets left a relative defect {defect:.3e}")));
    }
    let mut phase = vec![C64::new(0.0, 0.0), C64::new(w0[1], 0.0)];
    for (k, c) in psi.iter().enumerate().skip(1) {
        phase.push(c / (k + 1) as f64);
    }
    let gamma_a = hess.min_im_eig;
    let mut qm = Quasimode {
        dim: 1,
        base: w0.to_vec(),
        z,
        order,
        phase,
        hessian: hess.matrix,
        gamma_a,
        amplitudes: amps,
        delta,
        solve_defect: defect,
        phase_positive: true,
        positive_radius: 2.0 * delta,
        taylor,
    };
    let first_bad = (0..=200usize).find(|&i| {
        let r = 2.0 * delta * i as f64 / 200.0;
        [-r, r].iter().any(|&s| qm.phase_at(&[s]).im < 0.25 * gamma_a * s * s - 1e-14)
    });
    if let Some(i) = first_bad {
        qm.phase_positive = false;
        qm.positive_radius = 2.0 * delta * i.saturating_sub(1) as f64 / 200.0;
    }
    if !qm.phase_positive {
        log::warn!("Im φ drops below γ|s|²/4 on the cutoff support; consider a smaller δ");
    }
    Ok(qm)
}
