//! Complex Schur factorization `A = Z T Z*` by Householder reduction to
//! Hessenberg form followed by single-shift implicit QR with Wilkinson shifts.

use num_complex::Complex64 as C64;

use super::CMat;
use crate::error::{Error, Result};

/// Row-major complex matrix storage used by the factorization.
#[derive(Debug, Clone)]
pub struct Schur {
    n: usize,
    /// Upper triangular factor, row-major.
    t: Vec<C64>,
    /// Unitary factor, row-major.
    z: Vec<C64>,
}

/// Complex Givens rotation `(c, s, r)` with `c` real such that
/// `[c s; −s̄ c] [f; g] = [r; 0]`.
pub fn givens(f: C64, g: C64) -> (f64, C64, C64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, C64::new(0.0, 0.0), f);
    }
    let fn_ = f.norm();
    if fn_ == 0.0 {
        return (0.0, g.conj() / gn, C64::new(gn, 0.0));
    }
    let nu = fn_.hypot(gn);
    let phase = f / fn_;
    (fn_ / nu, phase * g.conj() / nu, phase * nu)
}

impl Schur {
    pub fn new(a: &CMat) -> Result<Schur> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::InvalidInput("Schur factorization needs a square matrix".into()));
        }
        let mut h: Vec<C64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
        if h.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut z: Vec<C64> = (0..n * n)
            .map(|k| if k / n == k % n { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
            .collect();
        hessenberg(n, &mut h, &mut z);
        qr_iterate(n, &mut h, &mut z)?;
        for i in 0..n {
            for j in 0..i {
                h[i * n + j] = C64::new(0.0, 0.0);
            }
        }
        Ok(Schur { n, t: h, z })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self, i: usize, j: usize) -> C64 {
        self.t[i * self.n + j]
    }

    pub fn t_rows(&self) -> &[C64] {
        &self.t
    }

    pub fn t_matrix(&self) -> CMat {
        CMat::from_fn(self.n, self.n, |i, j| self.t[i * self.n + j])
    }

    pub fn z_matrix(&self) -> CMat {
        CMat::from_fn(self.n, self.n, |i, j| self.z[i * self.n + j])
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.n).map(|i| self.t[i * self.n + i]).collect()
    }

    /// Solves `(T − z) y = b` in place (back substitution).
    pub fn solve_upper(&self, z: C64, b: &mut [C64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let row = &self.t[i * n..(i + 1) * n];
            let mut s = b[i];
            for j in i + 1..n {
                s -= row[j] * b[j];
            }
            b[i] = s / (row[i] - z);
        }
    }

    /// Solves `(T − z)* y = b` in place (forward substitution, row-oriented updates).
    pub fn solve_upper_adjoint(&self, z: C64, b: &mut [C64]) {
        let n = self.n;
        for j in 0..n {
            let row = &self.t[j * n..(j + 1) * n];
            let xj = b[j] / (row[j] - z).conj();
            b[j] = xj;
            for i in j + 1..n {
                b[i] -= row[i].conj() * xj;
            }
        }
    }
}

fn hessenberg(n: usize, h: &mut [C64], z: &mut [C64]) {
    if n < 3 {
        return;
    }
    let mut v = vec![C64::new(0.0, 0.0); n];
    for k in 0..n - 2 {
        let m = n - k - 1;
        let mut alpha = 0.0;
        for i in 0..m {
            v[i] = h[(k + 1 + i) * n + k];
            alpha += v[i].norm_sqr();
        }
        let alpha = alpha.sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == 0.0 { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        v[0] = x0 + phase * alpha;
        let vn2: f64 = v[..m].iter().map(|c| c.norm_sqr()).sum();
        if vn2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vn2;
        // left: rows k+1.., columns k..
        for j in k..n {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..m {
                s += v[i].conj() * h[(k + 1 + i) * n + j];
            }
            s *= beta;
            for i in 0..m {
                h[(k + 1 + i) * n + j] -= v[i] * s;
            }
        }
        // right: all rows, columns k+1..
        for r in 0..n {
            let row = &mut h[r * n..(r + 1) * n];
            let mut s = C64::new(0.0, 0.0);
            for i in 0..m {
                s += row[k + 1 + i] * v[i];
            }
            s *= beta;
            for i in 0..m {
                row[k + 1 + i] -= s * v[i].conj();
            }
            let zrow = &mut z[r * n..(r + 1) * n];
            let mut s = C64::new(0.0, 0.0);
            for i in 0..m {
                s += zrow[k + 1 + i] * v[i];
            }
            s *= beta;
            for i in 0..m {
                zrow[k + 1 + i] -= s * v[i].conj();
            }
        }
        for i in k + 2..n {
            h[i * n + k] = C64::new(0.0, 0.0);
        }
    }
}

fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    // eigenvalue of [[a, b], [c, d]] closest to d
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l1 = tr * 0.5 + disc;
    let l2 = tr * 0.5 - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_iterate(n: usize, h: &mut [C64], z: &mut [C64]) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    let cap = 100 * n.max(10);
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h[l * n + l - 1].norm();
            let scale = h[l * n + l].norm() + h[(l - 1) * n + l - 1].norm();
            if s <= eps * scale || s < f64::MIN_POSITIVE {
                h[l * n + l - 1] = C64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > cap {
            return Err(Error::Convergence("Schur QR iteration did not converge".into()));
        }
        let mu = if its % 11 == 10 {
            // exceptional shift
            h[hi * n + hi] + C64::new(h[hi * n + hi - 1].norm() * 0.75, 0.0)
        } else {
            wilkinson(
                h[(hi - 1) * n + hi - 1],
                h[(hi - 1) * n + hi],
                h[hi * n + hi - 1],
                h[hi * n + hi],
            )
        };
        let mut x = h[l * n + l] - mu;
        let mut y = h[(l + 1) * n + l];
        for k in l..hi {
            if k > l {
                x = h[k * n + k - 1];
                y = h[(k + 1) * n + k - 1];
            }
            let (c, s, _) = givens(x, y);
            let col0 = if k > l { k - 1 } else { l };
            let (top, bottom) = h.split_at_mut((k + 1) * n);
            let rk = &mut top[k * n..];
            let rk1 = &mut bottom[..n];
            for j in col0..n {
                let a = rk[j];
                let b = rk1[j];
                rk[j] = a * c + s * b;
                rk1[j] = -s.conj() * a + b * c;
            }
            let rmax = (k + 2).min(hi);
            for r in 0..=rmax {
                let a = h[r * n + k];
                let b = h[r * n + k + 1];
                h[r * n + k] = a * c + b * s.conj();
                h[r * n + k + 1] = -a * s + b * c;
            }
            for r in 0..n {
                let a = z[r * n + k];
                let b = z[r * n + k + 1];
                z[r * n + k] = a * c + b * s.conj();
                z[r * n + k + 1] = -a * s + b * c;
            }
            if k > l {
                h[(k + 1) * n + k - 1] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{adjoint, seeded_vector};

    fn random(n: usize, seed: u64) -> CMat {
        let v = seeded_vector(n * n, seed);
        CMat::from_fn(n, n, |i, j| v[i * n + j])
    }

    #[test]
    fn factorization_reconstructs() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (30, 4), (64, 5)] {
            let a = random(n, seed);
            let s = Schur::new(&a).unwrap();
            let t = s.t_matrix();
            let z = s.z_matrix();
            let rec = &z * &t * adjoint(&z);
            let err = crate::linalg::max_abs(&(&rec - &a));
            assert!(err < 1e-12 * (n as f64).max(1.0), "n={n} err={err}");
            let zz = &adjoint(&z) * &z;
            let id = crate::linalg::identity(n);
            assert!(crate::linalg::max_abs(&(&zz - &id)) < 1e-12 * n as f64);
        }
    }

    #[test]
    fn triangular_solves() {
        let a = random(20, 9);
        let s = Schur::new(&a).unwrap();
        let zc = C64::new(0.3, -0.2);
        let b = seeded_vector(20, 10);
        let mut y = b.clone();
        s.solve_upper(zc, &mut y);
        let t = crate::linalg::shifted(&s.t_matrix(), zc);
        let r = crate::linalg::matvec(&t, &y);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).norm() < 1e-10);
        }
        let mut y = b.clone();
        s.solve_upper_adjoint(zc, &mut y);
        let r = crate::linalg::matvec(&adjoint(&t), &y);
        for (u, v) in r.iter().zip(&b) {
            assert!((u - v).norm() < 1e-10);
        }
    }
}
