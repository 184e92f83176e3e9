//! Matrix exponential by scaling and squaring with a [13/13] Padé approximant.

use faer::linalg::solvers::Solve;
use num_complex::Complex64 as C64;

use super::{identity, scale, CMat};

const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn norm1(a: &CMat) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(A)`.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let nrm = norm1(a);
    let s = if nrm > THETA13 { (nrm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = scale(a, C64::new(0.5f64.powi(s), 0.0));
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| C64::new(B13[k], 0.0);
    let lin = |c: [usize; 4]| {
        scale(&a6, b(c[0])) + scale(&a4, b(c[1])) + scale(&a2, b(c[2])) + scale(&id, b(c[3]))
    };
    let inner = |c: [usize; 3]| scale(&a6, b(c[0])) + scale(&a4, b(c[1])) + scale(&a2, b(c[2]));
    let u_inner = &a6 * inner([13, 11, 9]) + lin([7, 5, 3, 1]);
    let u = &a * &u_inner;
    let v = &a6 * inner([12, 10, 8]) + lin([6, 4, 2, 0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_nilpotent() {
        let d = CMat::from_fn(3, 3, |i, j| if i == j { C64::new(i as f64 * 3.0 - 2.0, 0.5) } else { C64::new(0.0, 0.0) });
        let e = expm(&d);
        for i in 0..3 {
            let want = d[(i, i)].exp();
            assert!((e[(i, i)] - want).norm() < 1e-13 * want.norm());
        }
        let nil = CMat::from_fn(3, 3, |i, j| if j == i + 1 { C64::new(2.0, 0.0) } else { C64::new(0.0, 0.0) });
        let e = expm(&nil);
        assert!((e[(0, 2)] - C64::new(2.0, 0.0)).norm() < 1e-14);
        assert!((e[(0, 1)] - C64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn large_norm_uses_squaring() {
        let rot = CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => C64::new(-20.0, 0.0),
            (1, 0) => C64::new(20.0, 0.0),
            _ => C64::new(0.0, 0.0),
        });
        let e = expm(&rot);
        assert!((e[(0, 0)].re - 20f64.cos()).abs() < 1e-12);
        assert!((e[(1, 0)].re - 20f64.sin()).abs() < 1e-12);
    }
}
