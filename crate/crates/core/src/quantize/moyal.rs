//! Moyal product of polynomial symbols.

use num_complex::Complex;
use num_traits::Num;

use crate::symbol::poly::ring_int;
use crate::symbol::Poly;

/// `a ♯ b = Σ_k (1/k!) (h/2i)^k (∂ξ·∂y − ∂x·∂η)^k a(x,ξ) b(y,η) |_{y=x, η=ξ}`.
///
/// With this sign `x ♯ ξ − ξ ♯ x = ih`, the commutator of `X` and `P = hD`, so
/// `Weyl(a ♯ b) = Weyl(a) Weyl(b)`. The series terminates for polynomials.
/// Variables are ordered `(x₁..x_n, ξ₁..ξ_n)`.
pub fn moyal_product<R>(a: &Poly<Complex<R>>, b: &Poly<Complex<R>>, h: R) -> Poly<Complex<R>>
where
    R: Clone + Num + std::ops::Neg<Output = R>,
{
    assert_eq!(a.nvars(), b.nvars(), "symbols of different dimension");
    let nv = a.nvars();
    let n = nv / 2;
    let to_first: Vec<usize> = (0..nv).collect();
    let to_second: Vec<usize> = (0..nv).map(|v| nv + v).collect();
    let mut f = a.remap(2 * nv, &to_first).mul(&b.remap(2 * nv, &to_second));
    let two = ring_int::<R>(2);
    // h / (2i) = −ih/2
    let step = Complex::new(R::zero(), -(h / two));
    let back: Vec<usize> = (0..2 * nv).map(|v| v % nv).collect();
    let mut result = f.remap(nv, &back);
    let mut coef = Complex::new(R::one(), R::zero());
    let mut k: u64 = 0;
    loop {
        let mut next = Poly::zero(2 * nv);
        for l in 0..n {
            let (x, xi, y, eta) = (l, n + l, nv + l, nv + n + l);
            next = next.add(&f.partial(xi).partial(y)).sub(&f.partial(x).partial(eta));
        }
        if next.is_zero() {
            break;
        }
        k += 1;
        f = next;
        coef = coef * step.clone() / Complex::new(ring_int::<R>(k), R::zero());
        result = result.add(&f.remap(nv, &back).scale(coef.clone()));
    }
    result
}
