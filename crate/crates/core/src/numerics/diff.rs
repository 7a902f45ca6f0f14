//! Finite-difference kernels: centered differences with Richardson
//! refinement and Fornberg interpolation/differentiation weights for
//! arbitrary node placement.

use super::Scalar;

/// Centered first derivative, O(h^2).
pub fn central_d1<S: Scalar>(f: impl Fn(S) -> S, x: S, h: S) -> S {
    (f(x + h) - f(x - h)) / (S::of(2) * h)
}

/// Centered second derivative, O(h^2).
pub fn central_d2<S: Scalar>(f: impl Fn(S) -> S, x: S, h: S) -> S {
    let two = S::of(2);
    (f(x + h) - two * f(x) + f(x - h)) / (h * h)
}

/// One Richardson level over steps (h, 2h) for the first derivative: O(h^4).
pub fn richardson_d1<S: Scalar>(f: impl Fn(S) -> S + Copy, x: S, h: S) -> S {
    let four = S::of(4);
    let three = S::of(3);
    (four * central_d1(f, x, h) - central_d1(f, x, S::of(2) * h)) / three
}

/// One Richardson level over steps (h, 2h) for the second derivative: O(h^4).
pub fn richardson_d2<S: Scalar>(f: impl Fn(S) -> S + Copy, x: S, h: S) -> S {
    let four = S::of(4);
    let three = S::of(3);
    (four * central_d2(f, x, h) - central_d2(f, x, S::of(2) * h)) / three
}

/// First-derivative oracle at radius r: relative step r * 1e-4 with one
/// Richardson level.
pub fn oracle_d1<S: Scalar>(f: impl Fn(S) -> S + Copy, r: S) -> S {
    richardson_d1(f, r, r.abs().max(S::one()) * S::lit(1e-4))
}

/// Second-derivative oracle at radius r. Uses a relative step of r * 1e-3:
/// at 1e-4 the rounding floor eps/h^2 of the double-precision second
/// difference would sit near 1e-8 and mask the quantities being verified.
pub fn oracle_d2<S: Scalar>(f: impl Fn(S) -> S + Copy, r: S) -> S {
    richardson_d2(f, r, r.abs().max(S::one()) * S::lit(1e-3))
}

/// Fornberg weights: for nodes `x` and evaluation point `x0`, returns
/// `w[m][j]` so that the m-th derivative at `x0` is `sum_j w[m][j] f(x_j)`,
/// for m = 0..=max_order.
pub fn fornberg_weights<S: Scalar>(x: &[S], x0: S, max_order: usize) -> Vec<Vec<S>> {
    let n = x.len();
    assert!(n > max_order, "need more nodes than the derivative order");
    let mut c = vec![vec![S::zero(); n]; max_order + 1];
    let mut c1 = S::one();
    let mut c4 = x[0] - x0;
    c[0][0] = S::one();
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = S::one();
        let c5 = c4;
        c4 = x[i] - x0;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 = c2 * c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (S::of(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - S::of(k) * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}
