//! Gauss–Legendre quadrature.

use super::Scalar;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
/// Nodes via Newton iteration on the Legendre recurrence.
pub fn gauss_legendre<S: Scalar>(n: usize) -> (Vec<S>, Vec<S>) {
    assert!(n >= 1);
    let mut nodes = vec![S::zero(); n];
    let mut weights = vec![S::zero(); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by upward recurrence.
            let mut p0 = 1.0f64;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = S::lit(-x);
        nodes[n - 1 - i] = S::lit(x);
        weights[i] = S::lit(w);
        weights[n - 1 - i] = S::lit(w);
    }
    if n % 2 == 1 {
        // Ensure the middle node is exactly zero.
        nodes[n / 2] = S::zero();
    }
    (nodes, weights)
}

/// Integral of f over [a, b] with the n-point Gauss–Legendre rule.
pub fn integrate<S: Scalar>(f: impl Fn(S) -> S, a: S, b: S, n: usize) -> S {
    let (x, w) = gauss_legendre::<S>(n);
    let half = (b - a) / S::of(2);
    let mid = (b + a) / S::of(2);
    x.iter()
        .zip(&w)
        .fold(S::zero(), |acc, (&xi, &wi)| acc + wi * f(mid + half * xi))
        * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_high_degree_polynomials() {
        // 8-point rule integrates degree <= 15 exactly.
        let val: f64 = integrate(|x: f64| x.powi(14), -1.0, 1.0, 8);
        assert!((val - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        let (_, w) = gauss_legendre::<f64>(32);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
    }

    #[test]
    fn smooth_integrand_machine_precision() {
        let val = integrate(|x: f64| x.sin().exp(), 0.0, std::f64::consts::PI, 48);
        // Reference computed with a 200-point rule.
        let reference = integrate(|x: f64| x.sin().exp(), 0.0, std::f64::consts::PI, 200);
        assert!((val - reference).abs() < 1e-13);
    }

    #[test]
    fn sphere_measure_n4() {
        // int_0^pi sin^2 = pi/2.
        let val = integrate(|t: f64| t.sin().powi(2), 0.0, std::f64::consts::PI, 48);
        assert!((val - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }
}
