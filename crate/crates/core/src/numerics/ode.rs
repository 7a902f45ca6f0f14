//! Embedded Dormand–Prince Runge–Kutta 5(4) integrator for scalar ODEs,
//! with step clipping so the solution is produced exactly at the caller's
//! output nodes.

use super::Scalar;
use crate::error::{Error, Result};

/// Integrator options.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<S> {
    pub rtol: S,
    pub atol: S,
    pub h_init: S,
    pub h_max: S,
    pub max_steps: usize,
}

impl<S: Scalar> Default for OdeOptions<S> {
    fn default() -> Self {
        Self {
            rtol: S::lit(1e-10),
            atol: S::lit(1e-12),
            h_init: S::lit(1e-4),
            h_max: S::lit(10.0),
            max_steps: 2_000_000,
        }
    }
}

// Dormand–Prince RK5(4) Butcher tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// 5th-order solution weights equal the last row of A (FSAL); the embedded
// 4th-order weights are below.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates y' = f(x, y) from `nodes[0]` producing y at every node.
/// `f` may reject an iterate (e.g. a domain violation) by returning Err;
/// the step is then retried with a smaller h.
pub fn integrate_to_nodes<S: Scalar>(
    mut f: impl FnMut(S, S) -> Result<S>,
    y0: S,
    nodes: &[S],
    opt: &OdeOptions<S>,
) -> Result<Vec<S>> {
    if nodes.len() < 2 {
        return Err(Error::Numerical("need at least two output nodes".into()));
    }
    let mut out = Vec::with_capacity(nodes.len());
    out.push(y0);
    let mut x = nodes[0];
    let mut y = y0;
    let mut h = opt.h_init.min(opt.h_max);
    let mut k0 = f(x, y)?;
    let mut steps = 0usize;
    for &target in &nodes[1..] {
        while x < target {
            if steps > opt.max_steps {
                return Err(Error::Numerical(format!(
                    "ODE integrator exceeded {} steps at x = {x:?}",
                    opt.max_steps
                )));
            }
            steps += 1;
            let mut hc = h.min(target - x);
            // Attempt a step, shrinking on error estimate or domain failure.
            let mut attempt = 0;
            loop {
                attempt += 1;
                if attempt > 60 {
                    return Err(Error::Numerical(format!(
                        "ODE step size underflow near x = {x:?}"
                    )));
                }
                let mut k = [k0, S::zero(), S::zero(), S::zero(), S::zero(), S::zero(), S::zero()];
                let mut ok = true;
                for (i, row) in A.iter().enumerate() {
                    let mut acc = S::zero();
                    for (j, &aij) in row.iter().enumerate().take(i + 1) {
                        acc = acc + S::lit(aij) * k[j];
                    }
                    match f(x + S::lit(C[i]) * hc, y + hc * acc) {
                        Ok(v) => k[i + 1] = v,
                        Err(_) => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    hc = hc * S::lit(0.25);
                    continue;
                }
                // 5th-order advance (last row of A) and embedded estimate.
                let mut y5 = S::zero();
                let mut y4 = S::zero();
                for j in 0..6 {
                    y5 = y5 + S::lit(A[5][j]) * k[j];
                }
                for j in 0..7 {
                    y4 = y4 + S::lit(B4[j]) * k[j];
                }
                let y_new = y + hc * y5;
                let err = hc * (y5 - y4);
                let scale = opt.atol + opt.rtol * y.abs().max(y_new.abs());
                let e = (err / scale).abs();
                if e <= S::one() {
                    x = x + hc;
                    y = y_new;
                    k0 = k[6]; // FSAL
                    let grow = S::lit(0.9) * e.max(S::lit(1e-10)).powf(S::lit(-0.2));
                    h = (hc * grow.min(S::of(5))).min(opt.h_max);
                    break;
                } else {
                    let shrink = (S::lit(0.9) * e.powf(S::lit(-0.2))).max(S::lit(0.1));
                    hc = hc * shrink;
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let nodes: Vec<f64> = (0..=10).map(|i| 0.2 * i as f64).collect();
        let y = integrate_to_nodes(|_, y| Ok(-y), 1.0, &nodes, &OdeOptions::default()).unwrap();
        for (i, &v) in y.iter().enumerate() {
            assert!((v - (-(nodes[i])).exp()).abs() < 1e-9, "node {i}");
        }
    }

    #[test]
    fn logistic_against_closed_form() {
        let nodes: Vec<f64> = (0..=20).map(|i| 0.25 * i as f64).collect();
        let y = integrate_to_nodes(
            |_, y: f64| Ok(y * (1.0 - y)),
            0.1,
            &nodes,
            &OdeOptions::default(),
        )
        .unwrap();
        for (i, &v) in y.iter().enumerate() {
            let t = nodes[i];
            let exact = 0.1 * t.exp() / (1.0 + 0.1 * (t.exp() - 1.0));
            assert!((v - exact).abs() < 1e-8);
        }
    }

    #[test]
    fn rhs_domain_rejection_shrinks_steps() {
        // y' = -3 with a RHS that refuses y < 0; trial stages overshooting
        // below zero near the end force step rejections, which the
        // integrator must survive.
        let nodes: Vec<f64> = (0..=33).map(|i| 0.01 * i as f64).collect();
        let y = integrate_to_nodes(
            |_, y: f64| {
                if y < 0.0 {
                    Err(crate::error::Error::Domain("negative".into()))
                } else {
                    Ok(-3.0)
                }
            },
            1.0,
            &nodes,
            &OdeOptions::default(),
        )
        .unwrap();
        for (i, &v) in y.iter().enumerate() {
            assert!((v - (1.0 - 3.0 * nodes[i])).abs() < 1e-9, "node {i}");
        }
    }
}
