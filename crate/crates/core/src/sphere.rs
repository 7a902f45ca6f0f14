//! The zonal tail equation on the round sphere S^{n-1}:
//!   Δ^Ω α - (n-3) α = M := ((n-2)/2) tr_Ω(m) + tr_Ω(p).
//!
//! For zonal functions the Laplacian reduces to the Legendre-type operator
//! sin^{2-n}θ ∂_θ( sin^{n-2}θ ∂_θ · ), discretized with ghost-point pole
//! regularity. Constant sources are solved algebraically. The additive
//! gauge constant ψ is fixed to 0 (vertical-translation invariance).

use crate::error::{Error, Result};
use crate::model::{ModelData, ZonalFunction};
use crate::numerics::tridiag;
use crate::Real;

/// Default zonal resolution.
pub const ZONAL_POINTS: usize = 2048;

/// Right-hand side M(θ) = ((n-2)/2) tr_Ω(m)(θ) + tr_Ω(p)(θ).
pub fn trace_source(model: &ModelData) -> ZonalFunction {
    let c = (model.nf() - 2.0) / 2.0;
    model
        .m_trace
        .axpby(c, &model.p_trace, 1.0)
        .expect("trace combination is well formed")
}

/// Solves Δ^Ω α - (n-3) α = M on S^{n-1} for the zonal source of `model`.
pub fn solve_alpha(model: &ModelData) -> Result<ZonalFunction> {
    let m = trace_source(model);
    let n = model.n();
    match m {
        ZonalFunction::Constant(v) => Ok(ZonalFunction::Constant(-v / (n as Real - 3.0))),
        _ => solve_zonal(&m, n, ZONAL_POINTS),
    }
}

/// Zonal finite-difference solve on a uniform θ grid with `points` interior
/// spacing intervals (points+1 nodes including both poles).
pub fn solve_zonal(source: &ZonalFunction, n: usize, points: usize) -> Result<ZonalFunction> {
    if !(4..=7).contains(&n) {
        return Err(Error::Config(format!("dimension n = {n} out of supported range 4..=7")));
    }
    if points < 16 {
        return Err(Error::Config("zonal solve needs at least 16 intervals".into()));
    }
    let pi = std::f64::consts::PI;
    let h = pi / points as Real;
    let nn = points + 1;
    let nf = n as Real;
    let lam = nf - 3.0;
    let theta: Vec<Real> = (0..nn).map(|i| i as Real * h).collect();
    let rhs: Vec<Real> = theta.iter().map(|&t| source.at(t)).collect();

    let mut sub = vec![0.0; nn - 1];
    let mut diag = vec![0.0; nn];
    let mut sup = vec![0.0; nn - 1];
    // Poles: zonal regularity gives Δα(pole) = (n-1) α''(pole); with the
    // even ghost reflection α_{-1} = α_1 this is 2(n-1)(α_1 - α_0)/h².
    let pole = 2.0 * (nf - 1.0) / (h * h);
    diag[0] = -pole - lam;
    sup[0] = pole;
    diag[nn - 1] = -pole - lam;
    sub[nn - 2] = pole;
    for i in 1..nn - 1 {
        let cot = theta[i].cos() / theta[i].sin();
        let c2 = 1.0 / (h * h);
        let c1 = (nf - 2.0) * cot / (2.0 * h);
        sub[i - 1] = c2 - c1;
        diag[i] = -2.0 * c2 - lam;
        sup[i] = c2 + c1;
    }
    let alpha = tridiag::solve_tridiagonal(&sub, &diag, &sup, &rhs)?;

    // Residual check of the discrete equation (consistency of assembly).
    let mut res: Real = 0.0;
    for i in 1..nn - 1 {
        let cot = theta[i].cos() / theta[i].sin();
        let lap = (alpha[i + 1] - 2.0 * alpha[i] + alpha[i - 1]) / (h * h)
            + (nf - 2.0) * cot * (alpha[i + 1] - alpha[i - 1]) / (2.0 * h);
        res = res.max((lap - lam * alpha[i] - rhs[i]).abs());
    }
    if res > 1e-8 {
        return Err(Error::Numerical(format!("zonal solve residual {res} too large")));
    }
    ZonalFunction::sampled(theta, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_source_constants() {
        let m = ModelData::spherical(4, 1.0, 0.0).unwrap();
        assert!((trace_source(&m).at(0.5) - 3.0).abs() < 1e-14);
        let m = ModelData::spherical(5, 1.0, 0.0).unwrap();
        assert!((trace_source(&m).at(0.5) - 6.0).abs() < 1e-14);
        let m = ModelData::hyperbolic(6).unwrap();
        assert_eq!(trace_source(&m).at(1.0), 0.0);
    }

    #[test]
    fn constant_source_solved_algebraically() {
        let m = ModelData::spherical(4, 1.0, 0.0).unwrap();
        let a = solve_alpha(&m).unwrap();
        assert!((a.at(1.0) + 3.0).abs() < 1e-14);
        let m = ModelData::hyperbolic(5).unwrap();
        assert_eq!(solve_alpha(&m).unwrap().at(0.2), 0.0);
    }

    #[test]
    fn first_harmonic_eigenvalue_identity() {
        // n=4: M = c cosθ is the l=1 zonal harmonic on S³ with Laplacian
        // eigenvalue -l(l+n-2) = -3, so α = c cosθ/(-3-(n-3)) = -c cosθ/4.
        let c = 2.0;
        let pts = 1024;
        let th: Vec<Real> =
            (0..=pts).map(|i| std::f64::consts::PI * i as Real / pts as Real).collect();
        let vals: Vec<Real> = th.iter().map(|t| c * t.cos()).collect();
        let src = ZonalFunction::sampled(th, vals).unwrap();
        let a = solve_zonal(&src, 4, 2048).unwrap();
        for &t in &[0.0, 0.7, 1.3, 2.2, std::f64::consts::PI] {
            assert!(
                (a.at(t) + c * t.cos() / 4.0).abs() < 1e-5,
                "θ={t}: {} vs {}",
                a.at(t),
                -c * t.cos() / 4.0
            );
        }
    }

    #[test]
    fn matches_gegenbauer_spectral_oracle() {
        // Dense spectral oracle: expand the source in zonal harmonics
        // (Gegenbauer C_l^λ(cosθ), λ = (n-2)/2), divide by the eigenvalues
        // -l(l+n-2)-(n-3), and resum. n = 5 here.
        let n = 5usize;
        let lam_g = (n as Real - 2.0) / 2.0;
        let src_fn = |t: Real| 0.3 + 0.5 * t.cos() - 0.2 * (2.0 * t).cos();
        let pts = 1024;
        let th: Vec<Real> =
            (0..=pts).map(|i| std::f64::consts::PI * i as Real / pts as Real).collect();
        let vals: Vec<Real> = th.iter().map(|&t| src_fn(t)).collect();
        let src = ZonalFunction::sampled(th.clone(), vals).unwrap();
        let sol = solve_zonal(&src, n, 2048).unwrap();

        // Gegenbauer recurrence: l C_l = 2(l+λ-1) x C_{l-1} - (l+2λ-2) C_{l-2}.
        let gegen = |l: usize, x: Real| -> Real {
            let mut c0 = 1.0;
            let mut c1 = 2.0 * lam_g * x;
            if l == 0 {
                return c0;
            }
            if l == 1 {
                return c1;
            }
            for k in 2..=l {
                let kf = k as Real;
                let c2 = (2.0 * (kf + lam_g - 1.0) * x * c1 - (kf + 2.0 * lam_g - 2.0) * c0) / kf;
                c0 = c1;
                c1 = c2;
            }
            c1
        };
        // Project with the sin^{n-2} measure via quadrature.
        use crate::numerics::quad::integrate;
        let pi = std::f64::consts::PI;
        let p = (n - 2) as i32;
        let lmax = 32;
        let mut recon = vec![0.0; th.len()];
        for l in 0..=lmax {
            let norm = integrate(|t: Real| gegen(l, t.cos()).powi(2) * t.sin().powi(p), 0.0, pi, 128);
            let coef =
                integrate(|t: Real| src_fn(t) * gegen(l, t.cos()) * t.sin().powi(p), 0.0, pi, 128)
                    / norm;
            let lf = l as Real;
            let eig = -lf * (lf + n as Real - 2.0) - (n as Real - 3.0);
            for (i, &t) in th.iter().enumerate() {
                recon[i] += coef / eig * gegen(l, t.cos());
            }
        }
        let mut err: Real = 0.0;
        for (i, &t) in th.iter().enumerate() {
            err = err.max((sol.at(t) - recon[i]).abs());
        }
        assert!(err < 1e-6, "zonal vs spectral max error {err}");
    }

    #[test]
    fn solver_is_deterministic() {
        let m = {
            let pts = 512;
            let th: Vec<Real> =
                (0..=pts).map(|i| std::f64::consts::PI * i as Real / pts as Real).collect();
            let vals: Vec<Real> = th.iter().map(|t| 1.0 + 0.4 * t.cos()).collect();
            ZonalFunction::sampled(th, vals).unwrap()
        };
        let a = solve_zonal(&m, 4, 1024).unwrap();
        let b = solve_zonal(&m, 4, 1024).unwrap();
        for &t in &[0.1, 1.0, 2.0, 3.0] {
            assert!((a.at(t) - b.at(t)).abs() < 1e-12);
        }
    }
}
