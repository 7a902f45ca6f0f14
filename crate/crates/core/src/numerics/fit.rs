//! Least-squares fits and Richardson extrapolation of flux series.

use super::Scalar;
use crate::error::{Error, Result};

/// Ordinary least squares for y = a + b x. Returns (a, b).
pub fn linear_fit<S: Scalar>(x: &[S], y: &[S]) -> Result<(S, S)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Fit("need at least two samples".into()));
    }
    let n = S::of(x.len());
    let sx = x.iter().fold(S::zero(), |a, &v| a + v);
    let sy = y.iter().fold(S::zero(), |a, &v| a + v);
    let mx = sx / n;
    let my = sy / n;
    let mut sxx = S::zero();
    let mut sxy = S::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        sxx = sxx + (xi - mx) * (xi - mx);
        sxy = sxy + (xi - mx) * (yi - my);
    }
    if sxx == S::zero() {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

/// Two-parameter fit y = a + b * w(x) for a caller-supplied basis function.
pub fn fit_const_plus<S: Scalar>(x: &[S], y: &[S], w: impl Fn(S) -> S) -> Result<(S, S)> {
    let wx: Vec<S> = x.iter().map(|&v| w(v)).collect();
    linear_fit(&wx, y)
}

/// Slope of log|v| against log r. Errors if the series changes sign or
/// vanishes inside the window.
pub fn loglog_slope<S: Scalar>(r: &[S], v: &[S]) -> Result<S> {
    if r.len() != v.len() || r.len() < 2 {
        return Err(Error::Fit("need at least two samples".into()));
    }
    let first_sign = v[0].signum();
    if v.iter().any(|&x| x == S::zero() || x.signum() != first_sign) {
        return Err(Error::Fit("sign change or zero inside fit window".into()));
    }
    let lx: Vec<S> = r.iter().map(|&x| x.ln()).collect();
    let ly: Vec<S> = v.iter().map(|&x| x.abs().ln()).collect();
    linear_fit(&lx, &ly).map(|(_, b)| b)
}

/// Eliminates the leading R^{-order} error term from a series of
/// (R, value) pairs, R increasing. Returns (limit, residual) where the
/// residual is the change incurred by the last elimination. A warning flag
/// is returned when the pre-elimination errors are not monotone.
pub fn richardson_extrapolate<S: Scalar>(pairs: &[(S, S)], order: S) -> Result<(S, S, bool)> {
    if pairs.len() < 3 {
        return Err(Error::Numerical("need at least 3 extrapolation pairs".into()));
    }
    for w in pairs.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Numerical("extrapolation radii must increase".into()));
        }
    }
    // One elimination pass: v(R) = L + c R^{-p}  =>  L from successive pairs.
    let mut eliminated = Vec::with_capacity(pairs.len() - 1);
    for w in pairs.windows(2) {
        let (r0, v0) = w[0];
        let (r1, v1) = w[1];
        let p0 = r0.powf(order);
        let p1 = r1.powf(order);
        eliminated.push((v1 * p1 - v0 * p0) / (p1 - p0));
    }
    let limit = *eliminated.last().unwrap();
    let residual = if eliminated.len() >= 2 {
        (limit - eliminated[eliminated.len() - 2]).abs()
    } else {
        S::zero()
    };
    // Monotonicity of the raw convergence toward the extrapolated limit.
    let mut monotone = true;
    let errs: Vec<S> = pairs.iter().map(|&(_, v)| (v - limit).abs()).collect();
    for w in errs.windows(2) {
        if w[1] > w[0] + residual + S::lit(1e-14) {
            monotone = false;
        }
    }
    Ok((limit, residual, monotone))
}
