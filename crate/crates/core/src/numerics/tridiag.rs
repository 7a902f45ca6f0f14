//! Tridiagonal (Thomas) solver with zero-pivot detection.

use super::Scalar;
use crate::error::{Error, Result};

/// Solves the tridiagonal system with subdiagonal `a` (len n-1), diagonal
/// `b` (len n), superdiagonal `c` (len n-1) and right-hand side `d`.
pub fn solve_tridiagonal<S: Scalar>(a: &[S], b: &[S], c: &[S], d: &[S]) -> Result<Vec<S>> {
    let n = b.len();
    if a.len() != n - 1 || c.len() != n - 1 || d.len() != n {
        return Err(Error::Numerical("tridiagonal shape mismatch".into()));
    }
    let mut cp = vec![S::zero(); n - 1];
    let mut dp = vec![S::zero(); n];
    let mut beta = b[0];
    if beta == S::zero() {
        return Err(Error::Numerical("zero pivot in tridiagonal solve".into()));
    }
    cp[0] = c[0] / beta;
    dp[0] = d[0] / beta;
    for i in 1..n {
        beta = b[i] - a[i - 1] * cp[i - 1];
        if beta == S::zero() {
            return Err(Error::Numerical("zero pivot in tridiagonal solve".into()));
        }
        if i < n - 1 {
            cp[i] = c[i] / beta;
        }
        dp[i] = (d[i] - a[i - 1] * dp[i - 1]) / beta;
    }
    let mut x = dp;
    for i in (0..n - 1).rev() {
        let xi = x[i] - cp[i] * x[i + 1];
        x[i] = xi;
    }
    Ok(x)
}
