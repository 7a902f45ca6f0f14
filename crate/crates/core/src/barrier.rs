//! Barrier ODE systems: the sub/supersolution right-hand sides J_±, the
//! slope-variable profiles k_±, and the reconstructed barrier functions
//! f_± = φ_± + ᾱ r^{-(n-3)}.
//!
//! In the slope variable k (with φ' = k/√((1-k²)(1+r²))) the two systems are
//!   J_±(k) = k' + (n-1)/r (k - k̄) - (1-k²)/√(1+r²) ± S(k, r),
//! where k̄ = r/√(1+r²) is the exact hyperboloid orbit and S ≥ 0 collects
//! the constant-weighted correction terms (constants C₁..C₄).

use crate::error::{Error, Result};
use crate::geometry;
use crate::grid::{InnerMode, RadialField, RadialGrid};
use crate::model::{ModelData, ZonalFunction};
use crate::numerics::{fit, ode, quad};
use crate::Real;

/// Which barrier system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierSign {
    /// Supersolution system J_+ (profile anchored at k = -1).
    Plus,
    /// Subsolution system J_- (profile anchored at k = +1).
    Minus,
}

/// Constants of the barrier systems plus the anchor radius.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BarrierConstants {
    pub c1: Real,
    pub c2: Real,
    pub c3: Real,
    pub c4: Real,
    /// Anchor radius r0: smallest radius where both sign conditions hold
    /// with 10% margin.
    pub r0: Real,
    /// Decay slack ε absorbed into fit tolerances.
    pub epsilon: Real,
}

impl BarrierConstants {
    /// Explicit constants; the anchor radius is searched for.
    pub fn with_constants(c1: Real, c2: Real, c3: Real, c4: Real, n: usize) -> Result<Self> {
        if c1 < 0.0 || c2 < 0.0 || c3 < 0.0 || c4 < 0.0 {
            return Err(Error::Config("barrier constants must be nonnegative".into()));
        }
        let r0 = search_anchor(c1, c2, c3, c4, n)?;
        Ok(Self { c1, c2, c3, c4, r0, epsilon: 0.1 })
    }

    /// Constructive defaults:
    /// C₁ = 2 max(sup|α|, sup|dα|),  C₂ = 2 sup|((n-2)/2) tr m + tr p|,
    /// C₃ = n sup|tr m|,  C₄ = 2 (1 + sup|α| + sup|tr m| + sup|tr p|)².
    pub fn defaults_for(model: &ModelData, alpha: &ZonalFunction) -> Result<Self> {
        let n = model.n();
        let sup_alpha = alpha.sup_abs();
        let sup_dalpha = alpha.sup_abs_deriv();
        let sup_m = model.m_trace.sup_abs();
        let sup_p = model.p_trace.sup_abs();
        let sup_src = {
            let c = (model.nf() - 2.0) / 2.0;
            // For constants this is exact; for zonal traces the sups bound it.
            c * sup_m + sup_p
        };
        // The extra 1.5 absorbs the quartic-expansion remainder at small
        // radius, which otherwise breaks the lower bound near r0 for n = 7.
        let safety = 3.0;
        let c1 = safety * sup_alpha.max(sup_dalpha);
        let c2 = safety * sup_src;
        let c3 = safety / 2.0 * model.nf() * sup_m;
        let c4 = safety * (1.0 + sup_alpha + sup_m + sup_p).powi(2);
        let r0 = search_anchor(c1, c2, c3, c4, n)?;
        Ok(Self { c1, c2, c3, c4, r0, epsilon: 0.1 })
    }

    /// Same constants scaled by `factor` (anchor radius re-searched).
    pub fn scaled(&self, factor: Real, n: usize) -> Result<Self> {
        Self::with_constants(
            self.c1 * factor,
            self.c2 * factor,
            self.c3 * factor,
            self.c4 * factor,
            n,
        )
    }
}

/// The hyperboloid orbit k̄ = r/√(1+r²).
pub fn orbit_k(r: Real) -> Real {
    r / (1.0 + r * r).sqrt()
}

fn orbit_k_prime(r: Real) -> Real {
    (1.0 + r * r).powf(-1.5)
}

/// The nonnegative correction sum S(k, r) of the barrier systems, with
/// 1 - k² supplied separately so near-anchor cancellation stays exact.
fn correction_sum(k: Real, omk2: Real, r: Real, c: &BarrierConstants, n: usize) -> Real {
    let nf = n as Real;
    let omk2 = omk2.max(0.0);
    let s = omk2.sqrt();
    let w = (1.0 + r * r).sqrt();
    let w2 = 1.0 + r * r;
    let k2 = k * k;
    let rp = |p: i32| r.powi(p);

    let t1 = omk2 * (w2 / r) * (nf - 3.0) + 1.0 / r - (nf - 1.0) * w2 / r
        - 2.0 * (nf - 1.0) * (w2 / r) * k2
        + w * k * omk2
        + 3.0 * (nf - 1.0) * w * k;
    let t2 = -2.0 * (nf - 1.0) * k * r * r / w2 + (w / r) * (nf - 1.0) * k
        - omk2 * 0.5 * (1.0 + 3.0 * k2)
        - (nf - 1.0) * 1.5 * (1.0 + k2);
    let t3 = (nf - 1.0) * w / r - (k / 2.0) * (3.0 + 5.0 * k2) - (k / 2.0) * (3.0 + k2);
    let t4 = omk2 * 0.375 * (-1.0 + 2.0 * k2 + k2 * k2)
        + (nf - 1.0) * 0.375 * (-1.0 + 2.0 * k2 + k2 * k2);

    let e = n as i32;
    (s / w) * (c.c1 / rp(e - 2)) * t1.abs()
        + c.c1.powi(2) / rp(2 * (e - 2)) * w * omk2 * t2.abs()
        + c.c1.powi(3) / rp(3 * (e - 2)) * w2 * omk2 * s * t3.abs()
        + c.c1.powi(4) / rp(4 * (e - 2)) * omk2 * omk2 * w2 * w * t4.abs()
        + c.c2 * (s / rp(e) - 1.0 / rp(e + 1)).abs()
        + (c.c3 / rp(e + 1)) * (1.0 - k).abs()
        + c.c4 / rp(e + 2)
}

/// Forcing term F of J_± with the k' term omitted: J_± = k' + F.
pub fn barrier_rhs(
    sign: BarrierSign,
    k: Real,
    r: Real,
    c: &BarrierConstants,
    n: usize,
) -> Result<Real> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("barrier_rhs requires r > 0, got {r}")));
    }
    if k.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("barrier_rhs requires |k| <= 1, got {k}")));
    }
    let k = k.clamp(-1.0, 1.0);
    let omk2 = 1.0 - k * k;
    let lead = (n as Real - 1.0) / r * (k - orbit_k(r)) - omk2 / (1.0 + r * r).sqrt();
    let s = correction_sum(k, omk2, r, c, n);
    Ok(match sign {
        BarrierSign::Plus => lead + s,
        BarrierSign::Minus => lead - s,
    })
}

/// Searches the smallest anchor radius where J_+(-1) < 0 and J_-(+1) > 0,
/// each with 10% margin of the leading good term.
fn search_anchor(c1: Real, c2: Real, c3: Real, c4: Real, n: usize) -> Result<Real> {
    let c = BarrierConstants { c1, c2, c3, c4, r0: 1.0, epsilon: 0.1 };
    let nf = n as Real;
    let ok = |r: Real| -> bool {
        let kb = orbit_k(r);
        // J_+(-1) < 0: correction below 90% of (n-1)(1+k̄)/r.
        let plus = correction_sum(-1.0, 0.0, r, &c, n) <= 0.9 * (nf - 1.0) * (1.0 + kb) / r;
        // J_-(+1) > 0: correction below 90% of (n-1)(1-k̄)/r.
        let minus = correction_sum(1.0, 0.0, r, &c, n) <= 0.9 * (nf - 1.0) * (1.0 - kb) / r;
        plus && minus
    };
    let mut r = 0.5;
    while r <= 1e7 {
        if ok(r) {
            return Ok(r.max(1.0));
        }
        r *= 1.01;
    }
    Err(Error::BarrierFailure {
        radius: 1e7,
        message: "no anchor radius satisfies the sign conditions".into(),
    })
}

/// A barrier slope profile: k itself and the deviation d = k - k̄ (carried
/// as the ODE state so the r^{-(n+1)} tail stays above rounding noise).
#[derive(Debug, Clone)]
pub struct KProfile {
    pub sign: BarrierSign,
    pub k: RadialField,
    pub deviation: RadialField,
}

/// Integrates J_±(k) = 0 from k(r0) = ∓1 out to r_max on a log-spaced mesh.
pub fn integrate_k(
    sign: BarrierSign,
    c: &BarrierConstants,
    n: usize,
    r_max: Real,
) -> Result<KProfile> {
    integrate_k_from(sign, c, n, r_max, match sign {
        BarrierSign::Plus => -1.0,
        BarrierSign::Minus => 1.0,
    })
}

/// Same as [`integrate_k`] with an explicit initial slope (used by the
/// exact-orbit tests).
pub fn integrate_k_from(
    sign: BarrierSign,
    c: &BarrierConstants,
    n: usize,
    r_max: Real,
    k0: Real,
) -> Result<KProfile> {
    if r_max <= c.r0 {
        return Err(Error::Config(format!("r_max = {r_max} must exceed r0 = {}", c.r0)));
    }
    let cells = 1600;
    let grid = RadialGrid::log_spaced(c.r0, r_max, cells, InnerMode::Anchored)?;
    let nf = n as Real;
    let d0 = k0 - orbit_k(c.r0);
    // d' = -(n-1)d/r - (2 k̄ d + d²)/√(1+r²) ∓ S(k̄+d, r); the hyperboloid
    // part of the leading terms cancels symbolically.
    let rhs = |r: Real, d: Real| -> Result<Real> {
        let kb = orbit_k(r);
        let k = kb + d;
        let omk2 = 1.0 / (1.0 + r * r) - 2.0 * kb * d - d * d;
        if omk2 < -1e-13 || k.abs() > 1.0 + 1e-13 {
            return Err(Error::Domain("slope left [-1, 1]".into()));
        }
        let s = correction_sum(k, omk2, r, c, n);
        let base = -(nf - 1.0) * d / r - (2.0 * kb * d + d * d) / (1.0 + r * r).sqrt();
        Ok(match sign {
            BarrierSign::Plus => base - s,
            BarrierSign::Minus => base + s,
        })
    };
    let opt = ode::OdeOptions { rtol: 1e-10, atol: 1e-12, h_init: 1e-6, h_max: r_max, max_steps: 5_000_000 };
    let dev = ode::integrate_to_nodes(rhs, d0, grid.nodes(), &opt).map_err(|e| match e {
        Error::Domain(_) | Error::Numerical(_) => Error::BarrierFailure {
            radius: c.r0,
            message: format!("slope integration failed ({e}); anchor radius too small"),
        },
        other => other,
    })?;
    // Strict interior bound |k| < 1 (the anchor node itself sits at ∓1).
    let mut kv = Vec::with_capacity(dev.len());
    let mut kp = Vec::with_capacity(dev.len());
    for (i, (&r, &d)) in grid.nodes().iter().zip(&dev).enumerate() {
        let k = orbit_k(r) + d;
        if i > 0 && k.abs() >= 1.0 {
            return Err(Error::BarrierFailure {
                radius: r,
                message: format!("|k| reached {k} in the interior"),
            });
        }
        kv.push(k);
        kp.push(orbit_k_prime(r) + rhs(r, d).unwrap_or(0.0));
    }
    let dp: Vec<Real> = grid
        .nodes()
        .iter()
        .zip(&dev)
        .map(|(&r, &d)| rhs(r, d).unwrap_or(0.0))
        .collect();
    let k = RadialField::from_values_with_d1(grid.clone(), kv, kp)?;
    let deviation = RadialField::from_values_with_d1(grid, dev, dp)?;
    Ok(KProfile { sign, k, deviation })
}

/// Reconstructs φ (and f = φ + ᾱ r^{-(n-3)}) from a slope profile:
/// φ' = k/√((1-k²)(1+r²)), integrated inward from the asymptotic
/// normalization φ(r_max) = √(1+r_max²). The inverse-square-root endpoint
/// at r0 is handled with the substitution u = √(r - r0).
pub fn reconstruct_f(
    profile: &KProfile,
    alpha_mean: Real,
    n: usize,
) -> Result<(RadialField, RadialField, Real)> {
    let grid = profile.k.grid().clone();
    let nodes = grid.nodes();
    let r0 = nodes[0];
    let nn = nodes.len();
    // Evaluate through the deviation d = k - k̄: 1 - k² = 1/(1+r²) - 2k̄d - d²
    // avoids the (1+r²)-fold error amplification of interpolating k directly.
    let phi_prime = |r: Real| -> Real {
        let d = profile.deviation.value_at(r);
        let kb = orbit_k(r);
        let k = (kb + d).clamp(-1.0, 1.0);
        let omk2 = (1.0 / (1.0 + r * r) - 2.0 * kb * d - d * d).max(0.0);
        if omk2 == 0.0 {
            return 0.0; // only reachable exactly at the anchor node
        }
        k / (omk2 * (1.0 + r * r)).sqrt()
    };
    // Interval integrals of φ'.
    let mut seg = vec![0.0; nn - 1];
    let near = r0 + 0.25 * (1.0 + r0);
    for i in 0..nn - 1 {
        let (a, b) = (nodes[i], nodes[i + 1]);
        seg[i] = if a < near {
            // ∫ φ' dr = ∫ 2u φ'(r0+u²) du over u ∈ [√(a-r0), √(b-r0)].
            let (ua, ub) = ((a - r0).sqrt(), (b - r0).sqrt());
            quad::integrate(|u: Real| 2.0 * u * phi_prime(r0 + u * u), ua, ub, 24)
        } else {
            quad::integrate(phi_prime, a, b, 12)
        };
        if !seg[i].is_finite() {
            return Err(Error::Numerical(format!(
                "non-integrable slope on [{a}, {b}]"
            )));
        }
    }
    let mut phi = vec![0.0; nn];
    phi[nn - 1] = (1.0 + nodes[nn - 1] * nodes[nn - 1]).sqrt();
    for i in (0..nn - 1).rev() {
        phi[i] = phi[i + 1] - seg[i];
    }
    let mut phi_d1: Vec<Real> = nodes.iter().map(|&r| phi_prime(r)).collect();
    // The anchor slope diverges in the continuum; for the interpolant keep a
    // finite secant, and record separately the one-sided slope over a tiny
    // offset δ (resolved by the substitution quadrature).
    phi_d1[0] = (phi[1] - phi[0]) / (nodes[1] - nodes[0]);
    let delta = 1e-10 * (1.0 + r0);
    let anchor_slope =
        quad::integrate(|u: Real| 2.0 * u * phi_prime(r0 + u * u), 0.0, delta.sqrt(), 24) / delta;
    let phi_field = RadialField::from_values_with_d1(grid.clone(), phi.clone(), phi_d1.clone())?;
    let e = n as i32;
    let tail = |r: Real| alpha_mean * r.powi(-(e - 3));
    let tail_p = |r: Real| -(n as Real - 3.0) * alpha_mean * r.powi(-(e - 2));
    let f_vals: Vec<Real> = nodes.iter().zip(&phi).map(|(&r, &p)| p + tail(r)).collect();
    let f_d1: Vec<Real> =
        nodes.iter().zip(&phi_d1).map(|(&r, &dp)| dp + tail_p(r)).collect();
    let f_field = RadialField::from_values_with_d1(grid, f_vals, f_d1)?;
    Ok((phi_field, f_field, anchor_slope + tail_p(r0)))
}

/// Full geometric Jang residual of the barrier ansatz, divided by the
/// normalization √(1+r²) Π^{3/2} (1 + r^{-2(n-3)} |dα|²); returns the value
/// and the Π diagnostic. `k_prime` is the slope derivative of the profile.
pub fn normalized_jang_residual(
    model: &ModelData,
    alpha_mean: Real,
    k: Real,
    k_prime: Real,
    r: Real,
) -> Result<(Real, Real)> {
    let n = model.n();
    let e = n as i32;
    let omk2 = 1.0 - k * k;
    if omk2 <= 0.0 {
        return Err(Error::Domain(format!("normalized residual needs |k| < 1, got {k}")));
    }
    let w2 = 1.0 + r * r;
    let w = w2.sqrt();
    let phi_p = k / (omk2 * w2).sqrt();
    let phi_pp = k_prime / (omk2.sqrt() * w) + k * k * k_prime / (omk2.powf(1.5) * w)
        - k * r / (omk2.sqrt() * w2 * w);
    let fp = phi_p - (n as Real - 3.0) * alpha_mean * r.powi(-(e - 2));
    let fpp = phi_pp + (n as Real - 3.0) * (n as Real - 2.0) * alpha_mean * r.powi(-(e - 1));
    let f = w + alpha_mean * r.powi(-(e - 3));
    let g = geometry::graph_geometry_at(model, f, fp, fpp, r)?;
    let pi = (1.0 + w2 * phi_p * phi_p) / (1.0 + w2 * fp * fp);
    if pi <= 0.0 {
        return Err(Error::DegenerateMetric(format!("Pi = {pi} <= 0 at r = {r}")));
    }
    // |dα|² vanishes for the sphere-mean ᾱ used by the radial pipeline.
    let norm = w * pi.powf(1.5);
    Ok((g.j / norm, pi))
}

/// Log–log decay slope of a field over a radius window.
pub fn fit_decay_exponent(series: &RadialField, window: (Real, Real)) -> Result<Real> {
    let mut r = Vec::new();
    let mut v = Vec::new();
    for (&x, &y) in series.grid().nodes().iter().zip(series.values()) {
        if x >= window.0 && x <= window.1 {
            r.push(x);
            v.push(y);
        }
    }
    if r.len() < 8 {
        return Err(Error::Fit(format!(
            "window [{}, {}] contains too few samples",
            window.0, window.1
        )));
    }
    fit::loglog_slope(&r, &v)
}

/// Integrated barrier pair with reconstructed barrier functions.
#[derive(Debug, Clone)]
pub struct BarrierPair {
    pub constants: BarrierConstants,
    pub k_plus: KProfile,
    pub k_minus: KProfile,
    pub phi_plus: RadialField,
    pub phi_minus: RadialField,
    pub f_plus: RadialField,
    pub f_minus: RadialField,
    /// Π diagnostic along the plus profile.
    pub pi: RadialField,
    /// One-sided anchor slopes of f_± over a vanishing offset (divergent in
    /// the continuum; negative for f_+ per the slope convention k_+(r0) = -1).
    pub slope_plus_r0: Real,
    pub slope_minus_r0: Real,
    pub alpha_mean: Real,
}

/// Integrates both barrier systems and reconstructs f_±.
pub fn compute_barrier_pair(
    model: &ModelData,
    alpha: &ZonalFunction,
    constants: Option<BarrierConstants>,
    r_max: Real,
) -> Result<BarrierPair> {
    let n = model.n();
    let c = match constants {
        Some(c) => c,
        None => BarrierConstants::defaults_for(model, alpha)?,
    };
    let alpha_mean = alpha.sphere_mean(n);
    let k_plus = integrate_k(BarrierSign::Plus, &c, n, r_max)?;
    let k_minus = integrate_k(BarrierSign::Minus, &c, n, r_max)?;
    let (phi_plus, f_plus, slope_plus_r0) = reconstruct_f(&k_plus, alpha_mean, n)?;
    let (phi_minus, f_minus, slope_minus_r0) = reconstruct_f(&k_minus, alpha_mean, n)?;
    let pi_vals: Vec<Real> = k_plus
        .k
        .grid()
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let k: Real = k_plus.k.values()[i].clamp(-1.0, 1.0);
            let omk2 = (1.0 - k * k).max(1e-300);
            let w2 = 1.0 + r * r;
            let phi_p = k / (omk2 * w2).sqrt();
            let fp = f_plus.d1()[i];
            (1.0 + w2 * phi_p * phi_p) / (1.0 + w2 * fp * fp)
        })
        .collect();
    let pi = RadialField::from_values(k_plus.k.grid().clone(), pi_vals)?;
    Ok(BarrierPair {
        constants: c,
        k_plus,
        k_minus,
        phi_plus,
        phi_minus,
        f_plus,
        f_minus,
        pi,
        slope_plus_r0,
        slope_minus_r0,
        alpha_mean,
    })
}
