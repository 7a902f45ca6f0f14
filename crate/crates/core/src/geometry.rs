//! Closed-form background and Jang-graph geometry for the exact model.
//!
//! All tensors are stored in polar coordinates; pure-sphere tensors are kept
//! as the scalar coefficient of the round metric Ω. Orthonormal sphere-frame
//! components are obtained by dividing by the sphere conformal factor.

use crate::error::{Error, Result};
use crate::model::ModelData;
use crate::numerics::diff;
use crate::Real;

/// Volume of the unit sphere S^{n-1}: 2 π^{n/2} / Γ(n/2), with the
/// half-integer Γ values expanded in closed form.
pub fn sphere_volume(n: usize) -> Result<Real> {
    if n < 2 {
        return Err(Error::Domain(format!("sphere_volume requires n >= 2, got {n}")));
    }
    let pi = std::f64::consts::PI;
    let gamma_half = if n % 2 == 0 {
        // Γ(n/2) = (n/2 - 1)!
        (1..n / 2).fold(1.0, |acc, k| acc * k as Real)
    } else {
        // Γ(n/2) = sqrt(π) (n-2)!! / 2^{(n-1)/2}
        let mut df = 1.0;
        let mut k = n as i64 - 2;
        while k >= 2 {
            df *= k as Real;
            k -= 2;
        }
        pi.sqrt() * df / 2f64.powi((n as i32 - 1) / 2)
    };
    Ok(2.0 * pi.powf(n as Real / 2.0) / gamma_half)
}

/// Radialized model coefficients (sphere means of the zonal traces), with
/// exact derivatives of the metric closures.
#[derive(Debug, Clone, Copy)]
pub struct RadialModel {
    pub n: usize,
    pub m_bar: Real,
    pub p_bar: Real,
}

impl RadialModel {
    pub fn nf(&self) -> Real {
        self.n as Real
    }
    /// g_rr = 1/(1+r²).
    pub fn a(&self, r: Real) -> Real {
        1.0 / (1.0 + r * r)
    }
    pub fn a_prime(&self, r: Real) -> Real {
        let s = 1.0 + r * r;
        -2.0 * r / (s * s)
    }
    /// Sphere factor of g: B = r² + m̄ r^{-(n-2)}.
    pub fn b(&self, r: Real) -> Real {
        r * r + self.m_bar * r.powi(-(self.n as i32 - 2))
    }
    pub fn b_prime(&self, r: Real) -> Real {
        2.0 * r - (self.nf() - 2.0) * self.m_bar * r.powi(-(self.n as i32 - 1))
    }
    pub fn b_prime2(&self, r: Real) -> Real {
        2.0 + (self.nf() - 2.0) * (self.nf() - 1.0) * self.m_bar * r.powi(-(self.n as i32))
    }
    /// Sphere factor of k: Bk = r² + p̄ r^{-(n-2)}.
    pub fn bk(&self, r: Real) -> Real {
        r * r + self.p_bar * r.powi(-(self.n as i32 - 2))
    }
    pub fn bk_prime(&self, r: Real) -> Real {
        2.0 * r - (self.nf() - 2.0) * self.p_bar * r.powi(-(self.n as i32 - 1))
    }
    /// k_rr = g_rr by the model closure.
    pub fn k_rr(&self, r: Real) -> Real {
        self.a(r)
    }
}

impl ModelData {
    /// Radial reduction by sphere means of the zonal traces.
    pub fn radial(&self) -> RadialModel {
        RadialModel { n: self.n(), m_bar: self.m_bar(), p_bar: self.p_bar() }
    }
}

/// Metric and second-fundamental-form sample of the background data.
#[derive(Debug, Clone, Copy)]
pub struct MetricSample {
    pub r: Real,
    pub g_rr: Real,
    pub g_sph: Real,
    pub k_rr: Real,
    pub k_sph: Real,
}

/// Background data at (r, θ).
pub fn background_at(model: &ModelData, r: Real, theta: Real) -> Result<MetricSample> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("background_at requires r > 0, got {r}")));
    }
    let n = model.n() as i32;
    let g_rr = 1.0 / (1.0 + r * r);
    let g_sph = r * r + model.m_bar_at(theta) * r.powi(-(n - 2));
    let k_sph = r * r + model.p_bar_at(theta) * r.powi(-(n - 2));
    if g_sph <= 0.0 {
        return Err(Error::DegenerateMetric(format!(
            "sphere factor g_sph = {g_sph} <= 0 at r = {r}"
        )));
    }
    Ok(MetricSample { r, g_rr, g_sph, k_rr: g_rr, k_sph })
}

/// Christoffel symbols of the (spherically symmetric) model metric in polar
/// coordinates. Pure-sphere blocks coincide with the round-sphere symbols
/// and are not tabulated.
#[derive(Debug, Clone, Copy)]
pub struct ChristoffelTable {
    /// Γ^r_{rr} = A'/(2A).
    pub gamma_r_rr: Real,
    /// Γ^r_{μν} = gamma_r_sph · Ω_{μν} with gamma_r_sph = -B'/(2A).
    pub gamma_r_sph: Real,
    /// Γ^μ_{rν} = gamma_sph_r · δ^μ_ν with gamma_sph_r = B'/(2B).
    pub gamma_sph_r: Real,
    /// Γ^μ_{rr} = 0 for the model.
    pub gamma_sph_rr: Real,
}

/// Exact Christoffel symbols of the model metric (no truncated expansions).
pub fn christoffel_at(model: &ModelData, r: Real) -> Result<ChristoffelTable> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("christoffel_at requires r > 0, got {r}")));
    }
    let rm = model.radial();
    let (a, b) = (rm.a(r), rm.b(r));
    if b <= 0.0 {
        return Err(Error::DegenerateMetric(format!("g_sph = {b} <= 0 at r = {r}")));
    }
    let (ap, bp) = (rm.a_prime(r), rm.b_prime(r));
    Ok(ChristoffelTable {
        gamma_r_rr: ap / (2.0 * a),
        gamma_r_sph: -bp / (2.0 * a),
        gamma_sph_r: bp / (2.0 * b),
        gamma_sph_rr: 0.0,
    })
}

/// Scalar curvature of the warped product Q dr² + B Ω over S^{n-1}, from
/// pointwise values and derivatives. With φ = √B and m = n-1:
/// R = -2m φ_ss/φ - m(m-1)(φ_s² - 1)/φ².
pub fn warped_scalar_curvature(
    q: Real,
    qp: Real,
    b: Real,
    bp: Real,
    bpp: Real,
    n: usize,
) -> Result<Real> {
    if q <= 0.0 || b <= 0.0 {
        return Err(Error::DegenerateMetric(format!("warped metric needs Q, B > 0 (Q={q}, B={b})")));
    }
    let m = n as Real - 1.0;
    let phi = b.sqrt();
    let phi_p = bp / (2.0 * phi);
    let phi_pp = bpp / (2.0 * phi) - bp * bp / (4.0 * b * phi);
    let phi_s2 = phi_p * phi_p / q;
    let phi_ss = phi_pp / q - phi_p * qp / (2.0 * q * q);
    Ok(-2.0 * m * phi_ss / phi - m * (m - 1.0) * (phi_s2 - 1.0) / (phi * phi))
}

/// Scalar curvature of A dr² + B Ω from value closures, differentiated with
/// the finite-difference oracles (second-order scheme with one Richardson
/// level).
pub fn scalar_curvature_radial(
    a: impl Fn(Real) -> Real + Copy,
    b: impl Fn(Real) -> Real + Copy,
    n: usize,
    r: Real,
) -> Result<Real> {
    let q = a(r);
    let bv = b(r);
    let qp = diff::oracle_d1(a, r);
    let bp = diff::oracle_d1(b, r);
    let bpp = diff::oracle_d2(b, r);
    warped_scalar_curvature(q, qp, bv, bp, bpp, n)
}

/// Constraint densities of the model data.
#[derive(Debug, Clone, Copy)]
pub struct ConstraintDensities {
    /// Local mass density μ = (R_g + tr(k)² - |k|²)/2.
    pub mu: Real,
    /// |J|_g with J = div_g(k - tr_g(k) g).
    pub j_norm: Real,
    /// Signed radial component J_r (needed by the Schoen–Yau pairing).
    pub j_r: Real,
}

fn densities_from_derivs(
    rm: &RadialModel,
    r: Real,
    bp: Real,
    bpp: Real,
    bkp: Real,
) -> Result<ConstraintDensities> {
    let n = rm.nf();
    let a = rm.a(r);
    let ap = rm.a_prime(r);
    let b = rm.b(r);
    let bk = rm.bk(r);
    if b <= 0.0 {
        return Err(Error::DegenerateMetric(format!("g_sph = {b} <= 0 at r = {r}")));
    }
    let r_g = warped_scalar_curvature(a, ap, b, bp, bpp, rm.n)?;
    // tr k = 1 + (n-1) x,  |k|² = 1 + (n-1) x²  with x = Bk/B.
    let x = bk / b;
    let trk = 1.0 + (n - 1.0) * x;
    let k2 = 1.0 + (n - 1.0) * x * x;
    let mu = 0.5 * (r_g + trk * trk - k2);
    // J_r = g^{rr}(T_rr' - 2Γ^r_rr T_rr) + (n-1) B'/(2AB) T_rr - (n-1) B'/(2B) T_s/B
    // with T = k - tr(k) g.
    let xp = (bkp * b - bk * bp) / (b * b);
    let trkp = (n - 1.0) * xp;
    let t_rr = a * (1.0 - trk);
    let t_rr_p = ap * (1.0 - trk) - a * trkp;
    let t_s = bk - trk * b;
    let gamma_r_rr = ap / (2.0 * a);
    let j_r = (t_rr_p - 2.0 * gamma_r_rr * t_rr) / a
        + (n - 1.0) * bp / (2.0 * a * b) * t_rr
        - (n - 1.0) * bp / (2.0 * b) * (t_s / b);
    let j_norm = j_r.abs() * (1.0 + r * r).sqrt();
    Ok(ConstraintDensities { mu, j_norm, j_r })
}

/// Constraint densities via nested finite differences with Richardson
/// refinement on the exact model closures.
pub fn constraint_densities(model: &ModelData, r: Real) -> Result<ConstraintDensities> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("constraint_densities requires r > 0, got {r}")));
    }
    let rm = model.radial();
    let bf = move |s: Real| rm.b(s);
    let bkf = move |s: Real| rm.bk(s);
    let bp = diff::oracle_d1(bf, r);
    let bpp = diff::oracle_d2(bf, r);
    let bkp = diff::oracle_d1(bkf, r);
    densities_from_derivs(&rm, r, bp, bpp, bkp)
}

/// Constraint densities with exact (closed-form) derivatives; used where
/// finite-difference noise would contaminate convergence studies.
pub fn constraint_densities_exact(model: &ModelData, r: Real) -> Result<ConstraintDensities> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("constraint_densities requires r > 0, got {r}")));
    }
    let rm = model.radial();
    densities_from_derivs(&rm, r, rm.b_prime(r), rm.b_prime2(r), rm.bk_prime(r))
}

/// Per-node geometry of the Jang graph t = f(r).
#[derive(Debug, Clone, Copy)]
pub struct GraphGeometry {
    pub r: Real,
    /// Induced metric components: ĝ_rr = g_rr + f'², ĝ_sph = g_sph.
    pub g_rr: Real,
    pub g_sph: Real,
    /// Second fundamental form: radial, sphere coefficient, mixed (0).
    pub a_rr: Real,
    pub a_sph: Real,
    pub a_mixed: Real,
    /// Mean curvature H = ĝ^{ij} Â_ij.
    pub h: Real,
    /// tr_ĝ(k).
    pub trk: Real,
    /// Jang residual J = H - tr_ĝ(k).
    pub j: Real,
    /// Scalar curvature of the induced metric.
    pub r_hat: Real,
    /// q-form components: q_r = (f^r/W)(Â_rr - k_rr), q_μ = 0.
    pub q_r: Real,
    pub q_mu: Real,
    /// Radial component (upstairs) of ω = ∇f/W.
    pub omega_r: Real,
    /// Graph gradient factor W = √(1 + |df|²_g).
    pub w: Real,
}

/// Geometry of the Jang graph at a node, from pointwise (f, f', f'').
/// The scalar curvature uses Q' = A' + 2 f' f'', available pointwise.
pub fn graph_geometry_at(
    model: &ModelData,
    _f: Real,
    fp: Real,
    fpp: Real,
    r: Real,
) -> Result<GraphGeometry> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("graph_geometry_at requires r > 0, got {r}")));
    }
    let rm = model.radial();
    let n = rm.nf();
    let a = rm.a(r);
    let ap = rm.a_prime(r);
    let b = rm.b(r);
    let bp = rm.b_prime(r);
    let bk = rm.bk(r);
    if b <= 0.0 {
        return Err(Error::DegenerateMetric(format!("g_sph = {b} <= 0 at r = {r}")));
    }
    let q = a + fp * fp; // ĝ_rr
    let w = (1.0 + fp * fp / a).sqrt();
    let gamma_r_rr = ap / (2.0 * a);
    let hess_rr = fpp - gamma_r_rr * fp;
    let hess_sph = bp / (2.0 * a) * fp;
    let a_rr = hess_rr / w;
    let a_sph = hess_sph / w;
    let h = a_rr / q + (n - 1.0) * a_sph / b;
    let trk = a / q + (n - 1.0) * bk / b;
    let j = h - trk;
    let qp = ap + 2.0 * fp * fpp;
    let r_hat = warped_scalar_curvature(q, qp, b, bp, rm.b_prime2(r), rm.n)?;
    let omega_r = fp / (a * w);
    let q_r = omega_r * (a_rr - rm.k_rr(r));
    Ok(GraphGeometry {
        r,
        g_rr: q,
        g_sph: b,
        a_rr,
        a_sph,
        a_mixed: 0.0,
        h,
        trk,
        j,
        r_hat,
        q_r,
        q_mu: 0.0,
        omega_r,
        w,
    })
}

/// |T|²_ĝ of a radial-diagonal symmetric tensor with components (T_rr, T_s·Ω)
/// in the metric ĝ = Q dr² + B Ω.
pub fn radial_tensor_norm_sq(t_rr: Real, t_s: Real, q: Real, b: Real, n: usize) -> Real {
    (t_rr / q).powi(2) + (n as Real - 1.0) * (t_s / b).powi(2)
}

/// Orthonormal sphere-frame component of a pure-sphere tensor c·Ω in the
/// metric with sphere factor B.
pub fn orthonormal_sphere_component(coeff: Real, b: Real) -> Real {
    coeff / b
}
