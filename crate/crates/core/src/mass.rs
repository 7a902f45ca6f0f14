//! Mass flux integrals and closed forms.
//!
//! Three distinct quantities live here:
//!
//! * the hyperbolic mass functional 𝓜(V) evaluated as a flux through the
//!   coordinate sphere r = R against the lapse candidates V₀ = √(1+r²),
//!   V_i = x̂ⁱ r, normalized to the energy-momentum vector (E, P⃗);
//! * the closed-form reduction of (E, P⃗) for the exact model;
//! * the Euclidean ADM energy flux of an asymptotically flat radial metric
//!   (used on the Jang graph and its conformal modification).
//!
//! The momentum-type tensor entering the flux is the trace-adjusted
//! η = (k - g) - tr_g(k - g) g; for the exact model only its rr-component
//! survives contraction with ∇V.

use crate::error::{Error, Result};
use crate::geometry::sphere_volume;
use crate::model::ModelData;
use crate::numerics::quad;
use crate::sphere;
use crate::Real;

pub use crate::numerics::fit::richardson_extrapolate;

/// Radius below which the model's r^{-(n-2)} corrections are not yet small
/// against the leading terms; fluxes evaluated inside are recorded with a
/// warning.
pub fn asymptotic_threshold(model: &ModelData) -> Real {
    let sup = model
        .m_trace
        .sup_abs()
        .max(model.p_trace.sup_abs())
        / (model.nf() - 1.0);
    (10.0 * sup).powf(1.0 / model.nf()).max(5.0)
}

/// Lapse data at (r, θ) for one element of the static cone:
/// (V, (dV)_r, (∇V)^r). Tangential parts never contribute for the exact
/// model since e_{μr} = η_{μr} = 0.
fn lapse_radial_data(which: usize, r: Real, cos_theta: Real) -> (Real, Real, Real) {
    let s = (1.0 + r * r).sqrt();
    if which == 0 {
        // V₀ = √(1+r²), dV₀ = r/√(1+r²) dr, ∇V₀ = r√(1+r²) ∂_r.
        (s, r / s, r * s)
    } else {
        // V₁ = r cosθ (zonal axis), dV₁|_r = cosθ, (∇V₁)^r = (1+r²)cosθ.
        (r * cos_theta, cos_theta, (1.0 + r * r) * cos_theta)
    }
}

/// Radial component of the flux one-form evaluated on n⃗ = √(1+r²)∂_r,
/// per unit round-sphere measure (the r^{n-1} area factor is applied by the
/// caller). `which` selects V: 0 or 1; higher indices vanish identically
/// after the azimuthal integral and are short-circuited in [`mass_flux`].
fn flux_density(model: &ModelData, which: usize, r: Real, theta: Real) -> Result<Real> {
    let n = model.nf();
    let m_bar = model.m_bar_at(theta);
    let p_bar = model.p_bar_at(theta);
    let b_sph = r * r + m_bar * r.powi(-(model.n() as i32 - 2));
    if b_sph <= 0.0 {
        return Err(Error::DegenerateMetric(format!(
            "sphere factor r² + m̄ r^{{2-n}} = {b_sph} at r = {r}, θ = {theta}"
        )));
    }
    // e = g - b is pure-sphere: e_{μν} = m̄ r^{2-n} Ω_{μν}.
    let tr_e = (n - 1.0) * m_bar * r.powi(-(model.n() as i32));
    // div^b(e)_r = -tr^b(e)/r and (d tr^b e)_r = -n tr^b(e)/r exactly.
    let dee = (n - 1.0) * tr_e / r;
    // Trace-adjusted momentum: (k-g) is pure-sphere with coefficient
    // (p̄-m̄)r^{2-n}, so η_rr = -tr_g(k-g) g_rr.
    let tr_km = (n - 1.0) * (p_bar - m_bar) * r.powi(-(model.n() as i32 - 2)) / b_sph;
    let eta_rr = -tr_km / (1.0 + r * r);

    let (v, dv_r, gradv_r) = lapse_radial_data(which, r, theta.cos());
    let omega_r = v * dee + tr_e * dv_r - 2.0 * eta_rr * gradv_r;
    Ok((1.0 + r * r).sqrt() * omega_r)
}

/// Integrates a zonal density over S^{n-1}:
/// ∫ f dS = ω_{n-2} ∫₀^π f(θ) sin^{n-2}θ dθ (Gauss rule, exact to
/// quadrature precision for the smooth zonal integrands used here).
fn zonal_sphere_integral(n: usize, f: impl Fn(Real) -> Real) -> Result<Real> {
    let ring = sphere_volume(n - 1)?;
    let p = (n - 2) as i32;
    Ok(ring
        * quad::integrate(|t: Real| f(t) * t.sin().powi(p), 0.0, std::f64::consts::PI, 96))
}

/// Mass-functional flux 𝓜_R(V_which) through the sphere r = R.
/// Divide by 2(n-1)ω_{n-1} to obtain the energy-momentum component.
pub fn mass_flux(model: &ModelData, which: usize, r: Real) -> Result<Real> {
    let n = model.n();
    if which > n {
        return Err(Error::Config(format!(
            "lapse index {which} out of range 0..={n}"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("flux radius must be positive, got {r}")));
    }
    if which >= 2 {
        // x̂ⁱ (i ≥ 2) has zero azimuthal mean against any zonal density.
        return Ok(0.0);
    }
    let area = r.powi(n as i32 - 1);
    let value =
        area * zonal_sphere_integral(n, |t| flux_density(model, which, r, t).unwrap_or(Real::NAN))?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::DegenerateMetric(format!("flux integrand degenerate at r = {r}")))
    }
}

/// Flux of the combined lapse Σ cᵢ Vᵢ, evaluated as a single integral
/// (coefficients for i ≥ 2 drop out exactly by parity).
pub fn mass_flux_combination(model: &ModelData, coeffs: &[Real], r: Real) -> Result<Real> {
    let n = model.n();
    if coeffs.len() != n + 1 {
        return Err(Error::Config(format!(
            "expected {} lapse coefficients, got {}",
            n + 1,
            coeffs.len()
        )));
    }
    let area = r.powi(n as i32 - 1);
    let value = area
        * zonal_sphere_integral(n, |t| {
            let d0 = flux_density(model, 0, r, t).unwrap_or(Real::NAN);
            let d1 = flux_density(model, 1, r, t).unwrap_or(Real::NAN);
            coeffs[0] * d0 + coeffs[1] * d1
        })?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::DegenerateMetric(format!("flux integrand degenerate at r = {r}")))
    }
}

/// Closed-form energy-momentum vector of the exact model:
/// E = (1/((n-1)ω_{n-1})) ∫ (tr_Ω p + ((n-2)/2) tr_Ω m) dS, and Pⁱ with the
/// additional weight x̂ⁱ (only the zonal-axis component can be nonzero).
pub fn wang_mass_closed_form(model: &ModelData) -> Result<(Real, Vec<Real>)> {
    let n = model.n();
    let omega = sphere_volume(n)?;
    let source = sphere::trace_source(model);
    let norm = (model.nf() - 1.0) * omega;
    let e = zonal_sphere_integral(n, |t| source.at(t))? / norm;
    let mut p = vec![0.0; n];
    p[0] = zonal_sphere_integral(n, |t| source.at(t) * t.cos())? / norm;
    Ok((e, p))
}

/// Closed-form ADM energy of the Jang graph over the exact model, in the
/// trace form (1/ω_{n-1}) ∫ (tr_Ω p + ((n-2)/2) tr_Ω m) dS together with the
/// equivalent tail-coefficient form -(n-3)·mean(α).
#[derive(Debug, Clone, Copy)]
pub struct JangAdmMass {
    pub trace_form: Real,
    pub alpha_form: Real,
}

pub fn jang_adm_closed_form(model: &ModelData) -> Result<JangAdmMass> {
    let n = model.n();
    let source = sphere::trace_source(model);
    let trace_form = zonal_sphere_integral(n, |t| source.at(t))? / sphere_volume(n)?;
    let alpha = sphere::solve_alpha(model)?;
    let alpha_form = -(model.nf() - 3.0) * alpha.sphere_mean(n);
    Ok(JangAdmMass { trace_form, alpha_form })
}

/// An asymptotically flat radial metric Q(r) dr² + B(r) Ω, handed around as
/// value closures.
pub struct RadialMetric<'a> {
    pub g_rr: &'a dyn Fn(Real) -> Real,
    pub g_sph: &'a dyn Fn(Real) -> Real,
}

impl RadialMetric<'_> {
    fn q(&self, r: Real) -> Real {
        (self.g_rr)(r)
    }
    /// Conformal sphere factor P = B/r² (→ 1 for flat tails).
    fn p(&self, r: Real) -> Real {
        (self.g_sph)(r) / (r * r)
    }
    /// P' by a fourth-order central stencil; the flux tolerance (1e-2)
    /// dwarfs the stencil error for the smooth closures used here.
    fn p_prime(&self, r: Real) -> Real {
        let h = 1e-3 * r;
        (8.0 * (self.p(r + h) - self.p(r - h)) - (self.p(r + 2.0 * h) - self.p(r - 2.0 * h)))
            / (12.0 * h)
    }
    /// Deviation from the Euclidean metric in the orthonormalized polar
    /// frame.
    fn flat_deviation(&self, r: Real) -> Real {
        (self.q(r) - 1.0).abs() + (self.p(r) - 1.0).abs()
    }
}

/// Euclidean ADM energy flux (1/(2(n-1)ω_{n-1})) ∮ (div^δ g - d tr^δ g)(n⃗^δ)
/// of a radial metric at radius R. In the orthonormalized polar frame the
/// surface integrand reduces to (n-1)[(Q-P)/R - P'], giving
/// E(R) = (R^{n-1}/2)[(Q-P)/R - P'].
pub fn adm_energy_flux(metric: &RadialMetric, n: usize, r: Real) -> Result<Real> {
    if !(4..=7).contains(&n) {
        return Err(Error::Config(format!("dimension n = {n} out of supported range 4..=7")));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("flux radius must be positive, got {r}")));
    }
    // Flat-tail guard: |g - δ| must be small at R and decaying from R/2.
    let dev_half = metric.flat_deviation(0.5 * r);
    let dev = metric.flat_deviation(r);
    if dev > 0.5 || dev > 0.8 * dev_half + 1e-9 {
        return Err(Error::Domain(format!(
            "metric tail is not asymptotically flat: |g-δ| = {dev_half:.3e} at r = {}, {dev:.3e} at r = {r}",
            0.5 * r
        )));
    }
    let q = metric.q(r);
    let p = metric.p(r);
    Ok(0.5 * r.powi(n as i32 - 1) * ((q - p) / r - metric.p_prime(r)))
}

/// One flux sample of the energy series, with the running extrapolation
/// residual once three radii are available.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct FluxSample {
    pub r: Real,
    /// Normalized flux 𝓜_R(V₀)/(2(n-1)ω_{n-1}).
    pub energy: Real,
    pub extrapolation_residual: Option<Real>,
}

/// Relation checks carried in the report (absolute mismatches).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MassRelationChecks {
    /// |extrapolated flux energy - closed-form E|.
    pub flux_vs_closed_form: Real,
    /// |jang_adm_closed_form - (n-1) E|.
    pub adm_vs_energy: Real,
    /// |trace form - α form| of the graph ADM energy.
    pub adm_trace_vs_alpha: Real,
}

/// Mass-stage report: closed forms, the flux series with extrapolation, and
/// the relation checks.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MassReport {
    pub n: usize,
    pub e: Real,
    pub p: Vec<Real>,
    pub e_adm_graph: Real,
    pub flux_series: Vec<FluxSample>,
    pub e_flux_extrapolated: Real,
    pub e_flux_residual: Real,
    pub extrapolation_monotone: bool,
    pub relation_checks: MassRelationChecks,
    pub warnings: Vec<String>,
}

/// Assembles the mass report over an increasing list of flux radii
/// (at least three, for the extrapolation).
pub fn mass_report(model: &ModelData, radii: &[Real]) -> Result<MassReport> {
    let n = model.n();
    let omega = sphere_volume(n)?;
    let norm = 2.0 * (model.nf() - 1.0) * omega;
    let mut warnings = Vec::new();
    let threshold = asymptotic_threshold(model);
    let mut pairs: Vec<(Real, Real)> = Vec::with_capacity(radii.len());
    let mut series: Vec<FluxSample> = Vec::with_capacity(radii.len());
    for &r in radii {
        if r < threshold {
            warnings.push(format!(
                "flux radius {r} below asymptotic threshold {threshold:.3}"
            ));
        }
        let energy = mass_flux(model, 0, r)? / norm;
        pairs.push((r, energy));
        let residual = if pairs.len() >= 3 {
            Some(richardson_extrapolate(&pairs, 1.0)?.1)
        } else {
            None
        };
        series.push(FluxSample { r, energy, extrapolation_residual: residual });
    }
    let (limit, residual, monotone) = richardson_extrapolate(&pairs, 1.0)?;
    if !monotone {
        warnings.push("flux series not monotone toward the extrapolated limit".into());
    }
    let (e, p) = wang_mass_closed_form(model)?;
    let adm = jang_adm_closed_form(model)?;
    Ok(MassReport {
        n,
        e,
        p,
        e_adm_graph: adm.trace_form,
        flux_series: series,
        e_flux_extrapolated: limit,
        e_flux_residual: residual,
        extrapolation_monotone: monotone,
        relation_checks: MassRelationChecks {
            flux_vs_closed_form: (limit - e).abs(),
            adm_vs_energy: (adm.trace_form - (model.nf() - 1.0) * e).abs(),
            adm_trace_vs_alpha: (adm.trace_form - adm.alpha_form).abs(),
        },
        warnings,
    })
}
