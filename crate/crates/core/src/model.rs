//! Exact model initial data: dimension plus zonal sphere-part traces of the
//! metric and second-fundamental-form corrections.
//!
//! The model fixes the data in closed form:
//!   g = dr²/(1+r²) + (r² + m̄(θ) r^{-(n-2)}) Ω,
//!   k_rr = g_rr, k_rμ = 0, k_sph = r² + p̄(θ) r^{-(n-2)},
//! where m̄ = tr_Ω(m)/(n-1), p̄ = tr_Ω(p)/(n-1).

use crate::error::{Error, Result};
use crate::numerics::quad;
use crate::Real;

/// A function of the polar angle θ ∈ [0, π]: either a constant or samples
/// on a strictly increasing grid (with even reflection at the poles).
#[derive(Debug, Clone)]
pub enum ZonalFunction {
    Constant(Real),
    Sampled { theta: Vec<Real>, values: Vec<Real> },
}

impl ZonalFunction {
    pub fn constant(v: Real) -> Self {
        ZonalFunction::Constant(v)
    }

    pub fn sampled(theta: Vec<Real>, values: Vec<Real>) -> Result<Self> {
        if theta.len() != values.len() || theta.len() < 4 {
            return Err(Error::Config("zonal samples: need >= 4 matching points".into()));
        }
        if theta.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("zonal grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("zonal values must be finite".into()));
        }
        Ok(ZonalFunction::Sampled { theta, values })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, ZonalFunction::Constant(_))
    }

    /// Value at θ (linear interpolation for sampled data, clamped ends).
    pub fn at(&self, th: Real) -> Real {
        match self {
            ZonalFunction::Constant(v) => *v,
            ZonalFunction::Sampled { theta, values } => {
                if th <= theta[0] {
                    return values[0];
                }
                if th >= *theta.last().unwrap() {
                    return *values.last().unwrap();
                }
                let i = theta.partition_point(|&t| t < th).max(1);
                let (t0, t1) = (theta[i - 1], theta[i]);
                let w = (th - t0) / (t1 - t0);
                values[i - 1] * (1.0 - w) + values[i] * w
            }
        }
    }

    /// Mean over S^{n-1}: ∫ f sin^{n-2}θ dθ / ∫ sin^{n-2}θ dθ.
    pub fn sphere_mean(&self, n: usize) -> Real {
        match self {
            ZonalFunction::Constant(v) => *v,
            _ => {
                let p = (n - 2) as i32;
                let num = quad::integrate(
                    |t: Real| self.at(t) * t.sin().powi(p),
                    0.0,
                    std::f64::consts::PI,
                    96,
                );
                let den =
                    quad::integrate(|t: Real| t.sin().powi(p), 0.0, std::f64::consts::PI, 96);
                num / den
            }
        }
    }

    /// sup |f| over [0, π].
    pub fn sup_abs(&self) -> Real {
        match self {
            ZonalFunction::Constant(v) => v.abs(),
            ZonalFunction::Sampled { values, .. } => {
                values.iter().fold(0.0, |a, v| a.max(v.abs()))
            }
        }
    }

    /// sup |f'| over [0, π] (finite differences for sampled data).
    pub fn sup_abs_deriv(&self) -> Real {
        match self {
            ZonalFunction::Constant(_) => 0.0,
            ZonalFunction::Sampled { theta, values } => {
                let mut m = 0.0f64;
                for i in 1..theta.len() {
                    let d = (values[i] - values[i - 1]) / (theta[i] - theta[i - 1]);
                    m = m.max(d.abs());
                }
                m
            }
        }
    }

    /// Pointwise linear combination a*self + b*other (both constant, or the
    /// sampled grid dominates).
    pub fn axpby(&self, a: Real, other: &ZonalFunction, b: Real) -> Result<ZonalFunction> {
        match (self, other) {
            (ZonalFunction::Constant(u), ZonalFunction::Constant(v)) => {
                Ok(ZonalFunction::Constant(a * u + b * v))
            }
            (ZonalFunction::Sampled { theta, .. }, _) | (_, ZonalFunction::Sampled { theta, .. }) => {
                let th = theta.clone();
                let vals = th.iter().map(|&t| a * self.at(t) + b * other.at(t)).collect();
                ZonalFunction::sampled(th, vals)
            }
        }
    }
}

/// Exact model data set.
#[derive(Debug, Clone)]
pub struct ModelData {
    n: usize,
    /// tr_Ω(m) as a zonal function.
    pub m_trace: ZonalFunction,
    /// tr_Ω(p) as a zonal function.
    pub p_trace: ZonalFunction,
}

impl ModelData {
    pub fn new(n: usize, m_trace: ZonalFunction, p_trace: ZonalFunction) -> Result<Self> {
        if !(4..=7).contains(&n) {
            return Err(Error::Config(format!(
                "dimension n = {n} unsupported; supported range is 4..=7"
            )));
        }
        Ok(Self { n, m_trace, p_trace })
    }

    /// Spherically symmetric model with m = m̄ Ω, p = p̄ Ω.
    pub fn spherical(n: usize, m_bar: Real, p_bar: Real) -> Result<Self> {
        let d = (n - 1) as Real;
        Self::new(
            n,
            ZonalFunction::Constant(m_bar * d),
            ZonalFunction::Constant(p_bar * d),
        )
    }

    /// Exact hyperbolic data (m = p = 0).
    pub fn hyperbolic(n: usize) -> Result<Self> {
        Self::spherical(n, 0.0, 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nf(&self) -> Real {
        self.n as Real
    }

    /// m̄(θ) = tr_Ω(m)(θ)/(n-1).
    pub fn m_bar_at(&self, th: Real) -> Real {
        self.m_trace.at(th) / (self.n as Real - 1.0)
    }

    /// p̄(θ) = tr_Ω(p)(θ)/(n-1).
    pub fn p_bar_at(&self, th: Real) -> Real {
        self.p_trace.at(th) / (self.n as Real - 1.0)
    }

    /// Sphere-mean of m̄ (used by the radial pipeline).
    pub fn m_bar(&self) -> Real {
        self.m_trace.sphere_mean(self.n) / (self.n as Real - 1.0)
    }

    /// Sphere-mean of p̄.
    pub fn p_bar(&self) -> Real {
        self.p_trace.sphere_mean(self.n) / (self.n as Real - 1.0)
    }

    pub fn is_spherical(&self) -> bool {
        self.m_trace.is_constant() && self.p_trace.is_constant()
    }
}
