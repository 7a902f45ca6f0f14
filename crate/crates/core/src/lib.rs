//! Radial reduction of the Jang-equation pipeline for asymptotically
//! hyperbolic model data in dimensions 4..=7.
//!
//! The library is organised bottom-up:
//!
//! * [`numerics`] — scalar-generic kernels: finite differences, power-law
//!   fits, Richardson extrapolation, Gauss–Legendre quadrature, an embedded
//!   Runge–Kutta 5(4) integrator and a tridiagonal solver.
//! * [`model`] — the exact model data `(g, k)` (dimension plus zonal traces).
//! * [`geometry`] — closed-form background and graph geometry, constraint
//!   densities, warped-product scalar curvature.
//! * [`sphere`] — the zonal tail equation on the round sphere.
//! * [`grid`] — graded radial meshes and sampled radial fields.
//! * [`barrier`] — the sub/supersolution ODE systems, barrier profiles.
//! * [`jang`] — the regularized radial two-point boundary-value problem.
//! * [`mass`] — mass functional and ADM flux integrals.
//! * [`conformal`] — conformal (scalar-flattening) stage, identity checks,
//!   gluing to an exterior Schwarzschild metric.
//! * [`report`] — serializable per-stage reports.

pub mod barrier;
pub mod conformal;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod jang;
pub mod mass;
pub mod model;
pub mod numerics;
pub mod report;
pub mod sphere;

pub use error::{Error, Result};

/// Concrete scalar used by the domain pipeline. The numerics kernels are
/// generic over [`numerics::Scalar`] (f32 or f64); the pipeline itself is
/// pinned to f64 because its verification tolerances sit at 1e-10..1e-12.
pub type Real = f64;
