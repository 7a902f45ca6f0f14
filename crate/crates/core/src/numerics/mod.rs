//! Scalar-generic numerical kernels.

pub mod diff;
pub mod fit;
pub mod ode;
pub mod quad;
pub mod tridiag;

/// Floating-point scalar the kernels are generic over: f32 or f64.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + num_traits::NumCast + std::fmt::Debug + 'static
{
    /// Lossless conversion from f64 literals used in coefficient tables.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal conversion")
    }
    /// Conversion from usize counters.
    fn of(v: usize) -> Self {
        Self::from_usize(v).expect("usize conversion")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
