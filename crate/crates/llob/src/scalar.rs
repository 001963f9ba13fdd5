//! Scalar abstraction: all numerical kernels are generic over the
//! floating-point type, with `f64` as the production default.

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar usable by every solver in this crate.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    /// Lift an `f64` literal into the scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    #[inline]
    fn pi() -> Self {
        Self::of(std::f64::consts::PI)
    }

    /// sqrt(pi)
    #[inline]
    fn sqrt_pi() -> Self {
        Self::of(1.772_453_850_905_516)
    }

    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::of(2.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
