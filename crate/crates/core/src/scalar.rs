use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssign};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftNum;

/// Floating-point type the signal chain is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + NumAssign + FftNum + Sum + Default + Display + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal or configuration value.
    fn lit(value: f64) -> Self;

    /// Widens to `f64` for reporting.
    fn to_f64_lossy(self) -> f64;

    /// One draw from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn lit(value: f64) -> Self {
                value as $t
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }

            #[inline]
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample::<$t, _>(StandardNormal)
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);
