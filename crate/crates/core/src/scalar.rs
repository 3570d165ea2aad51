//! Scalar abstraction shared by the double-precision code paths.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the recurrences, rules and solver are generic over.
///
/// Implemented for `f32` and `f64`. Extended precision lives in
/// [`crate::oracle`] and deliberately does not implement this trait, so the
/// reference values can never share a code path with what they check.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` constant, rounding to the nearest representable value.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon as an `f64`.
    fn eps_f64() -> f64 {
        Self::epsilon().to_f64_lossy()
    }

    /// Multiplies by `2^e` without overflowing intermediate powers of two.
    fn scale_pow2(self, e: i32) -> Self {
        let step = 256;
        let mut v = self;
        let mut rem = e;
        let two = Self::lit(2.0);
        while rem > step {
            v = v * two.powi(step);
            rem -= step;
        }
        while rem < -step {
            v = v * two.powi(-step);
            rem += step;
        }
        v * two.powi(rem)
    }
}

impl Real for f32 {}
impl Real for f64 {}
