//! Scalar abstraction shared by the numeric modules.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar used throughout the coordination math.
///
/// Implemented for `f32` and `f64`. Everything that needs square roots,
/// exponentials or eigen-decompositions goes through `RealField`; conversions
/// from and to `f64` literals go through num-traits.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default + Send + Sync + 'static {
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// Tolerance used for "is zero" decisions on eigenvalues.
    ///
    /// `1e-10` for `f64`; scaled with machine epsilon for narrower types.
    #[inline]
    fn spectral_tol() -> Self {
        let eps = Self::default_epsilon();
        let floor = Self::lit(1e-10);
        let scaled = eps * Self::lit(1e3);
        if scaled > floor {
            scaled
        } else {
            floor
        }
    }

    #[inline]
    fn infinity() -> Self {
        Self::lit(f64::INFINITY)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Max-abs norm of a slice; zero for an empty slice.
pub fn max_abs<T: Real>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}
