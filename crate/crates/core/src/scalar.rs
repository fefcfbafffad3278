//! Floating-point abstraction shared by every module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Scalar type the geometry engine is generic over (`f32` or `f64`).
///
/// Finite-difference step sizes depend on the unit roundoff, so each
/// implementation carries its own defaults.
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Default step for first derivatives of chart maps.
    fn first_step() -> Self;
    /// Default step for second derivatives of chart maps.
    fn second_step() -> Self;
    /// Default outer step when differentiating per-point shape data.
    fn stencil_step() -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Converts a count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

impl Real for f64 {
    fn first_step() -> Self {
        1e-3
    }
    fn second_step() -> Self {
        // 10^-2.5
        3.162_277_660_168_379_5e-3
    }
    fn stencil_step() -> Self {
        1e-2
    }
}

impl Real for f32 {
    fn first_step() -> Self {
        4e-2
    }
    fn second_step() -> Self {
        7e-2
    }
    fn stencil_step() -> Self {
        1.5e-1
    }
}

/// `sin(w s) / w`, continuous through `w = 0`.
pub fn sin_over<T: Real>(w: T, s: T) -> T {
    let x = w * s;
    if x.abs() < T::lit(1e-4) {
        let x2 = x * x;
        s * (T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0))
    } else {
        x.sin() / w
    }
}

/// `sin(x) / x`, continuous through `x = 0`.
pub fn sinc<T: Real>(x: T) -> T {
    sin_over(x, T::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_over_is_continuous_at_zero() {
        let s = 0.7_f64;
        assert_eq!(sin_over(0.0, s), s);
        let w = 1.3e-4;
        assert!((sin_over(w, s) - (w * s).sin() / w).abs() < 1e-15);
        let w = 2e-4;
        assert!((sin_over(w, s) - (w * s).sin() / w).abs() < 1e-15);
        assert!((sinc(1e-6_f64) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn steps_are_ordered() {
        assert!(f64::first_step() < f64::second_step());
        assert!(f64::second_step() < f64::stencil_step());
        assert!(f32::first_step() < f32::second_step());
    }
}
