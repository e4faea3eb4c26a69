//! Scalar abstraction shared by every numerical module.
//!
//! All engines are written against [`Real`] so they can be instantiated at
//! `f32` or `f64`. The tolerances quoted throughout the crate assume `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

use crate::tensornet::Factorize;

/// Floating point type usable by the engines.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Factorize
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot
    /// represent finite literals, which never happens for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("representable count")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over `R`.
pub type Cplx<R> = Complex<R>;

#[inline]
pub fn cplx<R: Real>(re: R, im: R) -> Cplx<R> {
    Complex::new(re, im)
}

#[inline]
pub fn czero<R: Real>() -> Cplx<R> {
    Complex::new(R::zero(), R::zero())
}

#[inline]
pub fn cone<R: Real>() -> Cplx<R> {
    Complex::new(R::one(), R::zero())
}

/// `x·coth(x)`, finite at the origin.
///
/// Below `|x| < 1e-4` the two-term Laurent expansion `1 + x²/3` is used.
pub fn x_coth_x<R: Real>(x: R) -> R {
    let ax = x.abs();
    if ax < R::lit(1e-4) {
        R::one() + x * x / R::lit(3.0)
    } else if ax > R::lit(40.0) {
        ax
    } else {
        x / x.tanh()
    }
}

/// `coth(x)` for `x > 0`, using the Laurent expansion near the origin.
pub fn coth<R: Real>(x: R) -> R {
    if x.abs() < R::lit(1e-4) {
        R::one() / x + x / R::lit(3.0)
    } else {
        R::one() / x.tanh()
    }
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc<R: Real>(x: R) -> R {
    if x.abs() < R::lit(1e-4) {
        R::one() - x * x / R::lit(6.0)
    } else {
        x.sin() / x
    }
}

/// `(1 - cos x)/x²`, equal to `sinc²(x/2)/2`.
pub fn one_minus_cos_over_sq<R: Real>(x: R) -> R {
    let s = sinc(x / R::lit(2.0));
    s * s / R::lit(2.0)
}

/// `(sin x - x)/x`, which vanishes like `-x²/6` at the origin.
pub fn sin_minus_id_over<R: Real>(x: R) -> R {
    if x.abs() < R::lit(1e-2) {
        let x2 = x * x;
        -x2 / R::lit(6.0) + x2 * x2 / R::lit(120.0) - x2 * x2 * x2 / R::lit(5040.0)
    } else {
        (x.sin() - x) / x
    }
}

/// Bose occupation `1/(e^{βω} - 1)`.
pub fn bose<R: Real>(beta_omega: R) -> R {
    R::one() / beta_omega.exp_m1()
}
