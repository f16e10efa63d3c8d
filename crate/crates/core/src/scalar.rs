//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar (`f32` or `f64`) the operators are built over.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` constant, which always succeeds for the float types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("float literal conversion")
    }

    /// A relative tolerance floored at a small multiple of machine epsilon, so
    /// thresholds written for double precision remain meaningful in `f32`.
    fn tol(x: f64) -> Self {
        let floor = Self::default_epsilon() * Self::lit(64.0);
        let t = Self::lit(x);
        if t < floor {
            floor
        } else {
            t
        }
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("float to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex amplitude over a real scalar.
pub type Cplx<T> = Complex<T>;

#[allow(dead_code)]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Cplx<T> {
    Complex::new(re, im)
}

pub(crate) fn creal<T: Real>(re: T) -> Cplx<T> {
    Complex::new(re, T::zero())
}

/// `|z|²` without the square root.
pub(crate) fn norm_sqr<T: Real>(z: &Cplx<T>) -> T {
    z.re * z.re + z.im * z.im
}

pub(crate) fn abs<T: Real>(z: &Cplx<T>) -> T {
    norm_sqr(z).sqrt()
}
