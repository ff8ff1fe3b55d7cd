//! Scalar abstraction shared by every numerical module.

use std::fmt::{Display, LowerExp};

use ndarray::Array2;
use ndarray_linalg::Eig;
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Eigenvalues and right eigenvectors (as matrix columns).
pub type Eigensystem<T> = (Vec<Complex<T>>, Array2<Complex<T>>);

/// Real floating-point scalar the library is generic over (`f32` or `f64`).
///
/// Besides the usual float arithmetic this carries the dense eigenvalue
/// kernel, which is backed by LAPACK's `?geev` for both precisions.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Display
    + LowerExp
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Eigenvalues and right eigenvectors (as columns) of a square complex matrix.
    fn eig_kernel(matrix: &Array2<Complex<Self>>) -> Result<Eigensystem<Self>>;

    /// Unit roundoff of the type.
    fn unit_roundoff() -> Self {
        Self::epsilon()
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn eig_kernel(matrix: &Array2<Complex<Self>>) -> Result<Eigensystem<Self>> {
                let (values, vectors) = matrix
                    .eig()
                    .map_err(|e| Error::NoConvergence(e.to_string()))?;
                Ok((values.to_vec(), vectors))
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Converts an `f64` literal into the working precision.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in working precision")
}

/// Converts a working-precision value to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `ln sech x`, stable for large `|x|`.
#[inline]
pub fn ln_sech<T: Real>(x: T) -> T {
    let ax = x.abs();
    // ln cosh x = |x| + ln(1 + e^{-2|x|}) - ln 2
    -(ax + (-(ax + ax)).exp().ln_1p() - T::LN_2())
}

/// `sech^p x` evaluated as `exp(p ln sech x)`; `sech x > 0` so no branch issue.
#[inline]
pub fn sech_pow<T: Real>(x: T, p: T) -> T {
    (p * ln_sech(x)).exp()
}

/// `|z|^q` from the modulus alone, with `0^q = 0` for `q > 0`.
#[inline]
pub fn modulus_pow<T: Real>(modulus: T, q: T) -> T {
    if modulus == T::zero() {
        if q > T::zero() {
            T::zero()
        } else {
            T::one()
        }
    } else {
        (q * modulus.ln()).exp()
    }
}

/// Relative difference `|a - b| / max(|a|, |b|, tiny)`.
pub fn rel_diff<T: Real>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs()).max(T::min_positive_value());
    (a - b).abs() / scale
}
