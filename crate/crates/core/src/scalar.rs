use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};
use serde::Serialize;

/// Floating-point scalar the geometric primitives are generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + Serialize + 'static
{
    /// Converts an `f64` literal, used for tolerances and constants.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Minkowski form `u1 v1 + ... + un vn - u_{n+1} v_{n+1}`.
#[inline]
pub fn lorentz_dot<T: Real>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    let k = a.len() - 1;
    let spatial = a[..k]
        .iter()
        .zip(&b[..k])
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y);
    spatial - a[k] * b[k]
}

#[inline]
pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `a + s * b`, allocating.
#[inline]
pub fn axpy<T: Real>(a: &[T], s: T, b: &[T]) -> Vec<T> {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(&x, &y)| x + s * y).collect()
}

#[inline]
pub fn scale<T: Real>(s: T, a: &[T]) -> Vec<T> {
    a.iter().map(|&x| s * x).collect()
}

#[inline]
pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    axpy(a, -T::one(), b)
}

/// Cross product in R^3.
#[inline]
pub fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Determinant of the 3x3 matrix with columns `a`, `b`, `c`.
#[inline]
pub fn det3(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let ab = cross3(a, b);
    ab[0] * c[0] + ab[1] * c[1] + ab[2] * c[2]
}
