//! Points, tangent vectors and the Riemannian primitives of the unit sphere `S^n`
//! and of the Lorentz (hyperboloid) model `H^n`.
//!
//! Both manifolds are embedded in `R^{n+1}`. Sphere points have unit Euclidean
//! norm; hyperbolic points satisfy `<x,x> = -1` with positive last coordinate,
//! where `<u,v> = u1 v1 + ... + un vn - u_{n+1} v_{n+1}`. The dimension `n` is a
//! runtime property of every point and mixing dimensions panics.

use std::fmt::Debug;

use num_traits::{Float, One, Zero};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, lorentz_dot, norm, scale, Real};

/// Shared interface of manifold points.
pub trait Point: Clone + Debug + PartialEq + Send + Sync + Sized + Serialize {
    type Scalar: Real;

    fn coords(&self) -> &[Self::Scalar];

    /// Intrinsic dimension `n`.
    fn dim(&self) -> usize {
        self.coords().len() - 1
    }

    /// Ambient bilinear form whose restriction to tangent spaces is the metric.
    fn ambient_inner(a: &[Self::Scalar], b: &[Self::Scalar]) -> Self::Scalar;

    fn dist(&self, other: &Self) -> Self::Scalar;

    fn exp(&self, v: &TangentVec<Self>) -> Self;

    fn log(&self, other: &Self) -> TangentVec<Self>;

    /// Orthogonal projection of an ambient vector onto the tangent space.
    fn project(&self, w: &[Self::Scalar]) -> TangentVec<Self>;

    /// Deterministic orthonormal frame of the tangent space.
    fn tangent_frame(&self) -> Vec<Vec<Self::Scalar>>;

    /// Residual of the tangency condition for `v` at this point.
    fn tangent_defect(&self, v: &[Self::Scalar]) -> Self::Scalar {
        Self::ambient_inner(self.coords(), v).abs()
    }
}

fn tangent_tol<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(1e3))
}

fn check_finite<T: Real>(coords: &[T]) -> Result<()> {
    if coords.len() < 2 {
        return Err(Error::InvalidPoint(format!(
            "need at least 2 coordinates, got {}",
            coords.len()
        )));
    }
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidPoint("non-finite coordinate".into()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Sphere
// ---------------------------------------------------------------------------

/// Unit vector of `R^{n+1}`, i.e. a point of `S^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SpherePoint<T: Real> {
    coords: Vec<T>,
}

impl<T: Real> SpherePoint<T> {
    /// Normalizes `coords` onto the sphere. Fails on empty, zero or non-finite input.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        check_finite(&coords)?;
        let r = norm(&coords);
        if r <= T::min_positive_value() {
            return Err(Error::InvalidPoint("zero vector has no direction".into()));
        }
        Ok(Self {
            coords: coords.into_iter().map(|c| c / r).collect(),
        })
    }

    /// Standard basis vector `e_i` (zero based) of `S^n`.
    pub fn axis(n: usize, i: usize) -> Self {
        assert!(i <= n, "axis index out of range");
        let mut coords = vec![T::zero(); n + 1];
        coords[i] = T::one();
        Self { coords }
    }

    pub(crate) fn from_unit_unchecked(coords: Vec<T>) -> Self {
        Self { coords }
    }

    pub fn antipode(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|&c| -c).collect(),
        }
    }

    pub fn dot(&self, other: &Self) -> T {
        dot(&self.coords, &other.coords)
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for SpherePoint<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<T>::deserialize(d)?;
        SpherePoint::new(v).map_err(serde::de::Error::custom)
    }
}

impl<T: Real> Point for SpherePoint<T> {
    type Scalar = T;

    fn coords(&self) -> &[T] {
        &self.coords
    }

    fn ambient_inner(a: &[T], b: &[T]) -> T {
        dot(a, b)
    }

    fn dist(&self, other: &Self) -> T {
        dist_sphere(self, other)
    }

    fn exp(&self, v: &TangentVec<Self>) -> Self {
        exp_sphere(self, v)
    }

    fn log(&self, other: &Self) -> TangentVec<Self> {
        log_sphere(self, other)
    }

    fn project(&self, w: &[T]) -> TangentVec<Self> {
        project_tangent_sphere(self, w)
    }

    fn tangent_frame(&self) -> Vec<Vec<T>> {
        let x = &self.coords;
        let dim = x.len();
        // Drop the basis vector most aligned with x; the rest are well conditioned.
        let mut drop = 0;
        for i in 1..dim {
            if x[i].abs() > x[drop].abs() {
                drop = i;
            }
        }
        let mut frame: Vec<Vec<T>> = Vec::with_capacity(dim - 1);
        for j in (0..dim).filter(|&j| j != drop) {
            let mut w = vec![T::zero(); dim];
            w[j] = T::one();
            let wx = dot(&w, x);
            w = axpy(&w, -wx, x);
            for f in &frame {
                let c = dot(&w, f);
                w = axpy(&w, -c, f);
            }
            let r = norm(&w);
            frame.push(scale(T::one() / r, &w));
        }
        frame
    }
}

/// Great-circle distance in `[0, pi]`.
///
/// Equal to `acos(clamp(x.y))`; evaluated through the chord length so that
/// nearly coincident and nearly antipodal pairs keep full precision.
pub fn dist_sphere<T: Real>(x: &SpherePoint<T>, y: &SpherePoint<T>) -> T {
    let a = x.coords();
    let b = y.coords();
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    let two = T::lit(2.0);
    let c = dot(a, b).max(-T::one()).min(T::one());
    if c >= T::zero() {
        let chord = a
            .iter()
            .zip(b)
            .fold(T::zero(), |acc, (&p, &q)| acc + (p - q) * (p - q))
            .sqrt();
        two * (chord / two).min(T::one()).asin()
    } else {
        let chord = a
            .iter()
            .zip(b)
            .fold(T::zero(), |acc, (&p, &q)| acc + (p + q) * (p + q))
            .sqrt();
        T::PI() - two * (chord / two).min(T::one()).asin()
    }
}

/// Geodesic step `cos|v| x + sin|v| v/|v|`, renormalized onto the sphere.
pub fn exp_sphere<T: Real>(x: &SpherePoint<T>, v: &TangentVec<SpherePoint<T>>) -> SpherePoint<T> {
    assert_eq!(x.coords.len(), v.vec.len(), "dimension mismatch");
    let theta = norm(&v.vec);
    if theta == T::zero() {
        return x.clone();
    }
    let y: Vec<T> = x
        .coords
        .iter()
        .zip(&v.vec)
        .map(|(&p, &q)| theta.cos() * p + theta.sin() * q / theta)
        .collect();
    let r = norm(&y);
    SpherePoint {
        coords: y.into_iter().map(|c| c / r).collect(),
    }
}

/// Inverse of [`exp_sphere`]. Returns the zero vector for `y = x` and for `y = -x`,
/// where the logarithm is undefined.
pub fn log_sphere<T: Real>(x: &SpherePoint<T>, y: &SpherePoint<T>) -> TangentVec<SpherePoint<T>> {
    let u = project_tangent_sphere(x, y.coords());
    let un = norm(&u.vec);
    if un <= T::epsilon() * T::epsilon() {
        return TangentVec::zero(x.clone());
    }
    let d = dist_sphere(x, y);
    TangentVec {
        base: x.clone(),
        vec: scale(d / un, &u.vec),
    }
}

/// `w - (x.w) x`.
pub fn project_tangent_sphere<T: Real>(x: &SpherePoint<T>, w: &[T]) -> TangentVec<SpherePoint<T>> {
    let c = dot(&x.coords, w);
    TangentVec {
        base: x.clone(),
        vec: axpy(w, -c, &x.coords),
    }
}

// ---------------------------------------------------------------------------
// Hyperboloid
// ---------------------------------------------------------------------------

/// Point of the upper sheet `<x,x> = -1`, `x_{n+1} > 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct HyperPoint<T: Real> {
    coords: Vec<T>,
}

impl<T: Real> HyperPoint<T> {
    /// Rescales a future-timelike vector onto the hyperboloid.
    pub fn new(coords: Vec<T>) -> Result<Self> {
        check_finite(&coords)?;
        let q = lorentz_dot(&coords, &coords);
        let k = coords.len() - 1;
        if q >= T::zero() || coords[k] <= T::zero() {
            return Err(Error::InvalidPoint(
                "hyperbolic point must be future timelike (<x,x> < 0, last coordinate > 0)".into(),
            ));
        }
        let s = T::one() / (-q).sqrt();
        Ok(Self::from_spatial(&scale(s, &coords[..k])))
    }

    /// Lifts spatial coordinates `(x1..xn)` to the hyperboloid.
    pub fn from_spatial(spatial: &[T]) -> Self {
        let t = (T::one() + dot(spatial, spatial)).sqrt();
        let mut coords = spatial.to_vec();
        coords.push(t);
        Self { coords }
    }

    pub(crate) fn from_coords_unchecked(coords: Vec<T>) -> Self {
        Self { coords }
    }

    /// Base point `o = (0, ..., 0, 1)`.
    pub fn origin(n: usize) -> Self {
        let mut coords = vec![T::zero(); n + 1];
        coords[n] = T::one();
        Self { coords }
    }

    /// `(sinh theta, cosh theta)` on `H^1`; `theta` is arclength from the origin.
    pub fn from_theta(theta: T) -> Self {
        Self {
            coords: vec![theta.sinh(), theta.cosh()],
        }
    }

    pub fn lorentz(&self, other: &Self) -> T {
        lorentz_dot(&self.coords, &other.coords)
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for HyperPoint<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<T>::deserialize(d)?;
        HyperPoint::new(v).map_err(serde::de::Error::custom)
    }
}

impl<T: Real> Point for HyperPoint<T> {
    type Scalar = T;

    fn coords(&self) -> &[T] {
        &self.coords
    }

    fn ambient_inner(a: &[T], b: &[T]) -> T {
        lorentz_dot(a, b)
    }

    fn dist(&self, other: &Self) -> T {
        dist_hyp(self, other)
    }

    fn exp(&self, v: &TangentVec<Self>) -> Self {
        exp_hyp(self, v)
    }

    fn log(&self, other: &Self) -> TangentVec<Self> {
        log_hyp(self, other)
    }

    fn project(&self, w: &[T]) -> TangentVec<Self> {
        project_tangent_hyp(self, w)
    }

    fn tangent_frame(&self) -> Vec<Vec<T>> {
        let x = &self.coords;
        let dim = x.len();
        let mut frame: Vec<Vec<T>> = Vec::with_capacity(dim - 1);
        for j in 0..dim - 1 {
            let mut w = vec![T::zero(); dim];
            w[j] = T::one();
            let wx = lorentz_dot(x, &w);
            w = axpy(&w, wx, x);
            for f in &frame {
                let c = lorentz_dot(&w, f);
                w = axpy(&w, -c, f);
            }
            let r = lorentz_dot(&w, &w).sqrt();
            frame.push(scale(T::one() / r, &w));
        }
        frame
    }
}

/// `arccosh(max(-<x,y>, 1))`, evaluated through the Minkowski chord for short distances.
pub fn dist_hyp<T: Real>(x: &HyperPoint<T>, y: &HyperPoint<T>) -> T {
    let c = (-lorentz_dot(&x.coords, &y.coords)).max(T::one());
    if c < T::lit(2.0) {
        let d: Vec<T> = x
            .coords
            .iter()
            .zip(&y.coords)
            .map(|(&p, &q)| p - q)
            .collect();
        let q = lorentz_dot(&d, &d).max(T::zero());
        T::lit(2.0) * (q.sqrt() / T::lit(2.0)).asinh()
    } else {
        c.acosh()
    }
}

/// Geodesic step `cosh|v| x + sinh|v| v/|v|`, renormalized onto the hyperboloid.
pub fn exp_hyp<T: Real>(x: &HyperPoint<T>, v: &TangentVec<HyperPoint<T>>) -> HyperPoint<T> {
    assert_eq!(x.coords.len(), v.vec.len(), "dimension mismatch");
    let theta = lorentz_dot(&v.vec, &v.vec).max(T::zero()).sqrt();
    if theta == T::zero() {
        return x.clone();
    }
    let k = x.coords.len() - 1;
    let spatial: Vec<T> = x.coords[..k]
        .iter()
        .zip(&v.vec[..k])
        .map(|(&p, &q)| theta.cosh() * p + theta.sinh() * q / theta)
        .collect();
    HyperPoint::from_spatial(&spatial)
}

/// Inverse of [`exp_hyp`].
pub fn log_hyp<T: Real>(x: &HyperPoint<T>, y: &HyperPoint<T>) -> TangentVec<HyperPoint<T>> {
    let u = project_tangent_hyp(x, y.coords());
    let un = lorentz_dot(&u.vec, &u.vec).max(T::zero()).sqrt();
    if un <= T::epsilon() * T::epsilon() {
        return TangentVec::zero(x.clone());
    }
    let d = dist_hyp(x, y);
    TangentVec {
        base: x.clone(),
        vec: scale(d / un, &u.vec),
    }
}

/// `w + <x,w> x`, the Lorentz-orthogonal projection onto `T_x H^n`.
pub fn project_tangent_hyp<T: Real>(x: &HyperPoint<T>, w: &[T]) -> TangentVec<HyperPoint<T>> {
    let c = lorentz_dot(&x.coords, w);
    TangentVec {
        base: x.clone(),
        vec: axpy(w, c, &x.coords),
    }
}

// ---------------------------------------------------------------------------
// Tangent vectors
// ---------------------------------------------------------------------------

/// Vector `vec` in the tangent space at `base`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct TangentVec<P: Point> {
    base: P,
    #[serde(serialize_with = "serialize_vec")]
    vec: Vec<P::Scalar>,
}

fn serialize_vec<S: serde::Serializer, T: Real>(
    v: &[T],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_f64())?;
    }
    seq.end()
}

impl<P: Point> TangentVec<P> {
    /// Checks `|<base, vec>| <= 1e-10 |vec|_E`.
    pub fn new(base: P, vec: Vec<P::Scalar>) -> Result<Self> {
        if vec.len() != base.coords().len() {
            return Err(Error::DimensionMismatch {
                expected: base.coords().len(),
                got: vec.len(),
            });
        }
        let defect = base.tangent_defect(&vec);
        if defect > tangent_tol::<P::Scalar>() * norm(&vec) {
            return Err(Error::InvalidPoint(format!(
                "vector is not tangent at its base point (defect {defect:?})"
            )));
        }
        Ok(Self { base, vec })
    }

    pub fn zero(base: P) -> Self {
        let vec = vec![P::Scalar::zero(); base.coords().len()];
        Self { base, vec }
    }

    pub fn base(&self) -> &P {
        &self.base
    }

    pub fn vec(&self) -> &[P::Scalar] {
        &self.vec
    }

    pub fn into_vec(self) -> Vec<P::Scalar> {
        self.vec
    }

    /// Riemannian norm.
    pub fn norm(&self) -> P::Scalar {
        P::ambient_inner(&self.vec, &self.vec)
            .max(P::Scalar::zero())
            .sqrt()
    }

    /// Euclidean norm of the ambient coordinates.
    pub fn euclidean_norm(&self) -> P::Scalar {
        norm(&self.vec)
    }

    pub fn inner(&self, other: &Self) -> P::Scalar {
        P::ambient_inner(&self.vec, &other.vec)
    }

    pub fn scaled(&self, s: P::Scalar) -> Self {
        Self {
            base: self.base.clone(),
            vec: scale(s, &self.vec),
        }
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn unit(&self) -> Option<Self> {
        let r = self.norm();
        (r > P::Scalar::zero()).then(|| self.scaled(P::Scalar::one() / r))
    }

    pub fn is_tangent(&self) -> bool {
        self.base.tangent_defect(&self.vec) <= tangent_tol::<P::Scalar>() * norm(&self.vec)
    }
}
