//! Gnomonic projection area functionals on the sphere `S^n` and on hyperbolic
//! space `H^n`.
//!
//! For a region `Omega` and a tangent point `x`, the functional `A_Omega(x)` is
//! the Euclidean volume of the central projection of `Omega` onto the tangent
//! plane at `x`. The crate evaluates it and its Riemannian gradient, locates
//! critical points, and compares the extremal values with those of geodesic
//! discs of equal measure.

pub mod cli;
pub mod compare;
pub mod error;
pub mod functional;
pub mod geometry;
pub mod optimize;
pub mod projection;
pub mod quadrature;
pub mod regions;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use regions::{Cap, Domain, HCap, HIntervalSet, HPolygon, HRegion, Polygon, Region};

/// Double-precision sphere point; the type used by every numerical module.
pub type SpherePoint = geometry::SpherePoint<f64>;
/// Double-precision hyperboloid point.
pub type HyperPoint = geometry::HyperPoint<f64>;
pub type SpherePointF32 = geometry::SpherePoint<f32>;
pub type HyperPointF32 = geometry::HyperPoint<f32>;
pub type SphereTangent = geometry::TangentVec<SpherePoint>;
pub type HyperTangent = geometry::TangentVec<HyperPoint>;
