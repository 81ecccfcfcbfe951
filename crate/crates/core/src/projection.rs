//! Central projection of `S^n` onto tangent planes and its hyperbolic analogue,
//! with the exact image areas of polygons and caps.
//!
//! On the sphere `p_x(y) = y / (x . y)`; on the hyperboloid
//! `p_x(y) = -y / <x, y>`, the Beltrami-Klein chart. Both send geodesics to
//! straight lines, so polygon images are Euclidean polygons.

use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{HyperPoint, Point, SpherePoint};
use crate::regions::{feasibility_margin, Cap, HPolygon, Polygon, Region};
use crate::scalar::{cross3, dot, lorentz_dot, Real};

/// Hemisphere guard on `x . y`.
pub const HEMISPHERE_EPS: f64 = 1e-9;

/// `p_x(y) - x` in the tangent frame at `base`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartPoint<P: Point> {
    pub base: P,
    pub coords: Vec<P::Scalar>,
}

impl<P: Point> ChartPoint<P> {
    pub fn norm(&self) -> P::Scalar {
        dot(&self.coords, &self.coords).sqrt()
    }
}

fn lift<T: Real>(frame: &[Vec<T>], coords: &[T], m: usize) -> Vec<T> {
    assert_eq!(frame.len(), coords.len(), "dimension mismatch");
    let mut out = vec![T::zero(); m];
    for (f, &c) in frame.iter().zip(coords) {
        for (o, &fj) in out.iter_mut().zip(f) {
            *o = *o + c * fj;
        }
    }
    out
}

pub fn gnomonic_fwd<T: Real>(
    x: &SpherePoint<T>,
    y: &SpherePoint<T>,
) -> Result<ChartPoint<SpherePoint<T>>> {
    let d = x.dot(y);
    if d <= T::lit(HEMISPHERE_EPS) {
        return Err(Error::OutsideHemisphere {
            dot: d.to_f64().unwrap_or(f64::NAN),
        });
    }
    let coords = x
        .tangent_frame()
        .iter()
        .map(|f| dot(f, y.coords()) / d)
        .collect();
    Ok(ChartPoint {
        base: x.clone(),
        coords,
    })
}

/// `(x + U) / sqrt(1 + |u|^2)`; the chart is interpreted at `x`.
pub fn gnomonic_inv<T: Real>(x: &SpherePoint<T>, u: &ChartPoint<SpherePoint<T>>) -> SpherePoint<T> {
    debug_assert_eq!(&u.base, x, "chart point based elsewhere");
    let m = x.coords().len();
    let lifted = lift(&x.tangent_frame(), &u.coords, m);
    let s = (T::one() + dot(&u.coords, &u.coords)).sqrt();
    let c = x
        .coords()
        .iter()
        .zip(&lifted)
        .map(|(&a, &b)| (a + b) / s)
        .collect();
    SpherePoint::new(c).expect("lifted chart point is nonzero")
}

/// `(x . y)^{-(n+1)}`.
pub fn jacobian_sphere<T: Real>(x: &SpherePoint<T>, y: &SpherePoint<T>) -> Result<T> {
    let d = x.dot(y);
    if d <= T::lit(HEMISPHERE_EPS) {
        return Err(Error::OutsideHemisphere {
            dot: d.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(d.powi(-(x.dim() as i32 + 1)))
}

pub fn hyp_fwd<T: Real>(x: &HyperPoint<T>, y: &HyperPoint<T>) -> ChartPoint<HyperPoint<T>> {
    let s = -T::one() / x.lorentz(y);
    let coords = x
        .tangent_frame()
        .iter()
        .map(|f| s * lorentz_dot(f, y.coords()))
        .collect();
    ChartPoint {
        base: x.clone(),
        coords,
    }
}

/// `(x + U) / sqrt(1 - |u|^2)`, defined on the open unit ball.
pub fn hyp_inv<T: Real>(x: &HyperPoint<T>, u: &ChartPoint<HyperPoint<T>>) -> Result<HyperPoint<T>> {
    let r2 = dot(&u.coords, &u.coords);
    if r2 >= T::one() {
        return Err(Error::InvalidPoint(
            "Klein chart coordinates must have norm < 1".into(),
        ));
    }
    let m = x.coords().len();
    let lifted = lift(&x.tangent_frame(), &u.coords, m);
    let s = (T::one() - r2).sqrt();
    let c = x
        .coords()
        .iter()
        .zip(&lifted)
        .map(|(&a, &b)| (a + b) / s)
        .collect();
    HyperPoint::new(c)
}

/// `(-<x, y>)^{-(n+1)}`.
pub fn jacobian_hyp<T: Real>(x: &HyperPoint<T>, y: &HyperPoint<T>) -> T {
    (-x.lorentz(y)).powi(-(x.dim() as i32 + 1))
}

/// Shoelace area of the projected vertex loop and its Euclidean gradient in `x`.
///
/// With `a, b` consecutive vertices and `w = a x b`, each edge contributes
/// `(x . w) / (2 (x . a)(x . b))`.
pub fn polygon_image_area_with_grad(
    x: &crate::SpherePoint,
    p: &Polygon,
) -> Result<(f64, Vec<f64>)> {
    let margin = feasibility_margin(&Region::Polygon(p.clone()), x);
    if margin <= HEMISPHERE_EPS {
        return Err(Error::OutsideHemisphere { dot: margin });
    }
    Ok(shoelace_sphere(x.coords(), p.vertices()))
}

pub(crate) fn shoelace_sphere(z: &[f64], verts: &[crate::SpherePoint]) -> (f64, Vec<f64>) {
    let k = verts.len();
    let mut area = 0.0;
    let mut grad = [0.0; 3];
    for i in 0..k {
        let a = verts[i].coords();
        let b = verts[(i + 1) % k].coords();
        let w = cross3(a, b);
        let (al, be, zw) = (dot(z, a), dot(z, b), dot(z, &w));
        area += zw / (al * be);
        for j in 0..3 {
            grad[j] += w[j] / (al * be) - zw * a[j] / (al * al * be) - zw * b[j] / (al * be * be);
        }
    }
    (0.5 * area, grad.iter().map(|g| 0.5 * g).collect())
}

/// Exact `A_p(x)` for a spherical polygon.
pub fn polygon_image_area(x: &crate::SpherePoint, p: &Polygon) -> Result<f64> {
    Ok(polygon_image_area_with_grad(x, p)?.0)
}

/// Shoelace area in the Klein chart at `x` and the Euclidean gradient of the
/// homogeneous extension `sum det(a, b, z) / (2 <z, a><z, b>)`.
pub fn hyp_polygon_image_area_with_grad(x: &crate::HyperPoint, p: &HPolygon) -> (f64, Vec<f64>) {
    let z = x.coords();
    let verts = p.vertices();
    let k = verts.len();
    let mut area = 0.0;
    let mut grad = [0.0; 3];
    for i in 0..k {
        let a = verts[i].coords();
        let b = verts[(i + 1) % k].coords();
        let w = cross3(a, b);
        let (al, be, zw) = (lorentz_dot(z, a), lorentz_dot(z, b), dot(z, &w));
        area += zw / (al * be);
        // d<z,a>/dz = J a with J = diag(1, 1, -1)
        let ja = [a[0], a[1], -a[2]];
        let jb = [b[0], b[1], -b[2]];
        for j in 0..3 {
            grad[j] += w[j] / (al * be) - zw * ja[j] / (al * al * be) - zw * jb[j] / (al * be * be);
        }
    }
    (0.5 * area, grad.iter().map(|g| 0.5 * g).collect())
}

/// Exact `A_p(x)` for a hyperbolic polygon.
pub fn hyp_polygon_image_area(x: &crate::HyperPoint, p: &HPolygon) -> f64 {
    hyp_polygon_image_area_with_grad(x, p).0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConicKind {
    Ellipse,
    Parabola,
    HyperbolaBranch,
    /// The cap contains the whole open hemisphere of the base point.
    WholePlane,
}

/// Image of a cap in the tangent plane of `x`, `S^2` only.
///
/// `center` and `orientation` are chart coordinates; the first semi-axis lies
/// along `orientation`, the direction towards the cap centre. For a parabola
/// `center` is the vertex and both semi-axes are infinite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConicImage {
    pub kind: ConicKind,
    pub center: [f64; 2],
    pub semi_axes: (f64, f64),
    pub orientation: f64,
}

fn cap_angles(x: &crate::SpherePoint, c: &Cap) -> (f64, f64, f64) {
    let psi = x.dist(c.center());
    let frame = x.tangent_frame();
    let toward: Vec<f64> = frame.iter().map(|f| dot(f, c.center().coords())).collect();
    let orientation = if toward[0].hypot(toward[1]) > 1e-15 {
        toward[1].atan2(toward[0])
    } else {
        0.0
    };
    (psi, c.radius(), orientation)
}

/// From `(cos psi + s sin psi)^2 = cos^2 alpha (1 + s^2 + t^2)`, with `s` along the
/// direction to the cap centre.
pub fn cap_image_conic(x: &crate::SpherePoint, c: &Cap) -> Result<ConicImage> {
    if x.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: x.dim(),
        });
    }
    let (psi, alpha, theta) = cap_angles(x, c);
    let (sp, cp) = psi.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    let k = ca * ca - sp * sp;
    let place = |s: f64| [s * theta.cos(), s * theta.sin()];
    let slack = psi + alpha - std::f64::consts::FRAC_PI_2;
    let image = if slack.abs() <= 1e-12 {
        let vertex = -(cp * cp - ca * ca) / (2.0 * sp * cp);
        ConicImage {
            kind: ConicKind::Parabola,
            center: place(vertex),
            semi_axes: (f64::INFINITY, f64::INFINITY),
            orientation: theta,
        }
    } else if slack < 0.0 {
        ConicImage {
            kind: ConicKind::Ellipse,
            center: place(sp * cp / k),
            semi_axes: (ca * sa / k, sa / k.sqrt()),
            orientation: theta,
        }
    } else if k < 0.0 {
        ConicImage {
            kind: ConicKind::HyperbolaBranch,
            center: place(sp * cp / k),
            semi_axes: (ca.abs() * sa / -k, sa / (-k).sqrt()),
            orientation: theta,
        }
    } else {
        ConicImage {
            kind: ConicKind::WholePlane,
            center: [0.0, 0.0],
            semi_axes: (f64::INFINITY, f64::INFINITY),
            orientation: theta,
        }
    };
    Ok(image)
}

/// `pi a b = pi cos(alpha) sin^2(alpha) / K^{3/2}` with `K = cos^2 alpha - sin^2 psi`.
pub fn cap_image_area(x: &crate::SpherePoint, c: &Cap) -> Result<f64> {
    let conic = cap_image_conic(x, c)?;
    if conic.kind != ConicKind::Ellipse {
        let (psi, alpha, _) = cap_angles(x, c);
        return Err(Error::OutsideHemisphere {
            dot: (psi + alpha).cos(),
        });
    }
    let (psi, alpha, _) = cap_angles(x, c);
    let (sa, ca) = alpha.sin_cos();
    let sp = psi.sin();
    let k = ca * ca - sp * sp;
    Ok(std::f64::consts::PI * ca * sa * sa / k.powf(1.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    type S = crate::SpherePoint;
    type H = crate::HyperPoint;

    fn sp(c: &[f64]) -> S {
        S::new(c.to_vec()).unwrap()
    }

    #[test]
    fn forward_examples() {
        let e1 = S::axis(2, 0);
        assert_eq!(gnomonic_fwd(&e1, &e1).unwrap().coords, vec![0.0, 0.0]);
        let y = sp(&[1., 1., 0.]);
        let u = gnomonic_fwd(&e1, &y).unwrap();
        assert_relative_eq!(u.coords[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(u.coords[1], 0.0, epsilon = 1e-15);
        assert!(matches!(
            gnomonic_fwd(&e1, &S::axis(2, 1)),
            Err(Error::OutsideHemisphere { .. })
        ));
        let back = gnomonic_inv(&e1, &u);
        assert_relative_eq!(back.coords()[0], FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(back.coords()[1], FRAC_1_SQRT_2, epsilon = 1e-15);
        let zero = ChartPoint {
            base: e1.clone(),
            coords: vec![0.0, 0.0],
        };
        assert_eq!(gnomonic_inv(&e1, &zero), e1);
    }

    #[test]
    fn jacobian_examples() {
        let e1 = S::axis(2, 0);
        assert_eq!(jacobian_sphere(&e1, &e1).unwrap(), 1.0);
        let y = sp(&[1., 1., 0.]);
        assert_relative_eq!(
            jacobian_sphere(&e1, &y).unwrap(),
            2.0 * 2f64.sqrt(),
            epsilon = 1e-14
        );
        let e1 = S::axis(1, 0);
        assert_relative_eq!(
            jacobian_sphere(&e1, &sp(&[1., 1.])).unwrap(),
            2.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn hyperbolic_chart() {
        let o = H::origin(1);
        let y = H::from_theta(1.0);
        let u = hyp_fwd(&o, &y);
        assert_relative_eq!(u.norm(), 1f64.tanh(), epsilon = 1e-15);
        assert_eq!(hyp_fwd(&y, &y).norm(), 0.0);
        let back = hyp_inv(&o, &u).unwrap();
        assert!(back.dist(&y) < 1e-12);
        assert_relative_eq!(jacobian_hyp(&o, &y), 1f64.cosh().powi(-2), epsilon = 1e-15);
    }

    #[test]
    fn octant_image_is_equilateral() {
        let x = sp(&[1., 1., 1.]);
        let p = match Region::polygon(vec![S::axis(2, 0), S::axis(2, 1), S::axis(2, 2)]).unwrap() {
            Region::Polygon(p) => p,
            _ => unreachable!(),
        };
        assert_relative_eq!(
            polygon_image_area(&x, &p).unwrap(),
            1.5 * 3f64.sqrt(),
            epsilon = 1e-13
        );
        assert!(matches!(
            polygon_image_area(&S::axis(2, 2), &p),
            Err(Error::OutsideHemisphere { .. })
        ));
    }

    #[test]
    fn centred_cap_is_a_circle() {
        let x = S::axis(2, 2);
        for i in 1..=14 {
            let a = 0.1 * i as f64;
            let cap = Cap::new(x.clone(), a).unwrap();
            let conic = cap_image_conic(&x, &cap).unwrap();
            assert_eq!(conic.kind, ConicKind::Ellipse);
            assert_relative_eq!(conic.semi_axes.0, a.tan(), max_relative = 1e-14);
            assert_relative_eq!(conic.semi_axes.1, a.tan(), max_relative = 1e-14);
            assert_relative_eq!(
                cap_image_area(&x, &cap).unwrap(),
                PI * a.tan().powi(2),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn conic_classification() {
        let x = S::axis(2, 2);
        let at = |psi: f64| sp(&[psi.sin(), 0.0, psi.cos()]);
        let para = cap_image_conic(&x, &Cap::new(at(PI / 6.0), PI / 3.0).unwrap()).unwrap();
        assert_eq!(para.kind, ConicKind::Parabola);
        let hyp = cap_image_conic(&x, &Cap::new(at(1.0), 1.0).unwrap()).unwrap();
        assert_eq!(hyp.kind, ConicKind::HyperbolaBranch);
        let whole = cap_image_conic(&x, &Cap::new(at(0.2), 2.0).unwrap()).unwrap();
        assert_eq!(whole.kind, ConicKind::WholePlane);
        assert!(cap_image_area(&x, &Cap::new(at(1.0), 1.0).unwrap()).is_err());
    }

    #[test]
    fn ellipse_boundary_points_lie_on_the_cap_circle() {
        let x = S::axis(2, 2);
        let (psi, alpha) = (PI / 6.0, PI / 4.0);
        let c = sp(&[psi.sin(), 0.0, psi.cos()]);
        let cap = Cap::new(c.clone(), alpha).unwrap();
        let e = cap_image_conic(&x, &cap).unwrap();
        let (ct, st) = (e.orientation.cos(), e.orientation.sin());
        for i in 0..16 {
            let t = 2.0 * PI * i as f64 / 16.0;
            let (p, q) = (e.semi_axes.0 * t.cos(), e.semi_axes.1 * t.sin());
            let u = vec![e.center[0] + p * ct - q * st, e.center[1] + p * st + q * ct];
            let y = gnomonic_inv(
                &x,
                &ChartPoint {
                    base: x.clone(),
                    coords: u,
                },
            );
            assert_relative_eq!(y.dist(&c), alpha, epsilon = 1e-12);
        }
    }

    #[test]
    fn hyperbolic_polygon_shrinks_to_its_measure() {
        let o = H::origin(2);
        for t in [1e-2, 1e-3] {
            let v = vec![
                H::from_spatial(&[0.0, 0.0]),
                H::from_spatial(&[t, 0.0]),
                H::from_spatial(&[0.0, t]),
            ];
            let p = HPolygon::new(v).unwrap();
            let ratio = hyp_polygon_image_area(&o, &p) / p.measure();
            assert!((ratio - 1.0).abs() < 10.0 * t);
        }
    }
}
