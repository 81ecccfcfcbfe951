use std::f64::consts::PI;

use super::sampling::{check_disjoint, SampleStats, Sampler};
use super::{cap_measure, Domain};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::{cross3, det3, dot, norm};
use crate::SpherePoint;

/// Closed geodesic ball `{y : d(c, y) <= r}` with `0 < r < pi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cap {
    center: SpherePoint,
    radius: f64,
    cos_r: f64,
}

impl Cap {
    pub fn new(center: SpherePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < PI) {
            return Err(Error::InvalidRegion(format!(
                "cap radius must lie in (0, pi), got {radius}"
            )));
        }
        Ok(Self {
            center,
            radius,
            cos_r: radius.cos(),
        })
    }

    pub fn center(&self) -> &SpherePoint {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn measure(&self) -> f64 {
        cap_measure(self.dim(), self.radius)
    }

    pub fn contains(&self, y: &SpherePoint) -> bool {
        self.center.dot(y) >= self.cos_r
    }
}

#[derive(Clone, Debug)]
struct Edge {
    a: [f64; 3],
    b: [f64; 3],
    normal: [f64; 3],
}

/// Region bounded by a simple closed loop of minor great-circle arcs on `S^2`.
///
/// The region is the side to the left of the direction of travel, seen from
/// outside the sphere; a small counter-clockwise loop encloses its interior.
#[derive(Clone, Debug)]
pub struct Polygon {
    vertices: Vec<SpherePoint>,
    edges: Vec<Edge>,
    measure: f64,
}

fn arr(p: &SpherePoint) -> [f64; 3] {
    let c = p.coords();
    [c[0], c[1], c[2]]
}

fn normalized(v: [f64; 3]) -> [f64; 3] {
    let n = norm(&v);
    [v[0] / n, v[1] / n, v[2] / n]
}

fn add(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Strict crossing of the minor arcs `ab` and `cd`.
fn arcs_cross(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3], d: &[f64; 3]) -> bool {
    let n1 = cross3(a, b);
    let n2 = cross3(c, d);
    if dot(&n1, c) * dot(&n1, d) >= 0.0 || dot(&n2, a) * dot(&n2, b) >= 0.0 {
        return false;
    }
    let q = cross3(&n1, &n2);
    let s1 = dot(&q, &add(a, b));
    let s2 = dot(&q, &add(c, d));
    s1 * s2 > 0.0
}

/// Interior angle at `v` of a left-hand region, in `(0, 2 pi)`.
fn interior_angle(prev: &[f64; 3], v: &[f64; 3], next: &[f64; 3]) -> f64 {
    let s = det3(next, prev, v);
    let c = dot(next, prev) - dot(v, next) * dot(v, prev);
    let t = s.atan2(c);
    if t <= 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

impl Polygon {
    pub fn new(vertices: Vec<SpherePoint>) -> Result<Self> {
        let k = vertices.len();
        if k < 3 {
            return Err(Error::InvalidRegion(format!(
                "polygon needs at least 3 vertices, got {k}"
            )));
        }
        for v in &vertices {
            if v.dim() != 2 {
                return Err(Error::InvalidRegion(format!(
                    "spherical polygons are supported on S^2 only, got a vertex on S^{}",
                    v.dim()
                )));
            }
        }
        let pts: Vec<[f64; 3]> = vertices.iter().map(arr).collect();
        for i in 0..k {
            for j in (i + 1)..k {
                if dot(&pts[i], &pts[j]) > 1.0 - 1e-14 {
                    return Err(Error::InvalidRegion(format!(
                        "vertices {i} and {j} coincide"
                    )));
                }
            }
            if dot(&pts[i], &pts[(i + 1) % k]) < -1.0 + 1e-12 {
                return Err(Error::InvalidRegion(format!(
                    "vertices {i} and {} are antipodal",
                    (i + 1) % k
                )));
            }
        }
        let edges: Vec<Edge> = (0..k)
            .map(|i| {
                let a = pts[i];
                let b = pts[(i + 1) % k];
                Edge {
                    a,
                    b,
                    normal: cross3(&a, &b),
                }
            })
            .collect();
        for i in 0..k {
            for j in (i + 2)..k {
                if i == 0 && j == k - 1 {
                    continue;
                }
                let (e, f) = (&edges[i], &edges[j]);
                if arcs_cross(&e.a, &e.b, &f.a, &f.b) {
                    return Err(Error::InvalidRegion(format!(
                        "polygon is not simple: edges {i} and {j} cross"
                    )));
                }
            }
        }
        let mut angle_sum = 0.0;
        for i in 0..k {
            let t = interior_angle(&pts[(i + k - 1) % k], &pts[i], &pts[(i + 1) % k]);
            if !(1e-12..=2.0 * PI - 1e-12).contains(&t) {
                return Err(Error::InvalidRegion(format!(
                    "polygon folds back on itself at vertex {i}"
                )));
            }
            angle_sum += t;
        }
        let excess = angle_sum - (k as f64 - 2.0) * PI;
        let measure = refine_measure(&pts, excess);
        if !(measure > 0.0 && measure < 4.0 * PI) {
            return Err(Error::InvalidRegion(format!(
                "polygon has degenerate area {measure}"
            )));
        }
        Ok(Self {
            vertices,
            edges,
            measure,
        })
    }

    pub fn vertices(&self) -> &[SpherePoint] {
        &self.vertices
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn contains(&self, y: &SpherePoint) -> bool {
        self.contains_coords(&arr(y))
    }

    /// The fan sum seen from `c` equals the area, less `4 pi` when `-c` is inside.
    pub(crate) fn contains_coords(&self, y: &[f64; 3]) -> bool {
        let anti = [-y[0], -y[1], -y[2]];
        fan_sum(&anti, self.edges.iter().map(|e| (&e.a, &e.b))) < self.measure - 2.0 * PI
    }

    /// Minimum of `x . y` over the polygon.
    fn min_dot(&self, x: &[f64; 3]) -> f64 {
        let anti = [-x[0], -x[1], -x[2]];
        if self.contains_coords(&anti) {
            return -1.0;
        }
        let mut m = f64::INFINITY;
        for e in &self.edges {
            let ca = dot(x, &e.a);
            m = m.min(ca);
            let ab = dot(&e.a, &e.b);
            let u = [
                e.b[0] - ab * e.a[0],
                e.b[1] - ab * e.a[1],
                e.b[2] - ab * e.a[2],
            ];
            let u = normalized(u);
            let len = norm(&e.normal).atan2(ab);
            let cb = dot(x, &u);
            let mut t = cb.atan2(ca) + PI;
            if t >= 2.0 * PI {
                t -= 2.0 * PI;
            }
            if t <= len {
                m = m.min(-ca.hypot(cb));
            }
        }
        m
    }
}

/// Sum of signed areas of the triangles `(c, a, b)` over the edges `ab`.
fn fan_sum<'a>(c: &[f64; 3], edges: impl Iterator<Item = (&'a [f64; 3], &'a [f64; 3])>) -> f64 {
    edges
        .map(|(a, b)| {
            let num = det3(c, a, b);
            let den = 1.0 + dot(c, a) + dot(a, b) + dot(b, c);
            2.0 * num.atan2(den)
        })
        .sum()
}

/// Area by a fan of signed triangles, placed on the branch of the angle excess.
fn refine_measure(pts: &[[f64; 3]], excess: f64) -> f64 {
    let mut c = [0.0; 3];
    for p in pts {
        c = add(&c, p);
    }
    let c = if norm(&c) > 1e-6 {
        normalized(c)
    } else {
        pts[0]
    };
    let k = pts.len();
    let fan = fan_sum(&c, (0..k).map(|i| (&pts[i], &pts[(i + 1) % k])));
    let turns = ((excess - fan) / (4.0 * PI)).round();
    fan + 4.0 * PI * turns
}

/// Integration domain on `S^n`.
#[derive(Clone, Debug)]
pub enum Region {
    Cap(Cap),
    Polygon(Polygon),
    /// Pairwise disjoint caps and polygons.
    Union(Vec<Region>),
}

impl Region {
    pub fn cap(center: SpherePoint, radius: f64) -> Result<Self> {
        Ok(Region::Cap(Cap::new(center, radius)?))
    }

    pub fn polygon(vertices: Vec<SpherePoint>) -> Result<Self> {
        Ok(Region::Polygon(Polygon::new(vertices)?))
    }

    /// Disjoint union; nested unions are flattened.
    pub fn union(parts: Vec<Region>) -> Result<Self> {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Region::Union(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.is_empty() {
            return Err(Error::InvalidRegion("union has no parts".into()));
        }
        let n = flat[0].dim();
        if let Some(p) = flat.iter().find(|p| p.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.dim(),
            });
        }
        for i in 0..flat.len() {
            for j in (i + 1)..flat.len() {
                if !parts_disjoint(&flat[i], &flat[j])? {
                    return Err(Error::InvalidRegion(format!(
                        "union parts {i} and {j} overlap"
                    )));
                }
            }
        }
        Ok(Region::Union(flat))
    }

    /// The non-union pieces of the region.
    pub fn parts(&self) -> &[Region] {
        match self {
            Region::Union(v) => v,
            _ => std::slice::from_ref(self),
        }
    }

    pub fn is_cap(&self) -> bool {
        matches!(self, Region::Cap(_))
    }
}

fn parts_disjoint(a: &Region, b: &Region) -> Result<bool> {
    if let (Region::Cap(p), Region::Cap(q)) = (a, b) {
        return Ok(p.center.dist(&q.center) >= p.radius + q.radius - 1e-12);
    }
    check_disjoint(a, b)
}

impl Domain for Region {
    type Point = SpherePoint;

    fn dim(&self) -> usize {
        match self {
            Region::Cap(c) => c.dim(),
            Region::Polygon(_) => 2,
            Region::Union(v) => v[0].dim(),
        }
    }

    fn contains(&self, y: &SpherePoint) -> bool {
        match self {
            Region::Cap(c) => c.contains(y),
            Region::Polygon(p) => p.contains(y),
            Region::Union(v) => v.iter().any(|p| p.contains(y)),
        }
    }

    fn measure(&self) -> f64 {
        match self {
            Region::Cap(c) => c.measure(),
            Region::Polygon(p) => p.measure(),
            Region::Union(v) => v.iter().map(|p| p.measure()).sum(),
        }
    }

    fn sample_with_stats(&self, count: usize, seed: u64) -> Result<SampleStats<SpherePoint>> {
        Sampler::for_region(self)?.run(count, seed)
    }
}

/// `min_{y in region} x . y`; the point `x` is admissible exactly when this is positive.
pub fn feasibility_margin(region: &Region, x: &SpherePoint) -> f64 {
    match region {
        Region::Cap(c) => (x.dist(&c.center) + c.radius).min(PI).cos(),
        Region::Polygon(p) => p.min_dot(&arr(x)),
        Region::Union(v) => v
            .iter()
            .map(|p| feasibility_margin(p, x))
            .fold(f64::INFINITY, f64::min),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sp(c: &[f64]) -> SpherePoint {
        SpherePoint::new(c.to_vec()).unwrap()
    }

    fn octant() -> Region {
        Region::polygon(vec![
            sp(&[1., 0., 0.]),
            sp(&[0., 1., 0.]),
            sp(&[0., 0., 1.]),
        ])
        .unwrap()
    }

    #[test]
    fn cap_examples() {
        let c = Region::cap(sp(&[0., 0., 1.]), PI / 3.0).unwrap();
        assert_relative_eq!(c.measure(), PI, epsilon = 1e-14);
        assert!(c.contains(&sp(&[0., 0., 1.])));
        assert!(!c.contains(&sp(&[1., 0., 0.])));
        assert!(Region::cap(sp(&[0., 0., 1.]), 0.0).is_err());
        assert!(Region::cap(sp(&[0., 0., 1.]), PI).is_err());
    }

    #[test]
    fn octant_triangle() {
        let r = octant();
        assert_relative_eq!(r.measure(), PI / 2.0, epsilon = 1e-14);
        assert!(r.contains(&sp(&[1., 1., 1.])));
        assert!(!r.contains(&sp(&[-1., 1., 1.])));
        assert!(!r.contains(&sp(&[-1., -1., -1.])));
        let m = feasibility_margin(&r, &sp(&[1., 1., 1.]));
        assert_relative_eq!(m, 1.0 / 3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn clockwise_loop_is_the_complement() {
        let r = Region::polygon(vec![
            sp(&[1., 0., 0.]),
            sp(&[0., 0., 1.]),
            sp(&[0., 1., 0.]),
        ])
        .unwrap();
        assert_relative_eq!(r.measure(), 3.5 * PI, epsilon = 1e-13);
        assert!(!r.contains(&sp(&[1., 1., 1.])));
        assert!(r.contains(&sp(&[-1., -1., -1.])));
        assert_eq!(feasibility_margin(&r, &sp(&[1., 1., 1.])), -1.0);
    }

    #[test]
    fn hemisphere_square_margin_matches_edge_minimum() {
        let h = 0.8f64;
        let sq = Region::polygon(vec![
            sp(&[h, -h, 1.]),
            sp(&[h, h, 1.]),
            sp(&[-h, h, 1.]),
            sp(&[-h, -h, 1.]),
        ])
        .unwrap();
        // brute-force oracle along the boundary
        let x = sp(&[0.9, 0.1, 0.3]);
        let verts = match &sq {
            Region::Polygon(p) => p.vertices().to_vec(),
            _ => unreachable!(),
        };
        let mut want = f64::INFINITY;
        for i in 0..4 {
            let a = verts[i].coords();
            let b = verts[(i + 1) % 4].coords();
            for s in 0..=20_000 {
                let t = s as f64 / 20_000.0;
                let p: Vec<f64> = (0..3).map(|j| (1.0 - t) * a[j] + t * b[j]).collect();
                want = want.min(dot(&p, x.coords()) / norm(&p));
            }
        }
        assert_relative_eq!(feasibility_margin(&sq, &x), want, epsilon = 1e-8);
    }

    #[test]
    fn invalid_polygons() {
        let bow = Region::polygon(vec![
            sp(&[1., -1., 2.]),
            sp(&[1., 1., 2.]),
            sp(&[-1., -1., 2.]),
            sp(&[-1., 1., 2.]),
        ]);
        assert!(matches!(bow, Err(Error::InvalidRegion(_))));
        assert!(Region::polygon(vec![sp(&[1., 0., 0.]), sp(&[0., 1., 0.])]).is_err());
        assert!(Region::polygon(vec![
            sp(&[1., 0., 0.]),
            sp(&[-1., 0., 0.]),
            sp(&[0., 0., 1.])
        ])
        .is_err());
        let s3 = SpherePoint::new(vec![1., 0., 0., 0.]).unwrap();
        assert!(Region::polygon(vec![s3.clone(), s3.clone(), s3]).is_err());
    }

    #[test]
    fn union_of_caps() {
        let a = Region::cap(sp(&[0., 0., 1.]), 0.3).unwrap();
        let b = Region::cap(sp(&[1., 0., 0.]), 0.3).unwrap();
        let u = Region::union(vec![a.clone(), b]).unwrap();
        assert_relative_eq!(u.measure(), 2.0 * a.measure(), epsilon = 1e-14);
        let c = Region::cap(sp(&[0., 0.2, 1.]), 0.3).unwrap();
        assert!(Region::union(vec![a, c]).is_err());
    }

    #[test]
    fn union_with_polygon_overlap_detected() {
        let cap = Region::cap(sp(&[1., 1., 1.]), 0.1).unwrap();
        assert!(Region::union(vec![octant(), cap]).is_err());
        let far = Region::cap(sp(&[-1., -1., -1.]), 0.1).unwrap();
        assert!(Region::union(vec![octant(), far]).is_ok());
    }

    #[test]
    fn cap_margin() {
        let c = Region::cap(sp(&[0., 0., 1.]), 0.4).unwrap();
        assert_relative_eq!(feasibility_margin(&c, &sp(&[0., 0., 1.])), 0.4f64.cos());
        assert_relative_eq!(
            feasibility_margin(&c, &sp(&[0., 1., 0.])),
            (PI / 2.0 + 0.4).cos(),
            epsilon = 1e-15
        );
    }
}
