use std::f64::consts::PI;

use super::sampling::{check_disjoint, SampleStats, Sampler};
use super::{hcap_measure, Domain};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scalar::{det3, lorentz_dot};
use crate::HyperPoint;

/// Closed geodesic ball of `H^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct HCap {
    center: HyperPoint,
    radius: f64,
    cosh_r: f64,
}

impl HCap {
    pub fn new(center: HyperPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidRegion(format!(
                "hyperbolic cap radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self {
            center,
            radius,
            cosh_r: radius.cosh(),
        })
    }

    pub fn center(&self) -> &HyperPoint {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn measure(&self) -> f64 {
        hcap_measure(self.dim(), self.radius)
    }

    pub fn contains(&self, y: &HyperPoint) -> bool {
        -self.center.lorentz(y) <= self.cosh_r * (1.0 + 1e-15)
    }
}

/// Geodesic polygon of `H^2`; stored counter-clockwise whatever the input order.
#[derive(Clone, Debug)]
pub struct HPolygon {
    vertices: Vec<HyperPoint>,
    chart_center: HyperPoint,
    frame: Vec<Vec<f64>>,
    chart: Vec<[f64; 2]>,
    measure: f64,
}

fn seg_cross(p: &[f64; 2], q: &[f64; 2], r: &[f64; 2], s: &[f64; 2]) -> bool {
    let orient = |a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    orient(p, q, r) * orient(p, q, s) < 0.0 && orient(r, s, p) * orient(r, s, q) < 0.0
}

/// Normalized Lorentz sum; the hyperbolic barycenter used as chart center.
pub(crate) fn lorentz_centroid(points: &[HyperPoint]) -> HyperPoint {
    let m = points[0].coords().len();
    let mut s = vec![0.0; m];
    for p in points {
        for (a, b) in s.iter_mut().zip(p.coords()) {
            *a += b;
        }
    }
    HyperPoint::new(s).expect("sum of future timelike vectors is future timelike")
}

impl HPolygon {
    pub fn new(vertices: Vec<HyperPoint>) -> Result<Self> {
        let k = vertices.len();
        if k < 3 {
            return Err(Error::InvalidRegion(format!(
                "polygon needs at least 3 vertices, got {k}"
            )));
        }
        if let Some(v) = vertices.iter().find(|v| v.dim() != 2) {
            return Err(Error::InvalidRegion(format!(
                "hyperbolic polygons are supported on H^2 only, got a vertex on H^{}",
                v.dim()
            )));
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if vertices[i].dist(&vertices[j]) < 1e-12 {
                    return Err(Error::InvalidRegion(format!(
                        "vertices {i} and {j} coincide"
                    )));
                }
            }
        }
        let chart_center = lorentz_centroid(&vertices);
        let frame = chart_center.tangent_frame();
        let to_chart = |y: &HyperPoint| klein(&chart_center, &frame, y);
        let mut chart: Vec<[f64; 2]> = vertices.iter().map(to_chart).collect();
        let signed: f64 = (0..k)
            .map(|i| {
                let (a, b) = (chart[i], chart[(i + 1) % k]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum();
        let mut vertices = vertices;
        if signed < 0.0 {
            vertices.reverse();
            chart.reverse();
        }
        for i in 0..k {
            for j in (i + 2)..k {
                if i == 0 && j == k - 1 {
                    continue;
                }
                if seg_cross(
                    &chart[i],
                    &chart[(i + 1) % k],
                    &chart[j],
                    &chart[(j + 1) % k],
                ) {
                    return Err(Error::InvalidRegion(format!(
                        "polygon is not simple: edges {i} and {j} cross"
                    )));
                }
            }
        }
        let mut angle_sum = 0.0;
        for i in 0..k {
            let t = interior_angle(
                &vertices[(i + k - 1) % k],
                &vertices[i],
                &vertices[(i + 1) % k],
            );
            if !(1e-12..=2.0 * PI - 1e-12).contains(&t) {
                return Err(Error::InvalidRegion(format!(
                    "polygon folds back on itself at vertex {i}"
                )));
            }
            angle_sum += t;
        }
        let measure = (k as f64 - 2.0) * PI - angle_sum;
        if measure <= 0.0 {
            return Err(Error::InvalidRegion(format!(
                "polygon has degenerate area {measure}"
            )));
        }
        Ok(Self {
            vertices,
            chart_center,
            frame,
            chart,
            measure,
        })
    }

    pub fn vertices(&self) -> &[HyperPoint] {
        &self.vertices
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// Chart centre, its tangent frame and the counter-clockwise chart vertices.
    pub(crate) fn chart(&self) -> (&HyperPoint, &[Vec<f64>], &[[f64; 2]]) {
        (&self.chart_center, &self.frame, &self.chart)
    }

    pub fn contains(&self, y: &HyperPoint) -> bool {
        let p = klein(&self.chart_center, &self.frame, y);
        let k = self.chart.len();
        let mut inside = false;
        for i in 0..k {
            let a = self.chart[i];
            let b = self.chart[(i + 1) % k];
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// Beltrami-Klein coordinates centred at `c`: the gnomonic chart of `H^n`.
fn klein(c: &HyperPoint, frame: &[Vec<f64>], y: &HyperPoint) -> [f64; 2] {
    let s = -1.0 / c.lorentz(y);
    [
        s * lorentz_dot(y.coords(), &frame[0]),
        s * lorentz_dot(y.coords(), &frame[1]),
    ]
}

/// Interior angle at `v` of a counter-clockwise polygon.
fn interior_angle(prev: &HyperPoint, v: &HyperPoint, next: &HyperPoint) -> f64 {
    let tangent = |w: &HyperPoint| -> Vec<f64> {
        let a = v.lorentz(w);
        w.coords()
            .iter()
            .zip(v.coords())
            .map(|(wi, vi)| wi + a * vi)
            .collect()
    };
    let tn = tangent(next);
    let tp = tangent(prev);
    let s = det3(&tn, &tp, v.coords());
    let c = lorentz_dot(&tn, &tp);
    let t = s.atan2(c);
    if t <= 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Finite disjoint union of closed intervals of `H^1`, in arclength `theta`.
#[derive(Clone, Debug, PartialEq)]
pub struct HIntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl HIntervalSet {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidRegion("interval set is empty".into()));
        }
        for &(a, b) in &intervals {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidRegion(format!(
                    "interval [{a}, {b}] must be finite with a < b"
                )));
            }
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in intervals.windows(2) {
            if w[0].1 >= w[1].0 {
                return Err(Error::InvalidRegion(format!(
                    "intervals [{}, {}] and [{}, {}] overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, y: &HyperPoint) -> bool {
        let t = y.coords()[0].asinh();
        self.intervals.iter().any(|&(a, b)| a <= t && t <= b)
    }
}

/// Integration domain on `H^n`.
#[derive(Clone, Debug)]
pub enum HRegion {
    Cap(HCap),
    Polygon(HPolygon),
    Intervals(HIntervalSet),
    /// Pairwise disjoint caps and polygons.
    Union(Vec<HRegion>),
}

impl HRegion {
    pub fn cap(center: HyperPoint, radius: f64) -> Result<Self> {
        Ok(HRegion::Cap(HCap::new(center, radius)?))
    }

    pub fn polygon(vertices: Vec<HyperPoint>) -> Result<Self> {
        Ok(HRegion::Polygon(HPolygon::new(vertices)?))
    }

    pub fn intervals(intervals: Vec<(f64, f64)>) -> Result<Self> {
        Ok(HRegion::Intervals(HIntervalSet::new(intervals)?))
    }

    /// Disjoint union; nested unions are flattened.
    pub fn union(parts: Vec<HRegion>) -> Result<Self> {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                HRegion::Union(inner) => flat.extend(inner),
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
                let disjoint = match (&flat[i], &flat[j]) {
                    (HRegion::Cap(p), HRegion::Cap(q)) => {
                        p.center.dist(&q.center) >= p.radius + q.radius - 1e-12
                    }
                    (a, b) => check_disjoint(a, b)?,
                };
                if !disjoint {
                    return Err(Error::InvalidRegion(format!(
                        "union parts {i} and {j} overlap"
                    )));
                }
            }
        }
        Ok(HRegion::Union(flat))
    }

    pub fn parts(&self) -> &[HRegion] {
        match self {
            HRegion::Union(v) => v,
            _ => std::slice::from_ref(self),
        }
    }

    /// All points that define the region's extent: cap centres, vertices, interval ends.
    pub(crate) fn anchor_points(&self) -> Vec<HyperPoint> {
        match self {
            HRegion::Cap(c) => vec![c.center.clone()],
            HRegion::Polygon(p) => p.vertices.clone(),
            HRegion::Intervals(s) => s
                .intervals
                .iter()
                .flat_map(|&(a, b)| [HyperPoint::from_theta(a), HyperPoint::from_theta(b)])
                .collect(),
            HRegion::Union(v) => v.iter().flat_map(|p| p.anchor_points()).collect(),
        }
    }
}

impl Domain for HRegion {
    type Point = HyperPoint;

    fn dim(&self) -> usize {
        match self {
            HRegion::Cap(c) => c.dim(),
            HRegion::Polygon(_) => 2,
            HRegion::Intervals(_) => 1,
            HRegion::Union(v) => v[0].dim(),
        }
    }

    fn contains(&self, y: &HyperPoint) -> bool {
        match self {
            HRegion::Cap(c) => c.contains(y),
            HRegion::Polygon(p) => p.contains(y),
            HRegion::Intervals(s) => s.contains(y),
            HRegion::Union(v) => v.iter().any(|p| p.contains(y)),
        }
    }

    fn measure(&self) -> f64 {
        match self {
            HRegion::Cap(c) => c.measure(),
            HRegion::Polygon(p) => p.measure(),
            HRegion::Intervals(s) => s.measure(),
            HRegion::Union(v) => v.iter().map(|p| p.measure()).sum(),
        }
    }

    fn sample_with_stats(&self, count: usize, seed: u64) -> Result<SampleStats<HyperPoint>> {
        Sampler::for_hregion(self)?.run(count, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hp(s: &[f64]) -> HyperPoint {
        HyperPoint::from_spatial(s)
    }

    /// Regular k-gon with vertices at distance `r` from the origin.
    fn regular(k: usize, r: f64, clockwise: bool) -> Vec<HyperPoint> {
        let mut v: Vec<HyperPoint> = (0..k)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / k as f64;
                hp(&[r.sinh() * t.cos(), r.sinh() * t.sin()])
            })
            .collect();
        if clockwise {
            v.reverse();
        }
        v
    }

    #[test]
    fn regular_polygon_area_matches_trigonometry() {
        for (k, r) in [(3usize, 0.7f64), (4, 1.5), (6, 0.2)] {
            // cosh R = cot(pi/k) cot(theta/2)
            let theta = 2.0 * ((PI / k as f64).tan().recip() / r.cosh()).atan();
            let want = (k as f64 - 2.0) * PI - k as f64 * theta;
            for cw in [false, true] {
                let p = HRegion::polygon(regular(k, r, cw)).unwrap();
                assert_relative_eq!(p.measure(), want, max_relative = 1e-12);
                assert!(p.contains(&HyperPoint::origin(2)));
                assert!(!p.contains(&hp(&[3.0, 3.0])));
            }
        }
    }

    #[test]
    fn cap_membership_and_measure() {
        let c = HRegion::cap(HyperPoint::origin(2), 1.0).unwrap();
        assert!(c.contains(&hp(&[0.9f64.sinh(), 0.0])));
        assert!(!c.contains(&hp(&[1.1f64.sinh(), 0.0])));
        assert_relative_eq!(
            c.measure(),
            2.0 * PI * (1f64.cosh() - 1.0),
            max_relative = 1e-14
        );
    }

    #[test]
    fn interval_sets() {
        let s = HRegion::intervals(vec![(1.0, 2.0), (-2.0, -1.0)]).unwrap();
        assert_relative_eq!(s.measure(), 2.0);
        assert!(s.contains(&HyperPoint::from_theta(1.5)));
        assert!(!s.contains(&HyperPoint::from_theta(0.0)));
        assert!(HRegion::intervals(vec![(0.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(HRegion::intervals(vec![(1.0, 1.0)]).is_err());
    }

    #[test]
    fn hyperbolic_unions() {
        let a = HRegion::cap(hp(&[-3.0, 0.0]), 0.5).unwrap();
        let b = HRegion::cap(hp(&[3.0, 0.0]), 0.5).unwrap();
        assert!(HRegion::union(vec![a.clone(), b]).is_ok());
        let c = HRegion::cap(hp(&[-3.0, 0.3]), 0.5).unwrap();
        assert!(HRegion::union(vec![a.clone(), c]).is_err());
        let p = HRegion::polygon(regular(4, 0.6, false)).unwrap();
        assert!(HRegion::union(vec![a.clone(), p]).is_ok());
        let q = HRegion::polygon(regular(4, 3.0, false)).unwrap();
        assert!(HRegion::union(vec![a, q]).is_err());
    }

    #[test]
    fn bowtie_rejected() {
        let v = vec![
            hp(&[1., -1.]),
            hp(&[1., 1.]),
            hp(&[-1., -1.]),
            hp(&[-1., 1.]),
        ];
        assert!(HRegion::polygon(v).is_err());
    }
}
