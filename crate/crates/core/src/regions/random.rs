//! Seeded random competitor regions of prescribed measure on `S^2` and `H^2`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::str::FromStr;

use rand::Rng as _;

use super::{cap_measure, hcap_measure, Domain, HRegion, Region};
use crate::error::{Error, Result};
use crate::geometry::{Point, TangentVec};
use crate::rng::{gaussian_vec, mix, stream, Rng};
use crate::scalar::det3;
use crate::{HyperPoint, SpherePoint};

const RETRIES: u64 = 100;
const CANDIDATES: usize = 256;
const GAP: f64 = 1e-3;
const HEMISPHERE_SLACK: f64 = 0.05;
const DEFAULT_JITTER: f64 = 0.1;

/// Family of random regions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    /// `k` disjoint caps with random relative radii.
    CapUnion,
    /// Regular geodesic `k`-gon with vertex radii and angles jittered by a relative amount.
    PerturbedPolygon { jitter: f64 },
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cap-union" => Ok(Shape::CapUnion),
            "perturbed-polygon" => Ok(Shape::PerturbedPolygon {
                jitter: DEFAULT_JITTER,
            }),
            other => Err(Error::InvalidOption(format!(
                "unknown shape '{other}' (expected cap-union or perturbed-polygon)"
            ))),
        }
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shape::CapUnion => write!(f, "cap-union"),
            Shape::PerturbedPolygon { .. } => write!(f, "perturbed-polygon"),
        }
    }
}

/// Bisection for `g(s) = target` on `[lo, hi]`, assuming `g(lo) < target < g(hi)`.
fn bisect(g: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Point at angle `t` from `c` along a uniformly random direction.
fn sphere_at(rng: &mut Rng, c: &SpherePoint, t: f64) -> SpherePoint {
    let frame = c.tangent_frame();
    let g = gaussian_vec(rng, frame.len());
    let r = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v = vec![0.0; c.coords().len()];
    for (gi, f) in g.iter().zip(&frame) {
        for (o, fj) in v.iter_mut().zip(f) {
            *o += t * gi / r * fj;
        }
    }
    c.exp(&TangentVec::new(c.clone(), v).expect("frame vectors are tangent"))
}

fn uniform_sphere(rng: &mut Rng) -> SpherePoint {
    SpherePoint::new(gaussian_vec(rng, 3)).expect("gaussian vector is nonzero")
}

/// Uniform point of the cap `(c, spread)` on `S^2`.
fn in_cap(rng: &mut Rng, c: &SpherePoint, spread: f64) -> SpherePoint {
    let u: f64 = rng.random();
    let t = super::cap_radial_quantile(2, spread, u);
    sphere_at(rng, c, t)
}

fn relative_radii(rng: &mut Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(0.6..1.4)).collect()
}

/// Random region of measure `target_area` on `S^2`.
///
/// Cap unions are placed inside an open hemisphere around a random axis when
/// they fit, and anywhere on the sphere otherwise; the latter may yield regions
/// with no admissible tangent point.
pub fn random_region(target_area: f64, shape: Shape, k: usize, seed: u64) -> Result<Region> {
    if !(target_area > 0.0 && target_area < 2.0 * PI) {
        return Err(Error::InfeasibleTarget {
            target: target_area,
            reason: "target area must lie in (0, 2 pi)".into(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidOption("k must be at least 1".into()));
    }
    match shape {
        Shape::CapUnion => random_cap_union(target_area, k, seed),
        Shape::PerturbedPolygon { jitter } => random_polygon(target_area, k, jitter, seed),
    }
}

fn random_cap_union(target: f64, k: usize, seed: u64) -> Result<Region> {
    // hemisphere-clustered placement first, then anywhere on the sphere
    for clustered in [true, false] {
        for attempt in 0..RETRIES {
            let mut rng = stream(mix(seed, 0xCA95), attempt);
            let w = relative_radii(&mut rng, k);
            let total = |s: f64| {
                w.iter()
                    .map(|wi| cap_measure(2, (s * wi).min(PI)))
                    .sum::<f64>()
            };
            let smax = PI / w.iter().cloned().fold(0.0, f64::max);
            if total(smax) <= target {
                continue;
            }
            let s = bisect(total, target, 0.0, smax);
            let radii: Vec<f64> = w.iter().map(|wi| s * wi).collect();
            let axis = uniform_sphere(&mut rng);
            let Some(centers) = place_caps(&mut rng, &radii, clustered.then_some(&axis)) else {
                continue;
            };
            let parts = centers
                .into_iter()
                .zip(&radii)
                .map(|(c, &r)| Region::cap(c, r))
                .collect::<Result<Vec<_>>>()?;
            return if parts.len() == 1 {
                Ok(parts.into_iter().next().expect("one part"))
            } else {
                Region::union(parts)
            };
        }
    }
    Err(Error::InfeasibleTarget {
        target,
        reason: format!("could not place {k} disjoint caps in {RETRIES} seeded retries"),
    })
}

/// Best-candidate placement of disjoint caps, optionally within a hemisphere around `axis`.
fn place_caps(
    rng: &mut Rng,
    radii: &[f64],
    axis: Option<&SpherePoint>,
) -> Option<Vec<SpherePoint>> {
    let mut centers: Vec<SpherePoint> = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut best: Option<(f64, SpherePoint)> = None;
        for _ in 0..CANDIDATES {
            let c = match axis {
                Some(a) => {
                    let spread = FRAC_PI_2 - HEMISPHERE_SLACK - r;
                    if spread <= 0.0 {
                        return None;
                    }
                    in_cap(rng, a, spread)
                }
                None => uniform_sphere(rng),
            };
            let slack = centers
                .iter()
                .zip(radii)
                .map(|(o, &ro)| c.dist(o) - r - ro)
                .fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|b| slack > b.0) {
                best = Some((slack, c));
            }
        }
        let (slack, c) = best?;
        if slack < GAP {
            return None;
        }
        centers.push(c);
    }
    Some(centers)
}

fn random_polygon(target: f64, k: usize, jitter: f64, seed: u64) -> Result<Region> {
    if k < 3 {
        return Err(Error::InvalidOption(format!(
            "perturbed polygon needs k >= 3, got {k}"
        )));
    }
    let mut rng = stream(mix(seed, 0x9017), 0);
    let center = uniform_sphere(&mut rng);
    let frame = center.tangent_frame();
    let (f1, mut f2) = (frame[0].clone(), frame[1].clone());
    if det3(&f1, &f2, center.coords()) < 0.0 {
        f2.iter_mut().for_each(|x| *x = -*x);
    }
    let (radial, angular) = polygon_jitter(&mut rng, k, jitter);
    let verts = |scale: f64| -> Vec<SpherePoint> {
        (0..k)
            .map(|i| {
                let th = 2.0 * PI * (i as f64 + angular[i]) / k as f64;
                let rho = scale * radial[i];
                let v: Vec<f64> = f1
                    .iter()
                    .zip(&f2)
                    .map(|(a, b)| rho * (th.cos() * a + th.sin() * b))
                    .collect();
                center.exp(&TangentVec::new(center.clone(), v).expect("tangent"))
            })
            .collect()
    };
    let rmax = radial.iter().cloned().fold(0.0, f64::max);
    let hi = (FRAC_PI_2 - 1e-6) / rmax;
    let area = |s: f64| {
        Region::polygon(verts(s))
            .map(|r| r.measure())
            .unwrap_or(0.0)
    };
    if area(hi) <= target {
        return Err(Error::InfeasibleTarget {
            target,
            reason: format!("a jittered {k}-gon inside a hemisphere has area below the target"),
        });
    }
    let s = bisect(area, target, 0.0, hi);
    Region::polygon(verts(s))
}

fn polygon_jitter(rng: &mut Rng, k: usize, jitter: f64) -> (Vec<f64>, Vec<f64>) {
    let radial = (0..k)
        .map(|_| 1.0 + jitter * rng.random_range(-1.0..1.0))
        .collect();
    let angular = (0..k)
        .map(|_| 0.5 * jitter * rng.random_range(-1.0..1.0))
        .collect();
    (radial, angular)
}

/// Random region of measure `target_area` on `H^2`.
pub fn random_hregion(target_area: f64, shape: Shape, k: usize, seed: u64) -> Result<HRegion> {
    if !(target_area > 0.0 && target_area.is_finite()) {
        return Err(Error::InfeasibleTarget {
            target: target_area,
            reason: "target area must be positive and finite".into(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidOption("k must be at least 1".into()));
    }
    match shape {
        Shape::CapUnion => random_hcap_union(target_area, k, seed),
        Shape::PerturbedPolygon { jitter } => random_hpolygon(target_area, k, jitter, seed),
    }
}

fn hyper_at(rng: &mut Rng, c: &HyperPoint, t: f64) -> HyperPoint {
    let frame = c.tangent_frame();
    let th: f64 = rng.random_range(0.0..2.0 * PI);
    let v: Vec<f64> = frame[0]
        .iter()
        .zip(&frame[1])
        .map(|(a, b)| t * (th.cos() * a + th.sin() * b))
        .collect();
    c.exp(&TangentVec::new(c.clone(), v).expect("tangent"))
}

fn random_hcap_union(target: f64, k: usize, seed: u64) -> Result<HRegion> {
    let origin = HyperPoint::origin(2);
    for attempt in 0..RETRIES {
        let mut rng = stream(mix(seed, 0x4CA9), attempt);
        let w = relative_radii(&mut rng, k);
        let total = |s: f64| w.iter().map(|wi| hcap_measure(2, s * wi)).sum::<f64>();
        let mut hi = 1.0;
        while total(hi) < target {
            hi *= 2.0;
        }
        let s = bisect(total, target, 0.0, hi);
        let radii: Vec<f64> = w.iter().map(|wi| s * wi).collect();
        let spread = 2.0 * radii.iter().sum::<f64>();
        let mut centers: Vec<HyperPoint> = Vec::new();
        for &r in &radii {
            let mut best: Option<(f64, HyperPoint)> = None;
            for _ in 0..CANDIDATES {
                let u: f64 = rng.random();
                let t = super::hcap_radial_quantile(2, spread, u);
                let c = hyper_at(&mut rng, &origin, t);
                let slack = centers
                    .iter()
                    .zip(&radii)
                    .map(|(o, &ro)| c.dist(o) - r - ro)
                    .fold(f64::INFINITY, f64::min);
                if best.as_ref().is_none_or(|b| slack > b.0) {
                    best = Some((slack, c));
                }
            }
            let (slack, c) = best.expect("candidates drawn");
            if slack < GAP {
                break;
            }
            centers.push(c);
        }
        if centers.len() == k {
            let parts = centers
                .into_iter()
                .zip(&radii)
                .map(|(c, &r)| HRegion::cap(c, r))
                .collect::<Result<Vec<_>>>()?;
            return if k == 1 {
                Ok(parts.into_iter().next().expect("one part"))
            } else {
                HRegion::union(parts)
            };
        }
    }
    Err(Error::InfeasibleTarget {
        target,
        reason: format!("could not place {k} disjoint discs in {RETRIES} seeded retries"),
    })
}

fn random_hpolygon(target: f64, k: usize, jitter: f64, seed: u64) -> Result<HRegion> {
    if k < 3 {
        return Err(Error::InvalidOption(format!(
            "perturbed polygon needs k >= 3, got {k}"
        )));
    }
    let mut rng = stream(mix(seed, 0x4901), 0);
    let origin = HyperPoint::origin(2);
    let offset = rng.random_range(0.0..1.0);
    let center = hyper_at(&mut rng, &origin, offset);
    let frame = center.tangent_frame();
    let (radial, angular) = polygon_jitter(&mut rng, k, jitter);
    let verts = |scale: f64| -> Vec<HyperPoint> {
        (0..k)
            .map(|i| {
                let th = 2.0 * PI * (i as f64 + angular[i]) / k as f64;
                let rho = scale * radial[i];
                let v: Vec<f64> = frame[0]
                    .iter()
                    .zip(&frame[1])
                    .map(|(a, b)| rho * (th.cos() * a + th.sin() * b))
                    .collect();
                center.exp(&TangentVec::new(center.clone(), v).expect("tangent"))
            })
            .collect()
    };
    let area = |s: f64| {
        HRegion::polygon(verts(s))
            .map(|r| r.measure())
            .unwrap_or(0.0)
    };
    let mut hi = 1.0;
    while area(hi) < target {
        hi *= 2.0;
        if hi > 40.0 {
            return Err(Error::InfeasibleTarget {
                target,
                reason: format!(
                    "a hyperbolic {k}-gon has area below {}",
                    (k as f64 - 2.0) * PI
                ),
            });
        }
    }
    let s = bisect(area, target, 0.0, hi);
    HRegion::polygon(verts(s))
}
