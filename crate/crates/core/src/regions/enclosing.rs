//! Minimal enclosing caps and enclosing hyperbolic balls.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};

use super::hyper::lorentz_centroid;
use super::{Cap, HCap, HRegion, Region};
use crate::error::{Error, Result};
use crate::geometry::{Point, SpherePoint as GSpherePoint};
use crate::scalar::dot;

/// A ball to be covered: centre and angular radius (zero for a point).
#[derive(Clone, Debug)]
struct Item {
    c: Vec<f64>,
    r: f64,
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let s: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    2.0 * dot(&d, &d).sqrt().atan2(dot(&s, &s).sqrt())
}

fn excess(center: &[f64], radius: f64, it: &Item) -> f64 {
    angle(center, &it.c) + it.r - radius
}

/// Caps internally tangent to every item of `set`.
fn tangent_cap(set: &[&Item]) -> Vec<(Vec<f64>, f64)> {
    let m = set.len();
    if m == 1 {
        return vec![(set[0].c.clone(), set[0].r)];
    }
    let g = DMatrix::from_fn(m, m, |i, j| dot(&set[i].c, &set[j].c));
    let Some(ginv) = g.try_inverse() else {
        return Vec::new();
    };
    let cr = DVector::from_iterator(m, set.iter().map(|it| it.r.cos()));
    let sr = DVector::from_iterator(m, set.iter().map(|it| it.r.sin()));
    let p = &ginv * &cr;
    let q = &ginv * &sr;
    let a = p.dot(&cr);
    let b = p.dot(&sr);
    let c = q.dot(&sr);
    // a cos^2 R + 2 b sin R cos R + c sin^2 R = 1
    let (ca, cb, cc) = ((a - c) / 2.0, b, 1.0 - (a + c) / 2.0);
    let rho = ca.hypot(cb);
    if rho < 1e-300 || cc.abs() > rho * (1.0 + 1e-12) {
        return Vec::new();
    }
    let phi = cb.atan2(ca);
    let delta = (cc / rho).clamp(-1.0, 1.0).acos();
    let rmax = set.iter().map(|it| it.r).fold(0.0, f64::max);
    let dim = set[0].c.len();
    let mut out = Vec::new();
    for two_r in [phi + delta, phi - delta] {
        let mut rr = (two_r / 2.0).rem_euclid(std::f64::consts::PI);
        if rr < rmax - 1e-12 {
            continue;
        }
        rr = rr.max(rmax);
        let lam = p.clone() * rr.cos() + q.clone() * rr.sin();
        let mut center = vec![0.0; dim];
        for (l, it) in lam.iter().zip(set) {
            for (o, ci) in center.iter_mut().zip(&it.c) {
                *o += l * ci;
            }
        }
        let nrm = dot(&center, &center).sqrt();
        if nrm < 1e-12 {
            continue;
        }
        center.iter_mut().for_each(|x| *x /= nrm);
        out.push((center, rr));
    }
    out
}

fn subsets(m: usize, max_size: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << m))
        .filter(|mask| (mask.count_ones() as usize) <= max_size)
        .map(|mask| (0..m).filter(|i| mask & (1 << i) != 0).collect())
        .collect()
}

/// Exact minimal cap of a small item set, by enumerating support subsets.
fn minimal_cap_small(set: &[&Item], n: usize) -> Option<(Vec<f64>, f64, Vec<usize>)> {
    let mut best: Option<(Vec<f64>, f64, Vec<usize>)> = None;
    for sub in subsets(set.len(), n + 1) {
        let items: Vec<&Item> = sub.iter().map(|&i| set[i]).collect();
        for (c, r) in tangent_cap(&items) {
            if best.as_ref().is_some_and(|b| b.1 <= r) {
                continue;
            }
            if set.iter().all(|it| excess(&c, r, it) <= 1e-10) {
                best = Some((c, r, sub.clone()));
            }
        }
    }
    best
}

fn minimal_cap(items: &[Item], n: usize) -> Option<(Vec<f64>, f64)> {
    let mut support = vec![0usize];
    for _ in 0..1000 {
        let set: Vec<&Item> = support.iter().map(|&i| &items[i]).collect();
        let (c, r, sub) = minimal_cap_small(&set, n)?;
        let (worst, viol) = items
            .iter()
            .enumerate()
            .map(|(i, it)| (i, excess(&c, r, it)))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        if viol <= 1e-10 {
            return Some((c, r));
        }
        support = sub.iter().map(|&k| support[k]).collect();
        support.push(worst);
    }
    None
}

fn items_of(region: &Region, out: &mut Vec<Item>) {
    match region {
        Region::Cap(c) => out.push(Item {
            c: c.center().coords().to_vec(),
            r: c.radius(),
        }),
        Region::Polygon(p) => out.extend(p.vertices().iter().map(|v| Item {
            c: v.coords().to_vec(),
            r: 0.0,
        })),
        Region::Union(v) => v.iter().for_each(|p| items_of(p, out)),
    }
}

/// Minimal geodesic cap containing the region.
///
/// Fails with `NotInOpenHemisphere` when the region does not fit in an open
/// hemisphere, in which case no tangent point is admissible.
pub fn enclosing_cap(region: &Region) -> Result<Cap> {
    let mut items = Vec::new();
    items_of(region, &mut items);
    let n = items[0].c.len() - 1;
    let Some((c, r)) = minimal_cap(&items, n) else {
        return Err(Error::NotInOpenHemisphere {
            radius: std::f64::consts::PI,
        });
    };
    if r >= FRAC_PI_2 - 1e-9 {
        return Err(Error::NotInOpenHemisphere { radius: r });
    }
    let center = GSpherePoint::from_unit_unchecked(c);
    let anti = center.antipode();
    for part in region.parts() {
        if let Region::Polygon(p) = part {
            if p.contains(&anti) {
                return Err(Error::NotInOpenHemisphere {
                    radius: std::f64::consts::PI,
                });
            }
        }
    }
    Cap::new(center, r)
}

/// A geodesic ball containing the region, centred at the barycentre of its
/// defining points. Not minimal in general.
pub fn enclosing_hball(region: &HRegion) -> HCap {
    let anchors = region.anchor_points();
    let center = lorentz_centroid(&anchors);
    let r = region
        .parts()
        .iter()
        .flat_map(|part| match part {
            HRegion::Cap(c) => vec![center.dist(c.center()) + c.radius()],
            other => other
                .anchor_points()
                .iter()
                .map(|v| center.dist(v))
                .collect(),
        })
        .fold(0.0, f64::max);
    HCap::new(center, r.max(1e-12)).expect("positive radius")
}
