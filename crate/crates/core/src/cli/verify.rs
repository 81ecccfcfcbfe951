//! Invariant suite over the shipped fixtures; `gnomon verify` runs it.

use std::f64::consts::PI;

use serde::Serialize;

use crate::compare::{theorem2_check, theorem3_check, theorem_prime_check, EQUALITY_TOL, GAP_TOL};
use crate::error::{Error, Result};
use crate::functional::{area_functional, gradient, h_area_functional, h_gradient};
use crate::geometry::Point;
use crate::optimize::{
    feasible_points, maximize_hyperbolic, minimize_sphere, random_unit_tangent, verify_convexity,
    OptimizerOpts,
};
use crate::quadrature::{Method, MethodUsed, QuadratureSpec};
use crate::regions::json::{parse_region, AnyRegion};
use crate::regions::{enclosing_hball, feasibility_margin};
use crate::rng::mix;
use crate::{HRegion, HyperPoint, Region, SpherePoint};

pub const CAP: &str = include_str!("../../fixtures/cap.json");
pub const OCTANT: &str = include_str!("../../fixtures/octant.json");
pub const TWO_CAPS: &str = include_str!("../../fixtures/two_caps.json");
pub const H1_PAIR: &str = include_str!("../../fixtures/h1pair.json");
pub const HCAP: &str = include_str!("../../fixtures/hcap.json");
pub const H_PAIR: &str = include_str!("../../fixtures/hpair.json");

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

fn sphere(src: &str) -> Region {
    match parse_region(src) {
        Ok(AnyRegion::Sphere(r)) => r,
        other => panic!("bad spherical fixture: {other:?}"),
    }
}

fn hyper(src: &str) -> HRegion {
    match parse_region(src) {
        Ok(AnyRegion::Hyper(r)) => r,
        other => panic!("bad hyperbolic fixture: {other:?}"),
    }
}

/// Gap between a computed and a reference value, relative to the reference.
fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Closed-form projected length for `[-2,-1] u [1,2]` seen from `(sinh s, cosh s)`.
pub fn h1_pair_value(s: f64) -> f64 {
    (s + 2.0).tanh() - (s + 1.0).tanh() + (s - 1.0).tanh() - (s - 2.0).tanh()
}

/// Positive critical point of [`h1_pair_value`], by bisection on its derivative.
pub fn h1_pair_root() -> f64 {
    let sech2 = |t: f64| 1.0 / t.cosh().powi(2);
    let d = |s: f64| sech2(s + 2.0) - sech2(s + 1.0) + sech2(s - 1.0) - sech2(s - 2.0);
    let (mut lo, mut hi) = (0.5, 2.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Directional derivative against central differences with step `h`;
/// returns the worst `|analytic - fd| / max(1e-6 |fd|, 1e-8)`.
fn fd_ratio<P: Point<Scalar = f64>>(
    x: &P,
    v: &crate::geometry::TangentVec<P>,
    analytic: f64,
    f: impl Fn(&P) -> Result<f64>,
) -> Result<f64> {
    let h = 1e-5;
    let fd = (f(&x.exp(&v.scaled(h)))? - f(&x.exp(&v.scaled(-h)))?) / (2.0 * h);
    Ok((analytic - fd).abs() / (1e-6 * fd.abs()).max(1e-8))
}

/// Worst finite-difference ratio over seeded feasible points of each region.
pub fn sphere_gradient_ratio(
    regions: &[Region],
    per_region: usize,
    seed: u64,
    q: &QuadratureSpec,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (k, r) in regions.iter().enumerate() {
        let s = mix(seed, k as u64);
        for (i, x) in feasible_points(r, per_region, 0.05, s)?
            .into_iter()
            .enumerate()
        {
            let v = random_unit_tangent(&x, mix(s, i as u64));
            let g = gradient(r, &x, q)?;
            worst = worst.max(fd_ratio(&x, &v, g.inner(&v), |y| {
                Ok(area_functional(r, y, q)?.value)
            })?);
        }
    }
    Ok(worst)
}

/// Seeded points within distance 1 of the enclosing-ball centre.
pub fn hyper_points(r: &HRegion, count: usize, seed: u64) -> Vec<HyperPoint> {
    let c = enclosing_hball(r).center().clone();
    (0..count)
        .map(|i| {
            let u = random_unit_tangent(&c, mix(seed, i as u64));
            let t = (i as f64 + 1.0) / count as f64;
            c.exp(&u.scaled(t))
        })
        .collect()
}

pub fn hyper_gradient_ratio(
    regions: &[HRegion],
    per_region: usize,
    seed: u64,
    q: &QuadratureSpec,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (k, r) in regions.iter().enumerate() {
        let s = mix(seed, k as u64);
        for (i, x) in hyper_points(r, per_region, s).into_iter().enumerate() {
            let v = random_unit_tangent(&x, mix(s, 1000 + i as u64));
            let g = h_gradient(r, &x, q)?;
            worst = worst.max(fd_ratio(&x, &v, g.inner(&v), |y| {
                Ok(h_area_functional(r, y, q)?.value)
            })?);
        }
    }
    Ok(worst)
}

/// Point at feasibility margin `m` on the great circle from the octant centre
/// towards `e3`.
pub fn octant_point_with_margin(m: f64) -> SpherePoint {
    // margin of (a, a, b) with a <= b is a
    let b = (1.0 - 2.0 * m * m).sqrt();
    SpherePoint::new(vec![m, m, b]).expect("unit vector")
}

type CheckFn<'a> = Box<dyn Fn() -> Result<(bool, String)> + 'a>;

/// Runs every check; a check that errors is reported as failed.
pub fn run_suite(q: &QuadratureSpec, o: &OptimizerOpts, seed: u64) -> VerifyReport {
    let cap = sphere(CAP);
    let octant = sphere(OCTANT);
    let two_caps = sphere(TWO_CAPS);
    let h1 = hyper(H1_PAIR);
    let hcap = hyper(HCAP);
    let hpair = hyper(H_PAIR);
    let e3 = SpherePoint::axis(2, 2);
    let octant_centre = SpherePoint::new(vec![1.0, 1.0, 1.0]).expect("nonzero");
    let quad = |m: Method| q.clone().with_method(m);

    let checks: Vec<(&str, CheckFn)> = vec![
        (
            "cap-oracle",
            Box::new(|| {
                let want = PI * (PI / 4.0).tan().powi(2);
                let exact = area_functional(&cap, &e3, q)?;
                let num = area_functional(&cap, &e3, &quad(Method::CapTensor))?;
                let pass = exact.method_used == MethodUsed::Exact
                    && rel(exact.value, want) <= 1e-12
                    && rel(num.value, want) <= 1e-8;
                Ok((
                    pass,
                    format!(
                        "conic {:e}, quadrature {:e}",
                        rel(exact.value, want),
                        rel(num.value, want)
                    ),
                ))
            }),
        ),
        (
            "polygon-oracle",
            Box::new(|| {
                let want = 1.5 * 3f64.sqrt();
                let exact = area_functional(&octant, &octant_centre, q)?;
                let num = area_functional(&octant, &octant_centre, &quad(Method::PolygonAdaptive))?;
                let pass = rel(exact.value, want) <= 1e-12 && rel(num.value, want) <= 1e-8;
                Ok((
                    pass,
                    format!(
                        "shoelace {:e}, quadrature {:e}",
                        rel(exact.value, want),
                        rel(num.value, want)
                    ),
                ))
            }),
        ),
        (
            "gradient-sphere",
            Box::new(|| {
                let w = sphere_gradient_ratio(
                    &[cap.clone(), octant.clone(), two_caps.clone()],
                    4,
                    seed,
                    q,
                )?;
                Ok((w <= 1.0, format!("worst fd ratio {w:e}")))
            }),
        ),
        (
            "gradient-hyperbolic",
            Box::new(|| {
                let w =
                    hyper_gradient_ratio(&[hcap.clone(), hpair.clone(), h1.clone()], 4, seed, q)?;
                Ok((w <= 1.0, format!("worst fd ratio {w:e}")))
            }),
        ),
        (
            "convexity-uniqueness",
            Box::new(|| {
                let mut detail = Vec::new();
                let mut pass = true;
                for (name, r) in [("octant", &octant), ("two-caps", &two_caps)] {
                    let rep = verify_convexity(r, 20, seed, q, o)?;
                    pass &= rep.all_positive && rep.unique;
                    detail.push(format!(
                        "{name}: min d2 {:e}, spread {:e}",
                        rep.min_second_derivative, rep.spread
                    ));
                }
                Ok((pass, detail.join("; ")))
            }),
        ),
        (
            "stationarity",
            Box::new(|| {
                let c = minimize_sphere(&octant, q, o)?;
                let d = c.location.dist(&octant_centre);
                let pass = c.residual <= 1e-8 * c.value.max(1.0)
                    && d <= 1e-6
                    && rel(c.value, 1.5 * 3f64.sqrt()) <= 1e-9;
                Ok((
                    pass,
                    format!("residual {:e}, distance to centre {d:e}", c.residual),
                ))
            }),
        ),
        (
            "cap-minimizer",
            Box::new(|| {
                let c = minimize_sphere(&cap, q, o)?;
                let d = c.location.dist(&e3);
                Ok((
                    d <= 1e-7 && rel(c.value, PI) <= 1e-9,
                    format!("distance {d:e}, value {}", c.value),
                ))
            }),
        ),
        (
            "symmetric-union",
            Box::new(|| {
                let c = minimize_sphere(&two_caps, q, o)?;
                let d = c.location.dist(&e3);
                Ok((d <= 1e-6, format!("distance to symmetry centre {d:e}")))
            }),
        ),
        (
            "disc-comparison-sphere",
            Box::new(|| {
                let eq = theorem2_check("cap", &cap, q, o)?;
                let a = theorem2_check("octant", &octant, q, o)?;
                let b = theorem2_check("two-caps", &two_caps, q, o)?;
                let pass =
                    eq.gap.abs() <= EQUALITY_TOL && a.gap > 0.0 && !a.violates() && !b.violates();
                Ok((
                    pass,
                    format!("cap {:e}, octant {:e}, two-caps {:e}", eq.gap, a.gap, b.gap),
                ))
            }),
        ),
        (
            "disc-comparison-hyperbolic",
            Box::new(|| {
                let eq = theorem3_check("hcap", &hcap, q, o)?;
                let a = theorem3_check("hpair", &hpair, q, o)?;
                let b = theorem3_check("h1pair", &h1, q, o)?;
                let pass = eq.gap.abs() <= EQUALITY_TOL && !a.violates() && !b.violates();
                Ok((
                    pass,
                    format!("hcap {:e}, hpair {:e}, h1pair {:e}", eq.gap, a.gap, b.gap),
                ))
            }),
        ),
        (
            "potential-comparison",
            Box::new(|| {
                let inc = "power:1".parse()?;
                let dec = "exp:-1".parse()?;
                let c = theorem_prime_check("cap", &AnyRegion::Sphere(cap.clone()), &inc, q, o)?;
                let s =
                    theorem_prime_check("octant", &AnyRegion::Sphere(octant.clone()), &inc, q, o)?;
                let hc = theorem_prime_check("hcap", &AnyRegion::Hyper(hcap.clone()), &dec, q, o)?;
                let h = theorem_prime_check("hpair", &AnyRegion::Hyper(hpair.clone()), &dec, q, o)?;
                let pass = c.gap.abs() <= GAP_TOL
                    && hc.gap.abs() <= GAP_TOL
                    && !s.violates()
                    && !h.violates();
                Ok((
                    pass,
                    format!(
                        "cap {:e}, octant {:e}, hcap {:e}, hpair {:e}",
                        c.gap, s.gap, hc.gap, h.gap
                    ),
                ))
            }),
        ),
        (
            "two-maximizers-h1",
            Box::new(|| {
                let found = maximize_hyperbolic(&h1, q, o)?;
                if found.len() != 2 {
                    return Ok((false, format!("{} critical points", found.len())));
                }
                let s: Vec<f64> = found
                    .iter()
                    .map(|c| c.location.coords()[0].asinh())
                    .collect();
                let root = h1_pair_root();
                let closed = found
                    .iter()
                    .zip(&s)
                    .map(|(c, &s)| (c.value - h1_pair_value(s)).abs())
                    .fold(0.0, f64::max);
                let pass = (s[0] + s[1]).abs() <= 1e-6
                    && (found[0].value - found[1].value).abs() <= 1e-9
                    && closed <= 1e-8
                    && (s[0].abs() - root).abs() <= 1e-6
                    && found[0].value > h1_pair_value(0.0);
                Ok((
                    pass,
                    format!(
                        "s = {:.9}, {:.9}; value {}",
                        s[0].min(s[1]),
                        s[0].max(s[1]),
                        found[0].value
                    ),
                ))
            }),
        ),
        (
            "mirror-pair-h2",
            Box::new(|| {
                let found = maximize_hyperbolic(&hpair, q, o)?;
                if found.len() != 2 {
                    return Ok((false, format!("{} critical points", found.len())));
                }
                let (a, b) = (found[0].location.coords(), found[1].location.coords());
                let sym = (a[0] + b[0]).abs().max((a[1] - b[1]).abs());
                let dv = (found[0].value - found[1].value).abs();
                Ok((
                    sym <= 1e-6 && dv <= 1e-9,
                    format!("asymmetry {sym:e}, value gap {dv:e}"),
                ))
            }),
        ),
        (
            "boundary-divergence",
            Box::new(|| {
                let mut prev = 0.0;
                let mut pass = true;
                let mut values = Vec::new();
                for k in 1..=5 {
                    let m = 10f64.powi(-k);
                    let x = octant_point_with_margin(m);
                    pass &= (feasibility_margin(&octant, &x) - m).abs() <= 1e-12 * m.max(1e-3);
                    let a = area_functional(&octant, &x, q)?.value;
                    pass &= a > prev;
                    prev = a;
                    values.push(format!("{a:.6e}"));
                }
                Ok((pass, values.join(" < ")))
            }),
        ),
        (
            "hyperbolic-decay",
            Box::new(|| {
                let c = enclosing_hball(&hpair).center().clone();
                let a0 = h_area_functional(&hpair, &c, q)?.value;
                let v = random_unit_tangent(&c, seed);
                let a = h_area_functional(&hpair, &c.exp(&v.scaled(20.0)), q)?.value;
                Ok((a.abs() <= 1e-6 * a0, format!("ratio {:e}", a / a0)))
            }),
        ),
    ];

    let checks: Vec<Check> = checks
        .into_iter()
        .map(|(name, f)| {
            let (pass, detail) = f().unwrap_or_else(|e: Error| (false, format!("error: {e}")));
            Check {
                name: name.to_string(),
                pass,
                detail,
            }
        })
        .collect();
    let passed = checks.iter().filter(|c| c.pass).count();
    VerifyReport {
        failed: checks.len() - passed,
        passed,
        checks,
    }
}
