//! Comparison of region extrema against area-matched caps, with the inequality
//! oriented so that a nonnegative gap is the predicted outcome.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::{potential_functional, Direction, PotentialSpec};
use crate::geometry::Point;
use crate::optimize::{
    maximize_hyperbolic, maximize_potential_hyperbolic, minimize_potential_sphere, minimize_sphere,
    OptimizerOpts,
};
use crate::quadrature::QuadratureSpec;
use crate::regions::json::AnyRegion;
use crate::regions::{
    cap_measure, enclosing_cap, hcap_measure, random_hregion, random_region, sphere_surface,
    unit_ball_volume, Domain, HRegion, Region, Shape,
};
use crate::rng::mix;
use crate::{Cap, HCap, HyperPoint, SpherePoint};

/// `|gap|` at or below this flags the equality case.
pub const EQUALITY_TOL: f64 = 1e-7;
/// Gaps below `-GAP_TOL` count as violations.
pub const GAP_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub region_id: String,
    pub region_measure: f64,
    pub cap_radius: f64,
    pub region_extremum: f64,
    pub cap_extremum: f64,
    /// Oriented so that the predicted sign is `>= 0`.
    pub gap: f64,
    pub equality_flag: bool,
    pub equality_tol: f64,
    pub gap_tol: f64,
}

impl ComparisonReport {
    fn new(id: &str, measure: f64, radius: f64, region: f64, cap: f64, gap: f64) -> Self {
        Self {
            region_id: id.to_string(),
            region_measure: measure,
            cap_radius: radius,
            region_extremum: region,
            cap_extremum: cap,
            gap,
            equality_flag: gap.abs() <= EQUALITY_TOL,
            equality_tol: EQUALITY_TOL,
            gap_tol: GAP_TOL,
        }
    }

    pub fn violates(&self) -> bool {
        self.gap < -self.gap_tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub min_gap: f64,
    pub violations: usize,
}

impl Summary {
    pub fn of(reports: &[ComparisonReport]) -> Self {
        Self {
            count: reports.len(),
            min_gap: reports.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min),
            violations: reports.iter().filter(|r| r.violates()).count(),
        }
    }
}

fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
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

/// Cap at `center` with the measure of `r`.
pub fn matched_cap(r: &Region, center: &SpherePoint) -> Result<Cap> {
    let n = r.dim();
    let m = r.measure();
    let half = sphere_surface(n) / 2.0;
    if m >= half - 1e-9 {
        return Err(Error::NoAdmissibleCap(format!(
            "measure {m} is not below that of a hemisphere ({half})"
        )));
    }
    let alpha = bisect(|a| cap_measure(n, a), m, 0.0, std::f64::consts::FRAC_PI_2);
    Cap::new(center.clone(), alpha)
}

/// Geodesic ball (an interval for `n = 1`) at `center` with the measure of `r`.
pub fn matched_hcap(r: &HRegion, center: &HyperPoint) -> Result<HCap> {
    let n = r.dim();
    let m = r.measure();
    let mut hi = 1.0;
    while hcap_measure(n, hi) < m {
        hi *= 2.0;
    }
    let alpha = bisect(|a| hcap_measure(n, a), m, 0.0, hi);
    HCap::new(center.clone(), alpha)
}

/// Minimum of `A` over caps of radius `alpha`: `omega_n tan^n alpha`.
pub fn cap_minimum(n: usize, alpha: f64) -> f64 {
    unit_ball_volume(n) * alpha.tan().powi(n as i32)
}

/// Maximum of `A` over hyperbolic balls of radius `alpha`: `omega_n tanh^n alpha`.
pub fn hcap_maximum(n: usize, alpha: f64) -> f64 {
    unit_ball_volume(n) * alpha.tanh().powi(n as i32)
}

fn sphere_center(r: &Region) -> Result<SpherePoint> {
    enclosing_cap(r)
        .map(|c| c.center().clone())
        .map_err(|e| Error::NoAdmissibleCap(e.to_string()))
}

/// `min A_r - min A_D` for the area-matched cap `D`.
pub fn theorem2_check(
    id: &str,
    r: &Region,
    q: &QuadratureSpec,
    o: &OptimizerOpts,
) -> Result<ComparisonReport> {
    let cap = matched_cap(r, &sphere_center(r)?)?;
    let region = minimize_sphere(r, q, o)?.value;
    let capv = cap_minimum(r.dim(), cap.radius());
    Ok(ComparisonReport::new(
        id,
        r.measure(),
        cap.radius(),
        region,
        capv,
        region - capv,
    ))
}

/// `max A_D - max A_r` for the area-matched hyperbolic ball `D`.
pub fn theorem3_check(
    id: &str,
    r: &HRegion,
    q: &QuadratureSpec,
    o: &OptimizerOpts,
) -> Result<ComparisonReport> {
    let n = r.dim();
    let cap = matched_hcap(r, &HyperPoint::origin(n))?;
    let found = maximize_hyperbolic(r, q, o)?;
    let region = found[0].value;
    let capv = hcap_maximum(n, cap.radius());
    Ok(ComparisonReport::new(
        id,
        r.measure(),
        cap.radius(),
        region,
        capv,
        capv - region,
    ))
}

/// Ring of 10^2 points around the centre (radii up to half the cap radius).
fn probe_grid<P: Point<Scalar = f64>>(c: &P, radius: f64) -> Vec<P> {
    let frame = c.tangent_frame();
    let mut out = Vec::with_capacity(100);
    for i in 0..10 {
        let rho = 0.5 * radius * (i + 1) as f64 / 10.0;
        for j in 0..10 {
            let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5 * (i % 2) as f64) / 10.0;
            let w: Vec<f64> = (0..frame[0].len())
                .map(|k| {
                    let a = rho * phi.cos() * frame[0][k];
                    let b = frame.get(1).map_or(0.0, |f| rho * phi.sin() * f[k]);
                    a + b
                })
                .collect();
            out.push(c.exp(&c.project(&w)));
        }
    }
    out
}

/// Potential comparison for `S^n` (increasing `f`, minima) or `H^n`
/// (decreasing `f`, maxima); the cap side is evaluated at its centre, whose
/// optimality is cross-checked on a grid of 10^2 nearby points.
pub fn theorem_prime_check(
    id: &str,
    r: &AnyRegion,
    p: &PotentialSpec,
    q: &QuadratureSpec,
    o: &OptimizerOpts,
) -> Result<ComparisonReport> {
    match r {
        AnyRegion::Sphere(r) => {
            if p.direction() != Direction::Increasing {
                return Err(Error::DirectionMismatch(
                    "the spherical comparison needs an increasing profile".into(),
                ));
            }
            let c = sphere_center(r)?;
            let cap = matched_cap(r, &c)?;
            let capr = Region::Cap(cap.clone());
            let centre = potential_functional(&capr, &c, p, q)?.value;
            let grid: Vec<f64> = probe_grid(&c, cap.radius())
                .par_iter()
                .map(|x| potential_functional(&capr, x, p, q).map(|e| e.value))
                .collect::<Result<_>>()?;
            if grid
                .iter()
                .any(|&v| v < centre - GAP_TOL * centre.abs().max(1.0))
            {
                return Err(Error::InvalidOption(
                    "cap centre is not the potential minimum".into(),
                ));
            }
            let region = minimize_potential_sphere(r, p, q, o)?.value;
            Ok(ComparisonReport::new(
                id,
                r.measure(),
                cap.radius(),
                region,
                centre,
                region - centre,
            ))
        }
        AnyRegion::Hyper(r) => {
            if p.direction() != Direction::Decreasing {
                return Err(Error::DirectionMismatch(
                    "the hyperbolic comparison needs a decreasing profile".into(),
                ));
            }
            let c = HyperPoint::origin(r.dim());
            let cap = matched_hcap(r, &c)?;
            let capr = HRegion::Cap(cap.clone());
            let centre = potential_functional(&capr, &c, p, q)?.value;
            let grid: Vec<f64> = probe_grid(&c, cap.radius())
                .par_iter()
                .map(|x| potential_functional(&capr, x, p, q).map(|e| e.value))
                .collect::<Result<_>>()?;
            if grid
                .iter()
                .any(|&v| v > centre + GAP_TOL * centre.abs().max(1.0))
            {
                return Err(Error::InvalidOption(
                    "ball centre is not the potential maximum".into(),
                ));
            }
            let region = maximize_potential_hyperbolic(r, p, q, o)?.value;
            Ok(ComparisonReport::new(
                id,
                r.measure(),
                cap.radius(),
                region,
                centre,
                centre - region,
            ))
        }
    }
}

/// Which comparison an ensemble runs.
#[derive(Clone, Debug)]
pub enum Comparison {
    Area,
    Potential(PotentialSpec),
}

/// Seeded ensemble description; members are fully determined by these fields.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub hyperbolic: bool,
    pub shape: Shape,
    pub k: usize,
    pub count: usize,
    pub area: f64,
    pub seed: u64,
}

impl Ensemble {
    pub fn member(&self, i: usize) -> Result<(String, AnyRegion)> {
        let seed = mix(self.seed, i as u64);
        let id = format!(
            "{}-{}-k{}-seed{}-{}",
            if self.hyperbolic { "h2" } else { "s2" },
            self.shape,
            self.k,
            self.seed,
            i
        );
        let r = if self.hyperbolic {
            AnyRegion::Hyper(random_hregion(self.area, self.shape, self.k, seed)?)
        } else {
            AnyRegion::Sphere(random_region(self.area, self.shape, self.k, seed)?)
        };
        Ok((id, r))
    }

    /// One report per member, in member order.
    pub fn run(
        &self,
        cmp: &Comparison,
        q: &QuadratureSpec,
        o: &OptimizerOpts,
    ) -> Result<Vec<ComparisonReport>> {
        (0..self.count)
            .into_par_iter()
            .map(|i| {
                let (id, r) = self.member(i)?;
                match (cmp, &r) {
                    (Comparison::Area, AnyRegion::Sphere(s)) => theorem2_check(&id, s, q, o),
                    (Comparison::Area, AnyRegion::Hyper(h)) => theorem3_check(&id, h, q, o),
                    (Comparison::Potential(p), _) => theorem_prime_check(&id, &r, p, q, o),
                }
            })
            .collect()
    }
}
