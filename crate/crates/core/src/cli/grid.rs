//! CSV sampling of the functional on angular grids.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::functional::{area_functional, h_area_functional, FEASIBILITY_FLOOR};
use crate::geometry::Point;
use crate::quadrature::QuadratureSpec;
use crate::regions::json::AnyRegion;
use crate::regions::{enclosing_hball, feasibility_margin, Domain};
use crate::{HyperPoint, SpherePoint};

/// Grid radius for hyperbolic regions, in units of the enclosing-ball radius.
const HYPER_SPAN: f64 = 1.5;

/// Centre of cell `i` of `res` cells on `[0, len)`.
fn mid(i: usize, res: usize, len: f64) -> f64 {
    (i as f64 + 0.5) * len / res as f64
}

/// Point at polar angle `theta` from `e3` and azimuth `phi` from `e1`.
pub fn sphere_at(theta: f64, phi: f64) -> SpherePoint {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    SpherePoint::new(vec![st * cp, st * sp, ct]).expect("unit vector")
}

/// Cell indices of the grid cell containing `x`.
pub fn sphere_cell(x: &SpherePoint, res: usize) -> (usize, usize) {
    let c = x.coords();
    let theta = c[2].clamp(-1.0, 1.0).acos();
    let phi = c[1].atan2(c[0]).rem_euclid(2.0 * PI);
    let idx = |v: f64, len: f64| ((v / len * res as f64) as usize).min(res - 1);
    (idx(theta, PI), idx(phi, 2.0 * PI))
}

fn row(out: &mut String, theta: f64, phi: f64, a: Option<f64>) {
    match a {
        Some(a) => writeln!(out, "{theta},{phi},{a},1"),
        None => writeln!(out, "{theta},{phi},,0"),
    }
    .expect("string write");
}

/// `res x res` cells for `S^2` (spherical coordinates about `e3`),
/// `res x res` geodesic polar cells about the enclosing-ball centre for `H^2`,
/// and `res` cells of arclength coordinate for `H^1`.
pub fn grid(r: &AnyRegion, res: usize, q: &QuadratureSpec) -> Result<String> {
    let mut out = String::new();
    match r {
        AnyRegion::Sphere(s) => {
            if s.dim() != 2 {
                return Err(Error::InvalidOption("grid supports S^2 only".into()));
            }
            out.push_str(
                "# theta: polar angle from e3 (rad); phi: azimuth from e1 (rad); \
                 A: projected area; feasible: 1 if the margin is at least 1e-6\n",
            );
            let cells: Vec<(f64, f64)> = (0..res)
                .flat_map(|i| (0..res).map(move |j| (mid(i, res, PI), mid(j, res, 2.0 * PI))))
                .collect();
            let values: Vec<Option<f64>> = cells
                .par_iter()
                .map(|&(t, p)| {
                    let x = sphere_at(t, p);
                    if feasibility_margin(s, &x) < FEASIBILITY_FLOOR {
                        return Ok(None);
                    }
                    area_functional(s, &x, q).map(|e| Some(e.value))
                })
                .collect::<Result<_>>()?;
            out.push_str("theta,phi,A,feasible\n");
            for (&(t, p), a) in cells.iter().zip(values) {
                row(&mut out, t, p, a);
            }
        }
        AnyRegion::Hyper(h) => {
            let ball = enclosing_hball(h);
            let span = HYPER_SPAN * ball.radius();
            let c = ball.center().clone();
            let cells: Vec<(f64, f64, HyperPoint)> = match h.dim() {
                1 => {
                    out.push_str(
                        "# theta: arclength coordinate s of (sinh s, cosh s); phi: unused (0); \
                         A: projected length; feasible: always 1\n",
                    );
                    let s0 = c.coords()[0].asinh() - span;
                    (0..res)
                        .map(|i| {
                            let s = s0 + mid(i, res, 2.0 * span);
                            (s, 0.0, HyperPoint::from_theta(s))
                        })
                        .collect()
                }
                2 => {
                    out.push_str(
                        "# theta: geodesic distance from the enclosing-ball centre; phi: angle in its \
                         tangent frame (rad); A: projected area; feasible: always 1\n",
                    );
                    let frame = c.tangent_frame();
                    (0..res)
                        .flat_map(|i| {
                            (0..res).map(move |j| (mid(i, res, span), mid(j, res, 2.0 * PI)))
                        })
                        .map(|(t, p)| {
                            let w: Vec<f64> = frame[0]
                                .iter()
                                .zip(&frame[1])
                                .map(|(a, b)| t * (p.cos() * a + p.sin() * b))
                                .collect();
                            (t, p, c.exp(&c.project(&w)))
                        })
                        .collect()
                }
                _ => {
                    return Err(Error::InvalidOption(
                        "grid supports H^1 and H^2 only".into(),
                    ))
                }
            };
            let values: Vec<f64> = cells
                .par_iter()
                .map(|(_, _, x)| h_area_functional(h, x, q).map(|e| e.value))
                .collect::<Result<_>>()?;
            out.push_str("theta,phi,A,feasible\n");
            for ((t, p, _), a) in cells.iter().zip(values) {
                row(&mut out, *t, *p, Some(a));
            }
        }
    }
    Ok(out)
}
