//! Polar tensor rule on a geodesic ball: Gauss-Legendre in the radius times a
//! product rule on the unit sphere of directions, order doubled to tolerance.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use super::{check_finite, converged, gauss, inf_norm, line, Field, Partial, QuadPoint};
use crate::error::{Error, Result};
use crate::scalar::{dot, lorentz_dot};

/// Nodes and weights on `S^m` (as unit vectors of `R^{m+1}`).
pub(crate) fn sphere_rule(m: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    match m {
        0 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        1 => {
            let k = 2 * order;
            (0..k)
                .map(|j| {
                    let a = 2.0 * PI * (j as f64 + 0.5) / k as f64;
                    (vec![a.cos(), a.sin()], 2.0 * PI / k as f64)
                })
                .collect()
        }
        _ => {
            let inner = sphere_rule(m - 1, order);
            let mut out = Vec::with_capacity(order * inner.len());
            for (b, wb) in gauss::mapped(order, 0.0, PI) {
                let (sb, cb) = b.sin_cos();
                let wb = wb * sb.powi(m as i32 - 1);
                for (w, ww) in &inner {
                    let mut u = Vec::with_capacity(m + 1);
                    u.push(cb);
                    u.extend(w.iter().map(|x| sb * x));
                    out.push((u, wb * ww));
                }
            }
            out
        }
    }
}

struct Geometry<'a> {
    origin: Vec<f64>,
    frame: Vec<Vec<f64>>,
    /// Ball centre when the origin is an interior pole.
    offset: Option<&'a [f64]>,
    radius: f64,
    hyperbolic: bool,
}

impl Geometry<'_> {
    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        if self.hyperbolic {
            lorentz_dot(a, b)
        } else {
            dot(a, b)
        }
    }

    /// Ray length from the origin to the boundary in direction `u`.
    fn t_max(&self, u: &[f64]) -> f64 {
        let Some(c) = self.offset else {
            return self.radius;
        };
        if self.hyperbolic {
            let a = -self.inner(c, &self.origin);
            let b = -self.inner(c, u);
            let r = (a * a - b * b).sqrt();
            (self.radius.cosh() / r).max(1.0).acosh() - (b / a).atanh()
        } else {
            let a = self.inner(c, &self.origin);
            let b = self.inner(c, u);
            let m = a.hypot(b);
            let ratio = self.radius.cos() / m;
            if ratio <= -1.0 {
                return PI;
            }
            (b.atan2(a) + ratio.min(1.0).acos()).min(PI)
        }
    }

    fn radial(&self, t: f64) -> (f64, f64) {
        if self.hyperbolic {
            (t.cosh(), t.sinh())
        } else {
            (t.cos(), t.sin())
        }
    }
}

fn level<P: QuadPoint>(
    g: &Geometry,
    dirs: &[(Vec<f64>, f64)],
    order: usize,
    width: usize,
    f: Field<P>,
) -> Result<Vec<f64>> {
    let n = g.origin.len() - 1;
    let sums: Vec<Vec<f64>> = dirs
        .par_iter()
        .map(|(omega, wd)| {
            let mut u = vec![0.0; n + 1];
            for (o, e) in omega.iter().zip(&g.frame) {
                for (ui, ei) in u.iter_mut().zip(e) {
                    *ui += o * ei;
                }
            }
            let tm = g.t_max(&u);
            let mut acc = vec![0.0; width];
            let mut buf = vec![0.0; width];
            for (t, wt) in gauss::mapped(order, 0.0, tm) {
                let (c, s) = g.radial(t);
                let y: Vec<f64> = g
                    .origin
                    .iter()
                    .zip(&u)
                    .map(|(o, ui)| c * o + s * ui)
                    .collect();
                buf.iter_mut().for_each(|b| *b = 0.0);
                f(&P::from_raw(y), &mut buf);
                check_finite(&buf)?;
                let w = wd * wt * s.powi(n as i32 - 1);
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += w * b;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; width];
    for s in &sums {
        for (t, v) in total.iter_mut().zip(s) {
            *t += v;
        }
    }
    Ok(total)
}

/// Poles within this fraction of the radius from the rim use [`near_rim`].
const RIM_BAND: f64 = 0.5;
/// Gauss-Legendre order of the angular panels; the error estimate compares
/// against half this order.
const PANEL_ORDER: usize = 16;

/// Ray `[t_lo, t_hi]` from the pole `x` in direction `u` inside the ball, if any.
fn chord(center: &[f64], cos_r: f64, x: &[f64], u: &[f64], hyperbolic: bool) -> Option<(f64, f64)> {
    if hyperbolic {
        // -<c, y(t)> = a cosh t + b sinh t = r cosh(t + tau)
        let (a, b) = (-lorentz_dot(center, x), -lorentz_dot(center, u));
        let r = (a * a - b * b).sqrt();
        if r >= cos_r {
            return None;
        }
        let tau = (b / a).atanh();
        let h = (cos_r / r).acosh();
        let (lo, hi) = ((-tau - h).max(0.0), -tau + h);
        (hi > lo).then_some((lo, hi))
    } else {
        // c . y(t) = a cos t + b sin t = m cos(t - theta)
        let (a, b) = (dot(center, x), dot(center, u));
        let m = a.hypot(b);
        if m <= cos_r {
            return None;
        }
        let theta = b.atan2(a);
        let h = (cos_r / m).acos();
        let (lo, hi) = ((theta - h).max(0.0), (theta + h).min(PI));
        (hi > lo).then_some((lo, hi))
    }
}

/// Polar rule about a pole close to the rim of a ball in dimension 2: Gauss-Legendre
/// along each ray and adaptive bisection in the angle. For an exterior pole the angle
/// runs over the rays that meet the ball, as `phi_c + beta sin(psi)`, which removes the
/// square-root behaviour of the chord length at the tangent rays.
fn near_rim<P: QuadPoint>(
    center: &[f64],
    radius: f64,
    x: &[f64],
    width: usize,
    f: Field<P>,
    rel_tol: f64,
    budget: u64,
) -> Result<Partial> {
    let hyperbolic = P::HYPERBOLIC;
    let ip = |a: &[f64], b: &[f64]| {
        if hyperbolic {
            lorentz_dot(a, b)
        } else {
            dot(a, b)
        }
    };
    let frame = P::from_raw(x.to_vec()).tangent_frame();
    let phi_c = ip(center, &frame[1]).atan2(ip(center, &frame[0]));
    let cos_r = if hyperbolic {
        radius.cosh()
    } else {
        radius.cos()
    };
    // cos^2 of the half-angle of the cone of rays meeting the ball
    let a = if hyperbolic {
        -lorentz_dot(center, x)
    } else {
        dot(center, x)
    };
    let exterior = if hyperbolic { a >= cos_r } else { a <= cos_r };
    let beta = if hyperbolic {
        ((a * a - cos_r * cos_r) / (a * a - 1.0))
            .clamp(0.0, 1.0)
            .sqrt()
            .acos()
    } else {
        ((cos_r * cos_r - a * a) / (1.0 - a * a))
            .clamp(0.0, 1.0)
            .sqrt()
            .acos()
    };
    // angle and its Jacobian as functions of the panel variable
    let angle = move |s: f64| -> (f64, f64) {
        if exterior {
            (phi_c + beta * s.sin(), beta * s.cos())
        } else {
            (phi_c + s, 1.0)
        }
    };
    let (lo, hi) = if exterior {
        (-FRAC_PI_2, FRAC_PI_2)
    } else {
        (-PI, PI)
    };

    let evals = std::sync::atomic::AtomicU64::new(0);
    let ray = |s: f64| -> Result<Vec<f64>> {
        let (phi, jac) = angle(s);
        let (sp, cp) = phi.sin_cos();
        let u: Vec<f64> = frame[0]
            .iter()
            .zip(&frame[1])
            .map(|(e1, e2)| cp * e1 + sp * e2)
            .collect();
        let Some((t0, t1)) = chord(center, cos_r, x, &u, hyperbolic) else {
            return Ok(vec![0.0; width]);
        };
        let at = |t: f64, out: &mut [f64]| {
            let (c, s) = if hyperbolic {
                (t.cosh(), t.sinh())
            } else {
                (t.cos(), t.sin())
            };
            let y: Vec<f64> = x.iter().zip(&u).map(|(o, ui)| c * o + s * ui).collect();
            f(&P::from_raw(y), out);
            out.iter_mut().for_each(|v| *v *= s * jac);
        };
        let p = line::integrate(t0, t1, None, width, &at, rel_tol, budget)?;
        evals.fetch_add(p.evals, std::sync::atomic::Ordering::Relaxed);
        Ok(p.value)
    };
    let panel = |a: f64, b: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let nodes: Vec<(f64, f64, bool)> = gauss::mapped(PANEL_ORDER, a, b)
            .map(|(s, w)| (s, w, true))
            .chain(gauss::mapped(PANEL_ORDER / 2, a, b).map(|(s, w)| (s, w, false)))
            .collect();
        let vals: Vec<Vec<f64>> = nodes
            .par_iter()
            .map(|&(s, _, _)| ray(s))
            .collect::<Result<_>>()?;
        let (mut fine, mut coarse) = (vec![0.0; width], vec![0.0; width]);
        for (&(_, w, is_fine), v) in nodes.iter().zip(&vals) {
            let acc = if is_fine { &mut fine } else { &mut coarse };
            for (s, x) in acc.iter_mut().zip(v) {
                *s += w * x;
            }
        }
        check_finite(&fine)?;
        let err = fine
            .iter()
            .zip(&coarse)
            .map(|(a, b)| (a - b).abs())
            .collect();
        Ok((fine, err))
    };

    // (a, b, value, err)
    let mut panels: Vec<(f64, f64, Vec<f64>, Vec<f64>)> = Vec::new();
    let mid = 0.5 * (lo + hi);
    for (a, b) in [(lo, mid), (mid, hi)] {
        let (v, e) = panel(a, b)?;
        panels.push((a, b, v, e));
    }
    loop {
        let mut value = vec![0.0; width];
        let mut err = vec![0.0; width];
        for (_, _, v, e) in &panels {
            for i in 0..width {
                value[i] += v[i];
                err[i] += e[i];
            }
        }
        let used = evals.load(std::sync::atomic::Ordering::Relaxed);
        if converged(&value, &err, rel_tol) {
            return Ok(Partial {
                value,
                err,
                evals: used,
            });
        }
        if used > budget {
            return Err(Error::BudgetExceeded {
                max_evals: budget,
                err_est: inf_norm(&err),
            });
        }
        let worst = (0..panels.len())
            .max_by(|&i, &j| inf_norm(&panels[i].3).total_cmp(&inf_norm(&panels[j].3)))
            .expect("non-empty");
        let (a, b, _, _) = panels.swap_remove(worst);
        let m = 0.5 * (a + b);
        for (a, b) in [(a, m), (m, b)] {
            let (v, e) = panel(a, b)?;
            panels.push((a, b, v, e));
        }
    }
}

/// Integrates over the ball `{dist(center, y) <= radius}`; polar about `pole`
/// when it lies well inside the ball, otherwise about the centre.
pub(crate) fn integrate<P: QuadPoint>(
    center: &[f64],
    radius: f64,
    pole: Option<&[f64]>,
    width: usize,
    f: Field<P>,
    rel_tol: f64,
    budget: u64,
) -> Result<Partial> {
    let hyperbolic = P::HYPERBOLIC;
    let n = center.len() - 1;
    let dist = |p: &[f64]| {
        if hyperbolic {
            (-lorentz_dot(center, p)).max(1.0).acosh()
        } else {
            dot(center, p).clamp(-1.0, 1.0).acos()
        }
    };
    if let Some(p) = pole {
        let d = dist(p);
        let fits = hyperbolic || (radius < FRAC_PI_2 && d + radius < PI);
        if n == 2 && fits && (d - radius).abs() <= RIM_BAND * radius {
            return near_rim::<P>(center, radius, p, width, f, rel_tol, budget);
        }
    }
    let interior = pole.filter(|p| {
        let d = dist(p);
        d > 1e-12 && d < radius * (1.0 - 1e-6)
    });
    let origin = interior.unwrap_or(center).to_vec();
    let frame = P::from_raw(origin.clone()).tangent_frame();
    let g = Geometry {
        origin,
        frame,
        offset: interior.map(|_| center),
        radius,
        hyperbolic,
    };
    let mut order = 8usize;
    let mut evals = 0u64;
    let mut prev: Option<Vec<f64>> = None;
    let mut last_err = f64::INFINITY;
    loop {
        let dirs = sphere_rule(n - 1, order);
        let cost = (dirs.len() * order) as u64;
        if evals + cost > budget {
            return Err(Error::BudgetExceeded {
                max_evals: budget,
                err_est: last_err,
            });
        }
        let cur = level::<P>(&g, &dirs, order, width, f)?;
        evals += cost;
        if let Some(p) = prev {
            let err: Vec<f64> = cur.iter().zip(&p).map(|(a, b)| (a - b).abs()).collect();
            if converged(&cur, &err, rel_tol) {
                return Ok(Partial {
                    value: cur,
                    err,
                    evals,
                });
            }
            last_err = super::inf_norm(&err);
        }
        prev = Some(cur);
        order *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::regions::sphere_surface;
    use crate::{HyperPoint, SpherePoint};
    use approx::assert_relative_eq;

    fn sphere_at(d: f64) -> Vec<f64> {
        vec![d.sin(), 0.0, d.cos()]
    }

    #[test]
    fn near_rim_sphere_moments() {
        // int over the cap about e3 of (1, y0, y2) is (2 pi (1 - cos R), 0, pi sin^2 R)
        let r = 0.7;
        let f = |y: &SpherePoint, out: &mut [f64]| {
            let c = y.coords();
            out.copy_from_slice(&[1.0, c[0], c[2]]);
        };
        for rel in [-0.3, -1e-2, -1e-6, 0.0, 1e-6, 1e-2, 0.3] {
            let pole = sphere_at(r * (1.0 + rel));
            let p = integrate::<SpherePoint>(
                &[0.0, 0.0, 1.0],
                r,
                Some(&pole),
                3,
                &f,
                1e-10,
                100_000_000,
            )
            .unwrap();
            assert_relative_eq!(p.value[0], 2.0 * PI * (1.0 - r.cos()), max_relative = 1e-9);
            assert!(p.value[1].abs() <= 1e-9, "{rel}: {}", p.value[1]);
            assert_relative_eq!(p.value[2], PI * r.sin().powi(2), max_relative = 1e-9);
        }
    }

    #[test]
    fn near_rim_hyperbolic_moments() {
        // int over the ball about the origin of (1, y2) is (2 pi (cosh R - 1), pi sinh^2 R)
        let r = 0.9;
        let f = |y: &HyperPoint, out: &mut [f64]| {
            out.copy_from_slice(&[1.0, y.coords()[2]]);
        };
        for rel in [-0.3, -1e-6, 0.0, 1e-6, 0.3] {
            let d: f64 = r * (1.0 + rel);
            let pole = vec![d.sinh(), 0.0, d.cosh()];
            let p = integrate::<HyperPoint>(
                &[0.0, 0.0, 1.0],
                r,
                Some(&pole),
                2,
                &f,
                1e-10,
                100_000_000,
            )
            .unwrap();
            assert_relative_eq!(p.value[0], 2.0 * PI * (r.cosh() - 1.0), max_relative = 1e-9);
            assert_relative_eq!(p.value[1], PI * r.sinh().powi(2), max_relative = 1e-9);
        }
    }

    #[test]
    fn near_rim_matches_centre_rule_for_distance() {
        let r = 0.6;
        let pole = SpherePoint::new(sphere_at(1.25 * r)).unwrap();
        let f = |y: &SpherePoint, out: &mut [f64]| out[0] = pole.dist(y);
        let centre = [0.0, 0.0, 1.0];
        let rim =
            integrate::<SpherePoint>(&centre, r, Some(pole.coords()), 1, &f, 1e-11, 100_000_000)
                .unwrap();
        let tensor = integrate::<SpherePoint>(&centre, r, None, 1, &f, 1e-11, 100_000_000).unwrap();
        assert_relative_eq!(rim.value[0], tensor.value[0], max_relative = 1e-10);
    }

    #[test]
    fn sphere_rules_integrate_monomials() {
        for m in 0..4 {
            let r = sphere_rule(m, 16);
            let total: f64 = r.iter().map(|(_, w)| w).sum();
            assert_relative_eq!(total, sphere_surface(m), max_relative = 1e-13);
            if m > 0 {
                // int u_0^2 = |S^m| / (m + 1)
                let s: f64 = r.iter().map(|(u, w)| w * u[0] * u[0]).sum();
                assert_relative_eq!(
                    s,
                    sphere_surface(m) / (m as f64 + 1.0),
                    max_relative = 1e-12
                );
                let s: f64 = r.iter().map(|(u, w)| w * u[m] * u[m]).sum();
                assert_relative_eq!(
                    s,
                    sphere_surface(m) / (m as f64 + 1.0),
                    max_relative = 1e-12
                );
            }
        }
    }
}
