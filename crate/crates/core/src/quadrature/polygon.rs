//! Adaptive quadrature on a geodesic polygon of `S^2` or `H^2`, carried out on
//! its straight-edged image in the gnomonic (Klein) chart.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::{check_finite, converged, gauss, inf_norm, Field, Partial, QuadPoint};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::regions::HPolygon;
use crate::scalar::{dot, lorentz_dot};
use crate::SpherePoint;

type P2 = [f64; 2];

/// Polygon image in a chart centred at an interior point.
#[derive(Clone, Debug)]
pub struct ChartPolygon {
    center: Vec<f64>,
    frame: Vec<Vec<f64>>,
    /// Counter-clockwise chart vertices.
    verts: Vec<P2>,
    hyperbolic: bool,
}

fn signed_area(v: &[P2]) -> f64 {
    let k = v.len();
    0.5 * (0..k)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % k]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

fn orient(a: P2, b: P2, c: P2) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Ear clipping of a simple counter-clockwise polygon.
fn triangulate(verts: &[P2]) -> Vec<[P2; 3]> {
    let mut idx: Vec<usize> = (0..verts.len()).collect();
    let mut out = Vec::new();
    while idx.len() > 3 {
        let k = idx.len();
        let mut clipped = false;
        for i in 0..k {
            let (ia, ib, ic) = (idx[(i + k - 1) % k], idx[i], idx[(i + 1) % k]);
            let (a, b, c) = (verts[ia], verts[ib], verts[ic]);
            if orient(a, b, c) <= 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                j != ia
                    && j != ib
                    && j != ic
                    && orient(a, b, verts[j]) >= 0.0
                    && orient(b, c, verts[j]) >= 0.0
                    && orient(c, a, verts[j]) >= 0.0
            });
            if !blocked {
                out.push([a, b, c]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            // numerically degenerate remainder: fan it
            for i in 1..idx.len() - 1 {
                out.push([verts[idx[0]], verts[idx[i]], verts[idx[i + 1]]]);
            }
            return out;
        }
    }
    out.push([verts[idx[0]], verts[idx[1]], verts[idx[2]]]);
    out
}

struct Tri {
    p: [P2; 3],
    /// Gauss order per axis of the current value.
    order: usize,
    value: Vec<f64>,
    err: Vec<f64>,
}

#[derive(PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn split(p: &[P2; 3]) -> [[P2; 3]; 4] {
    let mid = |a: P2, b: P2| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let (a, b, c) = (p[0], p[1], p[2]);
    let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
    [[a, ab, ca], [ab, b, bc], [ca, bc, c], [bc, ca, ab]]
}

/// Distance from `u` to the segment `[a, b]`.
fn segment_dist(u: P2, a: P2, b: P2) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((u[0] - a[0]) * d[0] + (u[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (u[0] - a[0] - t * d[0]).hypot(u[1] - a[1] - t * d[1])
}

/// Winding number of the closed loop `v` about `u`.
fn winding(v: &[P2], u: P2) -> f64 {
    let k = v.len();
    (0..k)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % k]);
            let (pa, pb) = ([a[0] - u[0], a[1] - u[1]], [b[0] - u[0], b[1] - u[1]]);
            (pa[0] * pb[1] - pa[1] * pb[0]).atan2(pa[0] * pb[0] + pa[1] * pb[1])
        })
        .sum::<f64>()
        / (2.0 * std::f64::consts::PI)
}

/// Starting order per axis, and the order after which a triangle is split.
const ORDER_START: usize = 4;
const ORDER_MAX: usize = 64;
const BATCH_MAX: usize = 64;

fn start_cost() -> u64 {
    (ORDER_START * ORDER_START + (ORDER_START / 2) * (ORDER_START / 2)) as u64
}

impl ChartPolygon {
    pub(crate) fn sphere(center: &SpherePoint, vertices: &[SpherePoint]) -> Self {
        let frame = center.tangent_frame();
        let c = center.coords();
        let mut verts: Vec<P2> = vertices
            .iter()
            .map(|v| {
                let d = dot(v.coords(), c);
                [
                    dot(v.coords(), &frame[0]) / d,
                    dot(v.coords(), &frame[1]) / d,
                ]
            })
            .collect();
        if signed_area(&verts) < 0.0 {
            verts.reverse();
        }
        Self {
            center: c.to_vec(),
            frame,
            verts,
            hyperbolic: false,
        }
    }

    pub(crate) fn hyper(poly: &HPolygon) -> Self {
        let (c, frame, chart) = poly.chart();
        Self {
            center: c.coords().to_vec(),
            frame: frame.to_vec(),
            verts: chart.to_vec(),
            hyperbolic: true,
        }
    }

    /// Ambient point and area weight at chart coordinates `u`.
    fn lift(&self, u: P2) -> (Vec<f64>, f64) {
        let r2 = u[0] * u[0] + u[1] * u[1];
        let q = if self.hyperbolic { 1.0 - r2 } else { 1.0 + r2 };
        let s = 1.0 / q.sqrt();
        let y = (0..self.center.len())
            .map(|i| s * (self.center[i] + u[0] * self.frame[0][i] + u[1] * self.frame[1][i]))
            .collect();
        (y, s * s * s)
    }

    fn to_chart(&self, y: &[f64]) -> Option<P2> {
        if self.hyperbolic {
            let s = -1.0 / lorentz_dot(&self.center, y);
            Some([
                s * lorentz_dot(y, &self.frame[0]),
                s * lorentz_dot(y, &self.frame[1]),
            ])
        } else {
            let d = dot(&self.center, y);
            (d > 0.0).then(|| [dot(y, &self.frame[0]) / d, dot(y, &self.frame[1]) / d])
        }
    }

    /// Collapsed-square Gauss rule of order `n` per axis, signed by orientation:
    /// `u = p0 + s ((p1 - p0) + t (p2 - p1))`, `dA = 2 area s ds dt`. Smooth in
    /// `(s, t)` whenever the integrand is smooth away from `p0`.
    fn collapsed<P: QuadPoint>(
        &self,
        p: &[P2; 3],
        n: usize,
        width: usize,
        f: Field<P>,
    ) -> Result<Vec<f64>> {
        let twice = orient(p[0], p[1], p[2]);
        let mut out = vec![0.0; width];
        let mut buf = vec![0.0; width];
        for (s, ws) in gauss::mapped(n, 0.0, 1.0) {
            for (t, wt) in gauss::mapped(n, 0.0, 1.0) {
                let u = [
                    p[0][0] + s * (p[1][0] - p[0][0] + t * (p[2][0] - p[1][0])),
                    p[0][1] + s * (p[1][1] - p[0][1] + t * (p[2][1] - p[1][1])),
                ];
                let (y, w) = self.lift(u);
                buf.iter_mut().for_each(|b| *b = 0.0);
                f(&P::from_raw(y), &mut buf);
                check_finite(&buf)?;
                let k = twice * ws * wt * s * w;
                for (o, b) in out.iter_mut().zip(&buf) {
                    *o += k * b;
                }
            }
        }
        Ok(out)
    }

    fn fresh<P: QuadPoint>(&self, p: [P2; 3], width: usize, f: Field<P>) -> Result<Tri> {
        let lo = self.collapsed(&p, ORDER_START / 2, width, f)?;
        let value = self.collapsed(&p, ORDER_START, width, f)?;
        let err = value.iter().zip(&lo).map(|(a, b)| (a - b).abs()).collect();
        Ok(Tri {
            p,
            order: ORDER_START,
            value,
            err,
        })
    }

    /// Doubles the order of `t`, or splits it once the order cap is reached.
    /// Returns the replacement triangles and the evaluations spent.
    fn refine<P: QuadPoint>(&self, t: &Tri, width: usize, f: Field<P>) -> Result<(Vec<Tri>, u64)> {
        if t.order < ORDER_MAX {
            let n = 2 * t.order;
            let value = self.collapsed(&t.p, n, width, f)?;
            let err = value
                .iter()
                .zip(&t.value)
                .map(|(a, b)| (a - b).abs())
                .collect();
            let tri = Tri {
                p: t.p,
                order: n,
                value,
                err,
            };
            return Ok((vec![tri], (n * n) as u64));
        }
        let kids = split(&t.p)
            .into_iter()
            .map(|p| self.fresh(p, width, f))
            .collect::<Result<Vec<_>>>()?;
        Ok((kids, 4 * start_cost()))
    }

    /// Fan from the pole when it lies in the closed polygon (so the pole is
    /// vertex 0 of every piece), ear clipping otherwise.
    fn initial(&self, pole: Option<&[f64]>) -> Vec<[P2; 3]> {
        let scale = self
            .verts
            .iter()
            .map(|v| v[0].hypot(v[1]))
            .fold(1.0, f64::max);
        let k = self.verts.len();
        if let Some(u) = pole.and_then(|y| self.to_chart(y)) {
            let on_boundary = (0..k)
                .any(|i| segment_dist(u, self.verts[i], self.verts[(i + 1) % k]) <= 1e-10 * scale);
            if on_boundary || winding(&self.verts, u) > 0.5 {
                return (0..k)
                    .map(|i| [u, self.verts[i], self.verts[(i + 1) % k]])
                    .filter(|t| orient(t[0], t[1], t[2]).abs() > 1e-14 * scale * scale)
                    .collect();
            }
        }
        triangulate(&self.verts)
    }

    /// Worst-first refinement until the summed error estimate meets `rel_tol`
    /// relative to the result.
    pub(crate) fn integrate<P: QuadPoint>(
        &self,
        pole: Option<&[f64]>,
        width: usize,
        f: Field<P>,
        rel_tol: f64,
        budget: u64,
    ) -> Result<Partial> {
        let start = self.initial(pole);
        let mut evals = start_cost() * start.len() as u64;
        if evals > budget {
            return Err(Error::BudgetExceeded {
                max_evals: budget,
                err_est: f64::INFINITY,
            });
        }
        let mut tris: Vec<Option<Tri>> = start
            .into_par_iter()
            .map(|p| self.fresh::<P>(p, width, f).map(Some))
            .collect::<Result<_>>()?;
        let mut heap: BinaryHeap<(Key, Reverse<usize>)> = tris
            .iter()
            .enumerate()
            .map(|(i, t)| (Key(inf_norm(&t.as_ref().unwrap().err)), Reverse(i)))
            .collect();
        let exact_totals = |tris: &[Option<Tri>]| {
            let mut v = vec![0.0; width];
            let mut e = vec![0.0; width];
            for t in tris.iter().flatten() {
                for i in 0..width {
                    v[i] += t.value[i];
                    e[i] += t.err[i];
                }
            }
            (v, e)
        };
        let (mut value, mut err) = exact_totals(&tris);
        loop {
            if converged(&value, &err, rel_tol) {
                (value, err) = exact_totals(&tris);
                if converged(&value, &err, rel_tol) {
                    return Ok(Partial { value, err, evals });
                }
            }
            let batch = (heap.len() / 8).clamp(1, BATCH_MAX);
            let worst = (4 * start_cost()).max((ORDER_MAX * ORDER_MAX) as u64);
            if evals + worst * batch as u64 > budget {
                return Err(Error::BudgetExceeded {
                    max_evals: budget,
                    err_est: inf_norm(&err),
                });
            }
            let mut parents = Vec::with_capacity(batch);
            while parents.len() < batch {
                let Some((_, Reverse(i))) = heap.pop() else {
                    break;
                };
                parents.push(tris[i].take().expect("live triangle"));
            }
            let refined: Vec<(Vec<Tri>, u64)> = parents
                .par_iter()
                .map(|t| self.refine::<P>(t, width, f))
                .collect::<Result<_>>()?;
            for t in &parents {
                for i in 0..width {
                    value[i] -= t.value[i];
                    err[i] -= t.err[i];
                }
            }
            for (children, cost) in refined {
                evals += cost;
                for t in children {
                    for i in 0..width {
                        value[i] += t.value[i];
                        err[i] += t.err[i];
                    }
                    heap.push((Key(inf_norm(&t.err)), Reverse(tris.len())));
                    tris.push(Some(t));
                }
            }
            err.iter_mut().for_each(|e| *e = e.max(0.0));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn collapsed_rule_is_exact_for_polynomials() {
        // flat chart with unit weight is not available, so integrate the
        // weight-cancelling field y -> (1 + |u|^2)^{3/2} l0^a l1^b on S^2
        let c = SpherePoint::axis(2, 2);
        let poly = ChartPolygon::sphere(&c, &[]);
        let p = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let fact = |k: u32| (1..=k).product::<u32>() as f64;
        for a in 0..5u32 {
            for b in 0..(5 - a) {
                let f = |y: &SpherePoint, out: &mut [f64]| {
                    let z = y.coords()[2];
                    let (u0, u1) = (y.coords()[0] / z, y.coords()[1] / z);
                    out[0] = z.powi(-3) * u0.powi(a as i32) * u1.powi(b as i32);
                };
                let got = poly.collapsed::<SpherePoint>(&p, 6, 1, &f).unwrap()[0];
                let want = fact(a) * fact(b) / fact(a + b + 2);
                assert_relative_eq!(got, want, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn winding_and_fan() {
        let v = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        assert_relative_eq!(winding(&v, [1.0, 1.0]), 1.0, epsilon = 1e-14);
        assert_relative_eq!(winding(&v, [3.0, 1.0]), 0.0, epsilon = 1e-14);
        assert_relative_eq!(segment_dist([1.0, -1.0], v[0], v[1]), 1.0);
    }

    #[test]
    fn ear_clipping_covers_nonconvex_polygon() {
        let v = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [1.0, 0.5], [0.0, 2.0]];
        let tris = triangulate(&v);
        assert_eq!(tris.len(), 3);
        let total: f64 = tris.iter().map(|t| 0.5 * orient(t[0], t[1], t[2])).sum();
        assert_relative_eq!(total, signed_area(&v), epsilon = 1e-14);
        assert!(tris.iter().all(|t| orient(t[0], t[1], t[2]) > 0.0));
    }
}
