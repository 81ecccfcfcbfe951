//! Projected-area functionals, their derivatives and distance potentials.
//!
//! On `S^n`, `A(x) = int (x.y)^{-(n+1)} dsigma(y)` for `x` in the interior of
//! the reflected polar set; on `H^n`, `A(x) = int (-<x,y>)^{-(n+1)} dmu(y)`.
//! With `method = auto`, polygons, `S^2` caps and interval sets use closed
//! forms; every other part is integrated numerically.

mod potential;

pub use potential::{Direction, MonotoneSpline, PotentialSpec, Profile, CHECK_SPAN};

use crate::error::{Error, Result};
use crate::geometry::{Point, TangentVec};
use crate::projection::{
    cap_image_area, hyp_polygon_image_area_with_grad, polygon_image_area_with_grad,
};
use crate::quadrature::{
    integrate_about, integrate_vector_about, EvalResult, Integrable, Method, MethodUsed,
    QuadratureSpec,
};
use crate::regions::{feasibility_margin, Domain, HRegion, Region};
use crate::scalar::{dot, lorentz_dot};
use crate::{HyperPoint, SpherePoint};

/// Smallest admissible feasibility margin `min_y x.y`.
pub const FEASIBILITY_FLOOR: f64 = 1e-6;

/// Value and Riemannian gradient of a functional at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation<P: Point> {
    pub value: EvalResult,
    pub gradient: TangentVec<P>,
    /// Absolute error estimate of the gradient (max over components).
    pub grad_err: f64,
    /// `int y (x.y)^{-(n+2)}` (sphere) or `int y (-<x,y>)^{-(n+2)}` (hyperbolic).
    pub moment: Vec<f64>,
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Fails with `InfeasiblePoint` unless `feasibility_margin(r, x) >= FEASIBILITY_FLOOR`.
pub fn check_feasible(r: &Region, x: &SpherePoint) -> Result<f64> {
    check_dim(r.dim(), x.dim())?;
    let margin = feasibility_margin(r, x);
    if margin < FEASIBILITY_FLOOR {
        return Err(Error::InfeasiblePoint {
            margin,
            floor: FEASIBILITY_FLOOR,
        });
    }
    Ok(margin)
}

struct Acc {
    value: f64,
    err: f64,
    evals: u64,
    used: Option<MethodUsed>,
    moment: Vec<f64>,
    moment_err: f64,
}

impl Acc {
    fn new(width: usize) -> Self {
        Self {
            value: 0.0,
            err: 0.0,
            evals: 0,
            used: None,
            moment: vec![0.0; width],
            moment_err: 0.0,
        }
    }

    fn used(&mut self, m: MethodUsed) {
        self.used = Some(match self.used {
            None => m,
            Some(a) if a == m => a,
            Some(_) => MethodUsed::Mixed,
        });
    }

    fn result(&self) -> EvalResult {
        EvalResult {
            value: self.value,
            err_est: self.err,
            evals: self.evals,
            method_used: self.used.unwrap_or(MethodUsed::Exact),
        }
    }
}

/// Shared-node integral of `[y w / s, w]` with `s = x.y`, `w = s^{-(n+1)}`.
fn sphere_moments(part: &Region, x: &SpherePoint, q: &QuadratureSpec, acc: &mut Acc) -> Result<()> {
    let m = x.coords().len();
    let e = -(m as i32);
    let f = |y: &SpherePoint, out: &mut [f64]| {
        let s = x.dot(y);
        let w = s.powi(e);
        for (o, c) in out.iter_mut().zip(y.coords()) {
            *o = c * w / s;
        }
        out[m] = w;
    };
    let r = integrate_vector_about(part, m + 1, &f, None, q)?;
    for i in 0..m {
        acc.moment[i] += r.value[i];
        acc.moment_err = acc.moment_err.max(r.err_est[i]);
    }
    acc.value += r.value[m];
    acc.err += r.err_est[m];
    acc.evals += r.evals;
    acc.used(r.method_used);
    Ok(())
}

/// Value, gradient and moment vector of `A` at a feasible `x`.
pub fn evaluate(
    r: &Region,
    x: &SpherePoint,
    q: &QuadratureSpec,
) -> Result<Evaluation<SpherePoint>> {
    check_feasible(r, x)?;
    let n = x.dim();
    let m = n + 1;
    let mut acc = Acc::new(m);
    for part in r.parts() {
        match part {
            Region::Polygon(p) if q.method == Method::Auto => {
                let (a, g) = polygon_image_area_with_grad(x, p)?;
                // tangential moment from the gradient, radial moment equals A
                let pg = x.project(&g);
                for i in 0..m {
                    acc.moment[i] += a * x.coords()[i] - pg.vec()[i] / m as f64;
                }
                acc.value += a;
                acc.used(MethodUsed::Exact);
            }
            _ => sphere_moments(part, x, q, &mut acc)?,
        }
    }
    let grad = x.project(&acc.moment).scaled(-(m as f64));
    let gerr = (m as f64) * acc.moment_err;
    Ok(Evaluation {
        value: acc.result(),
        gradient: grad,
        grad_err: gerr,
        moment: acc.moment,
    })
}

/// `A_r(x)`; closed forms for polygon parts and `S^2` caps under `method = auto`.
pub fn area_functional(r: &Region, x: &SpherePoint, q: &QuadratureSpec) -> Result<EvalResult> {
    check_feasible(r, x)?;
    let mut acc = Acc::new(0);
    for part in r.parts() {
        match part {
            Region::Polygon(p) if q.method == Method::Auto => {
                acc.value += polygon_image_area_with_grad(x, p)?.0;
                acc.used(MethodUsed::Exact);
            }
            Region::Cap(c) if q.method == Method::Auto && c.dim() == 2 => {
                acc.value += cap_image_area(x, c)?;
                acc.used(MethodUsed::Exact);
            }
            _ => {
                let e = -(x.dim() as i32 + 1);
                let res = integrate_about(part, |y| x.dot(y).powi(e), None, q)?;
                acc.value += res.value;
                acc.err += res.err_est;
                acc.evals += res.evals;
                acc.used(res.method_used);
            }
        }
    }
    Ok(acc.result())
}

/// Riemannian gradient `-(n+1) P_x int y (x.y)^{-(n+2)}`.
pub fn gradient(
    r: &Region,
    x: &SpherePoint,
    q: &QuadratureSpec,
) -> Result<TangentVec<SpherePoint>> {
    Ok(evaluate(r, x, q)?.gradient)
}

/// Euclidean norm of `int y (x.y)^{-(n+2)} - A(x) x`.
pub fn critical_residual(r: &Region, x: &SpherePoint, q: &QuadratureSpec) -> Result<f64> {
    let e = evaluate(r, x, q)?;
    let a = e.value.value;
    Ok(e.moment
        .iter()
        .zip(x.coords())
        .map(|(v, c)| (v - a * c).powi(2))
        .sum::<f64>()
        .sqrt())
}

fn check_unit_tangent<P: Point<Scalar = f64>>(x: &P, v: &TangentVec<P>) -> Result<()> {
    if v.base() != x || !v.is_tangent() || (v.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidOption(
            "direction must be a unit tangent vector at the evaluation point".into(),
        ));
    }
    Ok(())
}

/// `d^2/dt^2 A(exp_x(t v))` at `t = 0`:
/// `(n+1) int [(x.y)^2 + (n+2)(v.y)^2] / (x.y)^{n+3}`.
pub fn second_derivative_dir(
    r: &Region,
    x: &SpherePoint,
    v: &TangentVec<SpherePoint>,
    q: &QuadratureSpec,
) -> Result<f64> {
    check_feasible(r, x)?;
    check_unit_tangent(x, v)?;
    let n = x.dim() as i32;
    let f = |y: &SpherePoint| {
        let s = x.dot(y);
        let t = dot(v.vec(), y.coords());
        (s * s + (n + 2) as f64 * t * t) * s.powi(-(n + 3))
    };
    let mut total = 0.0;
    for part in r.parts() {
        total += integrate_about(part, f, None, q)?.value;
    }
    Ok((n + 1) as f64 * total)
}

// ---------------------------------------------------------------------------
// Hyperbolic
// ---------------------------------------------------------------------------

fn tanh_interval(s: f64, a: f64, b: f64) -> (f64, f64) {
    let (ca, cb) = ((s - a).cosh(), (s - b).cosh());
    (
        (s - a).tanh() - (s - b).tanh(),
        1.0 / (ca * ca) - 1.0 / (cb * cb),
    )
}

fn hyper_moments(part: &HRegion, x: &HyperPoint, q: &QuadratureSpec, acc: &mut Acc) -> Result<()> {
    let m = x.coords().len();
    let e = -(m as i32);
    let f = |y: &HyperPoint, out: &mut [f64]| {
        let s = -x.lorentz(y);
        let w = s.powi(e);
        for (o, c) in out.iter_mut().zip(y.coords()) {
            *o = c * w / s;
        }
        out[m] = w;
    };
    let r = integrate_vector_about(part, m + 1, &f, None, q)?;
    for i in 0..m {
        acc.moment[i] += r.value[i];
        acc.moment_err = acc.moment_err.max(r.err_est[i]);
    }
    acc.value += r.value[m];
    acc.err += r.err_est[m];
    acc.evals += r.evals;
    acc.used(r.method_used);
    Ok(())
}

/// Value, ascent gradient `(n+1) P_x int y (-<x,y>)^{-(n+2)}` and moment vector.
pub fn h_evaluate(
    r: &HRegion,
    x: &HyperPoint,
    q: &QuadratureSpec,
) -> Result<Evaluation<HyperPoint>> {
    check_dim(r.dim(), x.dim())?;
    let m = x.coords().len();
    let mut acc = Acc::new(m);
    for part in r.parts() {
        match part {
            HRegion::Polygon(p) if q.method == Method::Auto => {
                let (a, g) = hyp_polygon_image_area_with_grad(x, p);
                let jg = [g[0], g[1], -g[2]];
                let pg = x.project(&jg);
                for i in 0..m {
                    acc.moment[i] += a * x.coords()[i] + pg.vec()[i] / m as f64;
                }
                acc.value += a;
                acc.used(MethodUsed::Exact);
            }
            HRegion::Intervals(set) if q.method == Method::Auto => {
                let s = x.coords()[0].asinh();
                let tangent = [s.cosh(), s.sinh()];
                for &(a, b) in set.intervals() {
                    let (v, d) = tanh_interval(s, a, b);
                    for ((m, xi), ti) in acc.moment.iter_mut().zip(x.coords()).zip(tangent) {
                        *m += v * xi + d * ti / 2.0;
                    }
                    acc.value += v;
                }
                acc.used(MethodUsed::Exact);
            }
            _ => hyper_moments(part, x, q, &mut acc)?,
        }
    }
    let grad = x.project(&acc.moment).scaled(m as f64);
    Ok(Evaluation {
        value: acc.result(),
        gradient: grad,
        grad_err: m as f64 * acc.moment_err,
        moment: acc.moment,
    })
}

/// `A_r(x)` on `H^n`; closed forms for polygons and interval sets under `method = auto`.
pub fn h_area_functional(r: &HRegion, x: &HyperPoint, q: &QuadratureSpec) -> Result<EvalResult> {
    check_dim(r.dim(), x.dim())?;
    let mut acc = Acc::new(0);
    for part in r.parts() {
        match part {
            HRegion::Polygon(p) if q.method == Method::Auto => {
                acc.value += hyp_polygon_image_area_with_grad(x, p).0;
                acc.used(MethodUsed::Exact);
            }
            HRegion::Intervals(set) if q.method == Method::Auto => {
                let s = x.coords()[0].asinh();
                acc.value += set
                    .intervals()
                    .iter()
                    .map(|&(a, b)| tanh_interval(s, a, b).0)
                    .sum::<f64>();
                acc.used(MethodUsed::Exact);
            }
            _ => {
                let e = -(x.dim() as i32 + 1);
                let res = integrate_about(part, |y| (-x.lorentz(y)).powi(e), None, q)?;
                acc.value += res.value;
                acc.err += res.err_est;
                acc.evals += res.evals;
                acc.used(res.method_used);
            }
        }
    }
    Ok(acc.result())
}

/// Ascent direction of `A` on `H^n`.
pub fn h_gradient(
    r: &HRegion,
    x: &HyperPoint,
    q: &QuadratureSpec,
) -> Result<TangentVec<HyperPoint>> {
    Ok(h_evaluate(r, x, q)?.gradient)
}

/// Norm of `int y (-<x,y>)^{-(n+2)} - A(x) x`, which is tangent at `x`.
pub fn h_critical_residual(r: &HRegion, x: &HyperPoint, q: &QuadratureSpec) -> Result<f64> {
    let e = h_evaluate(r, x, q)?;
    let a = e.value.value;
    let d: Vec<f64> = e
        .moment
        .iter()
        .zip(x.coords())
        .map(|(v, c)| v - a * c)
        .collect();
    Ok(lorentz_dot(&d, &d).max(0.0).sqrt())
}

// ---------------------------------------------------------------------------
// Potentials
// ---------------------------------------------------------------------------

/// `int f(dist(x, y))` over `r`, with quadrature nodes adapted to the kink at `x`.
pub fn potential_functional<R: Integrable>(
    r: &R,
    x: &R::Point,
    p: &PotentialSpec,
    q: &QuadratureSpec,
) -> Result<EvalResult> {
    check_dim(r.dim(), x.dim())?;
    integrate_about(r, |y| p.value(x.dist(y)), Some(x), q)
}

/// Value and gradient `-int f'(d) log_x(y) / d` of the potential functional.
pub fn potential_evaluate<R: Integrable>(
    r: &R,
    x: &R::Point,
    p: &PotentialSpec,
    q: &QuadratureSpec,
) -> Result<Evaluation<R::Point>> {
    check_dim(r.dim(), x.dim())?;
    let m = x.coords().len();
    let f = |y: &R::Point, out: &mut [f64]| {
        let l = x.log(y);
        let d = l.norm();
        out[m] = p.value(d);
        if d > 0.0 {
            let s = -p.derivative(d) / d;
            for (o, c) in out.iter_mut().zip(l.vec()) {
                *o = s * c;
            }
        }
    };
    let res = integrate_vector_about(r, m + 1, &f, Some(x), q)?;
    let gradient = x.project(&res.value[..m]);
    Ok(Evaluation {
        value: EvalResult {
            value: res.value[m],
            err_est: res.err_est[m],
            evals: res.evals,
            method_used: res.method_used,
        },
        gradient,
        grad_err: res.err_est[..m].iter().fold(0.0, |a, &b| a.max(b)),
        moment: res.value[..m].to_vec(),
    })
}
