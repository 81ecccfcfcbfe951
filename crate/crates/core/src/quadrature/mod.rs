//! Numerical integration over regions with error estimates.
//!
//! Caps use a polar tensor rule, polygons an adaptive triangle rule in the
//! gnomonic (Klein) chart, interval sets a 1-D Gauss rule, and anything else
//! seeded Monte Carlo. Node evaluation runs in parallel but every reduction is
//! performed in a fixed order, so results do not depend on the thread count.

mod cap;
pub mod gauss;
mod line;
mod montecarlo;
mod polygon;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::regions::{enclosing_cap, Domain, HIntervalSet, HRegion, Region};
use crate::{HyperPoint, SpherePoint};

pub use polygon::ChartPolygon;

/// Integration rule selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Auto,
    CapTensor,
    PolygonAdaptive,
    MonteCarlo,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "cap" | "cap-tensor" => Ok(Method::CapTensor),
            "polygon" | "polygon-adaptive" => Ok(Method::PolygonAdaptive),
            "mc" | "monte-carlo" => Ok(Method::MonteCarlo),
            other => Err(Error::InvalidOption(format!(
                "unknown quadrature method '{other}' (expected auto, cap, polygon or mc)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Auto => "auto",
            Method::CapTensor => "cap-tensor",
            Method::PolygonAdaptive => "polygon-adaptive",
            Method::MonteCarlo => "monte-carlo",
        };
        f.write_str(s)
    }
}

/// Rule that actually produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodUsed {
    Exact,
    CapTensor,
    PolygonAdaptive,
    Gauss1d,
    MonteCarlo,
    Mixed,
}

impl MethodUsed {
    fn merge(a: Option<Self>, b: Self) -> Self {
        match a {
            None => b,
            Some(a) if a == b => a,
            Some(_) => MethodUsed::Mixed,
        }
    }
}

impl fmt::Display for MethodUsed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MethodUsed::Exact => "exact",
            MethodUsed::CapTensor => "cap-tensor",
            MethodUsed::PolygonAdaptive => "polygon-adaptive",
            MethodUsed::Gauss1d => "gauss-1d",
            MethodUsed::MonteCarlo => "monte-carlo",
            MethodUsed::Mixed => "mixed",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub method: Method,
    pub rel_tol: f64,
    pub mc_samples: usize,
    pub seed: u64,
    pub max_evals: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            rel_tol: 1e-8,
            mc_samples: 1_000_000,
            seed: 0,
            max_evals: 100_000_000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidOption(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if self.mc_samples < 100 {
            return Err(Error::InvalidOption(format!(
                "mc_samples must be at least 100, got {}",
                self.mc_samples
            )));
        }
        if self.max_evals == 0 {
            return Err(Error::InvalidOption("max_evals must be positive".into()));
        }
        Ok(())
    }

    pub fn with_method(&self, method: Method) -> Self {
        Self {
            method,
            ..self.clone()
        }
    }

    pub fn with_rel_tol(&self, rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalResult {
    pub value: f64,
    /// Absolute error estimate.
    pub err_est: f64,
    pub evals: u64,
    pub method_used: MethodUsed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorEvalResult {
    pub value: Vec<f64>,
    pub err_est: Vec<f64>,
    pub evals: u64,
    pub method_used: MethodUsed,
}

impl VectorEvalResult {
    fn into_scalar(self) -> EvalResult {
        EvalResult {
            value: self.value[0],
            err_est: self.err_est[0],
            evals: self.evals,
            method_used: self.method_used,
        }
    }
}

/// Points that quadrature rules can build from raw ambient coordinates.
pub trait QuadPoint: Point<Scalar = f64> {
    const HYPERBOLIC: bool;

    /// Wraps coordinates already on the manifold up to rounding.
    fn from_raw(coords: Vec<f64>) -> Self;
}

impl QuadPoint for SpherePoint {
    const HYPERBOLIC: bool = false;

    fn from_raw(coords: Vec<f64>) -> Self {
        SpherePoint::from_unit_unchecked(coords)
    }
}

impl QuadPoint for HyperPoint {
    const HYPERBOLIC: bool = true;

    fn from_raw(coords: Vec<f64>) -> Self {
        HyperPoint::from_coords_unchecked(coords)
    }
}

/// A piece of a region together with the deterministic rule that handles it.
#[derive(Clone, Debug)]
pub enum Piece {
    Cap { center: Vec<f64>, radius: f64 },
    Chart(ChartPolygon),
    Interval(f64, f64),
}

/// Regions that can be split into deterministic quadrature pieces.
pub trait Integrable: Domain<Point: QuadPoint> {
    /// `None` when some part has no deterministic rule (for instance a
    /// spherical polygon that does not fit in an open hemisphere).
    fn pieces(&self) -> Option<Vec<Piece>>;
}

impl Integrable for Region {
    fn pieces(&self) -> Option<Vec<Piece>> {
        self.parts()
            .iter()
            .map(|p| match p {
                Region::Cap(c) => Some(Piece::Cap {
                    center: c.center().coords().to_vec(),
                    radius: c.radius(),
                }),
                Region::Polygon(poly) => {
                    let cap = enclosing_cap(p).ok()?;
                    Some(Piece::Chart(ChartPolygon::sphere(
                        cap.center(),
                        poly.vertices(),
                    )))
                }
                Region::Union(_) => unreachable!("unions are flat"),
            })
            .collect()
    }
}

impl Integrable for HRegion {
    fn pieces(&self) -> Option<Vec<Piece>> {
        let mut out = Vec::new();
        for p in self.parts() {
            match p {
                HRegion::Cap(c) => out.push(Piece::Cap {
                    center: c.center().coords().to_vec(),
                    radius: c.radius(),
                }),
                HRegion::Polygon(poly) => out.push(Piece::Chart(ChartPolygon::hyper(poly))),
                HRegion::Intervals(s) => {
                    out.extend(s.intervals().iter().map(|&(a, b)| Piece::Interval(a, b)))
                }
                HRegion::Union(_) => unreachable!("unions are flat"),
            }
        }
        Some(out)
    }
}

/// Raw per-piece output.
pub(crate) struct Partial {
    pub value: Vec<f64>,
    pub err: Vec<f64>,
    pub evals: u64,
}

pub(crate) type Field<'a, P> = &'a (dyn Fn(&P, &mut [f64]) + Sync);

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn converged(value: &[f64], err: &[f64], rel_tol: f64) -> bool {
    let e = inf_norm(err);
    e == 0.0 || e <= rel_tol * inf_norm(value)
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteIntegrand)
    }
}

/// `int_r f`.
pub fn integrate<R: Integrable>(
    r: &R,
    f: impl Fn(&R::Point) -> f64 + Sync,
    q: &QuadratureSpec,
) -> Result<EvalResult> {
    let field = |y: &R::Point, out: &mut [f64]| out[0] = f(y);
    Ok(integrate_vector_about(r, 1, &field, None, q)?.into_scalar())
}

/// Componentwise `int_r F` for `F: r -> R^width`, all components sharing nodes.
pub fn integrate_vector<R: Integrable>(
    r: &R,
    width: usize,
    f: impl Fn(&R::Point, &mut [f64]) + Sync,
    q: &QuadratureSpec,
) -> Result<VectorEvalResult> {
    integrate_vector_about(r, width, &f, None, q)
}

/// As [`integrate`], with nodes adapted to a possible kink of `f` at `pole`.
pub fn integrate_about<R: Integrable>(
    r: &R,
    f: impl Fn(&R::Point) -> f64 + Sync,
    pole: Option<&R::Point>,
    q: &QuadratureSpec,
) -> Result<EvalResult> {
    let field = |y: &R::Point, out: &mut [f64]| out[0] = f(y);
    Ok(integrate_vector_about(r, 1, &field, pole, q)?.into_scalar())
}

/// As [`integrate_vector`], with nodes adapted to a possible kink of `f` at `pole`:
/// cap rules become polar about the pole and the chart triangle containing it
/// is split there.
pub fn integrate_vector_about<R: Integrable>(
    r: &R,
    width: usize,
    f: &(dyn Fn(&R::Point, &mut [f64]) + Sync),
    pole: Option<&R::Point>,
    q: &QuadratureSpec,
) -> Result<VectorEvalResult> {
    q.validate()?;
    let pieces = match q.method {
        Method::MonteCarlo => None,
        Method::Auto => r.pieces(),
        Method::CapTensor | Method::PolygonAdaptive => {
            let Some(pieces) = r.pieces() else {
                return Err(Error::MethodMismatch {
                    method: q.method.to_string(),
                });
            };
            let bad = pieces.iter().any(|p| {
                matches!(
                    (q.method, p),
                    (Method::CapTensor, Piece::Chart(_))
                        | (Method::PolygonAdaptive, Piece::Cap { .. })
                )
            });
            if bad {
                return Err(Error::MethodMismatch {
                    method: q.method.to_string(),
                });
            }
            Some(pieces)
        }
    };
    let Some(pieces) = pieces else {
        if (q.mc_samples as u64) > q.max_evals {
            return Err(Error::BudgetExceeded {
                max_evals: q.max_evals,
                err_est: f64::INFINITY,
            });
        }
        let p = montecarlo::integrate(r, width, f, q.mc_samples, q.seed)?;
        return Ok(VectorEvalResult {
            value: p.value,
            err_est: p.err,
            evals: p.evals,
            method_used: MethodUsed::MonteCarlo,
        });
    };
    let pole = pole.map(|p| p.coords());
    let mut value = vec![0.0; width];
    let mut err = vec![0.0; width];
    let mut evals = 0u64;
    let mut used = None;
    for piece in &pieces {
        let budget = q.max_evals.saturating_sub(evals);
        let (p, m) = match piece {
            Piece::Cap { center, radius } => (
                cap::integrate::<R::Point>(center, *radius, pole, width, f, q.rel_tol, budget)?,
                MethodUsed::CapTensor,
            ),
            Piece::Chart(chart) => (
                chart.integrate::<R::Point>(pole, width, f, q.rel_tol, budget)?,
                MethodUsed::PolygonAdaptive,
            ),
            Piece::Interval(a, b) => {
                let at =
                    |t: f64, out: &mut [f64]| f(&R::Point::from_raw(vec![t.sinh(), t.cosh()]), out);
                let pole_t = pole.map(|c| c[0].asinh());
                (
                    line::integrate(*a, *b, pole_t, width, &at, q.rel_tol, budget)?,
                    MethodUsed::Gauss1d,
                )
            }
        };
        evals += p.evals;
        for i in 0..width {
            value[i] += p.value[i];
            err[i] += p.err[i];
        }
        used = Some(MethodUsed::merge(used, m));
    }
    Ok(VectorEvalResult {
        value,
        err_est: err,
        evals,
        method_used: used.unwrap_or(MethodUsed::Gauss1d),
    })
}

/// `int g(theta) dtheta` over an interval set, by adaptive Gauss-Legendre.
pub fn integrate_intervals(
    set: &HIntervalSet,
    g: impl Fn(f64) -> f64 + Sync,
    q: &QuadratureSpec,
) -> Result<EvalResult> {
    q.validate()?;
    let at = |t: f64, out: &mut [f64]| out[0] = g(t);
    let (mut value, mut err, mut evals) = (0.0, 0.0, 0u64);
    for &(a, b) in set.intervals() {
        let p = line::integrate(
            a,
            b,
            None,
            1,
            &at,
            q.rel_tol,
            q.max_evals.saturating_sub(evals),
        )?;
        value += p.value[0];
        err += p.err[0];
        evals += p.evals;
    }
    Ok(EvalResult {
        value,
        err_est: err,
        evals,
        method_used: MethodUsed::Gauss1d,
    })
}
