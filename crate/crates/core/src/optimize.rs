//! Extremal points of the functionals: Riemannian gradient descent with Armijo
//! backtracking on `S^n` (unique minimizer), multi-start ascent on `H^n`, and a
//! convexity verifier for the sphere functional.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::{
    evaluate, h_area_functional, h_evaluate, potential_evaluate, second_derivative_dir, Direction,
    PotentialSpec, FEASIBILITY_FLOOR,
};
use crate::geometry::{Point, TangentVec};
use crate::quadrature::QuadratureSpec;
use crate::regions::{enclosing_cap, enclosing_hball, feasibility_margin, Domain, HRegion, Region};
use crate::rng::{gaussian_vec, mix, stream};
use crate::{HyperPoint, SpherePoint};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerOpts {
    /// Stop when `|grad| <= grad_tol * max(value, 1)`.
    pub grad_tol: f64,
    pub max_iters: usize,
    pub c1: f64,
    pub backtrack: f64,
    /// First trial step as geodesic length; `None` uses 0.1 times the
    /// enclosing-ball radius.
    pub init_step: Option<f64>,
    pub starts: usize,
    pub dedupe_dist: f64,
    pub feasibility_floor: f64,
    pub seed: u64,
}

impl Default for OptimizerOpts {
    fn default() -> Self {
        Self {
            grad_tol: 1e-9,
            max_iters: 500,
            c1: 1e-4,
            backtrack: 0.5,
            init_step: None,
            starts: 8,
            dedupe_dist: 1e-4,
            feasibility_floor: FEASIBILITY_FLOOR,
            seed: 0,
        }
    }
}

impl OptimizerOpts {
    pub fn validate(&self) -> Result<()> {
        let positive = self.grad_tol > 0.0
            && self.max_iters > 0
            && self.starts > 0
            && self.dedupe_dist > 0.0
            && self.feasibility_floor > 0.0
            && self.init_step.is_none_or(|s| s > 0.0);
        if !positive {
            return Err(Error::InvalidOption(
                "optimizer options must be positive".into(),
            ));
        }
        if !(self.c1 > 0.0 && self.c1 < 1.0) || !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::InvalidOption(
                "c1 and backtrack must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Minimum,
    Maximum,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalPoint<P: Point> {
    pub location: P,
    pub value: f64,
    pub grad_norm: f64,
    /// Norm of the stationarity defect; `|grad| / (n+1)` for potentials.
    pub residual: f64,
    pub kind: Kind,
    pub iterations: usize,
}

/// Accepted iterates of one descent run.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Trace {
    /// Objective values (of the maximized functional for ascent runs).
    pub values: Vec<f64>,
    pub margins: Vec<f64>,
}

struct State<P: Point> {
    x: P,
    f: f64,
    g: TangentVec<P>,
    aux: f64,
}

struct Run<P: Point> {
    state: State<P>,
    iterations: usize,
    trace: Trace,
}

type Objective<'a, P> = dyn Fn(&P) -> Result<(f64, TangentVec<P>, f64)> + Sync + 'a;

/// Minimizes `obj` from `x0`. `obj` returns (value, gradient, auxiliary) and
/// may fail with `InfeasiblePoint`, which rejects the trial step.
fn descend<P: Point<Scalar = f64>>(
    obj: &Objective<P>,
    admissible: &(dyn Fn(&P) -> Option<f64> + Sync),
    x0: P,
    step0: f64,
    o: &OptimizerOpts,
) -> Result<Run<P>> {
    let margin0 = admissible(&x0).ok_or(Error::InfeasiblePoint {
        margin: f64::NAN,
        floor: o.feasibility_floor,
    })?;
    let (f, g, aux) = obj(&x0)?;
    let mut s = State { x: x0, f, g, aux };
    let mut trace = Trace {
        values: vec![f],
        margins: vec![margin0],
    };
    let mut t = step0 / s.g.norm().max(1e-300);
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for it in 0..o.max_iters {
        let gn = s.g.norm();
        if gn <= o.grad_tol * s.f.abs().max(1.0) {
            return Ok(Run {
                state: s,
                iterations: it,
                trace,
            });
        }
        if let Some((xp, gp)) = &prev {
            // Barzilai-Borwein guess from ambient differences
            let dx: Vec<f64> = s.x.coords().iter().zip(xp).map(|(a, b)| a - b).collect();
            let dg: Vec<f64> = s.g.vec().iter().zip(gp).map(|(a, b)| a - b).collect();
            let sy = P::ambient_inner(&dx, &dg);
            let ss = P::ambient_inner(&dx, &dx);
            if sy > 0.0 && ss > 0.0 {
                t = ss / sy;
            } else {
                t *= 2.0;
            }
        }
        // at most one radian per step
        t = t.min(1.0 / gn);
        let noise = 1e-14 * s.f.abs().max(1e-300);
        let mut accepted = None;
        for _ in 0..80 {
            let trial = s.x.exp(&s.g.scaled(-t));
            let Some(margin) = admissible(&trial) else {
                t *= o.backtrack;
                continue;
            };
            match obj(&trial) {
                Err(Error::InfeasiblePoint { .. }) => {
                    t *= o.backtrack;
                    continue;
                }
                Err(e) => return Err(e),
                Ok((ft, gt, aux)) => {
                    let dec = o.c1 * t * gn * gn;
                    let armijo = ft <= s.f - dec;
                    // below rounding level the value cannot certify progress
                    let polish = dec <= noise && ft <= s.f + noise && gt.norm() < gn;
                    if armijo || polish {
                        accepted = Some((trial, ft, gt, aux, margin));
                        break;
                    }
                    t *= o.backtrack;
                }
            }
        }
        let Some((x, f, g, aux, margin)) = accepted else {
            return Err(Error::MaxItersExceeded {
                iterations: it,
                grad_norm: gn,
                value: s.f,
            });
        };
        prev = Some((s.x.coords().to_vec(), s.g.vec().to_vec()));
        s = State { x, f, g, aux };
        trace.values.push(f);
        trace.margins.push(margin);
    }
    let gn = s.g.norm();
    if gn <= o.grad_tol * s.f.abs().max(1.0) {
        return Ok(Run {
            state: s,
            iterations: o.max_iters,
            trace,
        });
    }
    Err(Error::MaxItersExceeded {
        iterations: o.max_iters,
        grad_norm: gn,
        value: s.f,
    })
}

fn sphere_residual(e: &crate::functional::Evaluation<SpherePoint>, x: &SpherePoint) -> f64 {
    let a = e.value.value;
    e.moment
        .iter()
        .zip(x.coords())
        .map(|(v, c)| (v - a * c).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn normalized_mean(points: &[SpherePoint]) -> Option<SpherePoint> {
    let m = points.first()?.coords().len();
    let mut s = vec![0.0; m];
    for p in points {
        for (a, b) in s.iter_mut().zip(p.coords()) {
            *a += b;
        }
    }
    SpherePoint::new(s).ok()
}

fn lorentz_mean(points: &[HyperPoint]) -> Option<HyperPoint> {
    let m = points.first()?.coords().len();
    let mut s = vec![0.0; m];
    for p in points {
        for (a, b) in s.iter_mut().zip(p.coords()) {
            *a += b;
        }
    }
    HyperPoint::new(s).ok()
}

/// Default starting point: normalized mean of 10^3 region samples if
/// feasible, else the enclosing-cap centre.
pub fn sphere_start(r: &Region, o: &OptimizerOpts) -> Result<SpherePoint> {
    let cap = admissible_cap(r)?;
    let samples = r.sample(1000, mix(o.seed, 0x5354_4152))?;
    if let Some(x) = normalized_mean(&samples) {
        if feasibility_margin(r, &x) >= o.feasibility_floor {
            return Ok(x);
        }
    }
    Ok(cap.center().clone())
}

fn admissible_cap(r: &Region) -> Result<crate::Cap> {
    enclosing_cap(r).map_err(|e| {
        Error::NoAdmissiblePoint(format!("region does not fit in an open hemisphere ({e})"))
    })
}

/// Minimizer of `A` on `S^n` from a given start, with its accepted-iterate trace.
pub fn minimize_sphere_from(
    r: &Region,
    x0: SpherePoint,
    q: &QuadratureSpec,
    o: &OptimizerOpts,
) -> Result<(CriticalPoint<SpherePoint>, Trace)> {
    o.validate()?;
    let cap = admissible_cap(r)?;
    let obj = |x: &SpherePoint| {
        let e = evaluate(r, x, q)?;
        let res = sphere_residual(&e, x);
        Ok((e.value.value, e.gradient, res))
    };
    let floor = o.feasibility_floor;
    let admissible = |x: &SpherePoint| {
        let m = feasibility_margin(r, x);
        (m >= floor).then_some(m)
    };
    let step0 = o.init_step.unwrap_or(0.1 * cap.radius());
    let run = descend(&obj, &admissible, x0, step0, o)?;
    let s = run.state;
    Ok((
        CriticalPoint {
            grad_norm: s.g.norm(),
            location: s.x,
            value: s.f,
            residual: s.aux,
            kind: Kind::Minimum,
            iterations: run.iterations,
        },
        run.trace,
    ))
}

/// The unique minimizer of `A_r` over the admissible set.
pub fn minimize_sphere(
    r: &Region,
    q: &QuadratureSpec,
    o: &OptimizerOpts,
) -> Result<CriticalPoint<SpherePoint>> {
    o.validate()?;
    let x0 = sphere_start(r, o)?;
    Ok(minimize_sphere_from(r, x0, q, o)?.0)
}

/// Seeded uniform points of the admissible set with margin at least `min_margin`,
/// drawn from the open hemisphere around the enclosing-cap centre.
pub fn feasible_points(
    r: &Region,
    count: usize,
    min_margin: f64,
    seed: u64,
) -> Result<Vec<SpherePoint>> {
    let cap = admissible_cap(r)?;
    let c = cap.center();
    let n = c.dim();
    let mut out = Vec::with_capacity(count);
    let mut rng = stream(seed, 0x4645_4153);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 1_000_000 {
            return Err(Error::NoAdmissiblePoint(format!(
                "no points with margin {min_margin:e} found"
            )));
        }
        let g = gaussian_vec(&mut rng, n + 1);
        let Ok(mut x) = SpherePoint::new(g) else {
            continue;
        };
        if x.dot(c) < 0.0 {
            x = x.antipode();
        }
        if feasibility_margin(r, &x) >= min_margin {
            out.push(x);
        }
    }
    Ok(out)
}

/// Local maximizers of `A_r` on `H^n` from `o.starts` seeded starts.
pub fn maximize_hyperbolic(
    r: &HRegion,
    q: &QuadratureSpec,
    o: &OptimizerOpts,
) -> Result<Vec<CriticalPoint<HyperPoint>>> {
    o.validate()?;
    let obj = |x: &HyperPoint| {
        let e = h_evaluate(r, x, q)?;
        let a = e.value.value;
        let d: Vec<f64> = e
            .moment
            .iter()
            .zip(x.coords())
            .map(|(v, c)| v - a * c)
            .collect();
        let res = crate::scalar::lorentz_dot(&d, &d).max(0.0).sqrt();
        Ok((-a, e.gradient.scaled(-1.0), res))
    };
    let value = |x: &HyperPoint| h_area_functional(r, x, q).map(|e| e.value);
    multistart_ascent(r, &obj, &value, o)
}

fn hyper_starts(r: &HRegion, o: &OptimizerOpts) -> Result<Vec<HyperPoint>> {
    let samples = r.sample(1000, mix(o.seed, 0x4853_5441))?;
    let mut starts = vec![lorentz_mean(&samples).expect("nonempty sample")];
    starts.extend(samples.into_iter().take(o.starts - 1));
    Ok(starts)
}

fn multistart_ascent(
    r: &HRegion,
    obj: &Objective<HyperPoint>,
    value: &(dyn Fn(&HyperPoint) -> Result<f64> + Sync),
    o: &OptimizerOpts,
) -> Result<Vec<CriticalPoint<HyperPoint>>> {
    let starts = hyper_starts(r, o)?;
    let step0 = o.init_step.unwrap_or(0.1 * enclosing_hball(r).radius());
    let admissible = |_: &HyperPoint| Some(f64::INFINITY);
    let runs: Vec<Result<CriticalPoint<HyperPoint>>> = starts
        .into_par_iter()
        .map(|x0| ascend_with_escape(obj, &admissible, value, x0, step0, o))
        .collect();
    let mut found = Vec::new();
    let mut last_err = None;
    for run in runs {
        match run {
            Ok(c) => found.push(c),
            Err(e @ Error::MaxItersExceeded { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    if found.is_empty() {
        return Err(last_err.expect("at least one start"));
    }
    Ok(dedupe(found, o.dedupe_dist))
}

/// Ascent that restarts from a better neighbour when it stalls at a
/// non-maximal critical point.
fn ascend_with_escape(
    obj: &Objective<HyperPoint>,
    admissible: &(dyn Fn(&HyperPoint) -> Option<f64> + Sync),
    value: &(dyn Fn(&HyperPoint) -> Result<f64> + Sync),
    x0: HyperPoint,
    step0: f64,
    o: &OptimizerOpts,
) -> Result<CriticalPoint<HyperPoint>> {
    let mut x0 = x0;
    let mut iterations = 0;
    for _ in 0..8 {
        let run = descend(obj, admissible, x0, step0, o)?;
        iterations += run.iterations;
        let s = run.state;
        let a = -s.f;
        let h = 1e-2;
        let mut best: Option<(HyperPoint, f64)> = None;
        for e in s.x.tangent_frame() {
            for sign in [1.0, -1.0] {
                let v = s.x.project(&e).scaled(sign * h);
                let y = s.x.exp(&v);
                let ay = value(&y)?;
                if ay > a * (1.0 + 1e-12) + 1e-300 && best.as_ref().is_none_or(|b| ay > b.1) {
                    best = Some((y, ay));
                }
            }
        }
        match best {
            None => {
                return Ok(CriticalPoint {
                    grad_norm: s.g.norm(),
                    location: s.x,
                    value: a,
                    residual: s.aux,
                    kind: Kind::Maximum,
                    iterations,
                })
            }
            Some((y, _)) => x0 = y,
        }
    }
    Err(Error::MaxItersExceeded {
        iterations,
        grad_norm: f64::NAN,
        value: f64::NAN,
    })
}

fn dedupe<P: Point<Scalar = f64>>(
    mut found: Vec<CriticalPoint<P>>,
    dist: f64,
) -> Vec<CriticalPoint<P>> {
    found.sort_by(|a, b| {
        b.value.total_cmp(&a.value).then_with(|| {
            a.location
                .coords()
                .iter()
                .zip(b.location.coords())
                .fold(std::cmp::Ordering::Equal, |acc, (x, y)| {
                    acc.then(x.total_cmp(y))
                })
        })
    });
    let mut out: Vec<CriticalPoint<P>> = Vec::new();
    for c in found {
        if out.iter().all(|k| k.location.dist(&c.location) > dist) {
            out.push(c);
        }
    }
    out
}

/// Global minimizer of `int_r f(dist(x, y))` over `S^n` for increasing `f`,
/// best of `o.starts` runs.
pub fn minimize_potential_sphere(
    r: &Region,
    p: &PotentialSpec,
    q: &QuadratureSpec,
    o: &OptimizerOpts,
) -> Result<CriticalPoint<SpherePoint>> {
    o.validate()?;
    if p.direction() != Direction::Increasing {
        return Err(Error::DirectionMismatch(
            "sphere potentials are minimized for increasing profiles".into(),
        ));
    }
    let samples = r.sample(1000, mix(o.seed, 0x5053_5441))?;
    let mut starts: Vec<SpherePoint> = normalized_mean(&samples).into_iter().collect();
    starts.extend(
        samples
            .into_iter()
            .take(o.starts.saturating_sub(starts.len())),
    );
    let obj = |x: &SpherePoint| {
        let e = potential_evaluate(r, x, p, q)?;
        let n1 = x.coords().len() as f64;
        Ok((e.value.value, e.gradient.clone(), e.gradient.norm() / n1))
    };
    let admissible = |_: &SpherePoint| Some(f64::INFINITY);
    let step0 = o.init_step.unwrap_or(0.1);
    let runs: Vec<Result<Run<SpherePoint>>> = starts
        .into_par_iter()
        .map(|x0| descend(&obj, &admissible, x0, step0, o))
        .collect();
    best_run(runs, Kind::Minimum)
}

/// Global maximizer of `int_r f(dist(x, y))` over `H^n` for decreasing `f`.
pub fn maximize_potential_hyperbolic(
    r: &HRegion,
    p: &PotentialSpec,
    q: &QuadratureSpec,
    o: &OptimizerOpts,
) -> Result<CriticalPoint<HyperPoint>> {
    o.validate()?;
    if p.direction() != Direction::Decreasing {
        return Err(Error::DirectionMismatch(
            "hyperbolic potentials are maximized for decreasing profiles".into(),
        ));
    }
    let obj = |x: &HyperPoint| {
        let e = potential_evaluate(r, x, p, q)?;
        let n1 = x.coords().len() as f64;
        Ok((
            -e.value.value,
            e.gradient.scaled(-1.0),
            e.gradient.norm() / n1,
        ))
    };
    let value = |x: &HyperPoint| potential_evaluate(r, x, p, q).map(|e| e.value.value);
    let found = multistart_ascent(r, &obj, &value, o)?;
    Ok(found.into_iter().next().expect("nonempty"))
}

fn best_run<P: Point<Scalar = f64>>(
    runs: Vec<Result<Run<P>>>,
    kind: Kind,
) -> Result<CriticalPoint<P>> {
    let mut best: Option<Run<P>> = None;
    let mut last_err = None;
    for run in runs {
        match run {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.state.f < b.state.f) {
                    best = Some(r);
                }
            }
            Err(e @ Error::MaxItersExceeded { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    let Some(b) = best else {
        return Err(last_err.expect("at least one start"));
    };
    let sign = if kind == Kind::Maximum { -1.0 } else { 1.0 };
    Ok(CriticalPoint {
        grad_norm: b.state.g.norm(),
        location: b.state.x,
        value: sign * b.state.f,
        residual: b.state.aux,
        kind,
        iterations: b.iterations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub samples: usize,
    pub min_second_derivative: f64,
    pub all_positive: bool,
    pub minimizers: Vec<CriticalPoint<SpherePoint>>,
    /// Largest pairwise geodesic distance between multi-start minimizers.
    pub spread: f64,
    pub unique: bool,
}

/// Positivity of `d^2 A / dt^2` on `samples` seeded feasible `(x, v)` pairs and
/// agreement of minimizers from 8 feasible starts (spread `<= 1e-6`).
pub fn verify_convexity(
    r: &Region,
    samples: usize,
    seed: u64,
    q: &QuadratureSpec,
    o: &OptimizerOpts,
) -> Result<ConvexityReport> {
    let xs = feasible_points(r, samples, 1e-2, seed)?;
    let values: Vec<f64> = xs
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let v = random_unit_tangent(x, mix(seed, i as u64));
            second_derivative_dir(r, x, &v, q)
        })
        .collect::<Result<_>>()?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let starts = feasible_points(r, 8, 1e-2, mix(seed, 0x5354))?;
    let minimizers: Vec<CriticalPoint<SpherePoint>> = starts
        .into_par_iter()
        .map(|x0| minimize_sphere_from(r, x0, q, o).map(|c| c.0))
        .collect::<Result<_>>()?;
    let mut spread: f64 = 0.0;
    for i in 0..minimizers.len() {
        for j in (i + 1)..minimizers.len() {
            spread = spread.max(minimizers[i].location.dist(&minimizers[j].location));
        }
    }
    Ok(ConvexityReport {
        samples,
        min_second_derivative: min,
        all_positive: values.iter().all(|&v| v > 0.0),
        minimizers,
        spread,
        unique: spread <= 1e-6,
    })
}

/// Uniformly random unit tangent vector at `x`.
pub fn random_unit_tangent<P: Point<Scalar = f64>>(x: &P, seed: u64) -> TangentVec<P> {
    let mut rng = stream(seed, 0x5456);
    loop {
        let w = gaussian_vec(&mut rng, x.coords().len());
        if let Some(u) = x.project(&w).unit() {
            return u;
        }
    }
}
