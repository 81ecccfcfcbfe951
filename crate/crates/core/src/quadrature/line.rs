//! Gauss-Legendre on intervals with order doubling.

use super::{check_finite, converged, gauss, inf_norm, Partial};
use crate::error::{Error, Result};

fn rule(
    a: f64,
    b: f64,
    order: usize,
    width: usize,
    f: &(dyn Fn(f64, &mut [f64]) + Sync),
) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; width];
    let mut buf = vec![0.0; width];
    for (t, w) in gauss::mapped(order, a, b) {
        buf.iter_mut().for_each(|x| *x = 0.0);
        f(t, &mut buf);
        check_finite(&buf)?;
        for (s, v) in acc.iter_mut().zip(&buf) {
            *s += w * v;
        }
    }
    Ok(acc)
}

fn segment(
    a: f64,
    b: f64,
    width: usize,
    f: &(dyn Fn(f64, &mut [f64]) + Sync),
    rel_tol: f64,
    budget: u64,
) -> Result<Partial> {
    let mut order = 8usize;
    let mut evals = order as u64;
    let mut prev = rule(a, b, order, width, f)?;
    let mut last_err = f64::INFINITY;
    loop {
        order *= 2;
        if evals + order as u64 > budget {
            return Err(Error::BudgetExceeded {
                max_evals: budget,
                err_est: last_err,
            });
        }
        let cur = rule(a, b, order, width, f)?;
        evals += order as u64;
        let err: Vec<f64> = cur.iter().zip(&prev).map(|(x, y)| (x - y).abs()).collect();
        if converged(&cur, &err, rel_tol) {
            return Ok(Partial {
                value: cur,
                err,
                evals,
            });
        }
        last_err = inf_norm(&err);
        prev = cur;
    }
}

/// `int_a^b f`, split at `pole` when it lies strictly inside.
pub(crate) fn integrate(
    a: f64,
    b: f64,
    pole: Option<f64>,
    width: usize,
    f: &(dyn Fn(f64, &mut [f64]) + Sync),
    rel_tol: f64,
    budget: u64,
) -> Result<Partial> {
    let cuts: Vec<(f64, f64)> = match pole {
        Some(p) if p > a && p < b => vec![(a, p), (p, b)],
        _ => vec![(a, b)],
    };
    let mut out = Partial {
        value: vec![0.0; width],
        err: vec![0.0; width],
        evals: 0,
    };
    for (lo, hi) in cuts {
        let p = segment(lo, hi, width, f, rel_tol, budget.saturating_sub(out.evals))?;
        out.evals += p.evals;
        for i in 0..width {
            out.value[i] += p.value[i];
            out.err[i] += p.err[i];
        }
    }
    Ok(out)
}
