//! Seeded Monte Carlo: uniform region samples, mean times measure.

use rayon::prelude::*;

use super::{check_finite, Field, Partial};
use crate::error::Result;
use crate::regions::Domain;

pub(crate) fn integrate<R: Domain>(
    r: &R,
    width: usize,
    f: Field<R::Point>,
    samples: usize,
    seed: u64,
) -> Result<Partial> {
    let points = r.sample(samples, seed)?;
    let values: Vec<Vec<f64>> = points
        .par_iter()
        .map(|y| {
            let mut buf = vec![0.0; width];
            f(y, &mut buf);
            check_finite(&buf)?;
            Ok(buf)
        })
        .collect::<Result<_>>()?;
    let count = values.len() as f64;
    let measure = r.measure();
    let mut mean = vec![0.0; width];
    for v in &values {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);
    let mut var = vec![0.0; width];
    for v in &values {
        for ((s, x), m) in var.iter_mut().zip(v).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    let err = var
        .iter()
        .map(|s| measure * (s / (count - 1.0) / count).sqrt())
        .collect();
    Ok(Partial {
        value: mean.iter().map(|m| m * measure).collect(),
        err,
        evals: values.len() as u64,
    })
}
