//! Integration domains on `S^n` and `H^n`: construction, membership, exact
//! measure, feasibility against the polar set, sampling and random ensembles.

mod enclosing;
mod hyper;
pub mod json;
mod random;
mod sampling;
mod sphere;

pub use enclosing::{enclosing_cap, enclosing_hball};
pub use hyper::{HCap, HIntervalSet, HPolygon, HRegion};
pub use random::{random_hregion, random_region, Shape};
pub use sampling::{SampleStats, Sampler};
pub use sphere::{feasibility_margin, Cap, Polygon, Region};

use crate::error::Result;
use crate::geometry::Point;

/// Common interface of spherical and hyperbolic regions.
pub trait Domain: Send + Sync {
    type Point: Point<Scalar = f64>;

    fn dim(&self) -> usize;

    fn contains(&self, y: &Self::Point) -> bool;

    /// Standard measure (`sigma_n` on the sphere, `mu_n` on the hyperboloid).
    fn measure(&self) -> f64;

    /// `count` i.i.d. uniform points; deterministic in `seed`.
    fn sample(&self, count: usize, seed: u64) -> Result<Vec<Self::Point>> {
        Ok(self.sample_with_stats(count, seed)?.points)
    }

    fn sample_with_stats(&self, count: usize, seed: u64) -> Result<SampleStats<Self::Point>>;
}

/// Volume of the unit sphere `S^m`.
pub fn sphere_surface(m: usize) -> f64 {
    use std::f64::consts::PI;
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * sphere_surface(m - 2),
    }
}

/// Volume `omega_n` of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    sphere_surface(n - 1) / n as f64
}

/// `int_0^t sin^m s ds`.
pub fn sin_power_integral(m: usize, t: f64) -> f64 {
    match m {
        0 => t,
        1 => 2.0 * (t / 2.0).sin().powi(2),
        _ => {
            let mf = m as f64;
            -t.sin().powi(m as i32 - 1) * t.cos() / mf
                + (mf - 1.0) / mf * sin_power_integral(m - 2, t)
        }
    }
}

/// `int_0^t sinh^m s ds`.
pub fn sinh_power_integral(m: usize, t: f64) -> f64 {
    match m {
        0 => t,
        1 => 2.0 * (t / 2.0).sinh().powi(2),
        _ => {
            let mf = m as f64;
            t.sinh().powi(m as i32 - 1) * t.cosh() / mf
                - (mf - 1.0) / mf * sinh_power_integral(m - 2, t)
        }
    }
}

/// `sigma_n` of a spherical cap of angular radius `radius`.
pub fn cap_measure(n: usize, radius: f64) -> f64 {
    sphere_surface(n - 1) * sin_power_integral(n - 1, radius)
}

/// `mu_n` of a hyperbolic ball of radius `radius`.
pub fn hcap_measure(n: usize, radius: f64) -> f64 {
    sphere_surface(n - 1) * sinh_power_integral(n - 1, radius)
}

/// Radius `t` with `int_0^t sin^{n-1} = u int_0^alpha sin^{n-1}`.
pub(crate) fn cap_radial_quantile(n: usize, alpha: f64, u: f64) -> f64 {
    match n {
        1 => u * alpha,
        2 => 2.0 * (u.sqrt() * (alpha / 2.0).sin()).asin(),
        _ => bisect_quantile(|t| sin_power_integral(n - 1, t), alpha, u),
    }
}

pub(crate) fn hcap_radial_quantile(n: usize, alpha: f64, u: f64) -> f64 {
    match n {
        1 => u * alpha,
        2 => 2.0 * (u.sqrt() * (alpha / 2.0).sinh()).asinh(),
        _ => bisect_quantile(|t| sinh_power_integral(n - 1, t), alpha, u),
    }
}

fn bisect_quantile(cdf: impl Fn(f64) -> f64, alpha: f64, u: f64) -> f64 {
    let target = u * cdf(alpha);
    let (mut lo, mut hi) = (0.0, alpha);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn sphere_volumes() {
        assert_relative_eq!(sphere_surface(2), 4.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(sphere_surface(3), 2.0 * PI * PI, epsilon = 1e-14);
        assert_relative_eq!(unit_ball_volume(2), PI, epsilon = 1e-14);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, epsilon = 1e-14);
        assert_relative_eq!(unit_ball_volume(1), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn power_integrals_match_quadrature() {
        // composite Simpson oracle
        let simpson = |f: &dyn Fn(f64) -> f64, t: f64| {
            let n = 20_000;
            let h = t / n as f64;
            let mut s = f(0.0) + f(t);
            for i in 1..n {
                s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        for m in 0..5 {
            for t in [0.3, 1.1, 2.9] {
                let want = simpson(&|s: f64| s.sin().powi(m as i32), t);
                assert_relative_eq!(sin_power_integral(m, t), want, max_relative = 1e-10);
                let want = simpson(&|s: f64| s.sinh().powi(m as i32), t);
                assert_relative_eq!(sinh_power_integral(m, t), want, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn cap_measures() {
        assert_relative_eq!(cap_measure(2, PI / 3.0), PI, epsilon = 1e-14);
        assert_relative_eq!(cap_measure(1, 0.7), 1.4, epsilon = 1e-15);
        assert_relative_eq!(
            hcap_measure(2, 1.3),
            2.0 * PI * (1.3f64.cosh() - 1.0),
            max_relative = 1e-14
        );
    }

    #[test]
    fn quantiles_invert_cdf() {
        for n in 1..5 {
            for u in [0.1, 0.5, 0.9] {
                let t = cap_radial_quantile(n, 1.2, u);
                assert_relative_eq!(
                    sin_power_integral(n - 1, t),
                    u * sin_power_integral(n - 1, 1.2),
                    max_relative = 1e-12
                );
                let t = hcap_radial_quantile(n, 1.2, u);
                assert_relative_eq!(
                    sinh_power_integral(n - 1, t),
                    u * sinh_power_integral(n - 1, 1.2),
                    max_relative = 1e-12
                );
            }
        }
    }
}
