//! Uniform sampling. Caps and intervals are drawn directly by inverse CDF,
//! polygons by rejection from an enclosing ball, unions as a mixture weighted
//! by part measure. Point `i` always comes from stream `(seed, i)`.

use rand::Rng as _;
use rayon::prelude::*;

use super::{cap_radial_quantile, enclosing_cap, enclosing_hball, hcap_radial_quantile};
use super::{Domain, HRegion, Region};
use crate::error::{Error, Result};
use crate::geometry::{Point, SpherePoint as GSpherePoint};
use crate::rng::{gaussian_vec, mix, stream, Rng};
use crate::{HyperPoint, SpherePoint};

const PILOT_PROPOSALS: u64 = 1_000_000;
const PILOT_ACCEPTS: u64 = 100;
const MIN_ACCEPTANCE: f64 = 1e-4;
const PILOT_TAG: u64 = 0x0050_494c_4f54;
const DISJOINT_SAMPLES: usize = 5_000;

/// Sampled points together with the number of proposals spent on them.
#[derive(Clone, Debug)]
pub struct SampleStats<P> {
    pub points: Vec<P>,
    pub proposals: u64,
}

impl<P> SampleStats<P> {
    pub fn acceptance_rate(&self) -> f64 {
        self.points.len() as f64 / self.proposals.max(1) as f64
    }
}

#[derive(Clone, Debug)]
enum Source {
    /// Uniform in a spherical cap (`radius = pi` is the whole sphere).
    Cap {
        center: Vec<f64>,
        frame: Vec<Vec<f64>>,
        radius: f64,
    },
    HBall {
        center: Vec<f64>,
        frame: Vec<Vec<f64>>,
        radius: f64,
    },
    Interval(f64, f64),
}

impl Source {
    fn sphere_cap(center: &SpherePoint, radius: f64) -> Self {
        Source::Cap {
            center: center.coords().to_vec(),
            frame: center.tangent_frame(),
            radius,
        }
    }

    fn hball(center: &HyperPoint, radius: f64) -> Self {
        Source::HBall {
            center: center.coords().to_vec(),
            frame: center.tangent_frame(),
            radius,
        }
    }

    fn propose(&self, rng: &mut Rng) -> Vec<f64> {
        match self {
            Source::Cap {
                center,
                frame,
                radius,
            } => {
                let n = frame.len();
                let u: f64 = rng.random();
                let t = cap_radial_quantile(n, radius.min(std::f64::consts::PI), u);
                let dir = unit_direction(rng, frame);
                let (s, c) = t.sin_cos();
                center
                    .iter()
                    .zip(&dir)
                    .map(|(x, d)| c * x + s * d)
                    .collect()
            }
            Source::HBall {
                center,
                frame,
                radius,
            } => {
                let n = frame.len();
                let u: f64 = rng.random();
                let t = hcap_radial_quantile(n, *radius, u);
                let dir = unit_direction(rng, frame);
                let (s, c) = (t.sinh(), t.cosh());
                center
                    .iter()
                    .zip(&dir)
                    .map(|(x, d)| c * x + s * d)
                    .collect()
            }
            Source::Interval(a, b) => {
                let u: f64 = rng.random();
                let t = a + u * (b - a);
                vec![t.sinh(), t.cosh()]
            }
        }
    }
}

/// Uniform unit vector in the span of an orthonormal tangent frame.
fn unit_direction(rng: &mut Rng, frame: &[Vec<f64>]) -> Vec<f64> {
    let n = frame.len();
    if n == 1 {
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return frame[0].iter().map(|f| s * f).collect();
    }
    loop {
        let g = gaussian_vec(rng, n);
        let r = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-300 {
            let mut out = vec![0.0; frame[0].len()];
            for (gi, f) in g.iter().zip(frame) {
                for (o, fj) in out.iter_mut().zip(f) {
                    *o += gi / r * fj;
                }
            }
            return out;
        }
    }
}

struct Piece<'a, R> {
    source: Source,
    filter: Option<&'a R>,
}

/// Prepared sampler for a region; reusable across seeds.
pub struct Sampler<'a, R: Domain> {
    pieces: Vec<Piece<'a, R>>,
    cumulative: Vec<f64>,
    lift: fn(Vec<f64>) -> R::Point,
}

fn lift_sphere(c: Vec<f64>) -> SpherePoint {
    let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    GSpherePoint::from_unit_unchecked(c.into_iter().map(|x| x / n).collect())
}

fn lift_hyper(c: Vec<f64>) -> HyperPoint {
    HyperPoint::from_spatial(&c[..c.len() - 1])
}

impl<'a> Sampler<'a, Region> {
    pub fn for_region(region: &'a Region) -> Result<Self> {
        let mut pieces = Vec::new();
        let mut weights = Vec::new();
        for part in region.parts() {
            let source = match part {
                Region::Cap(c) => Source::sphere_cap(c.center(), c.radius()),
                Region::Polygon(_) => match enclosing_cap(part) {
                    Ok(cap) => Source::sphere_cap(cap.center(), cap.radius() + 1e-12),
                    Err(_) => Source::sphere_cap(&GSpherePoint::axis(2, 2), std::f64::consts::PI),
                },
                Region::Union(_) => unreachable!("parts are never unions"),
            };
            let filter = (!part.is_cap()).then_some(part);
            pieces.push(Piece { source, filter });
            weights.push(part.measure());
        }
        Self::build(pieces, weights, lift_sphere)
    }
}

impl<'a> Sampler<'a, HRegion> {
    pub fn for_hregion(region: &'a HRegion) -> Result<Self> {
        let mut pieces = Vec::new();
        let mut weights = Vec::new();
        for part in region.parts() {
            match part {
                HRegion::Cap(c) => {
                    pieces.push(Piece {
                        source: Source::hball(c.center(), c.radius()),
                        filter: None,
                    });
                    weights.push(c.measure());
                }
                HRegion::Polygon(p) => {
                    let ball = enclosing_hball(part);
                    pieces.push(Piece {
                        source: Source::hball(ball.center(), ball.radius() * (1.0 + 1e-12)),
                        filter: Some(part),
                    });
                    weights.push(p.measure());
                }
                HRegion::Intervals(s) => {
                    for &(a, b) in s.intervals() {
                        pieces.push(Piece {
                            source: Source::Interval(a, b),
                            filter: None,
                        });
                        weights.push(b - a);
                    }
                }
                HRegion::Union(_) => unreachable!("parts are never unions"),
            }
        }
        Self::build(pieces, weights, lift_hyper)
    }
}

impl<'a, R: Domain> Sampler<'a, R> {
    fn build(
        pieces: Vec<Piece<'a, R>>,
        weights: Vec<f64>,
        lift: fn(Vec<f64>) -> R::Point,
    ) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        let s = Self {
            pieces,
            cumulative,
            lift,
        };
        s.pilot()?;
        Ok(s)
    }

    /// Aborts when a rejection piece accepts fewer than one proposal in 10^4.
    fn pilot(&self) -> Result<()> {
        for (k, piece) in self.pieces.iter().enumerate() {
            let Some(filter) = piece.filter else { continue };
            let mut rng = stream(mix(0, PILOT_TAG), k as u64);
            let mut accepted = 0;
            let mut proposals = 0;
            while accepted < PILOT_ACCEPTS && proposals < PILOT_PROPOSALS {
                proposals += 1;
                if filter.contains(&(self.lift)(piece.source.propose(&mut rng))) {
                    accepted += 1;
                }
            }
            let rate = accepted as f64 / proposals as f64;
            if accepted < PILOT_ACCEPTS && rate < MIN_ACCEPTANCE {
                return Err(Error::RejectionStall { rate, proposals });
            }
        }
        Ok(())
    }

    /// One uniform point from `rng`, with the proposals it took.
    pub fn draw(&self, rng: &mut Rng) -> Result<(R::Point, u64)> {
        let u: f64 = rng.random();
        let k = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.pieces.len() - 1);
        let piece = &self.pieces[k];
        let mut proposals = 0;
        loop {
            proposals += 1;
            let y = (self.lift)(piece.source.propose(rng));
            match piece.filter {
                Some(f) if !f.contains(&y) => {
                    if proposals >= 100 * PILOT_PROPOSALS {
                        return Err(Error::RejectionStall {
                            rate: 0.0,
                            proposals,
                        });
                    }
                }
                _ => return Ok((y, proposals)),
            }
        }
    }

    /// `count` points; point `i` is drawn from stream `(seed, i)`.
    pub fn run(&self, count: usize, seed: u64) -> Result<SampleStats<R::Point>> {
        let draws: Vec<(R::Point, u64)> = (0..count)
            .into_par_iter()
            .map(|i| self.draw(&mut stream(seed, i as u64)))
            .collect::<Result<_>>()?;
        let proposals = draws.iter().map(|d| d.1).sum();
        Ok(SampleStats {
            points: draws.into_iter().map(|d| d.0).collect(),
            proposals,
        })
    }
}

/// Sampling test for overlap of two union parts.
pub(crate) fn check_disjoint<R: Domain>(a: &R, b: &R) -> Result<bool> {
    let seed = mix(0xD15_7017, 1);
    let pa = a.sample(DISJOINT_SAMPLES, seed)?;
    if pa.iter().any(|y| b.contains(y)) {
        return Ok(false);
    }
    let pb = b.sample(DISJOINT_SAMPLES, mix(seed, 2))?;
    Ok(!pb.iter().any(|y| a.contains(y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sp(c: &[f64]) -> SpherePoint {
        SpherePoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn cap_samples_stay_inside_and_match_moments() {
        let cap = Region::cap(sp(&[0., 0., 1.]), 1.0).unwrap();
        let pts = cap.sample(20_000, 3).unwrap();
        assert!(pts.iter().all(|p| cap.contains(p)));
        // E[z] over a cap of radius r is (1 + cos r) / 2 on S^2
        let mean_z = pts.iter().map(|p| p.coords()[2]).sum::<f64>() / pts.len() as f64;
        assert_relative_eq!(mean_z, (1.0 + 1f64.cos()) / 2.0, epsilon = 5e-3);
    }

    #[test]
    fn samples_are_deterministic_and_prefix_stable() {
        let r = Region::polygon(vec![
            sp(&[1., 0., 0.]),
            sp(&[0., 1., 0.]),
            sp(&[0., 0., 1.]),
        ])
        .unwrap();
        let a = r.sample(100, 9).unwrap();
        let b = r.sample(50, 9).unwrap();
        assert_eq!(&a[..50], &b[..]);
        assert!(a.iter().all(|p| r.contains(p)));
    }

    #[test]
    fn polygon_measure_agrees_with_hit_rate() {
        let r = Region::polygon(vec![
            sp(&[1., 0., 0.2]),
            sp(&[0.3, 1., 0.1]),
            sp(&[-0.2, 0.4, 1.]),
            sp(&[0.5, -0.4, 1.]),
        ])
        .unwrap();
        let cap = enclosing_cap(&r).unwrap();
        let probe = Region::Cap(cap.clone());
        let pts = probe.sample(200_000, 4).unwrap();
        let hits = pts.iter().filter(|p| r.contains(p)).count() as f64;
        let est = hits / pts.len() as f64 * cap.measure();
        assert_relative_eq!(est, r.measure(), max_relative = 1e-2);
    }

    #[test]
    fn whole_sphere_fallback_for_large_polygons() {
        let r = Region::polygon(vec![
            sp(&[1., 0., 0.]),
            sp(&[0., 0., 1.]),
            sp(&[0., 1., 0.]),
        ])
        .unwrap();
        let s = r.sample_with_stats(2_000, 1).unwrap();
        assert!(s.points.iter().all(|p| r.contains(p)));
        assert_relative_eq!(s.acceptance_rate(), 7.0 / 8.0, epsilon = 0.03);
    }

    #[test]
    fn hyperbolic_samples() {
        let ball = HRegion::cap(HyperPoint::origin(2), 1.5).unwrap();
        let pts = ball.sample(20_000, 5).unwrap();
        assert!(pts.iter().all(|p| ball.contains(p)));
        // E[cosh d] for radial density sinh t on [0, r]
        let want = {
            let r: f64 = 1.5;
            let num = (r.sinh().powi(2)) / 2.0;
            num / (r.cosh() - 1.0)
        };
        let got = pts.iter().map(|p| p.coords()[2]).sum::<f64>() / pts.len() as f64;
        assert_relative_eq!(got, want, max_relative = 1e-2);

        let iv = HRegion::intervals(vec![(-2.0, -1.0), (1.0, 2.0)]).unwrap();
        let pts = iv.sample(1_000, 1).unwrap();
        assert!(pts.iter().all(|p| iv.contains(p)));
    }

    #[test]
    fn stall_is_reported() {
        let (h, e) = (std::f64::consts::FRAC_1_SQRT_2, 1e-7);
        let sliver = Region::polygon(vec![
            sp(&[1., 0., 0.]),
            sp(&[h, h, -e]),
            sp(&[0., 1., 0.]),
            sp(&[h, h, e]),
        ])
        .unwrap();
        assert!(sliver.measure() < 1e-6);
        assert!(matches!(
            sliver.sample(10, 1),
            Err(Error::RejectionStall { .. })
        ));
    }
}
