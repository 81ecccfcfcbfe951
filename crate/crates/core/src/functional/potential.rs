//! Strictly monotone radial profiles `f: [0, inf) -> R` for distance potentials.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
        })
    }
}

/// Monotone piecewise cubic Hermite interpolant (Fritsch-Butland slopes),
/// continued linearly past the last knot with the last secant slope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotoneSpline {
    t: Vec<f64>,
    f: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneSpline {
    /// Knots must start at 0, increase strictly, and carry strictly monotone values.
    pub fn new(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidOption(
                "spline needs at least two knots".into(),
            ));
        }
        if knots[0].0 != 0.0 {
            return Err(Error::InvalidOption(
                "first spline knot must be at t = 0".into(),
            ));
        }
        let (t, f): (Vec<f64>, Vec<f64>) = knots.iter().copied().unzip();
        if t.iter().chain(&f).any(|v| !v.is_finite()) {
            return Err(Error::InvalidOption("spline knots must be finite".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidOption(
                "spline abscissae must increase strictly".into(),
            ));
        }
        let d: Vec<f64> = (0..t.len() - 1)
            .map(|i| (f[i + 1] - f[i]) / (t[i + 1] - t[i]))
            .collect();
        let sign = d[0].signum();
        if d.iter().any(|&s| s == 0.0 || s.signum() != sign) {
            return Err(Error::InvalidOption(
                "spline values must be strictly monotone".into(),
            ));
        }
        let k = t.len();
        let mut m = vec![0.0; k];
        m[0] = d[0];
        m[k - 1] = d[k - 2];
        for i in 1..k - 1 {
            let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
            let (w1, w2) = (2.0 * h1 + h0, h1 + 2.0 * h0);
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
        Ok(Self { t, f, m })
    }

    fn locate(&self, t: f64) -> usize {
        self.t
            .partition_point(|&k| k <= t)
            .clamp(1, self.t.len() - 1)
            - 1
    }

    pub fn value(&self, t: f64) -> f64 {
        let k = self.t.len();
        if t >= self.t[k - 1] {
            let s = (self.f[k - 1] - self.f[k - 2]) / (self.t[k - 1] - self.t[k - 2]);
            return self.f[k - 1] + s * (t - self.t[k - 1]);
        }
        let i = self.locate(t);
        let h = self.t[i + 1] - self.t[i];
        let s = (t - self.t[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.f[i]
            + (s3 - 2.0 * s2 + s) * h * self.m[i]
            + (-2.0 * s3 + 3.0 * s2) * self.f[i + 1]
            + (s3 - s2) * h * self.m[i + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let k = self.t.len();
        if t >= self.t[k - 1] {
            return (self.f[k - 1] - self.f[k - 2]) / (self.t[k - 1] - self.t[k - 2]);
        }
        let i = self.locate(t);
        let h = self.t[i + 1] - self.t[i];
        let s = (t - self.t[i]) / h;
        (6.0 * s * s - 6.0 * s) * (self.f[i] - self.f[i + 1]) / h
            + (3.0 * s * s - 4.0 * s + 1.0) * self.m[i]
            + (3.0 * s * s - 2.0 * s) * self.m[i + 1]
    }
}

/// Radial profile of a potential.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    /// `t^p`, `p > 0`.
    Power {
        exponent: f64,
    },
    /// `exp(rate t)`, `rate != 0`.
    Exp {
        rate: f64,
    },
    /// `ln(1 + rate t)`, `rate > 0`.
    Log1p {
        rate: f64,
    },
    /// `sec^k t` up to `cap < pi/2`, continued linearly.
    SecPower {
        power: i32,
        cap: f64,
    },
    /// `sech^k t`.
    SechPower {
        power: i32,
    },
    Table(MonotoneSpline),
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Profile::Power { exponent } => t.powf(*exponent),
            Profile::Exp { rate } => (rate * t).exp(),
            Profile::Log1p { rate } => (rate * t).ln_1p(),
            Profile::SecPower { power, cap } => {
                let s = t.min(*cap);
                let v = s.cos().powi(-power);
                if t <= *cap {
                    v
                } else {
                    v + self.derivative(*cap) * (t - cap)
                }
            }
            Profile::SechPower { power } => t.cosh().powi(-power),
            Profile::Table(s) => s.value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Profile::Power { exponent } => {
                if t == 0.0 {
                    if *exponent == 1.0 {
                        1.0
                    } else if *exponent > 1.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    exponent * t.powf(exponent - 1.0)
                }
            }
            Profile::Exp { rate } => rate * (rate * t).exp(),
            Profile::Log1p { rate } => rate / (1.0 + rate * t),
            Profile::SecPower { power, cap } => {
                let s = t.min(*cap);
                *power as f64 * s.cos().powi(-power) * s.tan()
            }
            Profile::SechPower { power } => -(*power as f64) * t.cosh().powi(-power) * t.tanh(),
            Profile::Table(s) => s.derivative(t),
        }
    }

    fn check_parameters(&self) -> Result<()> {
        let ok = match self {
            Profile::Power { exponent } => *exponent > 0.0 && exponent.is_finite(),
            Profile::Exp { rate } => *rate != 0.0 && rate.is_finite(),
            Profile::Log1p { rate } => *rate > 0.0 && rate.is_finite(),
            Profile::SecPower { power, cap } => *power > 0 && *cap > 0.0 && *cap < FRAC_PI_2,
            Profile::SechPower { power } => *power > 0,
            Profile::Table(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidOption(format!(
                "invalid potential parameters: {self:?}"
            )))
        }
    }
}

/// Interval `[0, CHECK_SPAN]` on which monotonicity is spot-checked.
pub const CHECK_SPAN: f64 = 20.0;
const CHECK_POINTS: usize = 1000;

/// A strictly monotone continuous profile together with its declared direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialSpec {
    profile: Profile,
    direction: Direction,
}

impl PotentialSpec {
    /// Validates parameters and checks strict monotonicity in the declared
    /// direction on 10^3 grid points of `[0, CHECK_SPAN]`.
    pub fn new(profile: Profile, direction: Direction) -> Result<Self> {
        profile.check_parameters()?;
        let mut prev = profile.value(0.0);
        for i in 1..CHECK_POINTS {
            let t = CHECK_SPAN * i as f64 / (CHECK_POINTS - 1) as f64;
            let v = profile.value(t);
            let ok = match direction {
                Direction::Increasing => v > prev,
                Direction::Decreasing => v < prev,
            };
            if !ok || !v.is_finite() {
                return Err(Error::InvalidOption(format!(
                    "potential is not strictly {direction} near t = {t}"
                )));
            }
            prev = v;
        }
        Ok(Self { profile, direction })
    }

    /// Builtin profile with the direction it actually has.
    pub fn builtin(profile: Profile) -> Result<Self> {
        profile.check_parameters()?;
        let direction = if profile.derivative(1.0) > 0.0 {
            Direction::Increasing
        } else {
            Direction::Decreasing
        };
        Self::new(profile, direction)
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn value(&self, t: f64) -> f64 {
        self.profile.value(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.profile.derivative(t)
    }
}

impl FromStr for PotentialSpec {
    type Err = Error;

    /// `power:P`, `exp:R`, `log1p:R`, `sec:K[:CAP]` or `sech:K`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidOption(format!("cannot parse potential '{s}'"));
        let mut it = s.split(':');
        let name = it.next().ok_or_else(bad)?;
        let args: Vec<&str> = it.collect();
        let num = |i: usize| -> Result<f64> {
            args.get(i)
                .ok_or_else(bad)?
                .parse::<f64>()
                .map_err(|_| bad())
        };
        let int = |i: usize| -> Result<i32> {
            args.get(i)
                .ok_or_else(bad)?
                .parse::<i32>()
                .map_err(|_| bad())
        };
        let profile = match name {
            "power" => Profile::Power { exponent: num(0)? },
            "exp" => Profile::Exp { rate: num(0)? },
            "log1p" => Profile::Log1p { rate: num(0)? },
            "sec" => Profile::SecPower {
                power: int(0)?,
                cap: if args.len() > 1 {
                    num(1)?
                } else {
                    FRAC_PI_2 - 1e-6
                },
            },
            "sech" => Profile::SechPower { power: int(0)? },
            _ => return Err(bad()),
        };
        Self::builtin(profile)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn builtins_and_directions() {
        let p: PotentialSpec = "power:2".parse().unwrap();
        assert_eq!(p.direction(), Direction::Increasing);
        assert_relative_eq!(p.value(3.0), 9.0);
        let e: PotentialSpec = "exp:-1".parse().unwrap();
        assert_eq!(e.direction(), Direction::Decreasing);
        assert!("exp:0".parse::<PotentialSpec>().is_err());
        assert!("power:-1".parse::<PotentialSpec>().is_err());
        assert!(PotentialSpec::new(Profile::Exp { rate: -1.0 }, Direction::Increasing).is_err());
        let s: PotentialSpec = "sec:3:1.2".parse().unwrap();
        assert_relative_eq!(s.value(1.0), 1f64.cos().powi(-3), max_relative = 1e-15);
        assert!(s.value(1.3) > s.value(1.2));
    }

    #[test]
    fn derivatives_match_differences() {
        let cases = [
            "power:1",
            "power:2.5",
            "exp:0.7",
            "exp:-1",
            "log1p:2",
            "sec:3:1.2",
            "sech:3",
        ];
        for c in cases {
            let p: PotentialSpec = c.parse().unwrap();
            for t in [0.3, 0.9, 1.1, 2.0] {
                let h = 1e-6;
                let fd = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
                assert_relative_eq!(p.derivative(t), fd, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn spline_interpolates_and_stays_monotone() {
        let knots: Vec<(f64, f64)> = (0..8)
            .map(|i| (i as f64 * 0.5, (i as f64 * 0.5).powi(2)))
            .collect();
        let s = MonotoneSpline::new(&knots).unwrap();
        for &(t, f) in &knots {
            assert_relative_eq!(s.value(t), f, epsilon = 1e-12);
        }
        let spec = PotentialSpec::new(Profile::Table(s.clone()), Direction::Increasing).unwrap();
        for t in [0.2, 1.3, 3.4, 9.0] {
            let h = 1e-6;
            let fd = (spec.value(t + h) - spec.value(t - h)) / (2.0 * h);
            assert_relative_eq!(spec.derivative(t), fd, max_relative = 1e-5);
        }
        assert!(MonotoneSpline::new(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.5)]).is_err());
        assert!(MonotoneSpline::new(&[(0.5, 0.0), (1.0, 1.0)]).is_err());
        assert!(PotentialSpec::new(Profile::Table(s), Direction::Decreasing).is_err());
    }
}
