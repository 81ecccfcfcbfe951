use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use approx::assert_relative_eq;
use gnomon::geometry::Point;
use gnomon::quadrature::{
    integrate, integrate_about, integrate_intervals, integrate_vector, Method, MethodUsed,
    QuadratureSpec,
};
use gnomon::regions::{cap_measure, Domain};
use gnomon::{Error, HIntervalSet, HRegion, HyperPoint, Region, SpherePoint};
use proptest::prelude::*;

fn sp(c: &[f64]) -> SpherePoint {
    SpherePoint::new(c.to_vec()).unwrap()
}

fn octant() -> Region {
    Region::polygon(vec![
        sp(&[1., 0., 0.]),
        sp(&[0., 1., 0.]),
        sp(&[0., 0., 1.]),
    ])
    .unwrap()
}

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn constant_over_cap_is_its_measure() {
    let r = Region::cap(sp(&[0., 0., 1.]), PI / 3.0).unwrap();
    let res = integrate(&r, |_| 1.0, &q()).unwrap();
    assert_eq!(res.method_used, MethodUsed::CapTensor);
    assert!((res.value - PI).abs() <= 1e-8);
    assert!(res.err_est <= 1e-8 * res.value);
}

#[test]
fn constant_over_octant_is_its_measure() {
    let res = integrate(&octant(), |_| 1.0, &q()).unwrap();
    assert_eq!(res.method_used, MethodUsed::PolygonAdaptive);
    assert!((res.value - FRAC_PI_2).abs() <= 1e-8, "{}", res.value);
}

#[test]
fn projection_integrand_over_cap() {
    let x = sp(&[0.2, -0.4, 1.0]);
    let r = Region::cap(x.clone(), FRAC_PI_4).unwrap();
    let res = integrate(&r, |y| x.dot(y).powi(-3), &q()).unwrap();
    assert!((res.value - PI).abs() <= 1e-8 * PI, "{}", res.value);
}

#[test]
fn vector_integrals_over_cap() {
    let a = 0.9f64;
    let r = Region::cap(sp(&[0., 0., 1.]), a).unwrap();
    let res = integrate_vector(&r, 3, |y, out| out.copy_from_slice(y.coords()), &q()).unwrap();
    assert!(res.value[0].abs() < 1e-12 && res.value[1].abs() < 1e-12);
    assert_relative_eq!(res.value[2], PI * a.sin().powi(2), max_relative = 1e-10);
    // independent Monte Carlo check
    let mc = integrate_vector(
        &r,
        3,
        |y, out| out.copy_from_slice(y.coords()),
        &q().with_method(Method::MonteCarlo),
    )
    .unwrap();
    assert!((mc.value[2] - res.value[2]).abs() <= 4.0 * mc.err_est[2]);

    let z = sp(&[0., 0., 1.]);
    let res = integrate_vector(
        &r,
        3,
        |y, out| {
            let w = z.dot(y).powi(-4);
            for (o, c) in out.iter_mut().zip(y.coords()) {
                *o = c * w;
            }
        },
        &q(),
    )
    .unwrap();
    assert!(res.value[0].abs() <= res.err_est[0] + 1e-12);
    assert!(res.value[1].abs() <= res.err_est[1] + 1e-12);

    let zero = integrate_vector(&r, 3, |_, out| out.fill(0.0), &q()).unwrap();
    assert_eq!(zero.value, vec![0.0; 3]);
    assert_eq!(zero.err_est, vec![0.0; 3]);
}

#[test]
fn interval_examples() {
    let s = HIntervalSet::new(vec![(-2.0, -1.0), (1.0, 2.0)]).unwrap();
    let len = integrate_intervals(&s, |_| 1.0, &q()).unwrap();
    assert!((len.value - 2.0).abs() <= 1e-12);
    let one = HIntervalSet::new(vec![(1.0, 2.0)]).unwrap();
    let sech2 = |t: f64| 1.0 / t.cosh().powi(2);
    let r = integrate_intervals(&one, |t| sech2(-t), &q()).unwrap();
    assert_relative_eq!(r.value, 2f64.tanh() - 1f64.tanh(), max_relative = 1e-10);
    let r = integrate_intervals(&s, |t| sech2(0.0 - t), &q()).unwrap();
    assert_relative_eq!(
        r.value,
        2.0 * (2f64.tanh() - 1f64.tanh()),
        max_relative = 1e-10
    );
    assert!((r.value - 0.40487).abs() < 1e-5);
}

#[test]
fn hyperbolic_pieces() {
    // cap at its centre: pi tanh^2
    let c = HyperPoint::from_spatial(&[0.3, -0.2]);
    let a = 1.1f64;
    let r = HRegion::cap(c.clone(), a).unwrap();
    let res = integrate(&r, |y| (-c.lorentz(y)).powi(-3), &q()).unwrap();
    assert_relative_eq!(res.value, PI * a.tanh().powi(2), max_relative = 1e-9);
    // polygon measure through the Klein chart
    let p = HRegion::polygon(vec![
        HyperPoint::from_spatial(&[0.0, 0.0]),
        HyperPoint::from_spatial(&[1.5, 0.0]),
        HyperPoint::from_spatial(&[0.4, 1.2]),
        HyperPoint::from_spatial(&[-0.5, 0.9]),
    ])
    .unwrap();
    let res = integrate(&p, |_| 1.0, &q()).unwrap();
    assert_relative_eq!(res.value, p.measure(), max_relative = 1e-8);
    // interval sets as regions
    let s = HRegion::intervals(vec![(-2.0, -1.0), (1.0, 2.0)]).unwrap();
    let x = HyperPoint::from_theta(1.5);
    let res = integrate(&s, |y| (-x.lorentz(y)).powi(-2), &q()).unwrap();
    let want = 3.5f64.tanh() - 2.5f64.tanh() + 0.5f64.tanh() + 0.5f64.tanh();
    assert_relative_eq!(res.value, want, max_relative = 1e-10);
}

#[test]
fn kinked_integrand_with_pole() {
    // f = dist over an off-centre cap, pole at a point inside
    let r = Region::cap(sp(&[0., 0., 1.]), 1.0).unwrap();
    let x = sp(&[0.3, 0.1, 1.0]);
    let about = integrate_about(&r, |y| x.dist(y), Some(&x), &q()).unwrap();
    let mc = integrate(&r, |y| x.dist(y), &q().with_method(Method::MonteCarlo)).unwrap();
    assert!((about.value - mc.value).abs() <= 4.0 * mc.err_est);
    // centred: closed form 2 pi (sin a - a cos a)
    let z = sp(&[0., 0., 1.]);
    let c = integrate_about(&r, |y| z.dist(y), Some(&z), &q()).unwrap();
    assert_relative_eq!(
        c.value,
        2.0 * PI * (1f64.sin() - 1f64.cos()),
        max_relative = 1e-10
    );
    // polygon with the pole inside
    let o = octant();
    let c = sp(&[1., 1., 1.]);
    let a = integrate_about(&o, |y| c.dist(y), Some(&c), &q()).unwrap();
    let mc = integrate(&o, |y| c.dist(y), &q().with_method(Method::MonteCarlo)).unwrap();
    assert!((a.value - mc.value).abs() <= 4.0 * mc.err_est);
}

#[test]
fn routing_and_errors() {
    let r = octant();
    assert!(matches!(
        integrate(&r, |_| 1.0, &q().with_method(Method::CapTensor)),
        Err(Error::MethodMismatch { .. })
    ));
    let cap = Region::cap(sp(&[0., 0., 1.]), 0.5).unwrap();
    assert!(matches!(
        integrate(&cap, |_| 1.0, &q().with_method(Method::PolygonAdaptive)),
        Err(Error::MethodMismatch { .. })
    ));
    assert!(matches!(
        integrate(&cap, |_| f64::NAN, &q()),
        Err(Error::NonFiniteIntegrand)
    ));
    let tight = QuadratureSpec {
        max_evals: 200,
        ..q()
    };
    assert!(matches!(
        integrate(&cap, |y| (20.0 * y.coords()[0]).sin(), &tight),
        Err(Error::BudgetExceeded { .. })
    ));
    for bad in [0.0, 1.0, -1e-3] {
        assert!(q().with_rel_tol(bad).validate().is_err());
    }
    let few = QuadratureSpec {
        mc_samples: 99,
        ..q()
    };
    assert!(few.validate().is_err());
    // big polygon outside any hemisphere falls back to Monte Carlo
    let big = Region::polygon(vec![
        sp(&[1., 0., 0.]),
        sp(&[0., 0., 1.]),
        sp(&[0., 1., 0.]),
    ])
    .unwrap();
    let res = integrate(&big, |_| 1.0, &q().with_rel_tol(1e-6)).unwrap();
    assert_eq!(res.method_used, MethodUsed::MonteCarlo);
    assert_relative_eq!(res.value, big.measure(), max_relative = 1e-12);
}

#[test]
fn union_sums_parts() {
    let u = Region::union(vec![
        Region::cap(sp(&[1., 0., 0.]), 0.3).unwrap(),
        octant_far(),
    ])
    .unwrap();
    let res = integrate(&u, |_| 1.0, &q()).unwrap();
    assert_eq!(res.method_used, MethodUsed::Mixed);
    assert_relative_eq!(res.value, u.measure(), max_relative = 1e-8);
}

fn octant_far() -> Region {
    Region::polygon(vec![
        sp(&[-1., 0., 0.]),
        sp(&[0., 0., -1.]),
        sp(&[0., -1., 0.]),
    ])
    .unwrap()
}

#[test]
fn higher_dimensional_caps() {
    for n in [1usize, 3, 4] {
        let mut c = vec![0.0; n + 1];
        c[n] = 1.0;
        let r = Region::cap(SpherePoint::new(c).unwrap(), 0.8).unwrap();
        let res = integrate(&r, |_| 1.0, &q()).unwrap();
        assert_relative_eq!(res.value, cap_measure(n, 0.8), max_relative = 1e-10);
    }
}

#[test]
fn deterministic_across_thread_counts() {
    let r = octant();
    let c = sp(&[1., 2., 3.]);
    let f = |y: &SpherePoint| c.dot(y).powi(-3);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                (
                    integrate(&r, f, &q()).unwrap(),
                    integrate(&r, f, &q().with_method(Method::MonteCarlo)).unwrap(),
                )
            })
    };
    let (a, b) = (run(1), run(8));
    assert_eq!(a.0.value.to_bits(), b.0.value.to_bits());
    assert_eq!(a.1.value.to_bits(), b.1.value.to_bits());
    assert_eq!(a.1.err_est.to_bits(), b.1.err_est.to_bits());
}

#[test]
fn monte_carlo_consistency() {
    let r = Region::cap(sp(&[0., 0., 1.]), 1.0).unwrap();
    let x = sp(&[0.1, 0.0, 1.0]);
    let f = |y: &SpherePoint| x.dot(y).powi(-3);
    let exact = integrate(&r, f, &q()).unwrap().value;
    let hits = (0..30)
        .filter(|&seed| {
            let spec = QuadratureSpec {
                method: Method::MonteCarlo,
                mc_samples: 20_000,
                seed,
                ..q()
            };
            let mc = integrate(&r, f, &spec).unwrap();
            (mc.value - exact).abs() <= 3.0 * mc.err_est
        })
        .count();
    assert!(hits >= 28, "{hits}");
}

#[test]
fn refinement_does_not_hurt() {
    let x = sp(&[0., 0., 1.]);
    let r = Region::cap(x.clone(), FRAC_PI_4).unwrap();
    let mut prev = f64::INFINITY;
    for tol in [1e-4, 5e-5, 2.5e-5, 1.25e-5] {
        let v = integrate(&r, |y| x.dot(y).powi(-3), &q().with_rel_tol(tol))
            .unwrap()
            .value;
        let e = (v - PI).abs();
        assert!(e <= prev, "{tol}: {e} > {prev}");
        prev = e;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chart_pullback_gives_polygon_measure(
        radii in prop::collection::vec(0.1f64..1.5, 3..8),
        jitter in prop::collection::vec(-0.3f64..0.3, 8),
    ) {
        // star-shaped about the north pole, counter-clockwise
        let k = radii.len();
        let verts: Vec<SpherePoint> = radii.iter().enumerate().map(|(i, &r)| {
            let t = 2.0 * PI * (i as f64 + jitter[i]) / k as f64;
            sp(&[r * t.cos(), r * t.sin(), 1.0])
        }).collect();
        let r = Region::polygon(verts).unwrap();
        let res = integrate(&r, |_| 1.0, &q().with_method(Method::PolygonAdaptive)).unwrap();
        prop_assert!((res.value - r.measure()).abs() <= 1e-8 * r.measure());
    }
}
