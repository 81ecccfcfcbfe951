use std::f64::consts::{FRAC_PI_4, PI};

use approx::assert_relative_eq;
use gnomon::functional::{
    area_functional, critical_residual, evaluate, gradient, h_area_functional, h_critical_residual,
    h_evaluate, h_gradient, potential_evaluate, potential_functional, second_derivative_dir,
    PotentialSpec,
};
use gnomon::geometry::{Point, TangentVec};
use gnomon::quadrature::{Method, MethodUsed, QuadratureSpec};
use gnomon::{Error, HRegion, HyperPoint, Region, SpherePoint};
use proptest::prelude::*;

fn sp(c: &[f64]) -> SpherePoint {
    SpherePoint::new(c.to_vec()).unwrap()
}

fn q() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn octant() -> Region {
    Region::polygon(vec![
        sp(&[1., 0., 0.]),
        sp(&[0., 1., 0.]),
        sp(&[0., 0., 1.]),
    ])
    .unwrap()
}

fn unit<P: Point<Scalar = f64>>(x: &P, w: &[f64]) -> TangentVec<P> {
    x.project(w).unit().unwrap()
}

fn fd_sphere(r: &Region, x: &SpherePoint, v: &TangentVec<SpherePoint>, h: f64) -> (f64, f64) {
    let a = |t: f64| {
        area_functional(r, &x.exp(&v.scaled(t)), &q())
            .unwrap()
            .value
    };
    let (p, z, m) = (a(h), a(0.0), a(-h));
    ((p - m) / (2.0 * h), (p - 2.0 * z + m) / (h * h))
}

#[test]
fn area_examples() {
    let x = sp(&[0.3, 0.2, 1.0]);
    let cap = Region::cap(x.clone(), FRAC_PI_4).unwrap();
    let a = area_functional(&cap, &x, &q()).unwrap();
    assert_eq!(a.method_used, MethodUsed::Exact);
    assert_eq!(a.err_est, 0.0);
    assert_relative_eq!(a.value, PI, max_relative = 1e-14);

    let c = sp(&[1., 1., 1.]);
    let a = area_functional(&octant(), &c, &q()).unwrap();
    assert_relative_eq!(a.value, 1.5 * 3f64.sqrt(), max_relative = 1e-14);
    let quad = area_functional(&octant(), &c, &q().with_method(Method::PolygonAdaptive)).unwrap();
    assert_relative_eq!(quad.value, a.value, max_relative = 1e-8);

    let e3 = Region::cap(sp(&[0., 0., 1.]), FRAC_PI_4).unwrap();
    assert!(matches!(
        area_functional(&e3, &sp(&[1., 0., 0.]), &q()),
        Err(Error::InfeasiblePoint { .. })
    ));
    assert!(matches!(
        area_functional(&e3, &SpherePoint::axis(3, 3), &q()),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn gradient_examples() {
    let z = sp(&[0.1, -0.5, 1.0]);
    let cap = Region::cap(z.clone(), 0.7).unwrap();
    let e = evaluate(&cap, &z, &q()).unwrap();
    assert!(e.gradient.norm() <= e.grad_err + 1e-12);

    let u = Region::union(vec![
        Region::cap(sp(&[1., 0.4, 1.0]), 0.3).unwrap(),
        Region::cap(sp(&[-1., -0.4, 1.0]), 0.3).unwrap(),
    ])
    .unwrap();
    let g = gradient(&u, &sp(&[0., 0., 1.]), &q()).unwrap();
    assert!(g.norm() < 1e-10, "{}", g.norm());

    let c = sp(&[1., 1., 1.]);
    let v = unit(&c, &[1.0, -0.3, 0.0]);
    let x = c.exp(&v.scaled(0.2));
    let g = gradient(&octant(), &x, &q()).unwrap();
    assert!(g.norm() > 1e-3);
    let w = unit(&x, &[0.2, 1.0, -0.4]);
    let (fd, _) = fd_sphere(&octant(), &x, &w, 1e-5);
    assert_relative_eq!(g.inner(&w), fd, max_relative = 1e-6);
}

#[test]
fn second_derivative_examples() {
    let x = sp(&[0., 0., 1.]);
    let cap = Region::cap(x.clone(), FRAC_PI_4).unwrap();
    let vals: Vec<f64> = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.6, 0.8, 0.0]]
        .iter()
        .map(|w| second_derivative_dir(&cap, &x, &unit(&x, w), &q()).unwrap())
        .collect();
    assert!(vals[0] > 0.0);
    assert_relative_eq!(vals[0], vals[1], max_relative = 1e-10);
    assert_relative_eq!(vals[0], vals[2], max_relative = 1e-10);

    let c = sp(&[1., 1., 1.]);
    let v = unit(&c, &[1.0, 0.0, 0.0]);
    let d2 = second_derivative_dir(&octant(), &c, &v, &q()).unwrap();
    let (_, fd2) = fd_sphere(&octant(), &c, &v, 1e-4);
    assert_relative_eq!(d2, fd2, max_relative = 1e-4);

    let not_unit = x.project(&[2.0, 0.0, 0.0]);
    assert!(second_derivative_dir(&cap, &x, &not_unit, &q()).is_err());
}

#[test]
fn residual_examples() {
    let z = sp(&[0., 0.3, 1.0]);
    let cap = Region::cap(z.clone(), 0.8).unwrap();
    let e = evaluate(&cap, &z, &q()).unwrap();
    let res = critical_residual(&cap, &z, &q()).unwrap();
    assert!(res <= 10.0 * e.grad_err.max(1e-14), "{res}");

    for (r, x) in [
        (cap.clone(), sp(&[0.2, 0.1, 1.0])),
        (octant(), sp(&[1.0, 0.8, 1.3])),
    ] {
        let g = gradient(&r, &x, &q()).unwrap();
        let res = critical_residual(&r, &x, &q()).unwrap();
        assert!(
            (res - g.norm() / 3.0).abs() <= 1e-10,
            "{res} vs {}",
            g.norm() / 3.0
        );
    }
}

#[test]
fn potential_examples() {
    let a = 1.1f64;
    let z = sp(&[0., 0., 1.]);
    let cap = Region::cap(z.clone(), a).unwrap();
    let t: PotentialSpec = "power:1".parse().unwrap();
    let v = potential_functional(&cap, &z, &t, &q()).unwrap();
    assert_relative_eq!(
        v.value,
        2.0 * PI * (a.sin() - a * a.cos()),
        max_relative = 1e-10
    );
    let mc = potential_functional(&cap, &z, &t, &q().with_method(Method::MonteCarlo)).unwrap();
    assert!((mc.value - v.value).abs() <= 4.0 * mc.err_est);

    let sec: PotentialSpec = "sec:3".parse().unwrap();
    for (r, x) in [
        (cap.clone(), sp(&[0.1, 0.2, 1.0])),
        (octant(), sp(&[1., 1.2, 0.9])),
    ] {
        let p = potential_functional(&r, &x, &sec, &q()).unwrap().value;
        let a = area_functional(&r, &x, &q()).unwrap().value;
        assert_relative_eq!(p, a, max_relative = 1e-8);
    }

    let sech: PotentialSpec = "sech:3".parse().unwrap();
    let hc = HRegion::cap(HyperPoint::from_spatial(&[0.5, 0.0]), 1.0).unwrap();
    let x = HyperPoint::from_spatial(&[0.2, 0.3]);
    let p = potential_functional(&hc, &x, &sech, &q()).unwrap().value;
    let a = h_area_functional(&hc, &x, &q()).unwrap().value;
    assert_relative_eq!(p, a, max_relative = 1e-8);
}

#[test]
fn potential_gradient_matches_differences() {
    let u = Region::union(vec![
        Region::cap(sp(&[1., 0.2, 1.0]), 0.4).unwrap(),
        Region::cap(sp(&[-1., 0.5, 0.8]), 0.3).unwrap(),
    ])
    .unwrap();
    let p: PotentialSpec = "power:2".parse().unwrap();
    let x = sp(&[0.3, 0.1, 1.0]);
    let v = unit(&x, &[0.5, 1.0, 0.0]);
    let e = potential_evaluate(&u, &x, &p, &q()).unwrap();
    let f = |t: f64| {
        potential_functional(&u, &x.exp(&v.scaled(t)), &p, &q())
            .unwrap()
            .value
    };
    let h = 1e-5;
    assert_relative_eq!(
        e.gradient.inner(&v),
        (f(h) - f(-h)) / (2.0 * h),
        max_relative = 1e-6
    );

    let hp = HRegion::polygon(vec![
        HyperPoint::from_spatial(&[0.0, 0.0]),
        HyperPoint::from_spatial(&[1.0, 0.0]),
        HyperPoint::from_spatial(&[0.2, 0.9]),
    ])
    .unwrap();
    let d: PotentialSpec = "exp:-1".parse().unwrap();
    let x = HyperPoint::from_spatial(&[0.3, 0.3]);
    let v = unit(&x, &[1.0, -0.2, 0.0]);
    let e = potential_evaluate(&hp, &x, &d, &q()).unwrap();
    let f = |t: f64| {
        potential_functional(&hp, &x.exp(&v.scaled(t)), &d, &q())
            .unwrap()
            .value
    };
    assert_relative_eq!(
        e.gradient.inner(&v),
        (f(h) - f(-h)) / (2.0 * h),
        max_relative = 1e-6
    );
}

fn h1_closed(s: f64) -> f64 {
    (s + 2.0).tanh() - (s + 1.0).tanh() + (s - 1.0).tanh() - (s - 2.0).tanh()
}

#[test]
fn hyperbolic_examples() {
    let set = HRegion::intervals(vec![(-2.0, -1.0), (1.0, 2.0)]).unwrap();
    let at = |s: f64| {
        h_area_functional(&set, &HyperPoint::from_theta(s), &q())
            .unwrap()
            .value
    };
    assert_relative_eq!(
        at(0.0),
        2.0 * (2f64.tanh() - 1f64.tanh()),
        max_relative = 1e-14
    );
    assert!((at(0.0) - 0.404867).abs() < 1e-6);
    let want = 3.5f64.tanh() - 2.5f64.tanh() + 2.0 * 0.5f64.tanh();
    assert_relative_eq!(at(1.5), want, max_relative = 1e-14);
    // the commonly quoted decimal 0.93581 is rounded up in its last digit
    assert!((at(1.5) - 0.93581).abs() < 5e-5);
    // quadrature route agrees with the closed form
    let quad = h_area_functional(
        &set,
        &HyperPoint::from_theta(0.7),
        &q().with_method(Method::CapTensor),
    )
    .unwrap();
    assert_relative_eq!(quad.value, h1_closed(0.7), max_relative = 1e-10);

    let g0 = h_gradient(&set, &HyperPoint::from_theta(0.0), &q()).unwrap();
    assert!(g0.norm() < 1e-14);
    assert!(at(0.01) > at(0.0) && at(-0.01) > at(0.0));
    let x = HyperPoint::from_theta(1.2);
    let g = h_gradient(&set, &x, &q()).unwrap();
    // tangent pointing to increasing s is (cosh s, sinh s)
    let ds = g.vec()[0] * 1.2f64.cosh() - g.vec()[1] * 1.2f64.sinh();
    assert!(ds > 0.0);
    let h = 1e-6;
    assert_relative_eq!(
        ds,
        (h1_closed(1.2 + h) - h1_closed(1.2 - h)) / (2.0 * h),
        max_relative = 1e-6
    );

    let z = HyperPoint::from_spatial(&[0.4, -0.3]);
    let a = 0.9f64;
    let cap = HRegion::cap(z.clone(), a).unwrap();
    let v = h_area_functional(&cap, &z, &q()).unwrap();
    assert_relative_eq!(v.value, PI * a.tanh().powi(2), max_relative = 1e-10);
    let mc = h_area_functional(&cap, &z, &q().with_method(Method::MonteCarlo)).unwrap();
    assert!((mc.value - v.value).abs() <= 4.0 * mc.err_est);
    let e = h_evaluate(&cap, &z, &q()).unwrap();
    assert!(e.gradient.norm() <= e.grad_err + 1e-12);
    let res = h_critical_residual(&cap, &x_off(), &q()).unwrap();
    let g = h_gradient(&cap, &x_off(), &q()).unwrap();
    assert!((res - g.norm() / 3.0).abs() < 1e-10);
}

fn x_off() -> HyperPoint {
    HyperPoint::from_spatial(&[0.1, 0.2])
}

#[test]
fn hyperbolic_polygon_gradient() {
    let p = HRegion::polygon(vec![
        HyperPoint::from_spatial(&[-0.5, -0.4]),
        HyperPoint::from_spatial(&[1.2, -0.2]),
        HyperPoint::from_spatial(&[0.6, 1.0]),
        HyperPoint::from_spatial(&[-0.4, 0.7]),
    ])
    .unwrap();
    let x = HyperPoint::from_spatial(&[0.9, 0.5]);
    let exact = h_evaluate(&p, &x, &q()).unwrap();
    let quad = h_evaluate(&p, &x, &q().with_method(Method::PolygonAdaptive)).unwrap();
    assert_relative_eq!(exact.value.value, quad.value.value, max_relative = 1e-8);
    for i in 0..3 {
        assert!((exact.gradient.vec()[i] - quad.gradient.vec()[i]).abs() < 1e-7);
    }
}

#[test]
fn divergence_at_the_feasibility_boundary() {
    // approach the boundary of the admissible set for a cap and for the octant
    let cap = Region::cap(sp(&[0., 0., 1.]), 1.0).unwrap();
    let oct = octant();
    for (r, dir) in [(cap, [1.0, 0.0, 0.0]), (oct, [-1.0, -1.0, 2.0])] {
        let mut prev = 0.0;
        for k in 1..=5 {
            let m = 10f64.powi(-k);
            let x = point_with_margin(&r, &dir, m);
            let a = area_functional(&r, &x, &q()).unwrap().value;
            assert!(a > prev, "margin {m}: {a} <= {prev}");
            prev = a;
        }
    }
}

fn point_with_margin(r: &Region, dir: &[f64; 3], m: f64) -> SpherePoint {
    // bisection along a great circle from an interior point
    use gnomon::regions::feasibility_margin;
    let c = match r {
        Region::Cap(c) => c.center().clone(),
        _ => sp(&[1., 1., 1.]),
    };
    let v = unit(&c, dir);
    let (mut lo, mut hi) = (0.0, PI / 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasibility_margin(r, &c.exp(&v.scaled(mid))) > m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    c.exp(&v.scaled(lo))
}

#[test]
fn decay_at_hyperbolic_infinity() {
    let p = HRegion::polygon(vec![
        HyperPoint::from_spatial(&[0.0, 0.0]),
        HyperPoint::from_spatial(&[1.0, 0.0]),
        HyperPoint::from_spatial(&[0.0, 1.0]),
    ])
    .unwrap();
    let o = HyperPoint::from_spatial(&[0.3, 0.3]);
    let a0 = h_area_functional(&p, &o, &q()).unwrap().value;
    let v = unit(&o, &[1.0, 0.3, 0.0]);
    let far = o.exp(&v.scaled(20.0));
    let a = h_area_functional(&p, &far, &q()).unwrap().value;
    assert!(a.abs() <= 1e-6 * a0, "{a} vs {a0}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gradient_matches_finite_differences(
        cx in -0.5f64..0.5, cy in -0.5f64..0.5, rad in 0.2f64..0.9,
        ox in -0.3f64..0.3, oy in -0.3f64..0.3, ang in 0.0f64..std::f64::consts::TAU,
    ) {
        let c = sp(&[cx, cy, 1.0]);
        let r = Region::cap(c.clone(), rad).unwrap();
        let x = c.exp(&c.project(&[ox, oy, 0.0]));
        prop_assume!(gnomon::regions::feasibility_margin(&r, &x) > 0.05);
        let v = unit(&x, &[ang.cos(), ang.sin(), 0.3]);
        let g = gradient(&r, &x, &q()).unwrap();
        let (fd, d2fd) = fd_sphere(&r, &x, &v, 1e-5);
        let tol = (1e-6 * fd.abs()).max(1e-8);
        prop_assert!((g.inner(&v) - fd).abs() <= tol, "{} vs {}", g.inner(&v), fd);
        let d2 = second_derivative_dir(&r, &x, &v, &q()).unwrap();
        prop_assert!(d2 > 0.0);
        let _ = d2fd;
    }
}
