//! Conformal dilations of `S³` against the rational closed form
//! `G_a(x) = ((1−|a|²)x + 2(1+a·x)a) / (1 + 2a·x + |a|²)`, finite-difference
//! Jacobians, and a construct-then-rebalance round trip.

use approx::assert_relative_eq;
use jacobi_spectrum::catalog::{build, ShapeKind, ShapeSpec};
use jacobi_spectrum::conformal::{balance_weighted, ball_extension, mobius_apply, mobius_differential, MobiusParam};
use jacobi_spectrum::surface::Point;
use proptest::prelude::*;

fn dot(a: &Point, b: &Point) -> f64 {
    (0..4).map(|i| a[i] * b[i]).sum()
}

fn normalized(x: Point) -> Point {
    let r = dot(&x, &x).sqrt();
    x.map(|v| v / r)
}

fn rational(a: &Point, x: &Point) -> Point {
    let (aa, ax) = (dot(a, a), dot(a, x));
    let den = 1.0 + 2.0 * ax + aa;
    std::array::from_fn(|i| ((1.0 - aa) * x[i] + 2.0 * (1.0 + ax) * a[i]) / den)
}

/// Tangent vector at `x` obtained by removing the normal part of `v`.
fn tangent(x: &Point, v: &Point) -> Point {
    let c = dot(x, v);
    std::array::from_fn(|i| v[i] - c * x[i])
}

fn unit4() -> impl Strategy<Value = Point> {
    prop::array::uniform4(-1.0f64..1.0).prop_filter("nonzero", |x| dot(x, x) > 1e-2).prop_map(normalized)
}

fn param(max: f64) -> impl Strategy<Value = Point> {
    (unit4(), 0.0..max).prop_map(|(d, r)| d.map(|v| v * r))
}

proptest! {
    #[test]
    fn stereographic_route_matches_rational_formula(x in unit4(), a in param(0.95)) {
        let m = MobiusParam::new(a).unwrap();
        let y = mobius_apply(&m, &x).unwrap();
        let z = rational(&a, &x);
        for i in 0..4 {
            prop_assert!((y[i] - z[i]).abs() < 1e-11, "{y:?} vs {z:?}");
        }
        let b = ball_extension(&m, &x);
        for i in 0..4 {
            prop_assert!((b[i] - z[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn opposite_parameter_inverts(x in unit4(), a in param(0.9)) {
        let m = MobiusParam::new(a).unwrap();
        let back = mobius_apply(&m.inverse(), &mobius_apply(&m, &x).unwrap()).unwrap();
        for i in 0..4 {
            prop_assert!((back[i] - x[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn collinear_parameters_compose(x in unit4(), d in unit4(), s in -0.8f64..0.8, t in -0.8f64..0.8) {
        let a = MobiusParam::new(d.map(|v| v * s)).unwrap();
        let b = MobiusParam::new(d.map(|v| v * t)).unwrap();
        let ab = a.compose_collinear(&b).unwrap();
        let two_steps = mobius_apply(&b, &mobius_apply(&a, &x).unwrap()).unwrap();
        let one_step = mobius_apply(&ab, &x).unwrap();
        for i in 0..4 {
            prop_assert!((two_steps[i] - one_step[i]).abs() < 1e-10);
        }
    }

    /// The differential agrees with central differences along a great circle
    /// and scales every tangent vector by `(1−|a|²)/(1+2a·x+|a|²)`.
    #[test]
    fn differential_is_conformal(x in unit4(), v in unit4(), w in unit4(), a in param(0.8)) {
        let m = MobiusParam::new(a).unwrap();
        let v = normalized(tangent(&x, &v));
        let w = tangent(&x, &w);
        let w = normalized(std::array::from_fn(|i| w[i] - dot(&w, &v) * v[i]));
        let h = 1e-5;
        let curve = |s: f64| -> Point { std::array::from_fn(|i| s.cos() * x[i] + s.sin() * v[i]) };
        let (p, q) = (mobius_apply(&m, &curve(h)).unwrap(), mobius_apply(&m, &curve(-h)).unwrap());
        let fd: Point = std::array::from_fn(|i| (p[i] - q[i]) / (2.0 * h));
        let dv = mobius_differential(&m, &x, &v).unwrap();
        let dw = mobius_differential(&m, &x, &w).unwrap();
        let factor = (1.0 - dot(&a, &a)) / (1.0 + 2.0 * dot(&a, &x) + dot(&a, &a));
        for i in 0..4 {
            prop_assert!((fd[i] - dv[i]).abs() < 1e-6 * (1.0 + factor));
        }
        prop_assert!((dot(&dv, &dv).sqrt() - factor).abs() < 1e-9 * (1.0 + factor));
        prop_assert!((dot(&dw, &dw).sqrt() - factor).abs() < 1e-9 * (1.0 + factor));
        prop_assert!(dot(&dv, &dw).abs() < 1e-9 * (1.0 + factor * factor));
        let y = mobius_apply(&m, &x).unwrap();
        prop_assert!(dot(&dv, &y).abs() < 1e-9 * (1.0 + factor));
    }
}

/// Push a balanced configuration off balance with a known dilation, then
/// rebalance: the result must be the original configuration.
#[test]
fn rebalancing_undoes_a_known_dilation() {
    let s = build(&ShapeSpec::sphere3(ShapeKind::RotationalTorus { r: 0.6, amplitude: 0.1, mode: 3 }, 24)).unwrap();
    let weights = vec![1.0; s.points.len()];
    let origin = balance_weighted(&s.points, &weights, 1e-12, MobiusParam::IDENTITY).unwrap();
    let base: Vec<Point> = s.points.iter().map(|x| mobius_apply(&origin.param, x).unwrap()).collect();

    let push = MobiusParam::new([0.2, -0.25, 0.1, 0.3]).unwrap();
    let moved: Vec<Point> = base.iter().map(|x| mobius_apply(&push, x).unwrap()).collect();
    let centre: Point = std::array::from_fn(|i| moved.iter().map(|p| p[i]).sum::<f64>() / moved.len() as f64);
    assert!(dot(&centre, &centre).sqrt() > 0.1);

    let bal = balance_weighted(&moved, &weights, 1e-12, MobiusParam::IDENTITY).unwrap();
    assert!(bal.residual <= 1e-12);
    // A conformal map of S³ factors uniquely as dilation ∘ rotation, so the
    // recovered dilation is exactly the inverse of the push.
    for i in 0..4 {
        assert_relative_eq!(bal.param.a[i], -push.a[i], epsilon = 1e-8);
    }
    let back: Vec<Point> = moved.iter().map(|x| mobius_apply(&bal.param, x).unwrap()).collect();
    for (b, x) in back.iter().zip(&base) {
        for i in 0..4 {
            assert_relative_eq!(b[i], x[i], epsilon = 1e-8);
        }
    }
}

#[test]
fn symmetric_surfaces_are_already_balanced() {
    let s = build(&ShapeSpec::sphere3(ShapeKind::CliffordTorus, 32)).unwrap();
    let bal = balance_weighted(&s.points, &vec![1.0; s.points.len()], 1e-12, MobiusParam::IDENTITY).unwrap();
    assert_eq!(bal.iterations, 0);
    assert!(bal.param.norm() < 1e-12);
}
