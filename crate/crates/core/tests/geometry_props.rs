use proptest::prelude::*;
use tilesom::geometry::{recentering_isometry, GeometryClass, Isometry, Point, Projection, ProjectionKind};

const TOL: f64 = 1e-9;

fn geometry() -> impl Strategy<Value = GeometryClass> {
    prop_oneof![
        Just(GeometryClass::Spherical),
        Just(GeometryClass::Euclidean),
        Just(GeometryClass::Hyperbolic),
    ]
}

fn point(g: GeometryClass) -> impl Strategy<Value = Point> {
    let max = match g {
        GeometryClass::Spherical => std::f64::consts::PI,
        GeometryClass::Euclidean => 10.0,
        GeometryClass::Hyperbolic => 4.0,
    };
    (0.0..max, 0.0..std::f64::consts::TAU).prop_map(move |(d, a)| Point::polar(g, d, a))
}

fn isometry(g: GeometryClass) -> impl Strategy<Value = Isometry> {
    (0.0..std::f64::consts::TAU, -2.0..2.0f64, 0.0..std::f64::consts::TAU).prop_map(move |(a, d, b)| {
        Isometry::rotation(g, a)
            .compose(&Isometry::translation_x(g, d))
            .compose(&Isometry::rotation(g, b))
    })
}

fn triple() -> impl Strategy<Value = (Point, Point, Point)> {
    geometry().prop_flat_map(|g| (point(g), point(g), point(g)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn metric_axioms((a, b, c) in triple()) {
        let ab = a.distance(&b).unwrap();
        let ba = b.distance(&a).unwrap();
        let bc = b.distance(&c).unwrap();
        let ac = a.distance(&c).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() < TOL);
        prop_assert!(a.distance(&a).unwrap() < 1e-6);
        prop_assert!(ac <= ab + bc + TOL);
    }
}

proptest! {
    #[test]
    fn composition_matches_sequential_application(
        (g, a, b, p) in geometry().prop_flat_map(|g| (Just(g), isometry(g), isometry(g), point(g)))
    ) {
        let lhs = a.compose(&b).apply(&p);
        let rhs = a.apply(&b.apply(&p));
        for (x, y) in lhs.coords().iter().zip(rhs.coords()) {
            prop_assert!((x - y).abs() <= TOL * (1.0 + y.abs()), "{g:?}: {x} vs {y}");
        }
        prop_assert!(a.compose(&b).preserves_form(TOL));
    }

    #[test]
    fn isometries_preserve_distance(
        (a, p, q) in geometry().prop_flat_map(|g| (isometry(g), point(g), point(g)))
    ) {
        let before = p.distance(&q).unwrap();
        let after = a.apply(&p).distance(&a.apply(&q)).unwrap();
        prop_assert!((before - after).abs() < 1e-7);
    }

    #[test]
    fn recentering_moves_target_to_origin(
        (p, q) in geometry().prop_flat_map(|g| (point(g), point(g)))
    ) {
        let iso = recentering_isometry(&p);
        let o = Point::origin(p.geometry());
        for (x, y) in iso.apply(&p).coords().iter().zip(o.coords()) {
            prop_assert!((x - y).abs() < 1e-8);
        }
        let d = p.distance(&q).unwrap();
        prop_assert!((iso.apply(&p).distance(&iso.apply(&q)).unwrap() - d).abs() < 1e-7);
    }

    #[test]
    fn poincare_images_stay_in_unit_disk(p in point(GeometryClass::Hyperbolic), c in point(GeometryClass::Hyperbolic)) {
        let proj = Projection::new(ProjectionKind::PoincareDisk, c).unwrap();
        let [x, y] = proj.project(&p).unwrap();
        prop_assert!(x * x + y * y < 1.0);
    }
}
