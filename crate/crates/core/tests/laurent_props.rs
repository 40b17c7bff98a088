use proptest::prelude::*;
use whitham::{Chart, Laurent, C64};

fn coeff() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b))
}

fn chart() -> impl Strategy<Value = Chart> {
    prop_oneof![
        Just(Chart::AtInfinity),
        coeff().prop_map(Chart::AtPoint),
    ]
}

fn series_in(chart: Chart) -> impl Strategy<Value = Laurent> {
    (-3i32..2, prop::collection::vec(coeff(), 1..8))
        .prop_map(move |(k, c)| Laurent::new(chart, k, c).with_order(10))
}

fn triple() -> impl Strategy<Value = (Laurent, Laurent, Laurent)> {
    chart().prop_flat_map(|c| (series_in(c), series_in(c), series_in(c)))
}

proptest! {
    #[test]
    fn product_is_associative((a, b, c) in triple()) {
        let left = &(&a * &b) * &c;
        let right = &a * &(&b * &c);
        prop_assert!(left.max_diff(&right) < 1e-12);
    }

    #[test]
    fn product_distributes((a, b, c) in triple()) {
        let left = &a * &(&b + &c);
        let right = &(&a * &b) + &(&a * &c);
        prop_assert!(left.max_diff(&right) < 1e-12);
    }

    #[test]
    fn derivative_is_a_derivation((a, b, _c) in triple()) {
        let left = (&a * &b).derivative_p();
        let right = &(&a.derivative_p() * &b) + &(&a * &b.derivative_p());
        prop_assert!(left.max_diff(&right) < 1e-12);
    }

    #[test]
    fn reciprocal_round_trip(
        ch in chart(),
        lead in coeff().prop_filter("nonzero", |c| c.norm() > 0.3),
        rest in prop::collection::vec(coeff(), 0..6),
        k in -2i32..3,
    ) {
        let mut c = vec![lead];
        c.extend(rest);
        let s = Laurent::new(ch, k, c).with_order(k + 12);
        let prod = &s * &s.reciprocal().unwrap();
        let one = Laurent::constant(ch, C64::new(1.0, 0.0));
        // relative to the size of the geometric growth |rest/lead|^n
        let scale = s.max_abs() / lead.norm();
        prop_assert!(prod.max_diff(&one) < 1e-12 * scale.powi(13).max(1.0));
    }

    #[test]
    fn reversion_round_trip_at_infinity(rest in prop::collection::vec(coeff(), 0..6)) {
        let mut c = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        c.extend(rest.iter().map(|x| x * 0.3));
        let s = Laurent::new(Chart::AtInfinity, -1, c).with_order(14);
        let p = s.reversion().unwrap();
        let back = Laurent::compose(&s, &p).unwrap();
        let id = Laurent::monomial(Chart::AtInfinity, -1, C64::new(1.0, 0.0));
        prop_assert!(back.max_diff(&id) < 1e-10, "diff {} {}", back.max_diff(&id), back);
    }

    #[test]
    fn reversion_round_trip_at_point(
        q in coeff(),
        r in coeff().prop_filter("nonzero", |c| c.norm() > 0.3),
        rest in prop::collection::vec(coeff(), 0..6),
    ) {
        let mut c = vec![r];
        c.extend(rest.iter().map(|x| x * 0.3));
        let s = Laurent::new(Chart::AtPoint(q), -1, c).with_order(14);
        let p = s.reversion().unwrap();
        let back = Laurent::compose(&s, &p).unwrap();
        let id = Laurent::monomial(Chart::AtInfinity, -1, C64::new(1.0, 0.0));
        let scale = (1.0 / r.norm()).powi(14).max(1.0);
        prop_assert!(back.max_diff(&id) < 1e-10 * scale);
    }

    #[test]
    fn exp_inverts_log(ch in chart(), rest in prop::collection::vec(coeff(), 1..6)) {
        let mut c = vec![C64::new(1.0, 0.0)];
        c.extend(rest.iter().map(|x| x * 0.5));
        let s = Laurent::new(ch, 0, c).with_order(12);
        let back = s.log_unit().unwrap().exp_nilpotent().unwrap();
        prop_assert!(back.max_diff(&s) < 1e-10);
    }
}
