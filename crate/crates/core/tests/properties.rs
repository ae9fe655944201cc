use jetcalc::expr::parse;
use jetcalc::{CoordId, Expr, JetPoint, JetSpace};
use proptest::prelude::*;

fn space() -> JetSpace {
    JetSpace::new(2, 2).unwrap()
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3.0f64..3.0).prop_map(Expr::constant),
        (0usize..3, 1usize..=2).prop_map(|(o, i)| var(o, i)),
    ]
}

fn var(order: usize, i: usize) -> Expr {
    if order == 0 {
        Expr::x(i)
    } else {
        Expr::y(order, i)
    }
}

// Smooth everywhere on [-1, 1]^6: no logs, roots or poles.
fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (1.0 + b.square())),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| (0.3 * a).exp()),
            inner.clone().prop_map(|a| a.powi(3)),
            inner.prop_map(|a| -a),
        ]
    })
}

fn point() -> impl Strategy<Value = JetPoint> {
    prop::collection::vec(-1.0f64..1.0, 6).prop_map(|v| JetPoint::new(space(), v).unwrap())
}

fn coord() -> impl Strategy<Value = CoordId> {
    (0usize..6).prop_map(|f| space().coord(f))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * 1f64.max(a.abs()).max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mixed_partials_commute(e in expr(), p in point(), a in coord(), b in coord()) {
        let ab = e.diff(a).diff(b).eval(&p).unwrap();
        let ba = e.diff(b).diff(a).eval(&p).unwrap();
        prop_assert!(close(ab, ba, 1e-9), "{ab} vs {ba}");
    }

    #[test]
    fn simplify_preserves_value(e in expr(), p in point()) {
        let v = e.eval(&p).unwrap();
        let s = e.simplify().eval(&p).unwrap();
        prop_assert!(close(v, s, 1e-12), "{v} vs {s}");
    }

    #[test]
    fn render_parse_round_trip(e in expr(), p in point()) {
        let text = e.render();
        let back = parse(&text, &space()).unwrap();
        let (v, w) = (e.eval(&p).unwrap(), back.eval(&p).unwrap());
        prop_assert!(close(v, w, 1e-12), "{text}: {v} vs {w}");
    }

    #[test]
    fn derivative_matches_central_difference(e in expr(), p in point(), c in coord()) {
        let h = 1e-5;
        let shifted = |s: f64| {
            let mut q = p.clone();
            q.set(c, p.get(c) + s);
            e.eval(&q).unwrap()
        };
        let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        let exact = e.diff(c).eval(&p).unwrap();
        // central differences carry O(h²·f''') truncation plus O(ε/h) rounding
        let scale = 1f64.max(e.eval(&p).unwrap().abs());
        prop_assert!((fd - exact).abs() <= 1e-6 * 1f64.max(exact.abs()).max(scale), "{fd} vs {exact}");
    }
}
