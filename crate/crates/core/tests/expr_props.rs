//! Property tests for the expression layer: textual round trips, symbolic
//! differentiation against finite differences, and value preservation under
//! simplification.

use contact3::expr::{parse, Coords, Expr, Func, Node, Point};
use proptest::prelude::*;

fn raw(node: Node) -> Expr {
    Expr::from_node(node)
}

/// Constants the parser can produce directly: non-negative and finite.
fn literal() -> impl Strategy<Value = f64> {
    prop_oneof![
        (0u32..20).prop_map(f64::from),
        (1u32..64).prop_map(|k| f64::from(k) / 8.0),
        Just(0.1),
        Just(1e-7),
        Just(3.25e20),
        Just(123456.789),
        (1e-3f64..1e3),
    ]
}

fn func() -> impl Strategy<Value = Func> {
    prop::sample::select(Func::ALL.to_vec())
}

/// Trees exactly as the parser builds them, so that a render/parse round
/// trip must reproduce the tree node for node.
fn parser_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![literal().prop_map(|c| raw(Node::Const(c))), (0usize..3).prop_map(|i| raw(Node::Var(i))),];
    leaf.prop_recursive(8, 96, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| raw(Node::Neg(a))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| raw(Node::Add(a, b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| raw(Node::Sub(a, b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| raw(Node::Mul(a, b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| raw(Node::Div(a, b))),
            (inner.clone(), -4i32..=4).prop_map(|(a, n)| raw(Node::Pow(a, n))),
            (func(), inner).prop_map(|(f, a)| raw(Node::Call(f, a))),
        ]
    })
}

/// Smaller trees for the calculus properties, built through the operator
/// overloads. Keeps away from `ln` and `sqrt` so that most points evaluate.
fn smooth_tree() -> impl Strategy<Value = Expr> {
    let leaf =
        prop_oneof![(-3i32..=3).prop_map(|c| Expr::constant(f64::from(c) * 0.75)), (0usize..3).prop_map(Expr::var),];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a + &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a - &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a * &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a / &(&(&b * &b) + &Expr::one())),
            (inner.clone(), 0i32..=3).prop_map(|(a, n)| a.powi(n)),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.prop_map(|a| (&a * &Expr::constant(0.25)).exp()),
        ]
    })
}

fn point() -> impl Strategy<Value = Point> {
    prop::array::uniform3(-1.0f64..1.0).prop_map(|c| Point::new(c).unwrap())
}

fn close(a: f64, b: f64, rel: f64, scale: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()).max(scale))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn render_then_parse_reproduces_the_tree(e in parser_tree()) {
        let coords = Coords::xyz();
        let text = e.display(&coords).to_string();
        let back = parse(&text, &coords).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(&back, &e, "rendered as {}", text);
    }

    #[test]
    fn render_is_stable_under_reparsing(e in parser_tree()) {
        let coords = Coords::xyz();
        let once = e.display(&coords).to_string();
        let twice = parse(&once, &coords).unwrap().display(&coords).to_string();
        prop_assert_eq!(once, twice);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn built_trees_round_trip_by_value(e in smooth_tree(), p in point()) {
        let coords = Coords::xyz();
        let back = parse(&e.display(&coords).to_string(), &coords).unwrap();
        match (e.eval(&p), back.eval(&p)) {
            (Ok(a), Ok(b)) => prop_assert!(close(a, b, 1e-12, 0.0), "{a} vs {b}"),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "evaluation disagrees: {a:?} vs {b:?}"),
        }
    }

    #[test]
    fn derivative_is_linear(f in smooth_tree(), g in smooth_tree(), var in 0usize..3, p in point()) {
        let (a, b) = (Expr::constant(2.5), Expr::constant(-1.5));
        let lhs = (&(&a * &f) + &(&b * &g)).diff(var).eval(&p);
        let (df, dg) = (f.diff(var).eval(&p), g.diff(var).eval(&p));
        if let (Ok(lhs), Ok(df), Ok(dg)) = (lhs, df, dg) {
            let rhs = 2.5 * df - 1.5 * dg;
            prop_assert!(close(lhs, rhs, 1e-10, 2.5 * df.abs() + 1.5 * dg.abs()), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn derivative_obeys_the_product_rule(f in smooth_tree(), g in smooth_tree(), var in 0usize..3, p in point()) {
        let lhs = (&f * &g).diff(var).eval(&p);
        let parts = (f.eval(&p), g.eval(&p), f.diff(var).eval(&p), g.diff(var).eval(&p));
        if let (Ok(lhs), (Ok(fv), Ok(gv), Ok(df), Ok(dg))) = (lhs, parts) {
            let (u, v) = (df * gv, fv * dg);
            prop_assert!(close(lhs, u + v, 1e-10, u.abs() + v.abs()), "{lhs} vs {}", u + v);
        }
    }

    #[test]
    fn derivative_matches_central_difference(f in smooth_tree(), var in 0usize..3, p in point()) {
        let step = 1e-4;
        let plus = f.eval(&p.shifted(var, step).unwrap());
        let minus = f.eval(&p.shifted(var, -step).unwrap());
        let exact = f.diff(var).eval(&p);
        let third = f.diff(var).diff(var).diff(var);
        // Truncation error is step²/6 times the third derivative somewhere
        // in the stencil; sample it at both ends and the centre.
        let bound = [p.shifted(var, step).unwrap(), p, p.shifted(var, -step).unwrap()]
            .iter()
            .map(|q| third.eval(q).map(f64::abs))
            .collect::<Result<Vec<_>, _>>();
        if let (Ok(plus), Ok(minus), Ok(exact), Ok(bound)) = (plus, minus, exact, bound) {
            let m3 = bound.into_iter().fold(0.0, f64::max);
            let fd = (plus - minus) / (2.0 * step);
            let truncation = 2.0 * step * step / 6.0 * m3;
            let rounding = 1e-14 * (plus.abs() + minus.abs()) / step;
            prop_assert!((fd - exact).abs() <= truncation + rounding + 1e-9 * (1.0 + exact.abs()),
                "fd {fd} vs symbolic {exact}");
        }
    }

    #[test]
    fn simplification_preserves_value(e in parser_tree(), p in point()) {
        if let Ok(v) = e.eval(&p) {
            let s = e.simplify();
            let w = s.eval(&p).map_err(|err| TestCaseError::fail(format!("{s}: {err}")))?;
            prop_assert!(close(v, w, 1e-12, 0.0), "{e} = {v}, simplified {s} = {w}");
        }
    }
}
