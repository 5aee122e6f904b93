//! Algebraic identities of the Lie bracket and exterior derivative on random
//! fields.

use contact3::expr::{Expr, Point};
use contact3::fields::{d_oneform, directional_derivative, lie_bracket, OneForm, VectorField};
use nalgebra::Vector3;
use proptest::prelude::*;

fn scalar() -> impl Strategy<Value = Expr> {
    let leaf =
        prop_oneof![(-2i32..=2).prop_map(|c| Expr::constant(f64::from(c) * 0.5)), (0usize..3).prop_map(Expr::var),];
    leaf.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a + &b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a * &b),
            inner.clone().prop_map(|a| a.sin()),
            inner.prop_map(|a| (&a * &Expr::constant(0.5)).exp()),
        ]
    })
}

fn field() -> impl Strategy<Value = VectorField> {
    [scalar(), scalar(), scalar()].prop_map(VectorField)
}

fn point() -> impl Strategy<Value = Point> {
    prop::array::uniform3(-1.0f64..1.0).prop_map(|c| Point::new(c).unwrap())
}

/// Largest absolute value among the terms of a sum, used to scale rounding.
fn scale(terms: &[Vector3<f64>]) -> f64 {
    terms.iter().map(|t| t.amax()).fold(1.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_satisfies_jacobi(x in field(), y in field(), z in field(), p in point()) {
        let terms = [
            lie_bracket(&x, &lie_bracket(&y, &z)).eval(&p).unwrap(),
            lie_bracket(&y, &lie_bracket(&z, &x)).eval(&p).unwrap(),
            lie_bracket(&z, &lie_bracket(&x, &y)).eval(&p).unwrap(),
        ];
        let total = terms[0] + terms[1] + terms[2];
        prop_assert!(total.amax() <= 1e-11 * scale(&terms), "jacobi residual {}", total.amax());
    }

    #[test]
    fn bracket_is_antisymmetric(x in field(), y in field(), p in point()) {
        let a = lie_bracket(&x, &y).eval(&p).unwrap();
        let b = lie_bracket(&y, &x).eval(&p).unwrap();
        prop_assert!((a + b).amax() <= 1e-12 * scale(&[a, b]));
    }

    #[test]
    fn bracket_obeys_leibniz(x in field(), y in field(), f in scalar(), p in point()) {
        let lhs = lie_bracket(&x, &y.scale(&f)).eval(&p).unwrap();
        let xf = directional_derivative(&x, &f).eval(&p).unwrap();
        let fv = f.eval(&p).unwrap();
        let (u, v) = (y.eval(&p).unwrap() * xf, lie_bracket(&x, &y).eval(&p).unwrap() * fv);
        let residual = (lhs - u - v).amax();
        prop_assert!(residual <= 1e-11 * scale(&[lhs, u, v]), "leibniz residual {residual}");
    }

    #[test]
    fn exterior_derivative_squares_to_zero(f in scalar(), p in point()) {
        let df = OneForm(std::array::from_fn(|i| f.diff(i)));
        let ddf = d_oneform(&df).matrix_at(&p).unwrap();
        let hessian = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| f.diff(i).diff(j).eval(&p).unwrap().abs())
            .fold(1.0, f64::max);
        prop_assert!(ddf.amax() <= 1e-12 * hessian, "d(df) = {ddf}");
    }

    #[test]
    fn exterior_derivative_matches_invariant_formula(
        w in [scalar(), scalar(), scalar()],
        x in field(),
        y in field(),
        p in point(),
    ) {
        let omega = OneForm(w);
        let (xv, yv) = (x.eval(&p).unwrap(), y.eval(&p).unwrap());
        let lhs = d_oneform(&omega).eval(&xv, &yv, &p).unwrap();
        let terms = [
            directional_derivative(&x, &omega.apply(&y)).eval(&p).unwrap(),
            -directional_derivative(&y, &omega.apply(&x)).eval(&p).unwrap(),
            -omega.apply(&lie_bracket(&x, &y)).eval(&p).unwrap(),
        ];
        let rhs: f64 = terms.iter().sum();
        let size = terms.iter().map(|t| t.abs()).fold(1.0, f64::max);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * size, "{lhs} vs {rhs}");
    }
}
