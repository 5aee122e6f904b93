use std::collections::HashMap;

use super::{build, Expr, Node};

/// Constant folding, identity elimination (`0+e`, `1*e`, `0*e`, `e^1`,
/// `-(-e)`) and sign normalization (`a + -b → a - b`, `a - -b → a + b`,
/// `-(c*e) → (-c)*e` for constant `c`), applied bottom-up. Each rewrite gives
/// bit-identical values. Never folds a subtree whose value would be
/// non-finite or undefined, so domain errors survive simplification.
pub fn simplify(e: &Expr) -> Expr {
    let mut memo = HashMap::new();
    go(e, &mut memo)
}

fn go(e: &Expr, memo: &mut HashMap<usize, (Expr, Expr)>) -> Expr {
    if let Some((_, s)) = memo.get(&e.key()) {
        return s.clone();
    }
    let s = match e.node() {
        Node::Const(_) | Node::Var(_) => e.clone(),
        Node::Neg(a) => build::neg(&go(a, memo)),
        Node::Add(a, b) => build::add(&go(a, memo), &go(b, memo)),
        Node::Sub(a, b) => build::sub(&go(a, memo), &go(b, memo)),
        Node::Mul(a, b) => build::mul(&go(a, memo), &go(b, memo)),
        Node::Div(a, b) => build::div(&go(a, memo), &go(b, memo)),
        Node::Pow(a, n) => go(a, memo).powi(*n),
        Node::Call(f, a) => Expr::call(*f, &go(a, memo)),
    };
    memo.insert(e.key(), (e.clone(), s.clone()));
    s
}
