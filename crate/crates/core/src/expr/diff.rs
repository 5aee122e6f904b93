use std::collections::HashMap;

use super::{build, Expr, Func, Node, DIM};

/// Symbolic partial differentiation with a memo table.
///
/// The cache is keyed by node identity, so differentiating many expressions
/// that share subtrees (Christoffel symbols all share `g⁻¹` and `∂g`) reuses
/// the derivative of every shared node and keeps the result a compact DAG.
#[derive(Default)]
pub struct Differentiator {
    // (node key, var) -> (node kept alive, derivative)
    cache: HashMap<(usize, usize), (Expr, Expr)>,
}

impl Differentiator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn diff(&mut self, e: &Expr, var: usize) -> Expr {
        assert!(var < DIM, "coordinate index {var} out of range");
        if let Some((_, d)) = self.cache.get(&(e.key(), var)) {
            return d.clone();
        }
        let d = self.rule(e, var);
        self.cache.insert((e.key(), var), (e.clone(), d.clone()));
        d
    }

    /// Gradient components `[∂₀e, ∂₁e, ∂₂e]`.
    pub fn gradient(&mut self, e: &Expr) -> [Expr; DIM] {
        std::array::from_fn(|v| self.diff(e, v))
    }

    fn rule(&mut self, e: &Expr, var: usize) -> Expr {
        match e.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(a) => build::neg(&self.diff(a, var)),
            Node::Add(a, b) => build::add(&self.diff(a, var), &self.diff(b, var)),
            Node::Sub(a, b) => build::sub(&self.diff(a, var), &self.diff(b, var)),
            Node::Mul(a, b) => {
                let da = self.diff(a, var);
                let db = self.diff(b, var);
                build::add(&build::mul(&da, b), &build::mul(a, &db))
            }
            Node::Div(a, b) => {
                let da = self.diff(a, var);
                let db = self.diff(b, var);
                if db.is_zero() {
                    return build::div(&da, b);
                }
                let numer = build::sub(&build::mul(&da, b), &build::mul(a, &db));
                build::div(&numer, &b.powi(2))
            }
            Node::Pow(a, n) => {
                let da = self.diff(a, var);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = build::mul(&Expr::constant(*n as f64), &a.powi(n - 1));
                build::mul(&outer, &da)
            }
            Node::Call(func, a) => {
                let da = self.diff(a, var);
                if da.is_zero() {
                    return Expr::zero();
                }
                match func {
                    Func::Ln => build::div(&da, a),
                    Func::Exp => build::mul(e, &da),
                    Func::Sqrt => build::div(&da, &build::mul(&Expr::constant(2.0), e)),
                    Func::Sin => build::mul(&a.cos(), &da),
                    Func::Cos => build::neg(&build::mul(&a.sin(), &da)),
                }
            }
        }
    }
}
