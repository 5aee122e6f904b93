//! Closed-form `∫ dz / k₃(z)` for Laurent-monomial integrands.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{Expr, Node};

const Z: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntegrateError {
    #[error("k3 is identically zero")]
    Zero,
    #[error("cannot integrate 1/k3 in closed form for k3 = {0}; supported forms are c*z^n and c/(sum of c_i*z^n_i)")]
    Unsupported(String),
}

/// Finite sums `Σ cₙ zⁿ` with integer `n`.
type Laurent = BTreeMap<i32, f64>;

fn monomial(n: i32, c: f64) -> Laurent {
    let mut l = Laurent::new();
    if c != 0.0 {
        l.insert(n, c);
    }
    l
}

fn combine(a: Laurent, b: &Laurent, sign: f64) -> Laurent {
    let mut out = a;
    for (&n, &c) in b {
        let slot = out.entry(n).or_insert(0.0);
        *slot += sign * c;
    }
    out.retain(|_, c| *c != 0.0);
    out
}

fn product(a: &Laurent, b: &Laurent) -> Laurent {
    let mut out = Laurent::new();
    for (&n, &c) in a {
        for (&m, &d) in b {
            *out.entry(n + m).or_insert(0.0) += c * d;
        }
    }
    out.retain(|_, c| *c != 0.0);
    out
}

fn single(l: &Laurent) -> Option<(i32, f64)> {
    (l.len() == 1).then(|| l.iter().next().map(|(&n, &c)| (n, c))).flatten()
}

fn reciprocal(l: &Laurent) -> Option<Laurent> {
    single(l).map(|(n, c)| monomial(-n, 1.0 / c))
}

/// `e` as a Laurent polynomial in `z`, if it is one with only monomial
/// denominators.
fn laurent(e: &Expr) -> Option<Laurent> {
    Some(match e.node() {
        Node::Const(c) => monomial(0, *c),
        Node::Var(Z) => monomial(1, 1.0),
        Node::Var(_) | Node::Call(..) => return None,
        Node::Neg(a) => combine(Laurent::new(), &laurent(a)?, -1.0),
        Node::Add(a, b) => combine(laurent(a)?, &laurent(b)?, 1.0),
        Node::Sub(a, b) => combine(laurent(a)?, &laurent(b)?, -1.0),
        Node::Mul(a, b) => product(&laurent(a)?, &laurent(b)?),
        Node::Div(a, b) => product(&laurent(a)?, &reciprocal(&laurent(b)?)?),
        Node::Pow(a, n) => {
            let base = laurent(a)?;
            let base = if *n < 0 { reciprocal(&base)? } else { base };
            (0..n.unsigned_abs()).fold(monomial(0, 1.0), |acc, _| product(&acc, &base))
        }
    })
}

/// `1/k₃` as a Laurent polynomial.
fn inverse(k3: &Expr) -> Result<Laurent, IntegrateError> {
    let unsupported = || IntegrateError::Unsupported(k3.to_string());
    if let Some(l) = laurent(k3) {
        if l.is_empty() {
            return Err(IntegrateError::Zero);
        }
        return reciprocal(&l).ok_or_else(unsupported);
    }
    if let Node::Div(num, den) = k3.node() {
        let num = laurent(num).ok_or_else(unsupported)?;
        if num.is_empty() {
            return Err(IntegrateError::Zero);
        }
        let den = laurent(den).ok_or_else(unsupported)?;
        return Ok(product(&den, &reciprocal(&num).ok_or_else(unsupported)?));
    }
    Err(unsupported())
}

/// An antiderivative of `1/k₃`.
#[derive(Debug, Clone, PartialEq)]
pub struct Antiderivative {
    pub expr: Expr,
    /// Whether a `ln z` term appears, so that the result needs `z > 0`.
    pub uses_log: bool,
}

pub fn integrate_reciprocal(k3: &Expr, constant: f64) -> Result<Antiderivative, IntegrateError> {
    let z = Expr::var(Z);
    let mut expr = Expr::constant(constant);
    let mut uses_log = false;
    for (n, c) in inverse(k3)? {
        let term = if n == -1 {
            uses_log = true;
            z.ln()
        } else {
            z.powi(n + 1)
        };
        let coeff = if n == -1 { c } else { c / f64::from(n + 1) };
        expr = &expr + &(&Expr::constant(coeff) * &term);
    }
    Ok(Antiderivative { expr, uses_log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Coords, Point};

    fn lam(k3: &str) -> Result<Antiderivative, IntegrateError> {
        integrate_reciprocal(&parse(k3, &Coords::xyz()).unwrap(), 0.0)
    }

    fn at(a: &Antiderivative, z: f64) -> f64 {
        a.expr.eval(&Point::new([0.0, 0.0, z]).unwrap()).unwrap()
    }

    #[test]
    fn table() {
        assert_eq!(at(&lam("1").unwrap(), 1.5), 1.5);
        assert_eq!(at(&lam("2").unwrap(), 3.0), 1.5);
        let log = lam("z").unwrap();
        assert!(log.uses_log);
        assert!((at(&log, 2.0) - 2f64.ln()).abs() < 1e-15);
        assert!((at(&lam("z^2").unwrap(), 2.0) + 0.5).abs() < 1e-15);
        assert!((at(&lam("1/z").unwrap(), 2.0) - 2.0).abs() < 1e-15);
        // 1/k3 = (1 + z^2)/3
        assert!((at(&lam("3/(1 + z^2)").unwrap(), 3.0) - (3.0 + 9.0) / 3.0).abs() < 1e-14);
        assert!((at(&lam("-2*z^3").unwrap(), 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejections() {
        assert_eq!(lam("0"), Err(IntegrateError::Zero));
        assert_eq!(lam("z - z"), Err(IntegrateError::Zero));
        assert!(matches!(lam("1 + z"), Err(IntegrateError::Unsupported(_))));
        assert!(matches!(lam("exp(z)"), Err(IntegrateError::Unsupported(_))));
        assert!(matches!(lam("x"), Err(IntegrateError::Unsupported(_))));
    }

    #[test]
    fn constant_shifts() {
        let a = integrate_reciprocal(&Expr::one(), 0.25).unwrap();
        assert_eq!(at(&a, 1.0), 1.25);
    }
}
