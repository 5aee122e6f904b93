use std::fmt;

use super::{Coords, Expr, Node};

// Binding strength, loosest first. Must agree with the parser.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POWER: u8 = 4;
const PREC_ATOM: u8 = 5;

/// Renders an expression with explicit coordinate names.
pub struct Display<'a> {
    pub(super) expr: &'a Expr,
    pub(super) coords: &'a Coords,
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, self.coords)
    }
}

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Const(c) if *c < 0.0 || c.is_sign_negative() => PREC_UNARY,
        Node::Const(_) | Node::Var(_) | Node::Call(..) => PREC_ATOM,
        Node::Neg(_) => PREC_UNARY,
        Node::Add(..) | Node::Sub(..) => PREC_SUM,
        Node::Mul(..) | Node::Div(..) => PREC_PRODUCT,
        Node::Pow(..) => PREC_POWER,
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    let magnitude = c.abs();
    if magnitude != 0.0 && !(1e-5..1e16).contains(&magnitude) {
        write!(f, "{c:e}")
    } else {
        write!(f, "{c}")
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, coords: &Coords, min_prec: u8) -> fmt::Result {
    if precedence(child) < min_prec {
        f.write_str("(")?;
        write_expr(f, child, coords)?;
        f.write_str(")")
    } else {
        write_expr(f, child, coords)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, coords: &Coords) -> fmt::Result {
    match e.node() {
        Node::Const(c) => write_const(f, *c),
        Node::Var(i) => f.write_str(coords.name(*i)),
        Node::Neg(a) => {
            f.write_str("-")?;
            write_child(f, a, coords, PREC_UNARY)
        }
        Node::Add(a, b) | Node::Sub(a, b) => {
            write_child(f, a, coords, PREC_SUM)?;
            f.write_str(if matches!(e.node(), Node::Add(..)) { " + " } else { " - " })?;
            write_child(f, b, coords, PREC_SUM + 1)
        }
        Node::Mul(a, b) | Node::Div(a, b) => {
            write_child(f, a, coords, PREC_PRODUCT)?;
            f.write_str(if matches!(e.node(), Node::Mul(..)) { "*" } else { "/" })?;
            write_child(f, b, coords, PREC_PRODUCT + 1)
        }
        Node::Pow(a, n) => {
            write_child(f, a, coords, PREC_ATOM)?;
            if *n < 0 {
                write!(f, "^({n})")
            } else {
                write!(f, "^{n}")
            }
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a, coords)?;
            f.write_str(")")
        }
    }
}
