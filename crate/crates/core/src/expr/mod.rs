//! Scalar expressions over the three chart coordinates.
//!
//! An [`Expr`] is an immutable, reference-counted expression tree. Subtrees are
//! shared freely, so the trees produced by symbolic differentiation and tensor
//! assembly are really DAGs; [`Tape`] compiles such a DAG into a flat program
//! that evaluates every shared node once per point.

mod diff;
mod parse;
mod render;
mod simplify;
mod tape;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub use diff::Differentiator;
pub use parse::{parse, ParseError};
pub use tape::Tape;

/// Number of chart coordinates. Everything in this crate lives on a 3-dimensional chart.
pub const DIM: usize = 3;

/// Elementary functions understood by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Ln,
    Exp,
    Sqrt,
    Sin,
    Cos,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Ln, Func::Exp, Func::Sqrt, Func::Sin, Func::Cos];

    pub fn name(self) -> &'static str {
        match self {
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Applies the function, returning `None` outside its domain.
    pub(crate) fn apply(self, v: f64) -> Option<f64> {
        match self {
            Func::Ln if v <= 0.0 => None,
            Func::Sqrt if v <= 0.0 => None,
            Func::Ln => Some(v.ln()),
            Func::Sqrt => Some(v.sqrt()),
            Func::Exp => Some(v.exp()),
            Func::Sin => Some(v.sin()),
            Func::Cos => Some(v.cos()),
        }
    }
}

/// One node of an expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    /// Chart coordinate, by index into the chart's [`Coords`].
    Var(usize),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    /// Integer power. Non-integer constant exponents are rewritten as `exp(k*ln(base))`.
    Pow(Expr, i32),
    Call(Func, Expr),
}

/// Shared, immutable expression.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    /// Wraps a node without any simplification. The parser uses this so that
    /// the tree mirrors the source text exactly.
    pub fn from_node(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(value: f64) -> Expr {
        Expr::from_node(Node::Const(value))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn var(index: usize) -> Expr {
        assert!(index < DIM, "coordinate index {index} out of range");
        Expr::from_node(Node::Var(index))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    /// True when coordinate `var` occurs anywhere in the tree.
    pub fn depends_on(&self, var: usize) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.depends_on_inner(var, &mut seen)
    }

    fn depends_on_inner(&self, var: usize, seen: &mut std::collections::HashSet<usize>) -> bool {
        if !seen.insert(self.key()) {
            return false;
        }
        match self.node() {
            Node::Const(_) => false,
            Node::Var(i) => *i == var,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.depends_on_inner(var, seen),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.depends_on_inner(var, seen) || b.depends_on_inner(var, seen)
            }
        }
    }

    /// Highest coordinate index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        (0..DIM).rev().find(|&v| self.depends_on(v))
    }

    /// Number of distinct nodes in the DAG.
    pub fn dag_size(&self) -> usize {
        Tape::new(std::slice::from_ref(self)).len()
    }

    pub fn eval(&self, p: &Point) -> Result<f64, EvalError> {
        Ok(Tape::new(std::slice::from_ref(self)).eval(p)?[0])
    }

    /// Exact partial derivative with respect to coordinate `var`.
    pub fn diff(&self, var: usize) -> Expr {
        Differentiator::new().diff(self, var)
    }

    /// Constant folding and identity elimination. See [`simplify`](self::simplify()).
    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    /// Renders with the given coordinate names; the output re-parses to this tree.
    pub fn display<'a>(&'a self, coords: &'a Coords) -> render::Display<'a> {
        render::Display { expr: self, coords }
    }

    pub fn powi(&self, n: i32) -> Expr {
        if n == 1 {
            return self.clone();
        }
        if n == 0 {
            return Expr::one();
        }
        if let Some(c) = self.as_const() {
            let v = c.powi(n);
            if v.is_finite() && !(c == 0.0 && n < 0) {
                return Expr::constant(v);
            }
        }
        Expr::from_node(Node::Pow(self.clone(), n))
    }

    pub fn call(func: Func, arg: &Expr) -> Expr {
        if let Some(c) = arg.as_const() {
            if let Some(v) = func.apply(c).filter(|v| v.is_finite()) {
                return Expr::constant(v);
            }
        }
        Expr::from_node(Node::Call(func, arg.clone()))
    }

    pub fn ln(&self) -> Expr {
        Expr::call(Func::Ln, self)
    }

    pub fn exp(&self) -> Expr {
        Expr::call(Func::Exp, self)
    }

    pub fn sqrt(&self) -> Expr {
        Expr::call(Func::Sqrt, self)
    }

    pub fn sin(&self) -> Expr {
        Expr::call(Func::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        Expr::call(Func::Cos, self)
    }
}

/// Simplifying constructors. These implement exactly the rule set of
/// [`Expr::simplify`] and are used by every symbolic operation in the crate.
pub(crate) mod build {
    use super::{Expr, Node};

    fn folded(v: f64) -> Option<Expr> {
        v.is_finite().then(|| Expr::constant(v))
    }

    pub fn add(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => folded(x + y).unwrap_or_else(|| raw_add(a, b)),
            (Some(0.0), _) => b.clone(),
            (_, Some(0.0)) => a.clone(),
            (_, Some(y)) if y < 0.0 => raw_sub(a, &Expr::constant(-y)),
            _ => match b.node() {
                Node::Neg(c) => raw_sub(a, c),
                _ => raw_add(a, b),
            },
        }
    }

    pub fn sub(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => folded(x - y).unwrap_or_else(|| raw_sub(a, b)),
            (_, Some(0.0)) => a.clone(),
            (Some(0.0), _) => neg(b),
            (_, Some(y)) if y < 0.0 => raw_add(a, &Expr::constant(-y)),
            _ => match b.node() {
                Node::Neg(c) => raw_add(a, c),
                _ => raw_sub(a, b),
            },
        }
    }

    pub fn mul(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => folded(x * y).unwrap_or_else(|| raw_mul(a, b)),
            (Some(0.0), _) | (_, Some(0.0)) => Expr::zero(),
            (Some(1.0), _) => b.clone(),
            (_, Some(1.0)) => a.clone(),
            _ => raw_mul(a, b),
        }
    }

    pub fn div(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != 0.0 => folded(x / y).unwrap_or_else(|| raw_div(a, b)),
            (Some(0.0), _) => Expr::zero(),
            (_, Some(1.0)) => a.clone(),
            _ => raw_div(a, b),
        }
    }

    pub fn neg(a: &Expr) -> Expr {
        match a.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            Node::Mul(c, b) if c.as_const().is_some() => raw_mul(&neg(c), b),
            _ => Expr::from_node(Node::Neg(a.clone())),
        }
    }

    fn raw_add(a: &Expr, b: &Expr) -> Expr {
        Expr::from_node(Node::Add(a.clone(), b.clone()))
    }

    fn raw_sub(a: &Expr, b: &Expr) -> Expr {
        Expr::from_node(Node::Sub(a.clone(), b.clone()))
    }

    fn raw_mul(a: &Expr, b: &Expr) -> Expr {
        Expr::from_node(Node::Mul(a.clone(), b.clone()))
    }

    fn raw_div(a: &Expr, b: &Expr) -> Expr {
        Expr::from_node(Node::Div(a.clone(), b.clone()))
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $builder:path) => {
        impl std::ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $builder(self, rhs)
            }
        }
        impl std::ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $builder(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $builder(&self, rhs)
            }
        }
        impl std::ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $builder(self, &rhs)
            }
        }
        impl std::ops::$trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $builder(self, &Expr::constant(rhs))
            }
        }
        impl std::ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $builder(&self, &Expr::constant(rhs))
            }
        }
        impl std::ops::$trait<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $builder(&Expr::constant(self), rhs)
            }
        }
        impl std::ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $builder(&Expr::constant(self), &rhs)
            }
        }
    };
}

impl_binop!(Add, add, build::add);
impl_binop!(Sub, sub, build::sub);
impl_binop!(Mul, mul, build::mul);
impl_binop!(Div, div, build::div);

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        build::neg(self)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        build::neg(&self)
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Expr {
        Expr::constant(v)
    }
}

/// Sum of an iterator of expressions, folding zeros.
pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
    terms.into_iter().fold(Expr::zero(), |acc, t| acc + t)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords = Coords::xyz();
        write!(f, "{}", self.display(&coords))
    }
}

/// Names of the three chart coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coords([String; DIM]);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoordsError {
    #[error("`{0}` is not a valid coordinate name")]
    InvalidName(String),
    #[error("coordinate name `{0}` is declared twice")]
    Duplicate(String),
    #[error("`{0}` is a function name and cannot be used as a coordinate")]
    Reserved(String),
}

impl Coords {
    pub fn new(names: [&str; DIM]) -> Result<Coords, CoordsError> {
        for (i, name) in names.iter().enumerate() {
            let mut chars = name.chars();
            let valid = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(CoordsError::InvalidName(name.to_string()));
            }
            if Func::from_name(name).is_some() {
                return Err(CoordsError::Reserved(name.to_string()));
            }
            if names[..i].contains(name) {
                return Err(CoordsError::Duplicate(name.to_string()));
            }
        }
        Ok(Coords(names.map(str::to_string)))
    }

    pub fn xyz() -> Coords {
        Coords(["x".into(), "y".into(), "z".into()])
    }

    pub fn name(&self, index: usize) -> &str {
        &self.0[index]
    }

    pub fn names(&self) -> &[String; DIM] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }
}

impl Default for Coords {
    fn default() -> Self {
        Coords::xyz()
    }
}

/// An evaluation site: one finite value per chart coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Point([f64; DIM]);

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("point components must be finite, got {0:?}")]
pub struct NonFinitePoint(pub [f64; DIM]);

impl Point {
    pub fn new(values: [f64; DIM]) -> Result<Point, NonFinitePoint> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(Point(values))
        } else {
            Err(NonFinitePoint(values))
        }
    }

    pub fn coords(&self) -> [f64; DIM] {
        self.0
    }

    pub fn get(&self, index: usize) -> f64 {
        self.0[index]
    }

    /// Copy of the point with coordinate `index` moved by `delta`.
    pub fn shifted(&self, index: usize, delta: f64) -> Result<Point, NonFinitePoint> {
        let mut values = self.0;
        values[index] += delta;
        Point::new(values)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// Failure to evaluate an expression at a point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(Expr),
    #[error("logarithm of a non-positive value in `{0}`")]
    LogDomain(Expr),
    #[error("square root of a non-positive value in `{0}`")]
    SqrtDomain(Expr),
    #[error("non-finite value produced by `{0}`")]
    NonFinite(Expr),
}

impl EvalError {
    /// The offending subtree.
    pub fn subtree(&self) -> &Expr {
        match self {
            EvalError::DivisionByZero(e)
            | EvalError::LogDomain(e)
            | EvalError::SqrtDomain(e)
            | EvalError::NonFinite(e) => e,
        }
    }
}
