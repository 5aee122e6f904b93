//! Recursive-descent parser for the scalar expression grammar.
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := "-" unary | power
//! power    := primary ("^" exponent)?
//! exponent := unary                      (must be constant)
//! primary  := number | coordinate | function "(" expr ")" | "(" expr ")"
//! function := "ln" | "exp" | "sqrt" | "sin" | "cos"
//! number   := digits ["." digits] [("e" | "E") ["+" | "-"] digits]
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`, and it is
//! right-associative. Error positions are 1-based character offsets; an error
//! at end of input points one past the last character.

use thiserror::Error;

use super::{Coords, Expr, Func, Node, Point};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },
}

impl ParseError {
    /// 1-based character position of the error, if it has one.
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Empty => None,
            ParseError::Syntax { pos, .. } | ParseError::UnknownIdentifier { pos, .. } => Some(*pos),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(pos: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { pos, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, pos));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let literal: String = chars[start..i].iter().collect();
            let value: f64 = literal.parse().map_err(|_| syntax(pos, format!("malformed number `{literal}`")))?;
            if !value.is_finite() {
                return Err(syntax(pos, format!("number `{literal}` is out of range")));
            }
            out.push((Tok::Num(value), pos));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
        } else {
            return Err(syntax(pos, format!("unexpected character `{c}`")));
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    coords: &'a Coords,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected {}, found {}", tok.describe(), self.peek().describe())))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let node = match self.peek() {
                Tok::Plus => Node::Add as fn(Expr, Expr) -> Node,
                Tok::Minus => Node::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::from_node(node(lhs, rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let node = match self.peek() {
                Tok::Star => Node::Mul as fn(Expr, Expr) -> Node,
                Tok::Slash => Node::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::from_node(node(lhs, rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let operand = self.unary()?;
            return Ok(Expr::from_node(Node::Neg(operand)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exp_pos = self.pos();
        let exponent = self.unary()?;
        let k = constant_value(&exponent).ok_or_else(|| syntax(exp_pos, "exponent must be a constant expression"))?;
        if k.fract() == 0.0 && k.abs() <= i32::MAX as f64 {
            Ok(Expr::from_node(Node::Pow(base, k as i32)))
        } else {
            // base^k == exp(k*ln(base)); ln then guards the domain.
            let ln = Expr::from_node(Node::Call(Func::Ln, base));
            let scaled = Expr::from_node(Node::Mul(Expr::constant(k), ln));
            Ok(Expr::from_node(Node::Call(Func::Exp, scaled)))
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::constant(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(index) = self.coords.index_of(&name) {
                    return Ok(Expr::from_node(Node::Var(index)));
                }
                let func = Func::from_name(&name).ok_or(ParseError::UnknownIdentifier { pos, name: name.clone() })?;
                if *self.peek() != Tok::LParen {
                    return Err(syntax(self.pos(), format!("function `{name}` must be applied with parentheses")));
                }
                self.bump();
                let arg = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::from_node(Node::Call(func, arg)))
            }
            other => Err(syntax(pos, format!("unexpected {}", other.describe()))),
        }
    }
}

fn constant_value(e: &Expr) -> Option<f64> {
    if e.max_var().is_some() {
        return None;
    }
    let origin = Point::new([0.0; 3]).ok()?;
    e.eval(&origin).ok().filter(|v| v.is_finite())
}

/// Parses `text` over the given coordinates.
pub fn parse(text: &str, coords: &Coords) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let toks = tokenize(text)?;
    let mut parser = Parser { toks, at: 0, coords };
    let e = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(syntax(parser.pos(), format!("unexpected {}", parser.peek().describe())));
    }
    Ok(e)
}
