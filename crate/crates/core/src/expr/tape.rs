use std::collections::HashMap;

use super::{EvalError, Expr, Func, Node, Point};

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Var(usize),
    Neg(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Pow(u32, i32),
    Call(Func, u32),
}

/// A batch of expressions compiled into a straight-line program.
///
/// Every distinct node of the input DAG becomes one instruction, so a point
/// evaluation costs time linear in the DAG size regardless of how often
/// subtrees are shared. Tapes are immutable and `Sync`; many threads may
/// evaluate the same tape at different points.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    sources: Vec<Expr>,
    outputs: Vec<u32>,
}

impl Tape {
    pub fn new(outputs: &[Expr]) -> Tape {
        let mut tape = Tape { ops: Vec::new(), sources: Vec::new(), outputs: Vec::with_capacity(outputs.len()) };
        let mut slots: HashMap<usize, u32> = HashMap::new();
        let mut consts: HashMap<u64, u32> = HashMap::new();
        for e in outputs {
            let slot = tape.compile(e, &mut slots, &mut consts);
            tape.outputs.push(slot);
        }
        tape
    }

    fn push(&mut self, op: Op, source: &Expr) -> u32 {
        self.ops.push(op);
        self.sources.push(source.clone());
        (self.ops.len() - 1) as u32
    }

    fn compile(&mut self, e: &Expr, slots: &mut HashMap<usize, u32>, consts: &mut HashMap<u64, u32>) -> u32 {
        if let Some(&slot) = slots.get(&e.key()) {
            return slot;
        }
        let slot = match e.node() {
            Node::Const(c) => match consts.get(&c.to_bits()) {
                Some(&slot) => slot,
                None => {
                    let slot = self.push(Op::Const(*c), e);
                    consts.insert(c.to_bits(), slot);
                    slot
                }
            },
            Node::Var(i) => self.push(Op::Var(*i), e),
            Node::Neg(a) => {
                let a = self.compile(a, slots, consts);
                self.push(Op::Neg(a), e)
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                let ia = self.compile(a, slots, consts);
                let ib = self.compile(b, slots, consts);
                let op = match e.node() {
                    Node::Add(..) => Op::Add(ia, ib),
                    Node::Sub(..) => Op::Sub(ia, ib),
                    Node::Mul(..) => Op::Mul(ia, ib),
                    _ => Op::Div(ia, ib),
                };
                self.push(op, e)
            }
            Node::Pow(a, n) => {
                let a = self.compile(a, slots, consts);
                self.push(Op::Pow(a, *n), e)
            }
            Node::Call(f, a) => {
                let a = self.compile(a, slots, consts);
                self.push(Op::Call(*f, a), e)
            }
        };
        slots.insert(e.key(), slot);
        slot
    }

    /// Number of instructions.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Evaluates every output at `p`.
    pub fn eval(&self, p: &Point) -> Result<Vec<f64>, EvalError> {
        let mut scratch = Vec::with_capacity(self.ops.len());
        self.eval_with(p, &mut scratch)
    }

    /// Like [`eval`](Self::eval) but reuses a scratch buffer.
    pub fn eval_with(&self, p: &Point, scratch: &mut Vec<f64>) -> Result<Vec<f64>, EvalError> {
        scratch.clear();
        for (i, op) in self.ops.iter().enumerate() {
            let v = match *op {
                Op::Const(c) => c,
                Op::Var(k) => p.get(k),
                Op::Neg(a) => -scratch[a as usize],
                Op::Add(a, b) => scratch[a as usize] + scratch[b as usize],
                Op::Sub(a, b) => scratch[a as usize] - scratch[b as usize],
                Op::Mul(a, b) => scratch[a as usize] * scratch[b as usize],
                Op::Div(a, b) => {
                    let d = scratch[b as usize];
                    if d == 0.0 {
                        return Err(EvalError::DivisionByZero(self.sources[i].clone()));
                    }
                    scratch[a as usize] / d
                }
                Op::Pow(a, n) => {
                    let base = scratch[a as usize];
                    if base == 0.0 && n < 0 {
                        return Err(EvalError::DivisionByZero(self.sources[i].clone()));
                    }
                    base.powi(n)
                }
                Op::Call(f, a) => match f.apply(scratch[a as usize]) {
                    Some(v) => v,
                    None if f == Func::Ln => return Err(EvalError::LogDomain(self.sources[i].clone())),
                    None => return Err(EvalError::SqrtDomain(self.sources[i].clone())),
                },
            };
            if !v.is_finite() {
                return Err(EvalError::NonFinite(self.sources[i].clone()));
            }
            scratch.push(v);
        }
        Ok(self.outputs.iter().map(|&o| scratch[o as usize]).collect())
    }
}
