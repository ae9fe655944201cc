use std::collections::HashMap;

use thiserror::Error;

use super::{Expr, Node};

/// A partial function was evaluated outside its domain.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{op} undefined at argument {arg}")]
pub struct DomainError {
    pub op: &'static str,
    pub arg: f64,
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    Coord(usize),
    Neg(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    PowI(u32, i32),
    Pow(u32, u32),
    Sin(u32),
    Cos(u32),
    Exp(u32),
    Log(u32),
    Sqrt(u32),
}

/// A set of expressions flattened into a straight-line program.
///
/// Shared DAG nodes are evaluated once per call; evaluating the compiled form
/// at many points is much cheaper than walking the trees each time.
#[derive(Debug, Clone)]
pub struct Program {
    ops: Vec<Op>,
    outputs: Vec<u32>,
    n: usize,
}

impl Program {
    /// Compiles `exprs` for a jet space of dimension `n` (coordinates laid out
    /// as in [`crate::CoordId::flat`]).
    pub fn compile(exprs: &[Expr], n: usize) -> Self {
        let mut b = Builder {
            ops: Vec::new(),
            slots: HashMap::new(),
            n,
        };
        let outputs = exprs.iter().map(|e| b.emit(e)).collect();
        Program {
            ops: b.ops,
            outputs,
            n,
        }
    }

    pub fn len_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn eval(&self, coords: &[f64]) -> Result<Vec<f64>, DomainError> {
        let mut scratch = Vec::with_capacity(self.ops.len());
        let mut out = vec![0.0; self.outputs.len()];
        self.eval_into(coords, &mut scratch, &mut out)?;
        Ok(out)
    }

    pub fn eval_into(
        &self,
        coords: &[f64],
        scratch: &mut Vec<f64>,
        out: &mut [f64],
    ) -> Result<(), DomainError> {
        scratch.clear();
        for op in &self.ops {
            let v = |i: &u32| scratch[*i as usize];
            let value = match op {
                Op::Const(c) => *c,
                Op::Coord(k) => coords[*k],
                Op::Neg(a) => -v(a),
                Op::Add(a, b) => v(a) + v(b),
                Op::Sub(a, b) => v(a) - v(b),
                Op::Mul(a, b) => v(a) * v(b),
                Op::Div(a, b) => {
                    let d = v(b);
                    if d == 0.0 {
                        return Err(DomainError { op: "division", arg: d });
                    }
                    v(a) / d
                }
                Op::PowI(a, e) => {
                    let base = v(a);
                    if base == 0.0 && *e < 0 {
                        return Err(DomainError { op: "pow", arg: base });
                    }
                    base.powi(*e)
                }
                Op::Pow(a, b) => {
                    let base = v(a);
                    let e = v(b);
                    if base < 0.0 && e.fract() != 0.0 {
                        return Err(DomainError { op: "pow", arg: base });
                    }
                    if base == 0.0 && e < 0.0 {
                        return Err(DomainError { op: "pow", arg: base });
                    }
                    base.powf(e)
                }
                Op::Sin(a) => v(a).sin(),
                Op::Cos(a) => v(a).cos(),
                Op::Exp(a) => v(a).exp(),
                Op::Log(a) => {
                    let x = v(a);
                    if x <= 0.0 {
                        return Err(DomainError { op: "log", arg: x });
                    }
                    x.ln()
                }
                Op::Sqrt(a) => {
                    let x = v(a);
                    if x < 0.0 {
                        return Err(DomainError { op: "sqrt", arg: x });
                    }
                    x.sqrt()
                }
            };
            if !value.is_finite() {
                return Err(DomainError {
                    op: "overflow",
                    arg: value,
                });
            }
            scratch.push(value);
        }
        for (o, &slot) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[slot as usize];
        }
        Ok(())
    }
}

struct Builder {
    ops: Vec<Op>,
    slots: HashMap<usize, u32>,
    n: usize,
}

impl Builder {
    fn emit(&mut self, e: &Expr) -> u32 {
        if let Some(&s) = self.slots.get(&e.id()) {
            return s;
        }
        let op = match e.node() {
            Node::Constant(c) => Op::Const(*c),
            Node::Coord(c) => Op::Coord(c.flat(self.n)),
            Node::Neg(a) => Op::Neg(self.emit(a)),
            Node::Add(a, b) => {
                let (a, b) = (self.emit(a), self.emit(b));
                Op::Add(a, b)
            }
            Node::Sub(a, b) => {
                let (a, b) = (self.emit(a), self.emit(b));
                Op::Sub(a, b)
            }
            Node::Mul(a, b) => {
                let (a, b) = (self.emit(a), self.emit(b));
                Op::Mul(a, b)
            }
            Node::Div(a, b) => {
                let (a, b) = (self.emit(a), self.emit(b));
                Op::Div(a, b)
            }
            Node::Pow(a, b) => match b.as_constant() {
                Some(k) if k.fract() == 0.0 && k.abs() < i32::MAX as f64 => {
                    Op::PowI(self.emit(a), k as i32)
                }
                _ => {
                    let (a, b) = (self.emit(a), self.emit(b));
                    Op::Pow(a, b)
                }
            },
            Node::Sin(a) => Op::Sin(self.emit(a)),
            Node::Cos(a) => Op::Cos(self.emit(a)),
            Node::Exp(a) => Op::Exp(self.emit(a)),
            Node::Log(a) => Op::Log(self.emit(a)),
            Node::Sqrt(a) => Op::Sqrt(self.emit(a)),
        };
        let slot = self.ops.len() as u32;
        self.ops.push(op);
        self.slots.insert(e.id(), slot);
        slot
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_linear() {
        assert_eq!(Expr::constant(3.5).eval_flat(1, &[0.2, 0.4]).unwrap(), 3.5);
        // y1_1 + 2 y2_1 on T^2M with n = 1
        let e = Expr::y(1, 1) + 2.0 * Expr::y(2, 1);
        assert_eq!(e.eval_flat(1, &[0.0, 1.0, 0.5]).unwrap(), 2.0);
    }

    #[test]
    fn domain_errors() {
        let inv = Expr::one() / Expr::y(1, 1);
        assert_eq!(
            inv.eval_flat(1, &[0.0, 0.0]).unwrap_err().op,
            "division"
        );
        assert!(Expr::x(1).log().eval_flat(1, &[-1.0]).is_err());
        assert!(Expr::x(1).sqrt().eval_flat(1, &[-1.0]).is_err());
        assert!(Expr::x(1).pow(&Expr::constant(0.5)).eval_flat(1, &[-2.0]).is_err());
        assert!(Expr::x(1).powi(-1).eval_flat(1, &[0.0]).is_err());
    }

    #[test]
    fn shared_nodes_evaluated_once() {
        let x = Expr::x(1);
        let mut e = x.clone();
        for _ in 0..60 {
            e = &e + &e;
        }
        let p = Program::compile(&[e], 1);
        assert!(p.ops.len() < 70);
        assert_eq!(p.eval(&[1.0]).unwrap()[0], 2f64.powi(60));
    }
}
