//! Expression trees over jet coordinates.
//!
//! An [`Expr`] is an immutable, reference-counted DAG. Nodes are shared freely
//! between expressions, so derivatives of large expressions stay compact as long
//! as every traversal is memoized by node identity (which all traversals in this
//! module do).
//!
//! Constructors such as [`Expr::add`] or the `+`/`*` operators apply local
//! structural simplification (constant folding and the identities `e+0`,
//! `e*1`, `e*0`, `e^0`, `e^1`, `0/e`). [`Expr::raw`] builds a node verbatim; the
//! parser uses it so that parsed text maps to the literal syntax tree.

mod diff;
mod eval;
mod parse;
mod render;

use std::collections::HashMap;
use std::fmt;
use std::ops;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use eval::{DomainError, Program};
pub use parse::{parse, ParseError};

/// A jet coordinate `y^{(order) index}`; order 0 is the base coordinate `x^index`.
/// `index` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoordId {
    pub order: usize,
    pub index: usize,
}

impl CoordId {
    pub const fn new(order: usize, index: usize) -> Self {
        Self { order, index }
    }

    /// Position in the flat `(x, y1, ..., yr)` layout of a space of dimension `n`.
    pub fn flat(&self, n: usize) -> usize {
        self.order * n + (self.index - 1)
    }

    pub fn from_flat(flat: usize, n: usize) -> Self {
        Self {
            order: flat / n,
            index: flat % n + 1,
        }
    }

    fn bloom(&self) -> u128 {
        1u128 << ((self.order * 16 + self.index.saturating_sub(1)) % 128)
    }
}

impl fmt::Display for CoordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order == 0 {
            write!(f, "x{}", self.index)
        } else {
            write!(f, "y{}_{}", self.order, self.index)
        }
    }
}

/// Node kinds of an expression tree.
#[derive(Debug, Clone)]
pub enum Node {
    Constant(f64),
    Coord(CoordId),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Expr),
    Sin(Expr),
    Cos(Expr),
    Exp(Expr),
    Log(Expr),
    Sqrt(Expr),
}

struct Inner {
    node: Node,
    max_order: Option<usize>,
    deps: u128,
}

/// Immutable, shareable expression.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl Expr {
    /// Builds a node without any simplification.
    pub fn raw(node: Node) -> Self {
        let (max_order, deps) = match &node {
            Node::Constant(_) => (None, 0),
            Node::Coord(c) => (Some(c.order), c.bloom()),
            Node::Neg(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Exp(a)
            | Node::Log(a)
            | Node::Sqrt(a) => (a.0.max_order, a.0.deps),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b) => (a.0.max_order.max(b.0.max_order), a.0.deps | b.0.deps),
        };
        Expr(Arc::new(Inner {
            node,
            max_order,
            deps,
        }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn constant(c: f64) -> Self {
        Self::raw(Node::Constant(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn coord(c: CoordId) -> Self {
        Self::raw(Node::Coord(c))
    }

    /// Base coordinate `x^i` (1-based).
    pub fn x(i: usize) -> Self {
        Self::coord(CoordId::new(0, i))
    }

    /// Fibre coordinate `y^{(order) i}` (1-based index).
    pub fn y(order: usize, i: usize) -> Self {
        Self::coord(CoordId::new(order, i))
    }

    /// Largest coordinate order appearing in the expression; `None` for constants.
    pub fn max_order(&self) -> Option<usize> {
        self.0.max_order
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.node() {
            Node::Constant(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_constant() == Some(1.0)
    }

    /// True when the two handles point to the same node.
    pub fn same(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Cheap conservative test: `false` means `c` certainly does not occur.
    pub(crate) fn may_depend_on(&self, c: CoordId) -> bool {
        self.0.deps & c.bloom() != 0 && self.0.max_order.is_some_and(|m| m >= c.order)
    }

    pub(crate) fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Constant(c) => Expr::constant(-c),
            Node::Neg(a) => a.clone(),
            _ => Expr::raw(Node::Neg(self.clone())),
        }
    }

    pub fn add(&self, rhs: &Expr) -> Expr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(a), _) if a == 0.0 => rhs.clone(),
            (_, Some(b)) if b == 0.0 => self.clone(),
            _ => match rhs.node() {
                Node::Neg(b) => self.sub(b),
                _ => Expr::raw(Node::Add(self.clone(), rhs.clone())),
            },
        }
    }

    pub fn sub(&self, rhs: &Expr) -> Expr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => Expr::constant(a - b),
            (_, Some(b)) if b == 0.0 => self.clone(),
            (Some(a), _) if a == 0.0 => rhs.neg(),
            _ if self.same(rhs) => Expr::zero(),
            _ => match rhs.node() {
                Node::Neg(b) => self.add(b),
                _ => Expr::raw(Node::Sub(self.clone(), rhs.clone())),
            },
        }
    }

    pub fn mul(&self, rhs: &Expr) -> Expr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            (Some(a), _) => scale(a, rhs),
            (_, Some(b)) => scale(b, self),
            _ => match (self.node(), rhs.node()) {
                (Node::Neg(a), Node::Neg(b)) => a.mul(b),
                (Node::Neg(a), _) => a.mul(rhs).neg(),
                (_, Node::Neg(b)) => self.mul(b).neg(),
                _ => Expr::raw(Node::Mul(self.clone(), rhs.clone())),
            },
        }
    }

    pub fn div(&self, rhs: &Expr) -> Expr {
        match (self.as_constant(), rhs.as_constant()) {
            (Some(a), Some(b)) if b != 0.0 => Expr::constant(a / b),
            (Some(a), _) if a == 0.0 => Expr::zero(),
            (_, Some(b)) if b == 1.0 => self.clone(),
            (_, Some(b)) if b == -1.0 => self.neg(),
            (_, Some(b)) if b != 0.0 => scale(1.0 / b, self),
            _ => Expr::raw(Node::Div(self.clone(), rhs.clone())),
        }
    }

    pub fn pow(&self, exponent: &Expr) -> Expr {
        match (self.as_constant(), exponent.as_constant()) {
            (_, Some(e)) if e == 0.0 => Expr::one(),
            (_, Some(e)) if e == 1.0 => self.clone(),
            (Some(b), Some(e)) => {
                let v = b.powf(e);
                if v.is_finite() {
                    Expr::constant(v)
                } else {
                    Expr::raw(Node::Pow(self.clone(), exponent.clone()))
                }
            }
            (Some(b), _) if b == 1.0 => Expr::one(),
            _ => Expr::raw(Node::Pow(self.clone(), exponent.clone())),
        }
    }

    pub fn powi(&self, e: i32) -> Expr {
        self.pow(&Expr::constant(e as f64))
    }

    pub fn square(&self) -> Expr {
        self.powi(2)
    }

    pub fn sin(&self) -> Expr {
        fold_unary(self, f64::sin, Node::Sin)
    }

    pub fn cos(&self) -> Expr {
        fold_unary(self, f64::cos, Node::Cos)
    }

    pub fn exp(&self) -> Expr {
        fold_unary(self, f64::exp, Node::Exp)
    }

    pub fn log(&self) -> Expr {
        match self.as_constant() {
            Some(c) if c > 0.0 => Expr::constant(c.ln()),
            _ => Expr::raw(Node::Log(self.clone())),
        }
    }

    pub fn sqrt(&self) -> Expr {
        match self.as_constant() {
            Some(c) if c >= 0.0 => Expr::constant(c.sqrt()),
            _ => Expr::raw(Node::Sqrt(self.clone())),
        }
    }

    /// Symbolic partial derivative with respect to `c`.
    pub fn diff(&self, c: CoordId) -> Expr {
        diff::diff(self, c)
    }

    /// Rebuilds the tree bottom-up through the simplifying constructors.
    pub fn simplify(&self) -> Expr {
        let mut memo = HashMap::new();
        simplify_rec(self, &mut memo)
    }

    /// Replaces coordinates by expressions.
    pub fn substitute(&self, f: &dyn Fn(CoordId) -> Option<Expr>) -> Expr {
        let mut memo = HashMap::new();
        substitute_rec(self, f, &mut memo)
    }

    /// Text form accepted by [`parse`].
    pub fn render(&self) -> String {
        render::render(self)
    }

    /// Evaluates at a flat coordinate vector of a space with dimension `n`.
    pub fn eval_flat(&self, n: usize, coords: &[f64]) -> Result<f64, DomainError> {
        Program::compile(std::slice::from_ref(self), n).eval(coords).map(|v| v[0])
    }

    /// Evaluates at a jet point.
    pub fn eval(&self, p: &crate::jet::JetPoint) -> Result<f64, DomainError> {
        self.eval_flat(p.space().n, p.coords())
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.id()) {
                continue;
            }
            for c in e.children() {
                stack.push(c.clone());
            }
        }
        seen.len()
    }

    pub(crate) fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Constant(_) | Node::Coord(_) => vec![],
            Node::Neg(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Exp(a)
            | Node::Log(a)
            | Node::Sqrt(a) => vec![a],
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Pow(a, b) => vec![a, b],
        }
    }
}

fn scale(c: f64, e: &Expr) -> Expr {
    if c == 0.0 {
        return Expr::zero();
    }
    if c == 1.0 {
        return e.clone();
    }
    if c == -1.0 {
        return e.neg();
    }
    match e.node() {
        Node::Mul(a, b) => {
            if let Some(k) = a.as_constant() {
                return scale(c * k, b);
            }
        }
        Node::Neg(a) => return scale(-c, a),
        _ => {}
    }
    Expr::raw(Node::Mul(Expr::constant(c), e.clone()))
}

fn fold_unary(e: &Expr, f: fn(f64) -> f64, node: fn(Expr) -> Node) -> Expr {
    match e.as_constant() {
        Some(c) => Expr::constant(f(c)),
        None => Expr::raw(node(e.clone())),
    }
}

fn simplify_rec(e: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
    if let Some(s) = memo.get(&e.id()) {
        return s.clone();
    }
    let out = match e.node() {
        Node::Constant(_) | Node::Coord(_) => e.clone(),
        Node::Neg(a) => simplify_rec(a, memo).neg(),
        Node::Add(a, b) => simplify_rec(a, memo).add(&simplify_rec(b, memo)),
        Node::Sub(a, b) => simplify_rec(a, memo).sub(&simplify_rec(b, memo)),
        Node::Mul(a, b) => simplify_rec(a, memo).mul(&simplify_rec(b, memo)),
        Node::Div(a, b) => simplify_rec(a, memo).div(&simplify_rec(b, memo)),
        Node::Pow(a, b) => simplify_rec(a, memo).pow(&simplify_rec(b, memo)),
        Node::Sin(a) => simplify_rec(a, memo).sin(),
        Node::Cos(a) => simplify_rec(a, memo).cos(),
        Node::Exp(a) => simplify_rec(a, memo).exp(),
        Node::Log(a) => simplify_rec(a, memo).log(),
        Node::Sqrt(a) => simplify_rec(a, memo).sqrt(),
    };
    memo.insert(e.id(), out.clone());
    out
}

fn substitute_rec(
    e: &Expr,
    f: &dyn Fn(CoordId) -> Option<Expr>,
    memo: &mut HashMap<usize, Expr>,
) -> Expr {
    if let Some(s) = memo.get(&e.id()) {
        return s.clone();
    }
    let mut go = |a: &Expr| substitute_rec(a, f, memo);
    let out = match e.node() {
        Node::Constant(_) => e.clone(),
        Node::Coord(c) => f(*c).unwrap_or_else(|| e.clone()),
        Node::Neg(a) => go(a).neg(),
        Node::Add(a, b) => go(a).add(&go(b)),
        Node::Sub(a, b) => go(a).sub(&go(b)),
        Node::Mul(a, b) => go(a).mul(&go(b)),
        Node::Div(a, b) => go(a).div(&go(b)),
        Node::Pow(a, b) => go(a).pow(&go(b)),
        Node::Sin(a) => go(a).sin(),
        Node::Cos(a) => go(a).cos(),
        Node::Exp(a) => go(a).exp(),
        Node::Log(a) => go(a).log(),
        Node::Sqrt(a) => go(a).sqrt(),
    };
    memo.insert(e.id(), out.clone());
    out
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Structural equality. Shared nodes compare in O(1); otherwise the trees are
/// walked, so avoid this on large derivative DAGs.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if self.same(other) {
            return true;
        }
        match (self.node(), other.node()) {
            (Node::Constant(a), Node::Constant(b)) => a == b,
            (Node::Coord(a), Node::Coord(b)) => a == b,
            (Node::Neg(a), Node::Neg(b))
            | (Node::Sin(a), Node::Sin(b))
            | (Node::Cos(a), Node::Cos(b))
            | (Node::Exp(a), Node::Exp(b))
            | (Node::Log(a), Node::Log(b))
            | (Node::Sqrt(a), Node::Sqrt(b)) => a == b,
            (Node::Add(a, b), Node::Add(c, d))
            | (Node::Sub(a, b), Node::Sub(c, d))
            | (Node::Mul(a, b), Node::Mul(c, d))
            | (Node::Div(a, b), Node::Div(c, d))
            | (Node::Pow(a, b), Node::Pow(c, d)) => a == c && b == d,
            _ => false,
        }
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$method(&self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$method(&self, rhs)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$method(self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$method(self, rhs)
            }
        }
        impl ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$method(&self, &Expr::constant(rhs))
            }
        }
        impl ops::$tr<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$method(self, &Expr::constant(rhs))
            }
        }
        impl ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$method(&Expr::constant(self), &rhs)
            }
        }
        impl ops::$tr<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$method(&Expr::constant(self), rhs)
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

/// Sum of an iterator of expressions.
pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
    terms.into_iter().fold(Expr::zero(), |acc, t| acc + t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplify_identities() {
        let x1 = Expr::x(1);
        let y = Expr::y(1, 1);
        let mul0 = Expr::raw(Node::Mul(Expr::zero(), Expr::raw(Node::Sin(x1.clone()))));
        assert!(mul0.simplify().is_zero());
        let add0 = Expr::raw(Node::Add(y.clone(), Expr::zero()));
        assert!(add0.simplify().same(&y));
        let pow1 = Expr::raw(Node::Pow(x1.clone(), Expr::one()));
        assert!(pow1.simplify().same(&x1));
        let pow0 = Expr::raw(Node::Pow(x1.clone(), Expr::zero()));
        assert!(pow0.simplify().is_one());
        let zero_div = Expr::raw(Node::Div(Expr::zero(), x1.clone()));
        assert!(zero_div.simplify().is_zero());
        let folded = Expr::raw(Node::Add(Expr::constant(2.0), Expr::constant(3.0)));
        assert_eq!(folded.simplify().as_constant(), Some(5.0));
    }

    #[test]
    fn max_order_tracks_coordinates() {
        let e = Expr::x(1) * Expr::y(2, 1) + Expr::y(1, 2);
        assert_eq!(e.max_order(), Some(2));
        assert_eq!(Expr::constant(3.0).max_order(), None);
    }

    #[test]
    fn coord_flat_round_trip() {
        let c = CoordId::new(2, 3);
        assert_eq!(CoordId::from_flat(c.flat(3), 3), c);
        assert_eq!(c.to_string(), "y2_3");
        assert_eq!(CoordId::new(0, 2).to_string(), "x2");
    }

    #[test]
    fn scale_collapses_nested_constants() {
        let e = 2.0 * (3.0 * Expr::x(1));
        match e.node() {
            Node::Mul(a, _) => assert_eq!(a.as_constant(), Some(6.0)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
