use std::collections::HashMap;

use super::{CoordId, Expr, Node};

pub(super) fn diff(e: &Expr, c: CoordId) -> Expr {
    let mut memo = HashMap::new();
    go(e, c, &mut memo)
}

fn go(e: &Expr, c: CoordId, memo: &mut HashMap<usize, Expr>) -> Expr {
    if !e.may_depend_on(c) {
        return Expr::zero();
    }
    if let Some(d) = memo.get(&e.id()) {
        return d.clone();
    }
    let out = match e.node() {
        Node::Constant(_) => Expr::zero(),
        Node::Coord(k) => {
            if *k == c {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Neg(a) => go(a, c, memo).neg(),
        Node::Add(a, b) => go(a, c, memo).add(&go(b, c, memo)),
        Node::Sub(a, b) => go(a, c, memo).sub(&go(b, c, memo)),
        Node::Mul(a, b) => {
            let da = go(a, c, memo);
            let db = go(b, c, memo);
            da.mul(b).add(&a.mul(&db))
        }
        Node::Div(a, b) => {
            // (a/b)' = (a' - (a/b) b') / b
            let da = go(a, c, memo);
            let db = go(b, c, memo);
            if db.is_zero() {
                da.div(b)
            } else {
                da.sub(&e.mul(&db)).div(b)
            }
        }
        Node::Pow(a, b) => {
            let da = go(a, c, memo);
            match b.as_constant() {
                Some(k) => {
                    if da.is_zero() {
                        Expr::zero()
                    } else {
                        Expr::constant(k)
                            .mul(&a.pow(&Expr::constant(k - 1.0)))
                            .mul(&da)
                    }
                }
                None => {
                    let db = go(b, c, memo);
                    let t1 = db.mul(&a.log());
                    let t2 = if da.is_zero() {
                        Expr::zero()
                    } else {
                        b.mul(&da).div(a)
                    };
                    e.mul(&t1.add(&t2))
                }
            }
        }
        Node::Sin(a) => a.cos().mul(&go(a, c, memo)),
        Node::Cos(a) => a.sin().mul(&go(a, c, memo)).neg(),
        Node::Exp(a) => e.mul(&go(a, c, memo)),
        Node::Log(a) => go(a, c, memo).div(a),
        Node::Sqrt(a) => go(a, c, memo).div(&Expr::constant(2.0).mul(e)),
    };
    memo.insert(e.id(), out.clone());
    out
}
