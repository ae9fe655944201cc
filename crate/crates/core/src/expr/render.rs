use super::{Expr, Node};

const P_ADD: u8 = 1;
const P_MUL: u8 = 2;
const P_NEG: u8 = 3;
const P_POW: u8 = 4;
const P_ATOM: u8 = 5;

pub(super) fn render(e: &Expr) -> String {
    let mut out = String::new();
    write(e, 0, &mut out);
    out
}

fn prec(e: &Expr) -> u8 {
    match e.node() {
        Node::Constant(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => P_NEG,
        Node::Constant(_) | Node::Coord(_) => P_ATOM,
        Node::Add(..) | Node::Sub(..) => P_ADD,
        Node::Mul(..) | Node::Div(..) => P_MUL,
        Node::Neg(_) => P_NEG,
        Node::Pow(..) => P_POW,
        Node::Sin(_) | Node::Cos(_) | Node::Exp(_) | Node::Log(_) | Node::Sqrt(_) => P_ATOM,
    }
}

fn write(e: &Expr, min: u8, out: &mut String) {
    let p = prec(e);
    let paren = p < min;
    if paren {
        out.push('(');
    }
    match e.node() {
        Node::Constant(c) => out.push_str(&format!("{c:?}")),
        Node::Coord(c) => out.push_str(&c.to_string()),
        Node::Neg(a) => {
            out.push('-');
            write(a, P_NEG, out);
        }
        Node::Add(a, b) => binary(a, " + ", b, P_ADD, P_MUL, out),
        Node::Sub(a, b) => binary(a, " - ", b, P_ADD, P_MUL, out),
        Node::Mul(a, b) => binary(a, "*", b, P_MUL, P_NEG, out),
        Node::Div(a, b) => binary(a, "/", b, P_MUL, P_NEG, out),
        Node::Pow(a, b) => binary(a, "^", b, P_ATOM, P_POW, out),
        Node::Sin(a) => func("sin", a, out),
        Node::Cos(a) => func("cos", a, out),
        Node::Exp(a) => func("exp", a, out),
        Node::Log(a) => func("log", a, out),
        Node::Sqrt(a) => func("sqrt", a, out),
    }
    if paren {
        out.push(')');
    }
}

fn binary(a: &Expr, op: &str, b: &Expr, lmin: u8, rmin: u8, out: &mut String) {
    write(a, lmin, out);
    out.push_str(op);
    // a right operand starting with '-' after '*' or '/' is still unambiguous
    // for the parser, but keep it parenthesised for readability
    let rmin = if matches!(op, "*" | "/") { rmin.max(P_POW) } else { rmin };
    write(b, rmin, out);
}

fn func(name: &str, a: &Expr, out: &mut String) {
    out.push_str(name);
    out.push('(');
    write(a, 0, out);
    out.push(')');
}
