//! Tokenizer and Pratt parser for the expression grammar.
//!
//! ```text
//! expr    := prefix (infix prefix)*
//! prefix  := number | coord | func '(' expr ')' | '(' expr ')' | '-' prefix
//! coord   := 'x' digits | 'y' digits '_' digits
//! func    := sin | cos | exp | log | sqrt
//! infix   := '+' | '-' | '*' | '/' | '^'      ('^' binds tightest, right-assoc)
//! ```

use thiserror::Error;

use super::{CoordId, Expr, Node};
use crate::jet::JetSpace;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: expected {expected}, found {found}")]
    Syntax {
        pos: usize,
        expected: String,
        found: String,
    },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("coordinate `{name}` at {pos} is out of range for n = {n}, r = {r}")]
    IndexOutOfRange {
        name: String,
        pos: usize,
        n: usize,
        r: usize,
    },
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
            Tok::Ident(s) => format!("`{s}`"),
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

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => toks.push((Tok::Plus, start)),
            '-' => toks.push((Tok::Minus, start)),
            '*' => toks.push((Tok::Star, start)),
            '/' => toks.push((Tok::Slash, start)),
            '^' => toks.push((Tok::Caret, start)),
            '(' => toks.push((Tok::LParen, start)),
            ')' => toks.push((Tok::RParen, start)),
            _ if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let v: f64 = lit.parse().map_err(|_| ParseError::Syntax {
                    pos: start,
                    expected: "decimal literal".into(),
                    found: format!("`{lit}`"),
                })?;
                toks.push((Tok::Num(v), start));
                continue;
            }
            _ if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(ParseError::Syntax {
                    pos: start,
                    expected: "expression".into(),
                    found: format!("`{c}`"),
                })
            }
        }
        i += 1;
    }
    toks.push((Tok::End, text.len()));
    Ok(toks)
}

const FUNCS: [&str; 5] = ["sin", "cos", "exp", "log", "sqrt"];

/// Parses `text` into an expression whose coordinates are valid for `space`.
pub fn parse(text: &str, space: &JetSpace) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        n: space.n,
        r: space.r,
    };
    let e = p.expr(0)?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(p.unexpected("operator or end of input", &t.clone())),
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    n: usize,
    r: usize,
}

// binding powers
const BP_ADD: u8 = 1;
const BP_MUL: u8 = 2;
const BP_NEG: u8 = 3;
const BP_POW: u8 = 4;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn here(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str, found: &Tok) -> ParseError {
        ParseError::Syntax {
            pos: self.here(),
            expected: expected.into(),
            found: found.describe(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe(), &self.peek().clone()))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let (bp, right_assoc) = match self.peek() {
                Tok::Plus | Tok::Minus => (BP_ADD, false),
                Tok::Star | Tok::Slash => (BP_MUL, false),
                Tok::Caret => (BP_POW, true),
                _ => break,
            };
            if bp < min_bp {
                break;
            }
            let op = self.bump();
            let rhs = if right_assoc {
                self.expr(bp)?
            } else {
                self.expr(bp + 1)?
            };
            lhs = Expr::raw(match op {
                Tok::Plus => Node::Add(lhs, rhs),
                Tok::Minus => Node::Sub(lhs, rhs),
                Tok::Star => Node::Mul(lhs, rhs),
                Tok::Slash => Node::Div(lhs, rhs),
                Tok::Caret => Node::Pow(lhs, rhs),
                _ => unreachable!(),
            });
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let start = self.here();
        let tok = self.peek().clone();
        match tok {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::constant(v))
            }
            Tok::Minus => {
                self.bump();
                let operand = self.expr(BP_NEG)?;
                Ok(Expr::raw(Node::Neg(operand)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr(0)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if FUNCS.contains(&name.as_str()) {
                    self.expect(Tok::LParen)?;
                    let arg = self.expr(0)?;
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::raw(match name.as_str() {
                        "sin" => Node::Sin(arg),
                        "cos" => Node::Cos(arg),
                        "exp" => Node::Exp(arg),
                        "log" => Node::Log(arg),
                        _ => Node::Sqrt(arg),
                    }));
                }
                let c = self.coordinate(&name, start)?;
                Ok(Expr::coord(c))
            }
            t => Err(self.unexpected("expression", &t)),
        }
    }

    fn coordinate(&self, name: &str, pos: usize) -> Result<CoordId, ParseError> {
        let unknown = || ParseError::UnknownIdentifier {
            name: name.to_string(),
            pos,
        };
        let digits = |s: &str| -> Option<usize> {
            if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
                s.parse().ok()
            } else {
                None
            }
        };
        let c = if let Some(rest) = name.strip_prefix('x') {
            CoordId::new(0, digits(rest).ok_or_else(unknown)?)
        } else if let Some(rest) = name.strip_prefix('y') {
            let (order, index) = rest.split_once('_').ok_or_else(unknown)?;
            let order = digits(order).ok_or_else(unknown)?;
            if order == 0 {
                return Err(self.out_of_range(name, pos));
            }
            CoordId::new(order, digits(index).ok_or_else(unknown)?)
        } else {
            return Err(unknown());
        };
        if c.index == 0 || c.index > self.n || c.order > self.r {
            return Err(self.out_of_range(name, pos));
        }
        Ok(c)
    }

    fn out_of_range(&self, name: &str, pos: usize) -> ParseError {
        ParseError::IndexOutOfRange {
            name: name.to_string(),
            pos,
            n: self.n,
            r: self.r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize, r: usize) -> JetSpace {
        JetSpace::new(n, r).unwrap()
    }

    #[test]
    fn literal_tree() {
        let e = parse("x1 + 2*y1_1", &space(2, 1)).unwrap();
        let expected = Expr::raw(Node::Add(
            Expr::x(1),
            Expr::raw(Node::Mul(Expr::constant(2.0), Expr::y(1, 1))),
        ));
        assert_eq!(e, expected);
    }

    #[test]
    fn index_out_of_range() {
        assert!(matches!(
            parse("y1_3", &space(2, 1)),
            Err(ParseError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            parse("y2_1", &space(2, 1)),
            Err(ParseError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            parse("x0", &space(2, 1)),
            Err(ParseError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn euclidean_norm() {
        let e = parse("sqrt(y1_1^2 + y1_2^2)", &space(2, 1)).unwrap();
        let two = Expr::constant(2.0);
        let expected = Expr::raw(Node::Sqrt(Expr::raw(Node::Add(
            Expr::raw(Node::Pow(Expr::y(1, 1), two.clone())),
            Expr::raw(Node::Pow(Expr::y(1, 2), two)),
        ))));
        assert_eq!(e, expected);
    }

    #[test]
    fn precedence_and_associativity() {
        let s = space(1, 1);
        let v = |t: &str| parse(t, &s).unwrap().eval_flat(1, &[2.0, 3.0]).unwrap();
        assert_eq!(v("2^3^2"), 512.0);
        assert_eq!(v("-x1^2"), -4.0);
        assert_eq!(v("x1 - y1_1 - 1"), -2.0);
        assert_eq!(v("12 / x1 / 3"), 2.0);
        assert_eq!(v("1 + 2 * 3"), 7.0);
        assert_eq!(v("(1 + 2) * 3"), 9.0);
        assert_eq!(v("2^-1"), 0.5);
        assert_eq!(v("1.5e1"), 15.0);
    }

    #[test]
    fn errors_carry_position() {
        let s = space(2, 1);
        match parse("x1 + * 2", &s) {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse("z1 + 1", &s),
            Err(ParseError::UnknownIdentifier { .. })
        ));
        assert!(matches!(parse("sin x1", &s), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("(x1", &s), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x1 x2", &s), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("", &s), Err(ParseError::Syntax { .. })));
    }
}
