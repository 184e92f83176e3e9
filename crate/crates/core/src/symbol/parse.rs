//! Recursive-descent parser for the symbol grammar.
//!
//! ```text
//! expr    = term { ("+" | "-") term }
//! term    = unary { ("*" | "/") unary }
//! unary   = ("-" | "+") unary | power
//! power   = atom [ "^" ["-" | "+"] integer ]
//! atom    = number | imaginary | "x" index | "xi" index
//!         | "exp" "(" expr ")" | "(" expr ")"
//! imaginary = [number] "i"
//! ```
//!
//! Indices are one-based. `-x1^2` parses as `-(x1^2)`.

use num_complex::Complex64 as C64;

use super::expr::{Node, SymbolExpr};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Real(f64),
    Imag(f64),
    Int(i64),
    X(usize),
    Xi(usize),
    Exp,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((start, t));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            let mut is_int = true;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            if i < b.len() && b[i] == b'.' {
                is_int = false;
                i += 1;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    is_int = false;
                    i = j;
                    while i < b.len() && b[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s = &text[start..i];
            let v: f64 = s.parse().map_err(|_| syntax(start, format!("bad number '{s}'")))?;
            let imag = i < b.len() && b[i] == b'i' && !(i + 1 < b.len() && b[i + 1].is_ascii_alphanumeric());
            if imag {
                i += 1;
                out.push((start, Tok::Imag(v)));
            } else if is_int {
                let k: i64 = s.parse().map_err(|_| syntax(start, format!("integer too large '{s}'")))?;
                out.push((start, Tok::Int(k)));
            } else {
                out.push((start, Tok::Real(v)));
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            while i < b.len() && b[i].is_ascii_alphabetic() {
                i += 1;
            }
            let word = &text[start..i];
            let ds = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let digits = &text[ds..i];
            let tok = match (word, digits.is_empty()) {
                ("exp", true) => Tok::Exp,
                ("i", true) => Tok::Imag(1.0),
                ("x", false) | ("xi", false) => {
                    let k: usize = digits.parse().map_err(|_| syntax(ds, "bad variable index"))?;
                    if k == 0 {
                        return Err(syntax(ds, "variable indices start at 1"));
                    }
                    if word == "x" {
                        Tok::X(k - 1)
                    } else {
                        Tok::Xi(k - 1)
                    }
                }
                _ => return Err(syntax(start, format!("unknown identifier '{}'", &text[start..i]))),
            };
            out.push((start, tok));
            continue;
        }
        return Err(syntax(start, format!("unexpected character '{}'", c as char)));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.bump();
        let mut sign = 1i64;
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                sign = -1;
            }
            Some(Tok::Plus) => {
                self.bump();
            }
            _ => {}
        }
        let at = self.here();
        match self.bump() {
            Some(Tok::Int(k)) => {
                let k = i32::try_from(sign * k).map_err(|_| syntax(at, "exponent too large"))?;
                Ok(Node::Pow(Box::new(base), k))
            }
            _ => Err(syntax(at, "expected integer exponent")),
        }
    }

    fn atom(&mut self) -> Result<Node> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Int(k)) => Ok(Node::Const(C64::new(k as f64, 0.0))),
            Some(Tok::Real(v)) => Ok(Node::Const(C64::new(v, 0.0))),
            Some(Tok::Imag(v)) => Ok(Node::Const(C64::new(0.0, v))),
            Some(Tok::X(j)) => {
                if j >= self.dim {
                    Err(Error::VariableOutOfRange { index: j + 1, dim: self.dim })
                } else {
                    Ok(Node::X(j))
                }
            }
            Some(Tok::Xi(j)) => {
                if j >= self.dim {
                    Err(Error::VariableOutOfRange { index: j + 1, dim: self.dim })
                } else {
                    Ok(Node::Xi(j))
                }
            }
            Some(Tok::Exp) => {
                let p = self.here();
                if self.bump() != Some(Tok::LParen) {
                    return Err(syntax(p, "expected '(' after exp"));
                }
                let inner = self.expr()?;
                let p = self.here();
                if self.bump() != Some(Tok::RParen) {
                    return Err(syntax(p, "expected ')'"));
                }
                Ok(Node::Exp(Box::new(inner)))
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                let p = self.here();
                if self.bump() != Some(Tok::RParen) {
                    return Err(syntax(p, "expected ')'"));
                }
                Ok(inner)
            }
            Some(t) => Err(syntax(at, format!("unexpected token {t:?}"))),
            None => Err(syntax(at, "unexpected end of input")),
        }
    }
}

pub fn parse(text: &str, dim: usize) -> Result<SymbolExpr> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), dim };
    let root = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(syntax(p.here(), "trailing input"));
    }
    SymbolExpr::new(dim, root)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, w: &[f64]) -> C64 {
        parse(s, w.len() / 2).unwrap().eval(w)
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("-x1^2", &[3.0, 0.0]), C64::new(-9.0, 0.0));
        assert_eq!(ev("2*x1+1", &[3.0, 0.0]), C64::new(7.0, 0.0));
        assert_eq!(ev("x1^-1", &[4.0, 0.0]), C64::new(0.25, 0.0));
        assert_eq!(ev("1e-1*x1", &[10.0, 0.0]), C64::new(1.0, 0.0));
        assert_eq!(ev("2i*i", &[0.0, 0.0]), C64::new(-2.0, 0.0));
    }

    #[test]
    fn errors_carry_positions() {
        match parse("x1 + * 2", 1) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("x2", 1), Err(Error::VariableOutOfRange { index: 2, dim: 1 })));
        assert!(parse("x1^1.5", 1).is_err());
        assert!(parse("(x1", 1).is_err());
        assert!(parse("sin(x1)", 1).is_err());
    }
}
