use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::jet::{Jet, Layout};
use super::poly::Poly;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Position variable, zero-based.
    X(usize),
    /// Momentum variable, zero-based.
    Xi(usize),
    Const(C64),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Exp(Box<Node>),
}

/// A phase-space symbol `p(x₁..x_n, ξ₁..ξ_n)`.
///
/// Points are laid out as `w = (x₁, …, x_n, ξ₁, …, ξ_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolExpr {
    dim: usize,
    root: Node,
}

impl SymbolExpr {
    pub fn new(dim: usize, root: Node) -> Result<SymbolExpr> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        check_indices(&root, dim)?;
        Ok(SymbolExpr { dim, root })
    }

    pub fn parse(text: &str, dim: usize) -> Result<SymbolExpr> {
        super::parse::parse(text, dim)
    }

    pub fn x(dim: usize, j: usize) -> SymbolExpr {
        assert!(j < dim);
        SymbolExpr { dim, root: Node::X(j) }
    }

    pub fn xi(dim: usize, j: usize) -> SymbolExpr {
        assert!(j < dim);
        SymbolExpr { dim, root: Node::Xi(j) }
    }

    pub fn constant(dim: usize, c: C64) -> SymbolExpr {
        SymbolExpr { dim, root: Node::Const(c) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    fn binary(&self, other: &SymbolExpr, f: fn(Box<Node>, Box<Node>) -> Node) -> SymbolExpr {
        assert_eq!(self.dim, other.dim, "symbols of different dimension");
        SymbolExpr { dim: self.dim, root: f(Box::new(self.root.clone()), Box::new(other.root.clone())) }
    }

    pub fn add(&self, o: &SymbolExpr) -> SymbolExpr {
        self.binary(o, Node::Add)
    }

    pub fn sub(&self, o: &SymbolExpr) -> SymbolExpr {
        self.binary(o, Node::Sub)
    }

    pub fn mul(&self, o: &SymbolExpr) -> SymbolExpr {
        self.binary(o, Node::Mul)
    }

    pub fn div(&self, o: &SymbolExpr) -> SymbolExpr {
        self.binary(o, Node::Div)
    }

    pub fn powi(&self, k: i32) -> SymbolExpr {
        SymbolExpr { dim: self.dim, root: Node::Pow(Box::new(self.root.clone()), k) }
    }

    pub fn exp(&self) -> SymbolExpr {
        SymbolExpr { dim: self.dim, root: Node::Exp(Box::new(self.root.clone())) }
    }

    pub fn scale(&self, c: C64) -> SymbolExpr {
        SymbolExpr::constant(self.dim, c).mul(self)
    }

    pub fn shift(&self, c: C64) -> SymbolExpr {
        self.sub(&SymbolExpr::constant(self.dim, c))
    }

    /// Pointwise complex conjugate `p̄`.
    pub fn conj(&self) -> SymbolExpr {
        fn go(n: &Node) -> Node {
            match n {
                Node::X(j) => Node::X(*j),
                Node::Xi(j) => Node::Xi(*j),
                Node::Const(c) => Node::Const(c.conj()),
                Node::Neg(a) => Node::Neg(Box::new(go(a))),
                Node::Add(a, b) => Node::Add(Box::new(go(a)), Box::new(go(b))),
                Node::Sub(a, b) => Node::Sub(Box::new(go(a)), Box::new(go(b))),
                Node::Mul(a, b) => Node::Mul(Box::new(go(a)), Box::new(go(b))),
                Node::Div(a, b) => Node::Div(Box::new(go(a)), Box::new(go(b))),
                Node::Pow(a, k) => Node::Pow(Box::new(go(a)), *k),
                Node::Exp(a) => Node::Exp(Box::new(go(a))),
            }
        }
        SymbolExpr { dim: self.dim, root: go(&self.root) }
    }

    pub fn eval(&self, w: &[f64]) -> C64 {
        assert_eq!(w.len(), 2 * self.dim, "point has wrong length");
        eval_node(&self.root, w, self.dim)
    }

    /// Evaluation at split coordinates.
    pub fn eval_xxi(&self, x: &[f64], xi: &[f64]) -> C64 {
        let mut w = Vec::with_capacity(2 * self.dim);
        w.extend_from_slice(x);
        w.extend_from_slice(xi);
        self.eval(&w)
    }

    /// Taylor jet of degree `degree` at `w`.
    pub fn eval_jet(&self, w: &[f64], degree: usize) -> Result<Jet> {
        let layout = Layout::new(2 * self.dim, degree);
        self.eval_jet_with(&layout, w)
    }

    pub fn eval_jet_with(&self, layout: &Arc<Layout>, w: &[f64]) -> Result<Jet> {
        if w.len() != 2 * self.dim || layout.nvars() != 2 * self.dim {
            return Err(Error::InvalidInput("point and layout must have 2n coordinates".into()));
        }
        let base: Arc<[f64]> = Arc::from(w.to_vec());
        let j = jet_node(&self.root, layout, &base, self.dim)?;
        if !j.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(j)
    }

    fn mentions(&self, pred: &dyn Fn(&Node) -> bool) -> bool {
        fn go(n: &Node, pred: &dyn Fn(&Node) -> bool) -> bool {
            if pred(n) {
                return true;
            }
            match n {
                Node::X(_) | Node::Xi(_) | Node::Const(_) => false,
                Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) => go(a, pred),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    go(a, pred) || go(b, pred)
                }
            }
        }
        go(&self.root, pred)
    }

    pub fn depends_on_xi(&self) -> bool {
        self.mentions(&|n| matches!(n, Node::Xi(_)))
    }

    pub fn depends_on_x(&self) -> bool {
        self.mentions(&|n| matches!(n, Node::X(_)))
    }

    /// True when the symbol is a polynomial in the momentum variables
    /// (coefficients may be arbitrary functions of x).
    pub fn is_polynomial_in_xi(&self) -> bool {
        fn has_xi(n: &Node) -> bool {
            match n {
                Node::Xi(_) => true,
                Node::X(_) | Node::Const(_) => false,
                Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) => has_xi(a),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    has_xi(a) || has_xi(b)
                }
            }
        }
        fn go(n: &Node) -> bool {
            match n {
                Node::X(_) | Node::Xi(_) | Node::Const(_) => true,
                Node::Neg(a) => go(a),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => go(a) && go(b),
                Node::Div(a, b) => go(a) && !has_xi(b),
                Node::Pow(a, k) => *k >= 0 && go(a) || !has_xi(a),
                Node::Exp(a) => !has_xi(a),
            }
        }
        go(&self.root)
    }

    /// Expands the symbol into a polynomial when it is one.
    pub fn to_poly(&self) -> Option<Poly<C64>> {
        poly_node(&self.root, self.dim)
    }
}

fn check_indices(n: &Node, dim: usize) -> Result<()> {
    match n {
        Node::X(j) | Node::Xi(j) => {
            if *j >= dim {
                Err(Error::VariableOutOfRange { index: j + 1, dim })
            } else {
                Ok(())
            }
        }
        Node::Const(_) => Ok(()),
        Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) => check_indices(a, dim),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            check_indices(a, dim)?;
            check_indices(b, dim)
        }
    }
}

fn eval_node(n: &Node, w: &[f64], dim: usize) -> C64 {
    match n {
        Node::X(j) => C64::new(w[*j], 0.0),
        Node::Xi(j) => C64::new(w[dim + *j], 0.0),
        Node::Const(c) => *c,
        Node::Neg(a) => -eval_node(a, w, dim),
        Node::Add(a, b) => eval_node(a, w, dim) + eval_node(b, w, dim),
        Node::Sub(a, b) => eval_node(a, w, dim) - eval_node(b, w, dim),
        Node::Mul(a, b) => eval_node(a, w, dim) * eval_node(b, w, dim),
        Node::Div(a, b) => eval_node(a, w, dim) / eval_node(b, w, dim),
        Node::Pow(a, k) => eval_node(a, w, dim).powi(*k),
        Node::Exp(a) => eval_node(a, w, dim).exp(),
    }
}

fn jet_node(n: &Node, l: &Arc<Layout>, base: &Arc<[f64]>, dim: usize) -> Result<Jet> {
    Ok(match n {
        Node::X(j) => Jet::variable(l, base, *j),
        Node::Xi(j) => Jet::variable(l, base, dim + *j),
        Node::Const(c) => Jet::constant(l, base, *c),
        Node::Neg(a) => jet_node(a, l, base, dim)?.scale(C64::new(-1.0, 0.0)),
        Node::Add(a, b) => jet_node(a, l, base, dim)?.add(&jet_node(b, l, base, dim)?),
        Node::Sub(a, b) => jet_node(a, l, base, dim)?.sub(&jet_node(b, l, base, dim)?),
        Node::Mul(a, b) => jet_node(a, l, base, dim)?.mul(&jet_node(b, l, base, dim)?),
        Node::Div(a, b) => jet_node(a, l, base, dim)?.div(&jet_node(b, l, base, dim)?)?,
        Node::Pow(a, k) => jet_node(a, l, base, dim)?.powi(*k)?,
        Node::Exp(a) => jet_node(a, l, base, dim)?.exp(),
    })
}

fn poly_node(n: &Node, dim: usize) -> Option<Poly<C64>> {
    Some(match n {
        Node::X(j) => Poly::variable(2 * dim, *j),
        Node::Xi(j) => Poly::variable(2 * dim, dim + *j),
        Node::Const(c) => Poly::constant(2 * dim, *c),
        Node::Neg(a) => poly_node(a, dim)?.scale(C64::new(-1.0, 0.0)),
        Node::Add(a, b) => poly_node(a, dim)?.add(&poly_node(b, dim)?),
        Node::Sub(a, b) => poly_node(a, dim)?.sub(&poly_node(b, dim)?),
        Node::Mul(a, b) => poly_node(a, dim)?.mul(&poly_node(b, dim)?),
        Node::Div(a, b) => {
            let d = poly_node(b, dim)?;
            let c = d.as_constant()?;
            if c.norm() == 0.0 {
                return None;
            }
            poly_node(a, dim)?.scale(1.0 / c)
        }
        Node::Pow(a, k) => {
            if *k < 0 {
                return None;
            }
            let base = poly_node(a, dim)?;
            let mut r = Poly::constant(2 * dim, C64::new(1.0, 0.0));
            for _ in 0..*k {
                r = r.mul(&base);
            }
            r
        }
        Node::Exp(a) => {
            let c = poly_node(a, dim)?.as_constant()?;
            Poly::constant(2 * dim, c.exp())
        }
    })
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_node(n: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match n {
        Node::X(j) => write!(f, "x{}", j + 1),
        Node::Xi(j) => write!(f, "xi{}", j + 1),
        Node::Const(c) => {
            if c.im == 0.0 && c.re >= 0.0 && c.re.is_sign_positive() {
                write!(f, "{}", fmt_f64(c.re))
            } else {
                let sign = if c.im.is_sign_negative() { '-' } else { '+' };
                write!(f, "({}{}{}i)", fmt_f64(c.re), sign, fmt_f64(c.im.abs()))
            }
        }
        Node::Neg(a) => {
            write!(f, "(-")?;
            fmt_node(a, f)?;
            write!(f, ")")
        }
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            let op = match n {
                Node::Add(..) => " + ",
                Node::Sub(..) => " - ",
                Node::Mul(..) => "*",
                _ => "/",
            };
            write!(f, "(")?;
            fmt_node(a, f)?;
            write!(f, "{op}")?;
            fmt_node(b, f)?;
            write!(f, ")")
        }
        Node::Pow(a, k) => {
            write!(f, "(")?;
            fmt_node(a, f)?;
            write!(f, ")^{k}")
        }
        Node::Exp(a) => {
            write!(f, "exp(")?;
            fmt_node(a, f)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(&self.root, f)
    }
}
