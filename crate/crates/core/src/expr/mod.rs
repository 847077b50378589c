//! Scalar expressions on the slashed tangent bundle.
//!
//! An [`Expr`] is an immutable AST over the base coordinates `x1..xn` and the
//! fiber coordinates `y1..yn`. Expressions are cheap to clone (reference
//! counted) and safe to share between threads.
//!
//! The module provides parsing ([`parse`]), exact symbolic differentiation
//! ([`diff`]), simplification to a canonical sum-of-monomials form
//! ([`simplify`]), pointwise evaluation ([`eval`]) and a tri-state zero test
//! ([`is_zero`]).

mod diff;
mod eval;
pub mod generate;
mod normal;
mod parse;
mod print;
mod sample;
mod zero;

use std::fmt;
use std::ops as std_ops;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

pub use diff::{diff, diff_unsimplified};
pub use eval::{eval, EvalError, EvalErrorKind, Point, PointError, DEFAULT_FIBER_FLOOR};
pub use parse::{parse, ParseError, ParseErrorKind};
pub use sample::{sample_points, SampleConfig, DEFAULT_SEED};
pub use zero::{is_zero, ZeroTestError, ZeroVerdict};

pub(crate) use normal::Sum;

/// Which half of the induced coordinates `(x, y)` a variable belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKind {
    /// Base coordinate `x^i`.
    Base,
    /// Fiber coordinate `y^i`.
    Fiber,
}

/// A coordinate variable. `index` is zero-based; it prints one-based (`x1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var {
    pub kind: VarKind,
    pub index: usize,
}

impl Var {
    pub const fn x(index: usize) -> Self {
        Var {
            kind: VarKind::Base,
            index,
        }
    }

    pub const fn y(index: usize) -> Self {
        Var {
            kind: VarKind::Fiber,
            index,
        }
    }

    /// Coordinate `a` of the `2n` coordinates on `TM`: `a < n` is `x^a`,
    /// otherwise `y^(a-n)`.
    pub fn coordinate(a: usize, n: usize) -> Self {
        if a < n {
            Var::x(a)
        } else {
            Var::y(a - n)
        }
    }

    /// Inverse of [`Var::coordinate`].
    pub fn slot(&self, n: usize) -> usize {
        match self.kind {
            VarKind::Base => self.index,
            VarKind::Fiber => n + self.index,
        }
    }

    pub fn is_fiber(&self) -> bool {
        self.kind == VarKind::Fiber
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VarKind::Base => write!(f, "x{}", self.index + 1),
            VarKind::Fiber => write!(f, "y{}", self.index + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Neg,
    Sqrt,
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
}

impl UnaryOp {
    pub fn name(&self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Abs => "abs",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sqrt" => UnaryOp::Sqrt,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "abs" => UnaryOp::Abs,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// One AST node.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Expr),
    Binary(BinaryOp, Expr, Expr),
    /// Integer power. General real powers go through `exp`/`log`.
    Pow(Expr, i32),
}

struct Inner {
    node: Node,
    normal: OnceLock<Arc<Sum>>,
}

/// Immutable, reference-counted expression.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.node == other.0.node
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    pub fn new(node: Node) -> Self {
        Expr(Arc::new(Inner {
            node,
            normal: OnceLock::new(),
        }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn constant(c: f64) -> Self {
        Expr::new(Node::Const(c))
    }

    pub fn zero() -> Self {
        Expr::constant(0.0)
    }

    pub fn one() -> Self {
        Expr::constant(1.0)
    }

    pub fn var(v: Var) -> Self {
        Expr::new(Node::Var(v))
    }

    pub fn x(index: usize) -> Self {
        Expr::var(Var::x(index))
    }

    pub fn y(index: usize) -> Self {
        Expr::var(Var::y(index))
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Self {
        Expr::new(Node::Unary(op, arg))
    }

    pub fn sqrt(&self) -> Self {
        Expr::unary(UnaryOp::Sqrt, self.clone())
    }

    pub fn sin(&self) -> Self {
        Expr::unary(UnaryOp::Sin, self.clone())
    }

    pub fn cos(&self) -> Self {
        Expr::unary(UnaryOp::Cos, self.clone())
    }

    pub fn exp(&self) -> Self {
        Expr::unary(UnaryOp::Exp, self.clone())
    }

    pub fn ln(&self) -> Self {
        Expr::unary(UnaryOp::Log, self.clone())
    }

    pub fn abs(&self) -> Self {
        Expr::unary(UnaryOp::Abs, self.clone())
    }

    pub fn powi(&self, k: i32) -> Self {
        Expr::new(Node::Pow(self.clone(), k))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Value of the canonical form when it is a constant.
    pub fn constant_value(&self) -> Option<f64> {
        self.normal().as_constant()
    }

    /// True for the literal constant zero (no simplification attempted).
    pub fn is_literal_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    /// Canonical form, computed once per node.
    pub(crate) fn normal(&self) -> Arc<Sum> {
        self.0
            .normal
            .get_or_init(|| Arc::new(normal::to_normal(self)))
            .clone()
    }

    pub(crate) fn from_normal(sum: Sum) -> Expr {
        let sum = Arc::new(sum);
        let e = normal::from_normal(&sum);
        let _ = e.0.normal.set(sum);
        e
    }

    /// Largest variable index (zero-based) of each kind, if any occurs.
    pub fn max_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        self.visit_vars(&mut |v| best = Some(best.map_or(v.index, |b| b.max(v.index))));
        best
    }

    /// True if any fiber variable occurs syntactically.
    pub fn depends_on_fiber(&self) -> bool {
        let mut found = false;
        self.visit_vars(&mut |v| found |= v.is_fiber());
        found
    }

    pub fn depends_on(&self, var: Var) -> bool {
        let mut found = false;
        self.visit_vars(&mut |v| found |= v == var);
        found
    }

    fn visit_vars(&self, f: &mut dyn FnMut(Var)) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(v) => f(*v),
            Node::Unary(_, a) | Node::Pow(a, _) => a.visit_vars(f),
            Node::Binary(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Unary(_, a) | Node::Pow(a, _) => 1 + a.size(),
            Node::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }
}

/// Simplified sum, product, etc. Every helper returns a canonical expression.
pub mod ops {
    use super::Expr;

    pub fn add(a: &Expr, b: &Expr) -> Expr {
        Expr::from_normal(a.normal().add(&b.normal()).reduced())
    }

    pub fn sub(a: &Expr, b: &Expr) -> Expr {
        Expr::from_normal(a.normal().add(&b.normal().scale(-1.0)).reduced())
    }

    pub fn mul(a: &Expr, b: &Expr) -> Expr {
        Expr::from_normal(a.normal().mul(&b.normal()))
    }

    pub fn div(a: &Expr, b: &Expr) -> Expr {
        Expr::from_normal(a.normal().mul(&b.normal().pow(-1)))
    }

    pub fn scale(a: &Expr, c: f64) -> Expr {
        Expr::from_normal(a.normal().scale(c))
    }

    pub fn powi(a: &Expr, k: i32) -> Expr {
        Expr::from_normal(a.normal().pow(k))
    }

    pub fn sum<'a>(terms: impl IntoIterator<Item = &'a Expr>) -> Expr {
        let mut acc = super::Sum::zero();
        for t in terms {
            acc = acc.add(&t.normal());
        }
        Expr::from_normal(acc.reduced())
    }

    /// `∂a/∂v` computed directly on the canonical form.
    pub fn partial(a: &Expr, v: super::Var) -> Expr {
        Expr::from_normal(a.normal().diff(v))
    }

    /// True when the canonical form is the zero constant.
    pub fn is_symbolic_zero(a: &Expr) -> bool {
        a.normal().is_zero()
    }
}

macro_rules! binary_impl {
    ($trait:ident, $method:ident, $op:expr) => {
        impl std_ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::new(Node::Binary($op, self, rhs))
            }
        }
        impl std_ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::new(Node::Binary($op, self.clone(), rhs.clone()))
            }
        }
        impl std_ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::new(Node::Binary($op, self, Expr::constant(rhs)))
            }
        }
    };
}

binary_impl!(Add, add, BinaryOp::Add);
binary_impl!(Sub, sub, BinaryOp::Sub);
binary_impl!(Mul, mul, BinaryOp::Mul);
binary_impl!(Div, div, BinaryOp::Div);

impl std_ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

impl std_ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self.clone())
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Self {
        Expr::var(v)
    }
}

/// Canonical simplification: constant folding, `0`/`1` identities, flattening
/// of sums and products with like-term collection, and `sqrt(u)^2 = u`.
pub fn simplify(e: &Expr) -> Expr {
    Expr::from_normal((*e.normal()).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn var_slots_round_trip() {
        for a in 0..6 {
            assert_eq!(Var::coordinate(a, 3).slot(3), a);
        }
        assert_eq!(Var::x(0).to_string(), "x1");
        assert_eq!(Var::y(2).to_string(), "y3");
    }

    #[test]
    fn simplify_cancels_like_terms() {
        let y1 = Expr::y(0);
        assert_eq!(simplify(&(&y1 - &y1)), Expr::zero());
        let e = parse("1*x2 + 0", 2).unwrap();
        assert_eq!(simplify(&e), Expr::x(1));
        let e = parse("y1*y2 - y2*y1", 2).unwrap();
        assert_eq!(simplify(&e), Expr::zero());
    }

    #[test]
    fn sqrt_squared_collapses() {
        let e = parse("sqrt(y1^2+y2^2)^2 - y1^2 - y2^2", 2).unwrap();
        assert!(ops::is_symbolic_zero(&e));
    }

    #[test]
    fn common_denominator_cancellation() {
        let e = parse("y1/sqrt(y1^2+y2^2) - y1^3/sqrt(y1^2+y2^2)^3 - y1*y2^2/sqrt(y1^2+y2^2)^3", 2);
        assert!(ops::is_symbolic_zero(&e.unwrap()));
        let e = parse("1/(1+x1^2) - x1^2/(1+x1^2) - (1-x1^2)/(1+x1^2)", 1).unwrap();
        assert!(ops::is_symbolic_zero(&e));
    }

    #[test]
    fn division_by_own_group_cancels() {
        let e = parse("x1*(y1+y2)/(x1*(y1+y2)) - 1", 2).unwrap();
        assert!(ops::is_symbolic_zero(&e));
    }
}
