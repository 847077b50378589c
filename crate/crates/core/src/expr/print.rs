use std::fmt;

use super::{BinaryOp, Expr, Node, UnaryOp};

// Binding strength of the printed form. Higher binds tighter.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const NEGATION: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn level(e: &Expr) -> u8 {
    match e.node() {
        Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => NEGATION,
        Node::Const(_) | Node::Var(_) => ATOM,
        Node::Unary(UnaryOp::Neg, _) => NEGATION,
        Node::Unary(..) => ATOM,
        Node::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => SUM,
        Node::Binary(..) => PRODUCT,
        Node::Pow(..) => POWER,
    }
}

fn operand(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if level(e) >= min {
        write!(f, "{e}")
    } else {
        write!(f, "({e})")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(v) => write!(f, "{v}"),
            Node::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                operand(f, a, ATOM)
            }
            Node::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Node::Binary(op, a, b) => {
                let (sym, lhs, rhs) = match op {
                    BinaryOp::Add => (" + ", SUM, PRODUCT),
                    BinaryOp::Sub => (" - ", SUM, PRODUCT),
                    BinaryOp::Mul => ("*", PRODUCT, POWER),
                    BinaryOp::Div => ("/", PRODUCT, POWER),
                };
                operand(f, a, lhs)?;
                f.write_str(sym)?;
                if level(b) == NEGATION {
                    write!(f, "({b})")
                } else {
                    operand(f, b, rhs)
                }
            }
            Node::Pow(a, k) => {
                operand(f, a, ATOM)?;
                write!(f, "^{k}")
            }
        }
    }
}
