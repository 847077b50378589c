use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{BinaryOp, Expr, Node, UnaryOp, Var, VarKind};

/// Smallest admissible `|y|` for a [`Point`].
pub const DEFAULT_FIBER_FLOOR: f64 = 1e-6;

/// A point `(x, y)` of the slashed tangent bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum PointError {
    #[error("x has {x} components but y has {y}")]
    DimensionMismatch { x: usize, y: usize },
    #[error("|y| = {norm:e} is below the fiber floor {floor:e}")]
    FiberTooSmall { norm: f64, floor: f64 },
    #[error("non-finite coordinate")]
    NonFinite,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, PointError> {
        Self::with_floor(x, y, DEFAULT_FIBER_FLOOR)
    }

    pub fn with_floor(x: Vec<f64>, y: Vec<f64>, floor: f64) -> Result<Self, PointError> {
        if x.len() != y.len() {
            return Err(PointError::DimensionMismatch {
                x: x.len(),
                y: y.len(),
            });
        }
        if x.iter().chain(&y).any(|c| !c.is_finite()) {
            return Err(PointError::NonFinite);
        }
        let norm = y.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < floor {
            return Err(PointError::FiberTooSmall { norm, floor });
        }
        Ok(Point { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        match v.kind {
            VarKind::Base => self.x.get(v.index).copied(),
            VarKind::Fiber => self.y.get(v.index).copied(),
        }
    }

    pub fn y_norm(&self) -> f64 {
        self.y.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Same base point, fiber scaled by `c`.
    pub fn scale_fiber(&self, c: f64) -> Point {
        Point {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v * c).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EvalErrorKind {
    DivisionByZero,
    LogNonPositive,
    SqrtNegative,
    NonFinite,
    VariableOutOfRange,
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{kind:?} in `{subexpr}` at x={:?}, y={:?}", .point.x, .point.y)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub subexpr: String,
    pub point: Point,
}

/// Evaluate `e` at `p`.
pub fn eval(e: &Expr, p: &Point) -> Result<f64, EvalError> {
    let fail = |kind, sub: &Expr| EvalError {
        kind,
        subexpr: sub.to_string(),
        point: p.clone(),
    };
    let value = match e.node() {
        Node::Const(c) => *c,
        Node::Var(v) => p
            .get(*v)
            .ok_or_else(|| fail(EvalErrorKind::VariableOutOfRange, e))?,
        Node::Unary(op, a) => {
            let u = eval(a, p)?;
            match op {
                UnaryOp::Neg => -u,
                UnaryOp::Sqrt if u < 0.0 => return Err(fail(EvalErrorKind::SqrtNegative, e)),
                UnaryOp::Sqrt => u.sqrt(),
                UnaryOp::Sin => u.sin(),
                UnaryOp::Cos => u.cos(),
                UnaryOp::Exp => u.exp(),
                UnaryOp::Log if u <= 0.0 => return Err(fail(EvalErrorKind::LogNonPositive, e)),
                UnaryOp::Log => u.ln(),
                UnaryOp::Abs => u.abs(),
            }
        }
        Node::Binary(op, a, b) => {
            let (u, w) = (eval(a, p)?, eval(b, p)?);
            match op {
                BinaryOp::Add => u + w,
                BinaryOp::Sub => u - w,
                BinaryOp::Mul => u * w,
                BinaryOp::Div if w == 0.0 => return Err(fail(EvalErrorKind::DivisionByZero, e)),
                BinaryOp::Div => u / w,
            }
        }
        Node::Pow(a, k) => {
            let u = eval(a, p)?;
            if u == 0.0 && *k < 0 {
                return Err(fail(EvalErrorKind::DivisionByZero, e));
            }
            u.powi(*k)
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(fail(EvalErrorKind::NonFinite, e))
    }
}
