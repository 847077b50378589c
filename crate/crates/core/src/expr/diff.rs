use super::{BinaryOp, Expr, Node, UnaryOp, Var};

/// Exact partial derivative `∂e/∂v`, returned in canonical form.
pub fn diff(e: &Expr, v: Var) -> Expr {
    Expr::from_normal(e.normal().diff(v))
}

/// Textbook derivative rules applied to the raw AST, without simplification.
///
/// Kept as an independent path to [`diff`]; the two must agree numerically.
pub fn diff_unsimplified(e: &Expr, v: Var) -> Expr {
    match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Unary(op, a) => {
            let da = diff_unsimplified(a, v);
            match op {
                UnaryOp::Neg => -da,
                UnaryOp::Sqrt => da / (Expr::constant(2.0) * a.sqrt()),
                UnaryOp::Sin => a.cos() * da,
                UnaryOp::Cos => -(a.sin() * da),
                UnaryOp::Exp => a.exp() * da,
                UnaryOp::Log => da / a.clone(),
                // sign(a); undefined at a = 0
                UnaryOp::Abs => a.clone() / a.abs() * da,
            }
        }
        Node::Binary(op, a, b) => {
            let (da, db) = (diff_unsimplified(a, v), diff_unsimplified(b, v));
            match op {
                BinaryOp::Add => da + db,
                BinaryOp::Sub => da - db,
                BinaryOp::Mul => da * b.clone() + a.clone() * db,
                BinaryOp::Div => (da * b.clone() - a.clone() * db) / b.powi(2),
            }
        }
        Node::Pow(a, k) => {
            let da = diff_unsimplified(a, v);
            match k {
                0 => Expr::zero(),
                1 => da,
                _ => Expr::constant(f64::from(*k)) * a.powi(k - 1) * da,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval, ops, parse, Point};

    fn same(a: &Expr, b: &str, n: usize) {
        let b = parse(b, n).unwrap();
        assert!(ops::is_symbolic_zero(&ops::sub(a, &b)), "{a} != {b}");
    }

    #[test]
    fn polynomial_rule() {
        let e = parse("(y1^2+y2^2)/2", 2).unwrap();
        same(&diff(&e, Var::y(0)), "y1", 2);
        let e = parse("2*y1*y2", 2).unwrap();
        same(&diff(&e, Var::y(1)), "2*y1", 2);
    }

    #[test]
    fn euclidean_norm_gradient() {
        let e = parse("sqrt(y1^2+y2^2)", 2).unwrap();
        same(&diff(&e, Var::y(0)), "y1/sqrt(y1^2+y2^2)", 2);
    }

    #[test]
    fn raw_and_canonical_paths_agree() {
        let e = parse("sin(x1*y2)/sqrt(y1^2+y2^2) + log(1+x2^2)*y1^3", 2).unwrap();
        let p = Point::new(vec![0.3, -0.7], vec![1.1, 0.4]).unwrap();
        for v in [Var::x(0), Var::x(1), Var::y(0), Var::y(1)] {
            let a = eval(&diff(&e, v), &p).unwrap();
            let b = eval(&diff_unsimplified(&e, v), &p).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }
}
