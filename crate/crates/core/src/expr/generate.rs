//! Seeded random expressions for property tests.

use rand::Rng;

use super::{eval, BinaryOp, Expr, Node, Point, UnaryOp, Var};

#[derive(Clone, Copy, Debug)]
pub struct GeneratorConfig {
    pub dim: usize,
    pub max_depth: usize,
}

/// Random AST over `x1..xn, y1..yn`. Constants are multiples of `1/4` in
/// `(0, 3]`. Denominators, bases of negative powers and arguments of `sqrt`
/// and `log` have the form `u^2 + 1/2`, so only `abs` can be non-smooth.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, cfg: GeneratorConfig) -> Expr {
    gen(rng, cfg.dim, cfg.max_depth)
}

fn leaf<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Expr {
    match rng.random_range(0..5) {
        0 => Expr::constant(f64::from(rng.random_range(1..=12)) / 4.0),
        1 | 2 => Expr::x(rng.random_range(0..n)),
        _ => Expr::y(rng.random_range(0..n)),
    }
}

fn positive(e: Expr) -> Expr {
    e.powi(2) + Expr::constant(0.5)
}

fn gen<R: Rng + ?Sized>(rng: &mut R, n: usize, depth: usize) -> Expr {
    if depth == 0 || rng.random_bool(0.2) {
        return leaf(rng, n);
    }
    let d = depth - 1;
    match rng.random_range(0..14) {
        0 | 1 => gen(rng, n, d) + gen(rng, n, d),
        2 => gen(rng, n, d) - gen(rng, n, d),
        3 | 4 => gen(rng, n, d) * gen(rng, n, d),
        5 => {
            let num = gen(rng, n, d);
            num / positive(gen(rng, n, d))
        }
        6 => {
            let k = [-2, -1, 2, 3][rng.random_range(0..4)];
            let base = gen(rng, n, d);
            if k < 0 { positive(base) } else { base }.powi(k)
        }
        7 => -gen(rng, n, d),
        8 => gen(rng, n, d).sin(),
        9 => gen(rng, n, d).cos(),
        10 => Expr::unary(UnaryOp::Exp, gen(rng, n, d).sin()),
        11 => positive(gen(rng, n, d)).sqrt(),
        12 => positive(gen(rng, n, d)).ln(),
        _ => gen(rng, n, d).abs(),
    }
}

/// True when `p` is at least `margin` away from every singular set the AST
/// contains: zero arguments of `abs`, `sqrt`, `log`, zero denominators and
/// zero bases of negative powers.
pub fn smooth_at(e: &Expr, p: &Point, margin: f64) -> bool {
    let ok = |a: &Expr| eval(a, p).is_ok_and(|v| v.is_finite());
    let away = |a: &Expr, positive: bool| {
        eval(a, p).is_ok_and(|v| if positive { v > margin } else { v.abs() > margin })
    };
    let here = match e.node() {
        Node::Const(_) | Node::Var(_) => true,
        Node::Unary(UnaryOp::Abs, a) => away(a, false),
        Node::Unary(UnaryOp::Sqrt | UnaryOp::Log, a) => away(a, true),
        Node::Unary(_, _) => true,
        Node::Binary(BinaryOp::Div, _, b) => away(b, false),
        Node::Binary(..) => true,
        Node::Pow(a, k) if *k < 0 => away(a, false),
        Node::Pow(..) => true,
    };
    here && ok(e)
        && match e.node() {
            Node::Const(_) | Node::Var(_) => true,
            Node::Unary(_, a) | Node::Pow(a, _) => smooth_at(a, p, margin),
            Node::Binary(_, a, b) => smooth_at(a, p, margin) && smooth_at(b, p, margin),
        }
}

/// Every variable of dimension `n`, base coordinates first.
pub fn all_vars(n: usize) -> Vec<Var> {
    (0..2 * n).map(|a| Var::coordinate(a, n)).collect()
}

/// Five-point central difference
/// `(−f(+2h) + 8f(+h) − 8f(−h) + f(−2h)) / 12h` along `v`, with
/// `h = 1e-5 (|p_v| + 1)`.
pub fn central_difference(e: &Expr, v: Var, p: &Point) -> Option<f64> {
    let c = p.get(v)?;
    let h = 1e-5 * (c.abs() + 1.0);
    let shifted = |delta: f64| {
        let mut q = p.clone();
        let slot = if v.is_fiber() { &mut q.y } else { &mut q.x };
        slot[v.index] = c + delta;
        eval(e, &q).ok()
    };
    let (a, b, c, d) = (shifted(2.0 * h)?, shifted(h)?, shifted(-h)?, shifted(-2.0 * h)?);
    Some((-a + 8.0 * b - 8.0 * c + d) / (12.0 * h))
}
