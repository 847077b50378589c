use serde::Serialize;

use super::Spray;
use crate::calculus::{compose, fn_bracket, inner_product_vv, VectorValuedForm};
use crate::expr::{is_zero, ops, Expr, Point, ZeroTestError, ZeroVerdict};

pub const IDENTITY_NAMES: [&str; 13] = [
    "N y = 2G",
    "h = (Id - [S,J])/2",
    "h^2 = h",
    "[J,J] = 0",
    "[J,h] = 0",
    "[C,h] = 0",
    "R = [h,h]/2",
    "[C,R] = 0",
    "Phi = i_S R",
    "Phi y = 0",
    "[J,Phi] = 3R",
    "[C,Phi] = Phi",
    "Phi = v o [S,h]",
];

/// One structural identity, stated as `lhs − rhs = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub verdict: ZeroVerdict,
}

fn scalars(list: &[Expr], samples: &[Point], tol: f64) -> Result<ZeroVerdict, ZeroTestError> {
    let mut out = Vec::with_capacity(list.len());
    for e in list {
        out.push(is_zero(e, samples, tol)?);
    }
    Ok(ZeroVerdict::combine(out))
}

impl Spray {
    /// Evaluate every identity in [`IDENTITY_NAMES`] over `samples`.
    pub fn identities(&self, samples: &[Point], tol: f64) -> Result<Vec<IdentityCheck>, ZeroTestError> {
        let names = IDENTITY_NAMES;
        let mut out = Vec::with_capacity(names.len());
        let mut push = |i: usize, v: ZeroVerdict| out.push(IdentityCheck { name: names[i], verdict: v });

        let n = self.n;
        let conn = self.connection();
        let euler: Vec<Expr> = (0..n)
            .map(|i| {
                let t: Vec<Expr> = (0..n).map(|j| ops::mul(&conn.coeffs[i][j], &Expr::y(j))).collect();
                ops::sub(&ops::sum(t.iter()), &ops::scale(&self.g[i], 2.0))
            })
            .collect();
        push(0, scalars(&euler, samples, tol)?);

        let s = self.vector_field();
        let j = VectorValuedForm::vertical_endomorphism(n);
        let c = VectorValuedForm::liouville(n);
        let (h, v) = self.projectors();
        push(1, h.sub(&self.horizontal_from_bracket()).verdict(samples, tol)?);
        push(2, compose(&h, &h).sub(&h).verdict(samples, tol)?);
        push(3, fn_bracket(&j, &j).verdict(samples, tol)?);
        push(4, fn_bracket(&j, &h).verdict(samples, tol)?);
        push(5, fn_bracket(&c, &h).verdict(samples, tol)?);

        let r = self.curvature().as_form();
        push(6, fn_bracket(&h, &h).scale(0.5).sub(&r).verdict(samples, tol)?);
        push(7, fn_bracket(&c, &r).verdict(samples, tol)?);

        let phi = self.jacobi().as_form();
        push(8, inner_product_vv(&s, &r).sub(&phi).verdict(samples, tol)?);
        let rj = self.jacobi().components();
        let contracted: Vec<Expr> = (0..n)
            .map(|i| {
                let t: Vec<Expr> = (0..n).map(|k| ops::mul(&rj[i][k], &Expr::y(k))).collect();
                ops::sum(t.iter())
            })
            .collect();
        push(9, scalars(&contracted, samples, tol)?);
        push(10, fn_bracket(&j, &phi).sub(&r.scale(3.0)).verdict(samples, tol)?);
        push(11, fn_bracket(&c, &phi).sub(&phi).verdict(samples, tol)?);
        push(12, compose(&v, &fn_bracket(&s, &h)).sub(&phi).verdict(samples, tol)?);
        Ok(out)
    }
}
