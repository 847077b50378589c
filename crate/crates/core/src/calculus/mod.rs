//! Exterior and Frölicher–Nijenhuis calculus on `TM∖{0}` with symbolic
//! coefficients.
//!
//! Forms live over the natural coframe `{dx, dy}`. The inner product of a
//! vector-valued form `L = Σ_a ∂_a ⊗ L^a` is the algebraic derivation
//! `i_L ω = Σ_a L^a ∧ i_{∂_a} ω`, which agrees with the alternating operator
//! `(1/(k! l!)) Σ_σ ε(σ) ω(L(X_σ..), X_σ..)` and gives `i_Id ω = k ω`.

mod form;
mod vector;

use thiserror::Error;

pub use form::{slot_name, ScalarForm};
pub use vector::VectorValuedForm;

use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalculusError {
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// `i_X ω` for a vector field `X`.
pub fn interior_field(x: &VectorValuedForm, w: &ScalarForm) -> ScalarForm {
    x.assert_field();
    if w.degree() == 0 {
        return ScalarForm::zero(w.dim(), 0);
    }
    let mut out = ScalarForm::zero(w.dim(), w.degree() - 1);
    for (a, p) in x.parts().iter().enumerate() {
        let c = p.as_function();
        if c.is_literal_zero() {
            continue;
        }
        out = out.add(&w.interior(a).mul_fn(&c));
    }
    out
}

/// Inner product `i_L ω`, of degree `k + l − 1`. Trivial (zero) on functions.
pub fn inner_product(l: &VectorValuedForm, w: &ScalarForm) -> ScalarForm {
    let n = w.dim();
    if w.degree() == 0 {
        return ScalarForm::zero(n, l.degree().saturating_sub(1));
    }
    if l.degree() == 0 {
        return interior_field(l, w);
    }
    let mut out = ScalarForm::zero(n, w.degree() + l.degree() - 1);
    for (a, p) in l.parts().iter().enumerate() {
        if p.is_symbolic_zero() {
            continue;
        }
        let iw = w.interior(a);
        if iw.is_symbolic_zero() {
            continue;
        }
        out = out.add(&p.wedge(&iw));
    }
    out
}

/// `i_L K`, applied to every part of `K`. For a vector field `S` and the
/// curvature `R` this is `i_S R`; for 1-forms `L`, `i_K L = L ∘ K`.
pub fn inner_product_vv(l: &VectorValuedForm, k: &VectorValuedForm) -> VectorValuedForm {
    k.map(|p| inner_product(l, p))
}

/// `L ∘ K` for a vector-valued 1-form `L`.
pub fn compose(l: &VectorValuedForm, k: &VectorValuedForm) -> VectorValuedForm {
    assert_eq!(l.degree(), 1, "compose needs a vector-valued 1-form on the left");
    l.map(|p| inner_product(k, p))
}

pub fn exterior_d(w: &ScalarForm) -> ScalarForm {
    w.d()
}

/// `d_L ω = i_L dω + (−1)^l d i_L ω`.
pub fn lie_type_derivative(l: &VectorValuedForm, w: &ScalarForm) -> ScalarForm {
    let first = inner_product(l, &w.d());
    if w.degree() == 0 {
        return first;
    }
    let second = inner_product(l, w).d();
    if l.degree().is_multiple_of(2) {
        first.add(&second)
    } else {
        first.sub(&second)
    }
}

/// Lie derivative along a vector field, `L_X = i_X d + d i_X`.
pub fn lie_derivative(x: &VectorValuedForm, w: &ScalarForm) -> ScalarForm {
    x.assert_field();
    lie_type_derivative(x, w)
}

/// Frölicher–Nijenhuis bracket. The coefficient of `∂_a` is
/// `(d_L d_K − (−1)^{kl} d_K d_L) z^a = d_L K^a − (−1)^{kl} d_K L^a`.
pub fn fn_bracket(l: &VectorValuedForm, k: &VectorValuedForm) -> VectorValuedForm {
    assert_eq!(l.dim(), k.dim(), "dimension mismatch");
    let n = l.dim();
    let degree = l.degree() + k.degree();
    assert!(degree <= 2 * n, "bracket degree exceeds 2n");
    let odd = (l.degree() * k.degree()) % 2 == 1;
    let parts = (0..2 * n)
        .map(|a| {
            let lk = lie_type_derivative(l, k.part(a));
            let kl = lie_type_derivative(k, l.part(a));
            if odd {
                lk.add(&kl)
            } else {
                lk.sub(&kl)
            }
        })
        .collect();
    VectorValuedForm::from_parts(parts)
}

/// Structured vector-valued forms built from scalar data.
#[derive(Clone, Copy, Debug)]
pub enum Combination<'a> {
    /// `α ∧ J`.
    WedgeJ(&'a ScalarForm),
    /// `β ⊗ ℂ`.
    TensorLiouville(&'a ScalarForm),
    /// `α ∧ J + β ⊗ ℂ`; `β` has degree one more than `α`.
    Curvature {
        alpha: &'a ScalarForm,
        beta: &'a ScalarForm,
    },
    /// `λ J + η ⊗ ℂ` with `η` a 1-form.
    Isotropic {
        lambda: &'a Expr,
        eta: &'a ScalarForm,
    },
}

pub fn build_combination(c: Combination<'_>) -> Result<VectorValuedForm, CalculusError> {
    match c {
        Combination::WedgeJ(alpha) => {
            let n = alpha.dim();
            let j = VectorValuedForm::vertical_endomorphism(n);
            Ok(j.map(|p| alpha.wedge(p)))
        }
        Combination::TensorLiouville(beta) => {
            let n = beta.dim();
            let mut parts = vec![ScalarForm::zero(n, beta.degree()); 2 * n];
            for i in 0..n {
                parts[n + i] = beta.mul_fn(&Expr::y(i));
            }
            Ok(VectorValuedForm::from_parts(parts))
        }
        Combination::Curvature { alpha, beta } => {
            if alpha.dim() != beta.dim() {
                return Err(CalculusError::DimensionMismatch(alpha.dim(), beta.dim()));
            }
            if beta.degree() != alpha.degree() + 1 {
                return Err(CalculusError::DegreeMismatch {
                    expected: alpha.degree() + 1,
                    found: beta.degree(),
                });
            }
            Ok(build_combination(Combination::WedgeJ(alpha))?
                .add(&build_combination(Combination::TensorLiouville(beta))?))
        }
        Combination::Isotropic { lambda, eta } => {
            if eta.degree() != 1 {
                return Err(CalculusError::DegreeMismatch {
                    expected: 1,
                    found: eta.degree(),
                });
            }
            let n = eta.dim();
            let j = VectorValuedForm::vertical_endomorphism(n).mul_fn(lambda);
            Ok(j.add(&build_combination(Combination::TensorLiouville(eta))?))
        }
    }
}

/// Components of `ω` relative to a frame `{f_1..f_2n}` of vector fields:
/// the coefficient of the dual coframe monomial `φ^I` is `ω(f_{i1}, ..., f_{ik})`.
pub fn components_in_frame(w: &ScalarForm, frame: &[VectorValuedForm]) -> ScalarForm {
    let n = w.dim();
    assert_eq!(frame.len(), 2 * n, "frame needs 2n vector fields");
    let k = w.degree();
    let mut terms = Vec::new();
    for idx in increasing_indices(2 * n, k) {
        let mut v = w.clone();
        for &i in &idx {
            v = interior_field(&frame[i], &v);
        }
        terms.push((idx, v.as_function()));
    }
    ScalarForm::from_terms(n, k, terms)
}

/// All strictly increasing `k`-tuples from `0..m`.
pub fn increasing_indices(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for a in start..m {
            cur.push(a);
            rec(a + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests;
