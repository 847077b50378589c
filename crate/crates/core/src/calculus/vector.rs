use std::fmt;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use super::form::{slot_name, Components, ScalarForm};
use crate::expr::{ops, Expr, Point, Var, ZeroTestError, ZeroVerdict};

/// A vector-valued `l`-form `L = Σ_a ∂_a ⊗ L^a`, stored as the `2n` scalar
/// `l`-forms `L^a`, one per frame vector `∂/∂x^1..∂/∂x^n, ∂/∂y^1..∂/∂y^n`.
///
/// Degree 0 gives vector fields.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorValuedForm {
    n: usize,
    degree: usize,
    parts: Vec<ScalarForm>,
}

impl VectorValuedForm {
    pub fn zero(n: usize, degree: usize) -> Self {
        VectorValuedForm {
            n,
            degree,
            parts: vec![ScalarForm::zero(n, degree); 2 * n],
        }
    }

    pub fn from_parts(parts: Vec<ScalarForm>) -> Self {
        assert!(!parts.is_empty() && parts.len().is_multiple_of(2), "need 2n parts");
        let n = parts.len() / 2;
        let degree = parts[0].degree();
        assert!(
            parts.iter().all(|p| p.dim() == n && p.degree() == degree),
            "parts disagree on dimension or degree"
        );
        VectorValuedForm { n, degree, parts }
    }

    /// Vector field with the given `2n` components.
    pub fn vector_field(coeffs: &[Expr]) -> Self {
        let n = coeffs.len() / 2;
        Self::from_parts(coeffs.iter().map(|c| ScalarForm::function(n, c)).collect())
    }

    /// Vector field `X^i ∂/∂x^i + Y^i ∂/∂y^i`.
    pub fn from_halves(x_part: &[Expr], y_part: &[Expr]) -> Self {
        assert_eq!(x_part.len(), y_part.len());
        let all: Vec<Expr> = x_part.iter().chain(y_part).cloned().collect();
        Self::vector_field(&all)
    }

    /// `Id = Σ_a ∂_a ⊗ dz^a`.
    pub fn identity(n: usize) -> Self {
        Self::from_parts((0..2 * n).map(|a| ScalarForm::coordinate(n, a)).collect())
    }

    /// Tangent structure `J = ∂/∂y^i ⊗ dx^i`.
    pub fn vertical_endomorphism(n: usize) -> Self {
        let mut parts = vec![ScalarForm::zero(n, 1); 2 * n];
        for i in 0..n {
            parts[n + i] = ScalarForm::dx(n, i);
        }
        Self::from_parts(parts)
    }

    /// Liouville field `ℂ = y^i ∂/∂y^i`.
    pub fn liouville(n: usize) -> Self {
        let zeros = vec![Expr::zero(); n];
        let ys: Vec<Expr> = (0..n).map(Expr::y).collect();
        Self::from_halves(&zeros, &ys)
    }

    /// Vertical `1`-form `Σ_ij m[i][j] ∂/∂y^i ⊗ dx^j`.
    pub fn semi_basic_matrix(m: &[Vec<Expr>]) -> Self {
        let n = m.len();
        let mut parts = vec![ScalarForm::zero(n, 1); 2 * n];
        for (i, row) in m.iter().enumerate() {
            parts[n + i] =
                ScalarForm::from_terms(n, 1, row.iter().enumerate().map(|(j, c)| (vec![j], c.clone())));
        }
        Self::from_parts(parts)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Scalar form multiplying the frame vector `∂_a`.
    pub fn part(&self, a: usize) -> &ScalarForm {
        &self.parts[a]
    }

    pub fn parts(&self) -> &[ScalarForm] {
        &self.parts
    }

    /// Coefficient of `∂_a ⊗ dz^I` evaluated on the frame, any index order.
    pub fn component(&self, a: usize, idx: &[usize]) -> Expr {
        self.parts[a].component(idx)
    }

    /// For a vector field: its `2n` coefficient functions.
    pub fn field_components(&self) -> Vec<Expr> {
        assert_eq!(self.degree, 0, "not a vector field");
        self.parts.iter().map(ScalarForm::as_function).collect()
    }

    pub fn is_symbolic_zero(&self) -> bool {
        self.parts.iter().all(ScalarForm::is_symbolic_zero)
    }

    /// Vertical values and only `dx` arguments.
    pub fn is_semi_basic(&self) -> bool {
        self.parts[..self.n].iter().all(ScalarForm::is_symbolic_zero)
            && self.parts[self.n..].iter().all(ScalarForm::is_semi_basic)
    }

    /// Only `dx` arguments, and horizontal-valued coefficients free of `y`.
    pub fn is_almost_semi_basic(&self) -> bool {
        let n = self.n;
        self.parts.iter().all(ScalarForm::is_semi_basic)
            && self.parts[..n].iter().all(|p| {
                p.components().all(|(_, c)| {
                    (0..n).all(|i| ops::is_symbolic_zero(&ops::partial(c, Var::y(i))))
                })
            })
    }

    fn zip(&self, other: &Self, f: impl Fn(&ScalarForm, &ScalarForm) -> ScalarForm) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        assert_eq!(self.degree, other.degree, "degree mismatch");
        Self::from_parts(self.parts.iter().zip(&other.parts).map(|(a, b)| f(a, b)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, ScalarForm::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, ScalarForm::sub)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|p| p.scale(c))
    }

    pub fn mul_fn(&self, f: &Expr) -> Self {
        self.map(|p| p.mul_fn(f))
    }

    /// Apply `f` to every part.
    pub fn map(&self, f: impl Fn(&ScalarForm) -> ScalarForm) -> Self {
        Self::from_parts(self.parts.iter().map(f).collect())
    }

    /// `L(X)` for a vector-valued 1-form `L` and a vector field `X`.
    pub fn apply(&self, x: &VectorValuedForm) -> VectorValuedForm {
        assert_eq!(self.degree, 1, "apply needs a vector-valued 1-form");
        x.assert_field();
        self.map(|p| super::interior_field(x, p))
    }

    pub(crate) fn assert_field(&self) {
        assert_eq!(self.degree, 0, "expected a vector field");
    }

    /// Zero verdict over all components.
    pub fn verdict(&self, samples: &[Point], tol: f64) -> Result<ZeroVerdict, ZeroTestError> {
        let mut out = Vec::with_capacity(self.parts.len());
        for p in &self.parts {
            out.push(p.verdict(samples, tol)?);
        }
        Ok(ZeroVerdict::combine(out))
    }

    /// Per-component verdicts, labelled like `d/dy1|dx1^dx2`.
    pub fn component_verdicts(
        &self,
        samples: &[Point],
        tol: f64,
    ) -> Result<Vec<(String, ZeroVerdict)>, ZeroTestError> {
        let mut out = Vec::new();
        for (a, p) in self.parts.iter().enumerate() {
            for (k, c) in p.components() {
                let v = crate::expr::is_zero(c, samples, tol)?;
                out.push((self.label(a, k), v));
            }
        }
        Ok(out)
    }

    fn label(&self, a: usize, idx: &[usize]) -> String {
        format!("d/d{}|{}", slot_name(a, self.n), self.parts[a].index_label(idx))
    }
}

impl fmt::Display for VectorValuedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (a, p) in self.parts.iter().enumerate() {
            if p.is_symbolic_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "d/d{} ⊗ [{p}]", slot_name(a, self.n))?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl Serialize for VectorValuedForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let comps = Components(
            self.parts
                .iter()
                .enumerate()
                .flat_map(|(a, p)| p.components().map(move |(k, c)| (self.label(a, k), c)))
                .collect(),
        );
        let mut st = s.serialize_struct("VectorValuedForm", 2)?;
        st.serialize_field("degree", &self.degree)?;
        st.serialize_field("components", &comps)?;
        st.end()
    }
}
