use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{Serialize, SerializeMap, SerializeStruct, Serializer};

use crate::expr::{eval, is_zero, EvalError, Expr, Point, Sum, Var, ZeroTestError, ZeroVerdict};

/// Name of coordinate slot `a` among the `2n` coordinates (`x1`, ..., `yn`).
pub fn slot_name(a: usize, n: usize) -> String {
    Var::coordinate(a, n).to_string()
}

/// Sort `idx`, returning the permutation sign, or `None` on a repeated index.
pub(crate) fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

/// `dz^I ∧ dz^J` for increasing `I`, `J`: merged index and sign.
pub(crate) fn merge(i: &[usize], j: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut out = Vec::with_capacity(i.len() + j.len());
    let mut sign = 1.0;
    let (mut p, mut q) = (0, 0);
    while p < i.len() && q < j.len() {
        if i[p] == j[q] {
            return None;
        }
        if i[p] < j[q] {
            out.push(i[p]);
            p += 1;
        } else {
            if (i.len() - p) % 2 == 1 {
                sign = -sign;
            }
            out.push(j[q]);
            q += 1;
        }
    }
    out.extend_from_slice(&i[p..]);
    out.extend_from_slice(&j[q..]);
    Some((out, sign))
}

/// Collects canonical terms per multi-index.
#[derive(Default)]
pub(crate) struct Accumulator(BTreeMap<Vec<usize>, Sum>);

impl Accumulator {
    pub(crate) fn add(&mut self, key: Vec<usize>, value: &Sum) {
        if value.is_zero() {
            return;
        }
        let slot = self.0.entry(key).or_insert_with(Sum::zero);
        *slot = slot.add(value);
    }

    pub(crate) fn finish(self) -> BTreeMap<Vec<usize>, Expr> {
        self.0
            .into_iter()
            .map(|(k, s)| (k, s.reduced()))
            .filter(|(_, s)| !s.is_zero())
            .map(|(k, s)| (k, Expr::from_normal(s)))
            .collect()
    }
}

/// A differential `k`-form on `TM∖{0}` over the natural coframe
/// `{dx^1..dx^n, dy^1..dy^n}`, coframe slot `a < n` being `dx^(a+1)`.
///
/// `ω = Σ_{I increasing} ω_I dz^I`, so `ω_I = ω(∂_{i1}, ..., ∂_{ik})`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarForm {
    n: usize,
    degree: usize,
    comps: BTreeMap<Vec<usize>, Expr>,
}

impl ScalarForm {
    pub fn zero(n: usize, degree: usize) -> Self {
        assert!(degree <= 2 * n, "degree {degree} exceeds 2n = {}", 2 * n);
        ScalarForm {
            n,
            degree,
            comps: BTreeMap::new(),
        }
    }

    /// The 0-form `f`.
    pub fn function(n: usize, f: &Expr) -> Self {
        Self::from_terms(n, 0, [(vec![], f.clone())])
    }

    /// Sum of `c · dz^{a1} ∧ ... ∧ dz^{ak}`; indices need not be sorted.
    pub fn from_terms(
        n: usize,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, Expr)>,
    ) -> Self {
        let mut acc = Accumulator::default();
        for (idx, c) in terms {
            assert_eq!(idx.len(), degree, "multi-index {idx:?} has wrong length");
            assert!(idx.iter().all(|&a| a < 2 * n), "index out of range in {idx:?}");
            if let Some((key, sign)) = sort_with_sign(&idx) {
                acc.add(key, &c.normal().scale(sign));
            }
        }
        let mut out = Self::zero(n, degree);
        out.comps = acc.finish();
        out
    }

    pub(crate) fn from_accumulator(n: usize, degree: usize, acc: Accumulator) -> Self {
        let mut out = Self::zero(n, degree);
        out.comps = acc.finish();
        out
    }

    /// Coordinate 1-form `dz^a`.
    pub fn coordinate(n: usize, a: usize) -> Self {
        Self::from_terms(n, 1, [(vec![a], Expr::one())])
    }

    pub fn dx(n: usize, i: usize) -> Self {
        Self::coordinate(n, i)
    }

    pub fn dy(n: usize, i: usize) -> Self {
        Self::coordinate(n, n + i)
    }

    /// Semi-basic 1-form `θ_i dx^i`.
    pub fn semi_basic(theta: &[Expr]) -> Self {
        let n = theta.len();
        Self::from_terms(n, 1, theta.iter().enumerate().map(|(i, t)| (vec![i], t.clone())))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Nonzero components, keyed by increasing multi-index.
    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.comps.iter()
    }

    /// `ω(∂_{a1}, ..., ∂_{ak})` for an arbitrary index tuple.
    pub fn component(&self, idx: &[usize]) -> Expr {
        match sort_with_sign(idx) {
            Some((key, sign)) => match self.comps.get(&key) {
                Some(c) if sign > 0.0 => c.clone(),
                Some(c) => crate::expr::ops::scale(c, -1.0),
                None => Expr::zero(),
            },
            None => Expr::zero(),
        }
    }

    /// Value of a 0-form.
    pub fn as_function(&self) -> Expr {
        assert_eq!(self.degree, 0);
        self.component(&[])
    }

    pub fn is_symbolic_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// No `dy` factor in any component.
    pub fn is_semi_basic(&self) -> bool {
        self.comps.keys().all(|k| k.iter().all(|&a| a < self.n))
    }

    fn check_compatible(&self, other: &ScalarForm) {
        assert_eq!(self.n, other.n, "dimension mismatch");
        assert_eq!(self.degree, other.degree, "degree mismatch");
    }

    pub fn add(&self, other: &ScalarForm) -> ScalarForm {
        self.check_compatible(other);
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &ScalarForm) -> ScalarForm {
        self.check_compatible(other);
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &ScalarForm, c: f64) -> ScalarForm {
        let mut acc = Accumulator::default();
        for (k, v) in &self.comps {
            acc.add(k.clone(), &v.normal());
        }
        for (k, v) in &other.comps {
            acc.add(k.clone(), &v.normal().scale(c));
        }
        Self::from_accumulator(self.n, self.degree, acc)
    }

    pub fn scale(&self, c: f64) -> ScalarForm {
        self.mul_fn(&Expr::constant(c))
    }

    /// `f · ω`.
    pub fn mul_fn(&self, f: &Expr) -> ScalarForm {
        let f = f.normal();
        let mut acc = Accumulator::default();
        for (k, v) in &self.comps {
            acc.add(k.clone(), &v.normal().mul(&f));
        }
        Self::from_accumulator(self.n, self.degree, acc)
    }

    pub fn wedge(&self, other: &ScalarForm) -> ScalarForm {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let degree = self.degree + other.degree;
        let mut acc = Accumulator::default();
        for (i, a) in &self.comps {
            let a = a.normal();
            for (j, b) in &other.comps {
                if let Some((key, sign)) = merge(i, j) {
                    acc.add(key, &a.mul(&b.normal()).scale(sign));
                }
            }
        }
        Self::from_accumulator(self.n, degree.min(2 * self.n), acc)
    }

    /// Interior product with the frame vector `∂_a`.
    pub fn interior(&self, a: usize) -> ScalarForm {
        if self.degree == 0 {
            return self.clone_as_zero(0);
        }
        let mut acc = Accumulator::default();
        for (k, v) in &self.comps {
            if let Some(p) = k.iter().position(|&b| b == a) {
                let mut rest = k.clone();
                rest.remove(p);
                let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                acc.add(rest, &v.normal().scale(sign));
            }
        }
        Self::from_accumulator(self.n, self.degree - 1, acc)
    }

    fn clone_as_zero(&self, degree: usize) -> ScalarForm {
        ScalarForm::zero(self.n, degree)
    }

    /// Exterior derivative.
    pub fn d(&self) -> ScalarForm {
        let n = self.n;
        if self.degree == 2 * n {
            return self.clone_as_zero(self.degree);
        }
        let mut acc = Accumulator::default();
        for (k, v) in &self.comps {
            let v = v.normal();
            for a in 0..2 * n {
                if k.contains(&a) {
                    continue;
                }
                let da = v.diff(Var::coordinate(a, n));
                if da.is_zero() {
                    continue;
                }
                if let Some((key, sign)) = merge(&[a], k) {
                    acc.add(key, &da.scale(sign));
                }
            }
        }
        Self::from_accumulator(n, self.degree + 1, acc)
    }

    /// Component values at `p`.
    pub fn eval_components(&self, p: &Point) -> Result<Vec<(Vec<usize>, f64)>, EvalError> {
        self.comps
            .iter()
            .map(|(k, v)| Ok((k.clone(), eval(v, p)?)))
            .collect()
    }

    /// Dense antisymmetric `2n × 2n` matrix `ω(∂_a, ∂_b)` of a 2-form at `p`.
    pub fn matrix_at(&self, p: &Point) -> Result<Vec<Vec<f64>>, EvalError> {
        assert_eq!(self.degree, 2, "matrix_at needs a 2-form");
        let m = 2 * self.n;
        let mut out = vec![vec![0.0; m]; m];
        for (k, v) in self.eval_components(p)? {
            out[k[0]][k[1]] = v;
            out[k[1]][k[0]] = -v;
        }
        Ok(out)
    }

    /// Zero verdict for every component.
    pub fn verdict(&self, samples: &[Point], tol: f64) -> Result<ZeroVerdict, ZeroTestError> {
        let mut verdicts = Vec::with_capacity(self.comps.len());
        for v in self.comps.values() {
            verdicts.push(is_zero(v, samples, tol)?);
        }
        Ok(ZeroVerdict::combine(verdicts))
    }

    /// Label of a multi-index, e.g. `dx1^dy2`; `1` for degree 0.
    pub fn index_label(&self, idx: &[usize]) -> String {
        if idx.is_empty() {
            return "1".into();
        }
        idx.iter()
            .map(|&a| format!("d{}", slot_name(a, self.n)))
            .collect::<Vec<_>>()
            .join("^")
    }
}

impl fmt::Display for ScalarForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, v)) in self.comps.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({v}) {}", self.index_label(k))?;
        }
        Ok(())
    }
}

pub(crate) struct Components<'a>(pub(crate) Vec<(String, &'a Expr)>);

impl Serialize for Components<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, &v.to_string())?;
        }
        map.end()
    }
}

impl Serialize for ScalarForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let comps = Components(
            self.comps
                .iter()
                .map(|(k, v)| (self.index_label(k), v))
                .collect(),
        );
        let mut st = s.serialize_struct("ScalarForm", 2)?;
        st.serialize_field("degree", &self.degree)?;
        st.serialize_field("components", &comps)?;
        st.end()
    }
}
