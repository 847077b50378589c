//! Canonical sum-of-monomials representation backing `simplify`.
//!
//! A [`Sum`] maps monomials to non-zero real coefficients. A monomial is a
//! sorted product of atoms raised to non-zero integer powers. Atoms are
//! variables, function applications with a canonical argument, and opaque
//! groups (multi-term sums that could not be distributed, e.g. denominators).
//!
//! Invariants kept by every constructor:
//! - `sqrt(u)` never appears with an exponent outside `{1}`; `sqrt(u)^(2q+r)`
//!   is rewritten to `u^q * sqrt(u)^r`;
//! - a group has at least two terms, no monomial factor common to all its
//!   terms, and leading coefficient `1`.

use std::collections::BTreeMap;
use std::sync::Arc;

use ordered_float::OrderedFloat;

use super::{BinaryOp, Expr, Node, UnaryOp, Var};

/// Products of multi-term sums raised to a positive power are expanded only
/// while the expansion stays below this many terms.
const EXPAND_LIMIT: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Atom {
    Var(Var),
    Func(UnaryOp, Arc<Sum>),
    Group(Arc<Sum>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Monomial(Vec<(Atom, i32)>);

impl Monomial {
    fn one() -> Self {
        Monomial(Vec::new())
    }

    fn single(atom: Atom, e: i32) -> Self {
        Monomial(vec![(atom, e)])
    }

    fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn exponent(&self, atom: &Atom) -> i32 {
        self.0
            .binary_search_by(|(a, _)| a.cmp(atom))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    fn to_map(&self) -> BTreeMap<Atom, i32> {
        self.0.iter().cloned().collect()
    }

    fn from_map(map: BTreeMap<Atom, i32>) -> Self {
        Monomial(map.into_iter().filter(|(_, e)| *e != 0).collect())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Sum {
    terms: BTreeMap<Monomial, OrderedFloat<f64>>,
}

fn combine(a: f64, b: f64) -> Option<f64> {
    let s = a + b;
    if s == 0.0 || s.abs() <= 1e-14 * a.abs().max(b.abs()) {
        None
    } else {
        Some(s)
    }
}

impl Sum {
    pub(crate) fn zero() -> Self {
        Sum::default()
    }

    pub(crate) fn constant(c: f64) -> Self {
        let mut s = Sum::zero();
        s.add_term(Monomial::one(), c);
        s
    }

    fn from_term(m: Monomial, c: f64) -> Self {
        let mut s = Sum::zero();
        s.add_term(m, c);
        s
    }

    pub(crate) fn var(v: Var) -> Self {
        Sum::from_term(Monomial::single(Atom::Var(v), 1), 1.0)
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => self
                .terms
                .iter()
                .next()
                .filter(|(m, _)| m.is_one())
                .map(|(_, c)| c.0),
            _ => None,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.terms.len()
    }

    fn single(&self) -> Option<(&Monomial, f64)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(m, c)| (m, c.0))
        } else {
            None
        }
    }

    fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => match combine(existing.0, c) {
                Some(s) => existing.0 = s,
                None => {
                    self.terms.remove(&m);
                }
            },
            None => {
                self.terms.insert(m, OrderedFloat(c));
            }
        }
    }

    pub(crate) fn add(&self, other: &Sum) -> Sum {
        let (mut big, small) = if self.len() >= other.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.0);
        }
        big
    }

    pub(crate) fn scale(&self, c: f64) -> Sum {
        if c == 0.0 {
            return Sum::zero();
        }
        Sum {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), OrderedFloat(k.0 * c)))
                .collect(),
        }
    }

    pub(crate) fn mul(&self, other: &Sum) -> Sum {
        if self.is_zero() || other.is_zero() {
            return Sum::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(c);
        }
        let a = self.absorb_into(other);
        let b = other.absorb_into(self);
        let a = a.as_ref().unwrap_or(self);
        let b = b.as_ref().unwrap_or(other);
        let mut out = Sum::zero();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let mut map = ma.to_map();
                for (atom, e) in &mb.0 {
                    *map.entry(atom.clone()).or_insert(0) += e;
                }
                let prod = canonical_term(map, ca.0 * cb.0);
                out = out.add(&prod);
            }
        }
        out
    }

    /// If `self` has several terms and equals `c * g * group` where `group`
    /// appears with a negative exponent in the single-term `other`, rewrite
    /// `self` as that single term so the product cancels.
    fn absorb_into(&self, other: &Sum) -> Option<Sum> {
        if self.len() < 2 {
            return None;
        }
        let (om, _) = other.single()?;
        let has_inverse_group = om
            .0
            .iter()
            .any(|(a, e)| *e < 0 && matches!(a, Atom::Group(_)));
        if !has_inverse_group {
            return None;
        }
        let (c, common, group) = self.group_form();
        let atom = Atom::Group(Arc::new(group));
        if om.exponent(&atom) >= 0 {
            return None;
        }
        let mut map = common.to_map();
        *map.entry(atom).or_insert(0) += 1;
        Some(Sum::from_term(Monomial::from_map(map), c))
    }

    /// Factor a multi-term sum as `c * common * group`.
    fn group_form(&self) -> (f64, Monomial, Sum) {
        debug_assert!(self.len() >= 2);
        let mut atoms: Vec<&Atom> = self.terms.keys().flat_map(|m| m.0.iter().map(|(a, _)| a)).collect();
        atoms.sort();
        atoms.dedup();
        let mins: BTreeMap<Atom, i32> = atoms
            .into_iter()
            .map(|a| {
                let e = self.terms.keys().map(|m| m.exponent(a)).min().unwrap_or(0);
                (a.clone(), e)
            })
            .collect();
        let common = Monomial::from_map(mins);
        let mut rest = Sum::zero();
        for (m, c) in &self.terms {
            let mut map = m.to_map();
            for (atom, e) in &common.0 {
                *map.entry(atom.clone()).or_insert(0) -= e;
            }
            rest.add_term(Monomial::from_map(map), c.0);
        }
        let lead = rest.terms.values().next().map(|c| c.0).unwrap_or(1.0);
        (lead, common, rest.scale(1.0 / lead))
    }

    /// Zero if the terms cancel once brought over a common denominator of
    /// their inverse groups; otherwise `self` unchanged.
    pub(crate) fn reduced(self) -> Sum {
        if self.is_fraction_zero() {
            Sum::zero()
        } else {
            self
        }
    }

    fn is_fraction_zero(&self) -> bool {
        if self.len() < 2 {
            return false;
        }
        let mut den: BTreeMap<&Atom, i32> = BTreeMap::new();
        for m in self.terms.keys() {
            for (a, e) in &m.0 {
                if *e < 0 && matches!(a, Atom::Group(_)) {
                    let d = den.entry(a).or_insert(0);
                    *d = (*d).min(*e);
                }
            }
        }
        if den.is_empty() {
            return false;
        }
        let mut num = Sum::zero();
        for (m, c) in &self.terms {
            let mut map = m.to_map();
            let mut t = Sum::zero();
            let mut factors = Vec::new();
            for (g, d) in &den {
                let e = map.remove(*g).unwrap_or(0) - d;
                if e > 0 {
                    factors.push((*g, e));
                }
            }
            t.add_term(Monomial::one(), 1.0);
            t = t.mul(&canonical_term(map, c.0));
            for (g, e) in factors {
                let Atom::Group(s) = g else { unreachable!() };
                t = t.mul(&s.pow(e));
            }
            num = num.add(&t);
            if num.len() > 4 * EXPAND_LIMIT {
                return false;
            }
        }
        num.is_zero()
    }

    pub(crate) fn pow(&self, k: i32) -> Sum {
        if k == 0 {
            return Sum::constant(1.0);
        }
        if k == 1 {
            return self.clone();
        }
        if self.is_zero() {
            return if k > 0 {
                Sum::zero()
            } else {
                Sum::constant(f64::INFINITY)
            };
        }
        if let Some((m, c)) = self.single() {
            let map = m.0.iter().map(|(a, e)| (a.clone(), e * k)).collect();
            return canonical_term(map, c.powi(k));
        }
        if k > 0 {
            let fits = (self.len() as u64)
                .checked_pow(k as u32)
                .is_some_and(|n| n <= EXPAND_LIMIT as u64);
            if fits {
                let mut acc = self.clone();
                for _ in 1..k {
                    acc = acc.mul(self);
                }
                return acc;
            }
        }
        let (c, common, group) = self.group_form();
        let mut map: BTreeMap<Atom, i32> = common.0.iter().map(|(a, e)| (a.clone(), e * k)).collect();
        *map.entry(Atom::Group(Arc::new(group))).or_insert(0) += k;
        canonical_term(map, c.powi(k))
    }

    pub(crate) fn func(op: UnaryOp, arg: Sum) -> Sum {
        debug_assert!(op != UnaryOp::Neg);
        if let Some(c) = arg.as_constant() {
            let v = apply_unary(op, c);
            if v.is_finite() {
                return Sum::constant(v);
            }
        }
        if op == UnaryOp::Log {
            if let Some((m, c)) = arg.single() {
                if c == 1.0 && m.0.len() == 1 {
                    if let (Atom::Func(UnaryOp::Exp, inner), 1) = &m.0[0] {
                        return (**inner).clone();
                    }
                }
            }
        }
        Sum::from_term(Monomial::single(Atom::Func(op, Arc::new(arg)), 1), 1.0)
    }

    pub(crate) fn depends_on(&self, v: Var) -> bool {
        self.terms
            .keys()
            .any(|m| m.0.iter().any(|(a, _)| a.depends_on(v)))
    }

    pub(crate) fn diff(&self, v: Var) -> Sum {
        let mut out = Sum::zero();
        if !self.depends_on(v) {
            return out;
        }
        for (m, c) in &self.terms {
            for (atom, e) in &m.0 {
                if !atom.depends_on(v) {
                    continue;
                }
                let da = atom.diff(v);
                if da.is_zero() {
                    continue;
                }
                let mut map = m.to_map();
                *map.get_mut(atom).unwrap() -= 1;
                let rest = canonical_term(map, c.0 * f64::from(*e));
                out = out.add(&rest.mul(&da));
            }
        }
        out.reduced()
    }
}

impl Atom {
    fn depends_on(&self, v: Var) -> bool {
        match self {
            Atom::Var(w) => *w == v,
            Atom::Func(_, arg) | Atom::Group(arg) => arg.depends_on(v),
        }
    }

    fn diff(&self, v: Var) -> Sum {
        match self {
            Atom::Var(w) => {
                if *w == v {
                    Sum::constant(1.0)
                } else {
                    Sum::zero()
                }
            }
            Atom::Group(s) => s.diff(v),
            Atom::Func(op, arg) => {
                let inner = arg.diff(v);
                if inner.is_zero() {
                    return Sum::zero();
                }
                let this = Sum::from_term(Monomial::single(self.clone(), 1), 1.0);
                let outer = match op {
                    UnaryOp::Sqrt => this.pow(-1).scale(0.5),
                    UnaryOp::Sin => Sum::func(UnaryOp::Cos, (**arg).clone()),
                    UnaryOp::Cos => Sum::func(UnaryOp::Sin, (**arg).clone()).scale(-1.0),
                    UnaryOp::Exp => this,
                    UnaryOp::Log => arg.pow(-1),
                    UnaryOp::Abs => arg.mul(&this.pow(-1)),
                    UnaryOp::Neg => unreachable!("negation is never an atom"),
                };
                outer.mul(&inner)
            }
        }
    }
}

/// Build `c * Π atom^e`, applying the `sqrt` power reduction.
fn canonical_term(map: BTreeMap<Atom, i32>, c: f64) -> Sum {
    if c == 0.0 {
        return Sum::zero();
    }
    let mut keep = BTreeMap::new();
    let mut extra: Vec<(Arc<Sum>, i32)> = Vec::new();
    for (atom, e) in map {
        if e == 0 {
            continue;
        }
        match &atom {
            Atom::Func(UnaryOp::Sqrt, arg) if e != 1 => {
                let q = e.div_euclid(2);
                let r = e.rem_euclid(2);
                if r != 0 {
                    keep.insert(atom.clone(), r);
                }
                extra.push((arg.clone(), q));
            }
            _ => {
                keep.insert(atom, e);
            }
        }
    }
    let mut out = Sum::from_term(Monomial::from_map(keep), c);
    for (base, q) in extra {
        out = out.mul(&base.pow(q));
    }
    out
}

pub(crate) fn apply_unary(op: UnaryOp, c: f64) -> f64 {
    match op {
        UnaryOp::Neg => -c,
        UnaryOp::Sqrt => {
            if c < 0.0 {
                f64::NAN
            } else {
                c.sqrt()
            }
        }
        UnaryOp::Sin => c.sin(),
        UnaryOp::Cos => c.cos(),
        UnaryOp::Exp => c.exp(),
        UnaryOp::Log => {
            if c <= 0.0 {
                f64::NAN
            } else {
                c.ln()
            }
        }
        UnaryOp::Abs => c.abs(),
    }
}

pub(crate) fn to_normal(e: &Expr) -> Sum {
    match e.node() {
        Node::Const(c) => Sum::constant(*c),
        Node::Var(v) => Sum::var(*v),
        Node::Unary(UnaryOp::Neg, a) => a.normal().scale(-1.0),
        Node::Unary(op, a) => Sum::func(*op, (*a.normal()).clone()),
        // a/u^k as a·u^(−k), so printed denominators normalize back unchanged
        Node::Binary(BinaryOp::Div, a, b) if matches!(b.node(), Node::Pow(_, k) if *k > 0) => {
            let Node::Pow(base, k) = b.node() else { unreachable!() };
            a.normal().mul(&base.normal().pow(-*k))
        }
        Node::Binary(op, a, b) => {
            let (a, b) = (a.normal(), b.normal());
            match op {
                BinaryOp::Add => a.add(&b).reduced(),
                BinaryOp::Sub => a.add(&b.scale(-1.0)).reduced(),
                BinaryOp::Mul => a.mul(&b),
                BinaryOp::Div => a.mul(&b.pow(-1)),
            }
        }
        Node::Pow(a, k) => a.normal().pow(*k),
    }
}

fn atom_expr(atom: &Atom) -> Expr {
    match atom {
        Atom::Var(v) => Expr::var(*v),
        Atom::Func(op, arg) => Expr::unary(*op, Expr::from_normal((**arg).clone())),
        Atom::Group(s) => Expr::from_normal((**s).clone()),
    }
}

fn product(factors: Vec<Expr>) -> Option<Expr> {
    factors.into_iter().reduce(|acc, f| acc * f)
}

fn term_expr(m: &Monomial, c: f64) -> Expr {
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (atom, e) in &m.0 {
        let base = atom_expr(atom);
        let (list, k) = if *e > 0 { (&mut num, *e) } else { (&mut den, -*e) };
        list.push(if k == 1 { base } else { base.powi(k) });
    }
    if c != 1.0 || num.is_empty() {
        num.insert(0, Expr::constant(c));
    }
    let num = product(num).expect("non-empty");
    match product(den) {
        Some(d) => num / d,
        None => num,
    }
}

pub(crate) fn from_normal(sum: &Sum) -> Expr {
    let mut out: Option<Expr> = None;
    for (m, c) in &sum.terms {
        let c = c.0;
        let mag = term_expr(m, c.abs());
        out = Some(match out {
            None if c < 0.0 => -mag,
            None => mag,
            Some(acc) if c < 0.0 => acc - mag,
            Some(acc) => acc + mag,
        });
    }
    out.unwrap_or_else(Expr::zero)
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn n(s: &str) -> Sum {
        to_normal(&parse(s, 3).unwrap())
    }

    #[test]
    fn expansion_and_cancellation() {
        assert!(n("(y1+y2)^2 - y1^2 - 2*y1*y2 - y2^2").is_zero());
        assert!(n("x1*(y1+y2) - x1*y1 - x1*y2").is_zero());
    }

    #[test]
    fn group_absorbs_matching_numerator() {
        assert_eq!(n("x1*(y1+y2)/(x1*(y1+y2))").as_constant(), Some(1.0));
        assert_eq!(n("(2*y1+2*y2)/(y1+y2)").as_constant(), Some(2.0));
    }

    #[test]
    fn sqrt_reduction_negative_powers() {
        // 1/sqrt(u)^3 * u = 1/sqrt(u)
        assert!(n("(y1^2+1)/sqrt(y1^2+1)^3 - 1/sqrt(y1^2+1)").is_zero());
    }

    #[test]
    fn derivative_of_norm() {
        let f = n("sqrt(y1^2+y2^2)");
        let d = f.diff(Var::y(0));
        let expected = n("y1/sqrt(y1^2+y2^2)");
        assert!(d.add(&expected.scale(-1.0)).is_zero());
    }

    #[test]
    fn constants_fold() {
        assert_eq!(n("exp(0) + cos(0) + 2^3").as_constant(), Some(10.0));
        assert_eq!(n("log(exp(x1)) - x1").as_constant(), Some(0.0));
    }
}
