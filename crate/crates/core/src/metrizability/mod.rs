//! Projective metrizability conditions for a candidate semi-basic 1-form
//! `θ` and the curvature obstruction `d_Rθ`.
//!
//! The six conditions are
//! `L_ℂθ = 0`, `d_Jθ = 0`, `d_hθ = 0`, `i_Sθ > 0`, `rank dθ = 2n − 2` and
//! `d_Rθ = 0`. Rank and positivity are checked pointwise on samples only.

use serde::Serialize;
use thiserror::Error;

use crate::calculus::{lie_derivative, lie_type_derivative, increasing_indices, ScalarForm, VectorValuedForm};
use crate::expr::{eval, is_zero, ops, EvalError, Expr, Point, Var, ZeroTestError, ZeroVerdict};
use crate::numeric::{eval_matrix, rank, RankInfo};
use crate::spray::{euler_residual, Spray, SprayError};

/// Strict lower bound for `min i_Sθ`.
pub const POSITIVITY_MARGIN: f64 = 1e-8;
/// Singular values below this fraction of the largest count as zero.
pub const RANK_REL_TOL: f64 = 1e-9;

pub const SAMPLING_NOTE: &str =
    "positivity and rank are verified at the sampled points only; by continuity they extend to \
     a neighbourhood of each sample, not necessarily to every connected region";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetrizabilityError {
    #[error("F is not 1-homogeneous in y: {0:?}")]
    NotHomogeneous(ZeroVerdict),
    #[error("expected {expected} components, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("conditions fail: {0}")]
    Refused(String),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Spray(#[from] SprayError),
}

/// `θ = θ_i dx^i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemiBasicOneForm {
    #[serde(serialize_with = "ser_exprs")]
    components: Vec<Expr>,
}

fn ser_exprs<S: serde::Serializer>(v: &[Expr], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(ToString::to_string))
}

impl SemiBasicOneForm {
    pub fn new(components: Vec<Expr>) -> Self {
        SemiBasicOneForm { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn as_form(&self) -> ScalarForm {
        ScalarForm::semi_basic(&self.components)
    }

    /// `i_Sθ = θ_i y^i`; for `θ = d_JF` this is `F`.
    pub fn contract_y(&self) -> Expr {
        let t: Vec<Expr> = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| ops::mul(c, &Expr::y(i)))
            .collect();
        ops::sum(t.iter())
    }
}

/// A candidate metric: either `F` itself or a 1-form `θ`.
#[derive(Clone, Debug)]
pub enum Candidate {
    Finsler(Expr),
    Theta(SemiBasicOneForm),
}

/// `θ = d_JF`, i.e. `θ_i = ∂F/∂y^i`. Rejects `F` that is not 1-homogeneous.
pub fn euler_poincare(
    f: &Expr,
    n: usize,
    samples: &[Point],
    tol: f64,
) -> Result<SemiBasicOneForm, MetrizabilityError> {
    let v = is_zero(&euler_residual(f, n, 1), samples, tol)?;
    if !v.is_zero() {
        return Err(MetrizabilityError::NotHomogeneous(v));
    }
    Ok(SemiBasicOneForm::new(
        (0..n).map(|i| ops::partial(f, Var::y(i))).collect(),
    ))
}

/// `L_ℂθ`, `d_Jθ` and `d_hθ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Operators {
    pub lie_liouville: ScalarForm,
    pub d_j: ScalarForm,
    pub d_h: ScalarForm,
}

/// Coordinate formulas:
/// `L_ℂθ = y^j ∂θ_i/∂y^j dx^i`,
/// `(d_Jθ)_{ab} = ∂θ_b/∂y^a − ∂θ_a/∂y^b`,
/// `(d_hθ)_{ab} = δθ_b/δx^a − δθ_a/δx^b`.
pub fn closed_form_operators(s: &Spray, theta: &SemiBasicOneForm) -> Operators {
    let n = s.dim();
    let th = theta.components();
    let conn = s.connection();
    let lie = (0..n).map(|i| {
        let t: Vec<Expr> = (0..n)
            .map(|j| ops::mul(&Expr::y(j), &ops::partial(&th[i], Var::y(j))))
            .collect();
        (vec![i], ops::sum(t.iter()))
    });
    let pairs = increasing_indices(n, 2);
    let d_j = pairs.iter().map(|ab| {
        let (a, b) = (ab[0], ab[1]);
        (
            ab.clone(),
            ops::sub(&ops::partial(&th[b], Var::y(a)), &ops::partial(&th[a], Var::y(b))),
        )
    });
    let d_h = pairs.iter().map(|ab| {
        let (a, b) = (ab[0], ab[1]);
        (ab.clone(), ops::sub(&conn.delta_x(&th[b], a), &conn.delta_x(&th[a], b)))
    });
    Operators {
        lie_liouville: ScalarForm::from_terms(n, 1, lie),
        d_j: ScalarForm::from_terms(n, 2, d_j),
        d_h: ScalarForm::from_terms(n, 2, d_h),
    }
}

/// The same operators through the generic derivations.
pub fn generic_operators(s: &Spray, theta: &SemiBasicOneForm) -> Operators {
    let n = s.dim();
    let w = theta.as_form();
    let (h, _) = s.projectors();
    Operators {
        lie_liouville: lie_derivative(&VectorValuedForm::liouville(n), &w),
        d_j: lie_type_derivative(&VectorValuedForm::vertical_endomorphism(n), &w),
        d_h: lie_type_derivative(&h, &w),
    }
}

/// `h_ij = F ∂θ_i/∂y^j` with `F = i_Sθ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngularMetric {
    #[serde(serialize_with = "ser_matrix")]
    h: Vec<Vec<Expr>>,
}

fn ser_matrix<S: serde::Serializer>(m: &[Vec<Expr>], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(m.iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>()))
}

impl AngularMetric {
    pub fn from_theta(theta: &SemiBasicOneForm) -> Self {
        let n = theta.dim();
        let f = theta.contract_y();
        let th = theta.components();
        let h = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| ops::mul(&f, &ops::partial(&th[i], Var::y(j))))
                    .collect()
            })
            .collect();
        AngularMetric { h }
    }

    pub fn components(&self) -> &[Vec<Expr>] {
        &self.h
    }

    pub fn rank_at(&self, p: &Point) -> Result<RankInfo, EvalError> {
        Ok(rank(&eval_matrix(&self.h, p)?, RANK_REL_TOL))
    }

    /// `h_ij − h_ji` for `i < j` and `h_ij y^j`.
    pub fn symmetry_and_kernel(&self, samples: &[Point], tol: f64) -> Result<ZeroVerdict, ZeroTestError> {
        let n = self.h.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                out.push(is_zero(&ops::sub(&self.h[i][j], &self.h[j][i]), samples, tol)?);
            }
            let t: Vec<Expr> = (0..n).map(|j| ops::mul(&self.h[i][j], &Expr::y(j))).collect();
            out.push(is_zero(&ops::sum(t.iter()), samples, tol)?);
        }
        Ok(ZeroVerdict::combine(out))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositivityVerdict {
    pub status: Status,
    pub min_value: f64,
    pub witness: Option<Point>,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankSample {
    pub point: Point,
    pub rank: usize,
    pub angular_rank: usize,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankVerdict {
    pub status: Status,
    pub expected: usize,
    pub min_rank: usize,
    pub max_rank: usize,
    /// First sample whose rank differs from `expected`.
    pub witness: Option<RankSample>,
    /// Samples where `rank dθ = 2n − 2` and `rank h = n − 1` disagree.
    pub equivalence_violations: usize,
    pub skipped: usize,
}

/// `d_Rθ` through `d_R = i_R d + d i_R`, and the cyclic sum
/// `B_{ijl} = h_ik R^k_{jl} + h_lk R^k_{ij} + h_jk R^k_{li}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Obstruction {
    pub d_r: ScalarForm,
    #[serde(serialize_with = "ser_exprs")]
    pub bianchi: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObstructionVerdict {
    pub d_r: ZeroVerdict,
    pub bianchi: ZeroVerdict,
}

impl ObstructionVerdict {
    pub fn agree(&self) -> bool {
        self.d_r.is_zero() == self.bianchi.is_zero()
    }
}

pub fn obstruction(s: &Spray, theta: &SemiBasicOneForm) -> Obstruction {
    let n = s.dim();
    let r = s.curvature();
    let d_r = lie_type_derivative(&r.as_form(), &theta.as_form());
    let h = AngularMetric::from_theta(theta);
    let (h, rc) = (h.components(), r.components());
    let term = |a: usize, b: usize, c: usize| -> Expr {
        let t: Vec<Expr> = (0..n).map(|k| ops::mul(&h[a][k], &rc[k][b][c])).collect();
        ops::sum(t.iter())
    };
    let bianchi = increasing_indices(n, 3)
        .into_iter()
        .map(|t| {
            let (i, j, l) = (t[0], t[1], t[2]);
            ops::sum([term(i, j, l), term(l, i, j), term(j, l, i)].iter())
        })
        .collect();
    Obstruction { d_r, bianchi }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub theta: SemiBasicOneForm,
    pub lie_liouville: ZeroVerdict,
    pub d_j: ZeroVerdict,
    pub d_h: ZeroVerdict,
    pub positivity: PositivityVerdict,
    pub rank: RankVerdict,
    pub obstruction: ObstructionVerdict,
    pub note: &'static str,
}

impl ConditionReport {
    /// `L_ℂθ = 0`, `d_Jθ = 0` and `d_hθ = 0`.
    pub fn differential_pass(&self) -> bool {
        self.lie_liouville.is_zero() && self.d_j.is_zero() && self.d_h.is_zero()
    }

    pub fn algebraic_pass(&self) -> bool {
        self.positivity.status == Status::Pass && self.rank.status == Status::Pass
    }

    pub fn pass(&self) -> bool {
        self.differential_pass() && self.algebraic_pass() && self.obstruction.d_r.is_zero()
    }

    /// Names of the failing conditions.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.lie_liouville.is_zero() {
            out.push("lie_liouville");
        }
        if !self.d_j.is_zero() {
            out.push("d_j");
        }
        if !self.d_h.is_zero() {
            out.push("d_h");
        }
        if self.positivity.status != Status::Pass {
            out.push("positivity");
        }
        if self.rank.status != Status::Pass {
            out.push("rank");
        }
        if !self.obstruction.d_r.is_zero() {
            out.push("obstruction");
        }
        out
    }
}

pub fn resolve_candidate(
    n: usize,
    candidate: &Candidate,
    samples: &[Point],
    tol: f64,
) -> Result<SemiBasicOneForm, MetrizabilityError> {
    match candidate {
        Candidate::Finsler(f) => euler_poincare(f, n, samples, tol),
        Candidate::Theta(t) if t.dim() != n => Err(MetrizabilityError::DimensionMismatch {
            expected: n,
            found: t.dim(),
        }),
        Candidate::Theta(t) => Ok(t.clone()),
    }
}

fn form_verdict(w: &ScalarForm, samples: &[Point], tol: f64) -> Result<ZeroVerdict, ZeroTestError> {
    w.verdict(samples, tol)
}

pub fn positivity(theta: &SemiBasicOneForm, samples: &[Point]) -> PositivityVerdict {
    let f = theta.contract_y();
    let mut min_value = f64::INFINITY;
    let mut witness = None;
    let mut skipped = 0;
    for p in samples {
        match eval(&f, p) {
            Ok(v) if v < min_value => {
                min_value = v;
                witness = Some(p.clone());
            }
            Ok(_) => {}
            Err(_) => skipped += 1,
        }
    }
    let status = if witness.is_none() {
        Status::Inconclusive
    } else if min_value > POSITIVITY_MARGIN {
        Status::Pass
    } else if min_value > 0.0 {
        Status::Inconclusive
    } else {
        Status::Fail
    };
    PositivityVerdict {
        status,
        min_value,
        witness,
        skipped,
    }
}

pub fn rank_check(theta: &SemiBasicOneForm, samples: &[Point]) -> RankVerdict {
    let n = theta.dim();
    let expected = 2 * n - 2;
    let dtheta = theta.as_form().d();
    let angular = AngularMetric::from_theta(theta);
    let (mut min_rank, mut max_rank) = (usize::MAX, 0);
    let mut witness = None;
    let mut equivalence_violations = 0;
    let mut skipped = 0;
    for p in samples {
        let m = match dtheta.matrix_at(p) {
            Ok(m) => m,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let flat: Vec<f64> = m.into_iter().flatten().collect();
        let info = rank(&nalgebra::DMatrix::from_row_slice(2 * n, 2 * n, &flat), RANK_REL_TOL);
        let Ok(ang) = angular.rank_at(p) else {
            skipped += 1;
            continue;
        };
        min_rank = min_rank.min(info.rank);
        max_rank = max_rank.max(info.rank);
        if (info.rank == expected) != (ang.rank + 1 == n) {
            equivalence_violations += 1;
        }
        if info.rank != expected && witness.is_none() {
            witness = Some(RankSample {
                point: p.clone(),
                rank: info.rank,
                angular_rank: ang.rank,
                gap: info.gap,
            });
        }
    }
    let status = if min_rank == usize::MAX {
        min_rank = 0;
        Status::Inconclusive
    } else if witness.is_some() {
        Status::Fail
    } else {
        Status::Pass
    };
    RankVerdict {
        status,
        expected,
        min_rank,
        max_rank,
        witness,
        equivalence_violations,
        skipped,
    }
}

/// Evaluate all six conditions for `candidate` against `s`.
pub fn check_conditions(
    s: &Spray,
    candidate: &Candidate,
    samples: &[Point],
    tol: f64,
) -> Result<ConditionReport, MetrizabilityError> {
    let theta = resolve_candidate(s.dim(), candidate, samples, tol)?;
    let ops = closed_form_operators(s, &theta);
    let obs = obstruction(s, &theta);
    let mut bianchi = Vec::with_capacity(obs.bianchi.len());
    for b in &obs.bianchi {
        bianchi.push(is_zero(b, samples, tol)?);
    }
    Ok(ConditionReport {
        lie_liouville: form_verdict(&ops.lie_liouville, samples, tol)?,
        d_j: form_verdict(&ops.d_j, samples, tol)?,
        d_h: form_verdict(&ops.d_h, samples, tol)?,
        positivity: positivity(&theta, samples),
        rank: rank_check(&theta, samples),
        obstruction: ObstructionVerdict {
            d_r: form_verdict(&obs.d_r, samples, tol)?,
            bianchi: ZeroVerdict::combine(bianchi),
        },
        theta,
        note: SAMPLING_NOTE,
    })
}

/// `F = i_Sθ`, `P = S(F)/(2F)` and `S_F = S − 2Pℂ`.
#[derive(Clone, Debug, Serialize)]
pub struct Recovery {
    #[serde(serialize_with = "ser_expr")]
    pub finsler: Expr,
    #[serde(serialize_with = "ser_expr")]
    pub factor: Expr,
    #[serde(skip)]
    pub spray: Spray,
    #[serde(serialize_with = "ser_exprs")]
    pub spray_coefficients: Vec<Expr>,
    /// `y^j ∂P/∂y^j − P`.
    pub factor_homogeneity: ZeroVerdict,
    /// `S_F(F)`.
    pub conservation: ZeroVerdict,
}

fn ser_expr<S: serde::Serializer>(e: &Expr, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

pub fn recover_finsler(
    s: &Spray,
    report: &ConditionReport,
    samples: &[Point],
    tol: f64,
) -> Result<Recovery, MetrizabilityError> {
    if !report.pass() {
        return Err(MetrizabilityError::Refused(report.failures().join(", ")));
    }
    let f = report.theta.contract_y();
    let factor = ops::div(&s.apply(&f), &ops::scale(&f, 2.0));
    let factor_homogeneity = is_zero(&euler_residual(&factor, s.dim(), 1), samples, tol)?;
    let spray = s.projective_transform_unchecked(&factor);
    let conservation = is_zero(&spray.apply(&f), samples, tol)?;
    Ok(Recovery {
        spray_coefficients: spray.coefficients().to_vec(),
        finsler: f,
        factor,
        spray,
        factor_homogeneity,
        conservation,
    })
}
