//! Sprays `S = y^i ∂/∂x^i − 2G^i ∂/∂y^i` and the geometry they induce.

mod classify;
mod identities;

use std::sync::{Arc, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::calculus::{ScalarForm, VectorValuedForm};
use crate::expr::{
    is_zero, ops, parse, EvalError, Expr, ParseError, Point, Var, ZeroTestError, ZeroVerdict,
};

pub use classify::{Classification, IsotropyData, DEFAULT_ISOTROPY_TOL};
pub use identities::{IdentityCheck, IDENTITY_NAMES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SprayError {
    #[error("coefficient {index}: {source}")]
    Parse {
        index: usize,
        #[source]
        source: ParseError,
    },
    #[error("expected {expected} coefficients, got {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("coefficient uses variable index {index} beyond dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("{what} is not {degree}-homogeneous in y: {verdict:?}")]
    NotHomogeneous {
        what: String,
        degree: i32,
        verdict: ZeroVerdict,
    },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    ZeroTest(#[from] ZeroTestError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Default)]
struct Cache {
    connection: OnceLock<Connection>,
    jacobi: OnceLock<JacobiEndomorphism>,
    curvature: OnceLock<CurvatureTensor>,
}

/// A spray given by its coefficients `G^i(x, y)`.
#[derive(Clone)]
pub struct Spray {
    n: usize,
    g: Vec<Expr>,
    name: Option<String>,
    cache: Arc<Cache>,
}

impl std::fmt::Debug for Spray {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spray")
            .field("n", &self.n)
            .field("g", &self.g)
            .field("name", &self.name)
            .finish()
    }
}

impl Spray {
    pub fn new(g: Vec<Expr>) -> Result<Self, SprayError> {
        let n = g.len();
        if n == 0 {
            return Err(SprayError::WrongCount {
                expected: 1,
                found: 0,
            });
        }
        for e in &g {
            if let Some(i) = e.max_index().filter(|&i| i >= n) {
                return Err(SprayError::IndexOutOfRange { index: i + 1, dim: n });
            }
        }
        Ok(Spray {
            n,
            g: g.iter().map(crate::expr::simplify).collect(),
            name: None,
            cache: Arc::default(),
        })
    }

    pub fn parse(n: usize, coeffs: &[&str]) -> Result<Self, SprayError> {
        if coeffs.len() != n {
            return Err(SprayError::WrongCount {
                expected: n,
                found: coeffs.len(),
            });
        }
        let g = coeffs
            .iter()
            .enumerate()
            .map(|(index, s)| parse(s, n).map_err(|source| SprayError::Parse { index, source }))
            .collect::<Result<_, _>>()?;
        Self::new(g)
    }

    /// `G = 0`.
    pub fn flat(n: usize) -> Self {
        Self::new(vec![Expr::zero(); n]).expect("flat spray").named(format!("flat{n}"))
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[Expr] {
        &self.g
    }

    /// The vector field `S`.
    pub fn vector_field(&self) -> VectorValuedForm {
        let xs: Vec<Expr> = (0..self.n).map(Expr::y).collect();
        let ys: Vec<Expr> = self.g.iter().map(|g| ops::scale(g, -2.0)).collect();
        VectorValuedForm::from_halves(&xs, &ys)
    }

    /// `S(f) = y^i ∂f/∂x^i − 2G^i ∂f/∂y^i`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut terms = Vec::with_capacity(2 * self.n);
        for i in 0..self.n {
            terms.push(ops::mul(&Expr::y(i), &ops::partial(f, Var::x(i))));
            terms.push(ops::mul(&ops::scale(&self.g[i], -2.0), &ops::partial(f, Var::y(i))));
        }
        ops::sum(terms.iter())
    }

    /// Homogeneity residuals `y^j ∂G^i/∂y^j − 2G^i`, one per component.
    pub fn homogeneity_residuals(&self) -> Vec<Expr> {
        self.g.iter().map(|g| euler_residual(g, self.n, 2)).collect()
    }

    /// Zero verdict of every homogeneity residual.
    pub fn validate(&self, samples: &[Point], tol: f64) -> Result<Vec<ZeroVerdict>, ZeroTestError> {
        self.homogeneity_residuals()
            .iter()
            .map(|r| is_zero(r, samples, tol))
            .collect()
    }

    /// Fails unless every component is 2-homogeneous.
    pub fn ensure_valid(&self, samples: &[Point], tol: f64) -> Result<(), SprayError> {
        for (i, v) in self.validate(samples, tol)?.into_iter().enumerate() {
            if !v.is_zero() {
                return Err(SprayError::NotHomogeneous {
                    what: format!("G{}", i + 1),
                    degree: 2,
                    verdict: v,
                });
            }
        }
        Ok(())
    }

    pub fn connection(&self) -> &Connection {
        self.cache.connection.get_or_init(|| {
            let n = self.n;
            let coeffs = (0..n)
                .map(|i| (0..n).map(|j| ops::partial(&self.g[i], Var::y(j))).collect())
                .collect();
            Connection { n, coeffs }
        })
    }

    /// Horizontal and vertical projectors from the local formulas.
    pub fn projectors(&self) -> (VectorValuedForm, VectorValuedForm) {
        let h = self.connection().horizontal_projector();
        let v = VectorValuedForm::identity(self.n).sub(&h);
        (h, v)
    }

    /// `h = ½(Id − [S, J])` through the bracket.
    pub fn horizontal_from_bracket(&self) -> VectorValuedForm {
        let n = self.n;
        let sj = crate::calculus::fn_bracket(
            &self.vector_field(),
            &VectorValuedForm::vertical_endomorphism(n),
        );
        VectorValuedForm::identity(n).sub(&sj).scale(0.5)
    }

    /// `R^i_j = 2 δG^i/δx^j − S(N^i_j) + N^i_k N^k_j`.
    pub fn jacobi(&self) -> &JacobiEndomorphism {
        self.cache.jacobi.get_or_init(|| {
            let n = self.n;
            let conn = self.connection();
            let r = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut terms = vec![
                                ops::scale(&conn.delta_x(&self.g[i], j), 2.0),
                                ops::scale(&self.apply(&conn.coeffs[i][j]), -1.0),
                            ];
                            for k in 0..n {
                                terms.push(ops::mul(&conn.coeffs[i][k], &conn.coeffs[k][j]));
                            }
                            ops::sum(terms.iter())
                        })
                        .collect()
                })
                .collect();
            JacobiEndomorphism { n, r }
        })
    }

    /// `R^i_{jk} = δN^i_j/δx^k − δN^i_k/δx^j`.
    pub fn curvature(&self) -> &CurvatureTensor {
        self.cache.curvature.get_or_init(|| {
            let n = self.n;
            let conn = self.connection();
            let r = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            (0..n)
                                .map(|k| {
                                    ops::sub(
                                        &conn.delta_x(&conn.coeffs[i][j], k),
                                        &conn.delta_x(&conn.coeffs[i][k], j),
                                    )
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect();
            CurvatureTensor { n, r }
        })
    }

    /// `G̃^i = G^i + P y^i`, i.e. `S − 2Pℂ`. `P` must be 1-homogeneous.
    pub fn projective_transform(
        &self,
        p: &Expr,
        samples: &[Point],
        tol: f64,
    ) -> Result<Spray, SprayError> {
        let v = is_zero(&euler_residual(p, self.n, 1), samples, tol)?;
        if !v.is_zero() {
            return Err(SprayError::NotHomogeneous {
                what: "P".into(),
                degree: 1,
                verdict: v,
            });
        }
        Ok(self.projective_transform_unchecked(p))
    }

    pub fn projective_transform_unchecked(&self, p: &Expr) -> Spray {
        let g = (0..self.n)
            .map(|i| ops::add(&self.g[i], &ops::mul(p, &Expr::y(i))))
            .collect();
        Spray::new(g).expect("same dimension")
    }
}

/// `y^j ∂f/∂y^j − k f`.
pub fn euler_residual(f: &Expr, n: usize, k: i32) -> Expr {
    let mut terms: Vec<Expr> = (0..n)
        .map(|j| ops::mul(&Expr::y(j), &ops::partial(f, Var::y(j))))
        .collect();
    terms.push(ops::scale(f, -f64::from(k)));
    ops::sum(terms.iter())
}

/// Nonlinear connection `N^i_j = ∂G^i/∂y^j`.
#[derive(Clone, Debug, Serialize)]
pub struct Connection {
    n: usize,
    #[serde(serialize_with = "ser_matrix")]
    coeffs: Vec<Vec<Expr>>,
}

impl Connection {
    /// `N^i_j`, indexed `[i][j]`.
    pub fn coefficients(&self) -> &[Vec<Expr>] {
        &self.coeffs
    }

    /// `δf/δx^j = ∂f/∂x^j − N^k_j ∂f/∂y^k`.
    pub fn delta_x(&self, f: &Expr, j: usize) -> Expr {
        let mut terms = vec![ops::partial(f, Var::x(j))];
        for k in 0..self.n {
            terms.push(ops::scale(
                &ops::mul(&self.coeffs[k][j], &ops::partial(f, Var::y(k))),
                -1.0,
            ));
        }
        ops::sum(terms.iter())
    }

    /// `δ/δx^i = ∂/∂x^i − N^j_i ∂/∂y^j` as a vector field.
    pub fn horizontal_lift(&self, i: usize) -> VectorValuedForm {
        let n = self.n;
        let mut c = vec![Expr::zero(); 2 * n];
        c[i] = Expr::one();
        for j in 0..n {
            c[n + j] = ops::scale(&self.coeffs[j][i], -1.0);
        }
        VectorValuedForm::vector_field(&c)
    }

    /// `{δ/δx^1..δ/δx^n, ∂/∂y^1..∂/∂y^n}`.
    pub fn adapted_frame(&self) -> Vec<VectorValuedForm> {
        let n = self.n;
        let mut frame: Vec<_> = (0..n).map(|i| self.horizontal_lift(i)).collect();
        for j in 0..n {
            let mut c = vec![Expr::zero(); 2 * n];
            c[n + j] = Expr::one();
            frame.push(VectorValuedForm::vector_field(&c));
        }
        frame
    }

    /// `h = δ/δx^i ⊗ dx^i`.
    pub fn horizontal_projector(&self) -> VectorValuedForm {
        let n = self.n;
        let mut parts = vec![ScalarForm::zero(n, 1); 2 * n];
        for (i, p) in parts.iter_mut().enumerate().take(n) {
            *p = ScalarForm::dx(n, i);
        }
        for j in 0..n {
            parts[n + j] = ScalarForm::from_terms(
                n,
                1,
                (0..n).map(|i| (vec![i], ops::scale(&self.coeffs[j][i], -1.0))),
            );
        }
        VectorValuedForm::from_parts(parts)
    }

    /// `δy^i = dy^i + N^i_j dx^j`.
    pub fn delta_y(&self, i: usize) -> ScalarForm {
        let n = self.n;
        let mut terms = vec![(vec![n + i], Expr::one())];
        terms.extend((0..n).map(|j| (vec![j], self.coeffs[i][j].clone())));
        ScalarForm::from_terms(n, 1, terms)
    }
}

/// `Φ = R^i_j ∂/∂y^i ⊗ dx^j`.
#[derive(Clone, Debug, Serialize)]
pub struct JacobiEndomorphism {
    n: usize,
    #[serde(serialize_with = "ser_matrix")]
    r: Vec<Vec<Expr>>,
}

impl JacobiEndomorphism {
    /// `R^i_j`, indexed `[i][j]`.
    pub fn components(&self) -> &[Vec<Expr>] {
        &self.r
    }

    pub fn as_form(&self) -> VectorValuedForm {
        VectorValuedForm::semi_basic_matrix(&self.r)
    }

    pub fn trace(&self) -> Expr {
        ops::sum((0..self.n).map(|i| &self.r[i][i]))
    }
}

/// `R = ½ R^i_{jk} ∂/∂y^i ⊗ dx^j ∧ dx^k`.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureTensor {
    n: usize,
    #[serde(serialize_with = "ser_tensor")]
    r: Vec<Vec<Vec<Expr>>>,
}

impl CurvatureTensor {
    /// `R^i_{jk}`, indexed `[i][j][k]`.
    pub fn components(&self) -> &[Vec<Vec<Expr>>] {
        &self.r
    }

    pub fn as_form(&self) -> VectorValuedForm {
        let n = self.n;
        let mut parts = vec![ScalarForm::zero(n, 2); 2 * n];
        for i in 0..n {
            let mut terms = Vec::new();
            for j in 0..n {
                for k in j + 1..n {
                    terms.push((vec![j, k], self.r[i][j][k].clone()));
                }
            }
            parts[n + i] = ScalarForm::from_terms(n, 2, terms);
        }
        VectorValuedForm::from_parts(parts)
    }

    /// `R^i_{kj} y^k`, which equals the Jacobi endomorphism.
    pub fn contracted(&self) -> Vec<Vec<Expr>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let t: Vec<Expr> =
                            (0..n).map(|k| ops::mul(&self.r[i][k][j], &Expr::y(k))).collect();
                        ops::sum(t.iter())
                    })
                    .collect()
            })
            .collect()
    }
}

fn ser_matrix<S: serde::Serializer>(m: &[Vec<Expr>], s: S) -> Result<S::Ok, S::Error> {
    let strings: Vec<Vec<String>> = m
        .iter()
        .map(|r| r.iter().map(ToString::to_string).collect())
        .collect();
    strings.serialize(s)
}

fn ser_tensor<S: serde::Serializer>(t: &[Vec<Vec<Expr>>], s: S) -> Result<S::Ok, S::Error> {
    let strings: Vec<Vec<Vec<String>>> = t
        .iter()
        .map(|m| {
            m.iter()
                .map(|r| r.iter().map(ToString::to_string).collect())
                .collect()
        })
        .collect();
    strings.serialize(s)
}
