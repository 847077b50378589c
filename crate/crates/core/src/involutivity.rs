//! Pointwise symbols of `P₁θ = (L_ℂθ, d_Jθ, d_hθ)` and the Cartan test.
//!
//! A first-order symbol `A` is stored in natural coordinates as the
//! `2n × n` numbers `Ã(∂_a)_k`; a second-order symbol `B` as `B̃(∂_a, ∂_b)_k`
//! with `a ≤ b`. Rows express the operator in the frame `{h_i, v_i}` at `u`,
//! where `h_i` is the horizontal lift and `v_i = J h_i`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{EvalError, Point};
use crate::numeric::{eval_matrix, rank, RankInfo};
use crate::spray::Spray;

pub const RANK_REL_TOL: f64 = 1e-9;
/// `σ_min/σ_max` inside this band makes a rank indeterminate.
pub const ILL_CONDITIONED: (f64, f64) = (1e-12, 1e-8);
/// Kept singular values below this ratio produce a warning only.
pub const NEAR_DEGENERATE: f64 = 1e-6;
pub const MAX_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvolutivityError {
    #[error("point has dimension {found}, spray has {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("frame change must be an invertible {0}x{0} matrix")]
    BadFrame(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Horizontal and vertical frame at a point, as natural-coordinate columns.
#[derive(Clone, Debug)]
pub struct Frame {
    n: usize,
    y: Vec<f64>,
    h: DMatrix<f64>,
    v: DMatrix<f64>,
}

impl Frame {
    /// Adapted frame `h_i = δ/δx^i`, `v_i = ∂/∂y^i`.
    pub fn adapted(s: &Spray, u: &Point) -> Result<Self, InvolutivityError> {
        Self::with_change(s, u, &DMatrix::identity(s.dim(), s.dim()))
    }

    /// `h'_i = Q_{ai} h_a`, `v'_i = J h'_i`.
    pub fn with_change(s: &Spray, u: &Point, q: &DMatrix<f64>) -> Result<Self, InvolutivityError> {
        let n = s.dim();
        if u.dim() != n {
            return Err(InvolutivityError::DimensionMismatch {
                expected: n,
                found: u.dim(),
            });
        }
        if q.shape() != (n, n) || rank(q, RANK_REL_TOL).rank != n {
            return Err(InvolutivityError::BadFrame(n));
        }
        let nm = eval_matrix(s.connection().coefficients(), u)?;
        let mut h = DMatrix::zeros(2 * n, n);
        let mut v = DMatrix::zeros(2 * n, n);
        h.view_mut((0, 0), (n, n)).copy_from(q);
        h.view_mut((n, 0), (n, n)).copy_from(&(-&nm * q));
        v.view_mut((n, 0), (n, n)).copy_from(q);
        Ok(Frame {
            n,
            y: u.y.clone(),
            h,
            v,
        })
    }

    pub fn horizontal(&self, i: usize) -> DVector<f64> {
        self.h.column(i).into_owned()
    }

    pub fn vertical(&self, i: usize) -> DVector<f64> {
        self.v.column(i).into_owned()
    }

    /// `S = y^i δ/δx^i` in natural coordinates (the `∂/∂y` part is
    /// `N^i_j y^j − 2G^i = 0`).
    pub fn spray(&self) -> DVector<f64> {
        let n = self.n;
        let mut out = DVector::zeros(2 * n);
        let adapted_h = {
            let q_inv = self.h.view((0, 0), (n, n)).into_owned().try_inverse().expect("invertible");
            &self.h * q_inv
        };
        for i in 0..n {
            out += adapted_h.column(i) * self.y[i];
        }
        out
    }

    pub fn liouville(&self) -> DVector<f64> {
        let n = self.n;
        let mut out = DVector::zeros(2 * n);
        for i in 0..n {
            out[n + i] = self.y[i];
        }
        out
    }
}

/// Dense symbol matrix with its rank data.
#[derive(Clone, Debug)]
pub struct SymbolMatrix {
    pub matrix: DMatrix<f64>,
    pub rank: RankInfo,
}

impl SymbolMatrix {
    fn new(matrix: DMatrix<f64>) -> Self {
        let rank = rank(&matrix, RANK_REL_TOL);
        SymbolMatrix { matrix, rank }
    }

    pub fn nullity(&self) -> usize {
        self.rank.nullity(self.matrix.ncols())
    }

    pub fn ill_conditioned(&self) -> bool {
        self.rank.ambiguous(ILL_CONDITIONED.0, ILL_CONDITIONED.1)
    }
}

/// Rows of `σ¹(P₁)` for a symbol whose entry `Ã(∂_a)_k` sits in column
/// `col(a, k)`.
fn sigma1_rows(f: &Frame, ncols: usize, col: &dyn Fn(usize, usize) -> usize) -> Vec<Vec<f64>> {
    let n = f.n;
    // A(X)·w = Σ_{a,k} X_a w_k Ã(∂_a)_k
    let pair = |x: &DVector<f64>, w: &[f64], sign: f64, row: &mut Vec<f64>| {
        for a in 0..2 * n {
            if x[a] == 0.0 {
                continue;
            }
            for (k, wk) in w.iter().enumerate() {
                row[col(a, k)] += sign * x[a] * wk;
            }
        }
    };
    let dx = |x: &DVector<f64>| -> Vec<f64> { (0..n).map(|k| x[k]).collect() };
    let c = f.liouville();
    let mut rows = Vec::new();
    for j in 0..n {
        let mut row = vec![0.0; ncols];
        pair(&c, &dx(&f.horizontal(j)), 1.0, &mut row);
        rows.push(row);
    }
    for i in 0..n {
        for j in i + 1..n {
            let (hi, hj) = (f.horizontal(i), f.horizontal(j));
            let mut row = vec![0.0; ncols];
            pair(&f.vertical(i), &dx(&hj), 1.0, &mut row);
            pair(&f.vertical(j), &dx(&hi), -1.0, &mut row);
            rows.push(row);
            let mut row = vec![0.0; ncols];
            pair(&hi, &dx(&hj), 1.0, &mut row);
            pair(&hj, &dx(&hi), -1.0, &mut row);
            rows.push(row);
        }
    }
    rows
}

/// Rows `A(e)_k = 0` for every `k`.
fn contraction_rows(n: usize, e: &DVector<f64>, ncols: usize, col: &dyn Fn(usize, usize) -> usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| {
            let mut row = vec![0.0; ncols];
            for a in 0..2 * n {
                row[col(a, k)] += e[a];
            }
            row
        })
        .collect()
}

fn to_matrix(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

fn first_order_col(n: usize) -> impl Fn(usize, usize) -> usize {
    move |a, k| a * n + k
}

/// `σ¹(P₁)` at the frame's point: `n²` rows, `2n²` columns.
pub fn sigma1(f: &Frame) -> SymbolMatrix {
    let n = f.n;
    let ncols = 2 * n * n;
    SymbolMatrix::new(to_matrix(&sigma1_rows(f, ncols, &first_order_col(n)), ncols))
}

pub fn sigma1_matrix(s: &Spray, u: &Point) -> Result<SymbolMatrix, InvolutivityError> {
    Ok(sigma1(&Frame::adapted(s, u)?))
}

fn sym_index(m: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * m - a * (a + 1) / 2 + b
}

/// `σ²(P₁)`: for each direction `∂_c`, the rows of `σ¹` applied to `B(∂_c, ·)`.
pub fn sigma2(f: &Frame) -> SymbolMatrix {
    let n = f.n;
    let m = 2 * n;
    let ncols = n * m * (m + 1) / 2;
    let mut rows = Vec::new();
    for c in 0..m {
        let col = move |a: usize, k: usize| sym_index(m, c, a) * n + k;
        rows.extend(sigma1_rows(f, ncols, &col));
    }
    SymbolMatrix::new(to_matrix(&rows, ncols))
}

pub fn sigma2_matrix(s: &Spray, u: &Point) -> Result<SymbolMatrix, InvolutivityError> {
    Ok(sigma2(&Frame::adapted(s, u)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisChoice {
    /// `e_1 = h_1`, `e_j = h_j + v_{j−1}`, `e_n = S + v_{n−1}`, then `v_1..v_n`.
    Shifted,
    /// `h_1..h_n, v_1..v_n`.
    Unshifted,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionReport {
    pub n: usize,
    pub point: Point,
    pub basis: BasisChoice,
    pub dim_g1: usize,
    pub dim_g2: usize,
    /// `dim g¹_{e_1..e_j}` for `j = 1..n`.
    pub per_j: Vec<usize>,
    /// The same for `j = n+1..2n−1`.
    pub tail: Vec<usize>,
    pub cartan_sum: usize,
    /// `dim g² = dim g¹ + Σ_j dim g¹_{e_1..e_j}`.
    pub cartan_holds: bool,
    /// Counts equal `n²`, `n²(n+1)/2` and `n(n−j)`.
    pub matches_expected: bool,
    pub indeterminate: bool,
    /// Smallest ratio between a kept and the largest dropped singular value.
    pub min_gap: f64,
    /// Smallest kept singular value over the largest, across all matrices.
    pub min_kept_ratio: f64,
    pub warning: Option<String>,
}

impl DimensionReport {
    pub fn pass(&self) -> bool {
        self.cartan_holds && self.matches_expected && !self.indeterminate
    }
}

pub fn expected_g1(n: usize) -> usize {
    n * n
}

pub fn expected_g2(n: usize) -> usize {
    n * n * (n + 1) / 2
}

pub fn expected_per_j(n: usize) -> Vec<usize> {
    (1..=n).map(|j| n * (n - j)).collect()
}

fn basis_vectors(f: &Frame, choice: BasisChoice) -> Vec<DVector<f64>> {
    let n = f.n;
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        let e = match choice {
            BasisChoice::Unshifted => f.horizontal(j),
            BasisChoice::Shifted => {
                let base = if j + 1 == n && n > 1 { f.spray() } else { f.horizontal(j) };
                if j == 0 {
                    base
                } else {
                    base + f.vertical(j - 1)
                }
            }
        };
        out.push(e);
    }
    out.extend((0..n).map(|i| f.vertical(i)));
    out
}

fn kept_ratio(r: &RankInfo) -> f64 {
    match (r.singular_values.first(), r.rank) {
        (Some(&max), k) if k > 0 && max > 0.0 => r.singular_values[k - 1] / max,
        _ => 1.0,
    }
}

/// Cartan test at the frame's point.
pub fn cartan(f: &Frame, point: &Point, choice: BasisChoice) -> DimensionReport {
    let n = f.n;
    let s1 = sigma1(f);
    let s2 = sigma2(f);
    let ncols = 2 * n * n;
    let col = first_order_col(n);
    let basis = basis_vectors(f, choice);
    let frame_rank = rank(&DMatrix::from_columns(&basis), RANK_REL_TOL);
    let mut indeterminate = s1.ill_conditioned()
        || s2.ill_conditioned()
        || frame_rank.rank < 2 * n
        || frame_rank.ambiguous(ILL_CONDITIONED.0, ILL_CONDITIONED.1);
    let mut min_gap = s1.rank.gap.min(s2.rank.gap);
    let mut min_kept_ratio = kept_ratio(&s1.rank).min(kept_ratio(&s2.rank));
    let mut rows = sigma1_rows(f, ncols, &col);
    let mut dims = Vec::with_capacity(2 * n - 1);
    for e in basis.iter().take(2 * n - 1) {
        rows.extend(contraction_rows(n, e, ncols, &col));
        let m = SymbolMatrix::new(to_matrix(&rows, ncols));
        indeterminate |= m.ill_conditioned();
        min_gap = min_gap.min(m.rank.gap);
        min_kept_ratio = min_kept_ratio.min(kept_ratio(&m.rank));
        dims.push(m.nullity());
    }
    let (dim_g1, dim_g2) = (s1.nullity(), s2.nullity());
    let cartan_sum = dim_g1 + dims.iter().sum::<usize>();
    let tail = dims.split_off(n);
    let matches_expected = dim_g1 == expected_g1(n)
        && dim_g2 == expected_g2(n)
        && dims == expected_per_j(n)
        && tail.iter().all(|&d| d == 0);
    DimensionReport {
        n,
        point: point.clone(),
        basis: choice,
        dim_g1,
        dim_g2,
        per_j: dims,
        tail,
        cartan_sum,
        cartan_holds: cartan_sum == dim_g2,
        matches_expected,
        indeterminate,
        min_gap,
        min_kept_ratio,
        warning: if n > MAX_DIM {
            Some(format!("dimension {n} exceeds {MAX_DIM}; symbol matrices are large"))
        } else if min_kept_ratio < NEAR_DEGENERATE {
            Some(format!("near-degenerate basis: smallest kept singular value ratio {min_kept_ratio:.1e}"))
        } else {
            None
        },
    }
}

pub fn cartan_test(s: &Spray, u: &Point, choice: BasisChoice) -> Result<DimensionReport, InvolutivityError> {
    Ok(cartan(&Frame::adapted(s, u)?, u, choice))
}
