//! Dense linear algebra at sample points.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::expr::{eval, EvalError, Expr, Point};

/// Evaluate a matrix of expressions at `p`.
pub fn eval_matrix(m: &[Vec<Expr>], p: &Point) -> Result<DMatrix<f64>, EvalError> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut out = DMatrix::zeros(rows, cols);
    for (i, row) in m.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            out[(i, j)] = eval(e, p)?;
        }
    }
    Ok(out)
}

pub fn eval_vector(v: &[Expr], p: &Point) -> Result<Vec<f64>, EvalError> {
    v.iter().map(|e| eval(e, p)).collect()
}

/// Numerical rank from the singular values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankInfo {
    pub rank: usize,
    /// Singular values in decreasing order.
    pub singular_values: Vec<f64>,
    /// Smallest kept over largest dropped singular value (infinite when
    /// nothing is dropped or everything is dropped).
    pub gap: f64,
}

impl RankInfo {
    pub fn nullity(&self, cols: usize) -> usize {
        cols - self.rank
    }

    /// Smallest relative singular value that is neither clearly zero nor
    /// clearly nonzero: any `σ/σ_max` in `[lo, hi]`.
    pub fn ambiguous(&self, lo: f64, hi: f64) -> bool {
        let max = self.singular_values.first().copied().unwrap_or(0.0);
        if max == 0.0 {
            return false;
        }
        self.singular_values
            .iter()
            .any(|s| (lo..=hi).contains(&(s / max)))
    }
}

/// Rank with relative threshold: `σ > rel_tol · σ_max` counts.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> RankInfo {
    if m.nrows() == 0 || m.ncols() == 0 {
        return RankInfo {
            rank: 0,
            singular_values: vec![],
            gap: f64::INFINITY,
        };
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let max = sv[0];
    let rank = if max == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > rel_tol * max).count()
    };
    let gap = match (rank.checked_sub(1).map(|i| sv[i]), sv.get(rank)) {
        (Some(kept), Some(&dropped)) if dropped > 0.0 => kept / dropped,
        _ => f64::INFINITY,
    };
    RankInfo {
        rank,
        singular_values: sv,
        gap,
    }
}
