use serde::Serialize;

use super::{Spray, SprayError};
use crate::expr::{Point, ZeroVerdict};
use crate::numeric::eval_matrix;

/// Isotropy residual threshold, relative to `‖Φ‖_max` at each sample.
pub const DEFAULT_ISOTROPY_TOL: f64 = 1e-8;

/// Pointwise data of `Φ = λJ + η ⊗ ℂ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsotropyData {
    pub point: Point,
    pub lambda: f64,
    pub eta: Vec<f64>,
    /// `max |R^i_j − λδ^i_j − y^i η_j|`.
    pub residual: f64,
    /// `max |R^i_j|`.
    pub phi_max: f64,
}

impl IsotropyData {
    pub fn passes(&self, tol: f64) -> bool {
        self.residual <= tol * self.phi_max
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Classification {
    /// `R ≡ 0`. Always the case for `n = 1`.
    Flat { degenerate: bool, verdict: ZeroVerdict },
    Isotropic {
        max_relative_residual: f64,
        samples: Vec<IsotropyData>,
    },
    General { witness: IsotropyData },
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Flat { .. } => "flat",
            Classification::Isotropic { .. } => "isotropic",
            Classification::General { .. } => "general",
        }
    }
}

impl Spray {
    /// Split `Φ(p)` into `λ`, `η` and the residual.
    pub fn isotropy_at(&self, p: &Point) -> Result<IsotropyData, SprayError> {
        let n = self.n;
        if p.dim() != n {
            return Err(SprayError::DimensionMismatch(n, p.dim()));
        }
        let r = eval_matrix(self.jacobi().components(), p)?;
        let y = &p.y;
        let y2: f64 = y.iter().map(|c| c * c).sum();
        let lambda = if n > 1 { r.trace() / (n - 1) as f64 } else { 0.0 };
        let eta: Vec<f64> = (0..n)
            .map(|j| ((0..n).map(|i| y[i] * r[(i, j)]).sum::<f64>() - lambda * y[j]) / y2)
            .collect();
        let mut residual = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { lambda } else { 0.0 };
                residual = residual.max((r[(i, j)] - delta - y[i] * eta[j]).abs());
            }
        }
        Ok(IsotropyData {
            point: p.clone(),
            lambda,
            eta,
            residual,
            phi_max: r.amax(),
        })
    }

    /// `zero_tol` decides flatness, `iso_tol` is relative to `‖Φ‖_max`.
    pub fn classify(&self, samples: &[Point], zero_tol: f64, iso_tol: f64) -> Result<Classification, SprayError> {
        let verdict = self.curvature().as_form().verdict(samples, zero_tol)?;
        if self.n == 1 || verdict.is_zero() {
            return Ok(Classification::Flat {
                degenerate: self.n == 1,
                verdict,
            });
        }
        let mut data = Vec::with_capacity(samples.len());
        let mut worst = 0.0_f64;
        for p in samples {
            let d = self.isotropy_at(p)?;
            if !d.passes(iso_tol) {
                return Ok(Classification::General { witness: d });
            }
            if d.phi_max > 0.0 {
                worst = worst.max(d.residual / d.phi_max);
            }
            data.push(d);
        }
        Ok(Classification::Isotropic {
            max_relative_residual: worst,
            samples: data,
        })
    }
}
