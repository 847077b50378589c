//! Geodesics `ẍ^i + 2G^i(x, ẋ) = 0` and projective equivalence of sprays.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{eval, EvalError, Point, PointError};
use crate::numeric::eval_vector;
use crate::spray::Spray;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeodesicError {
    #[error("initial state: {0}")]
    InitialState(#[from] PointError),
    #[error("need at least one step and a positive horizon")]
    BadGrid,
    #[error("sprays have dimensions {0} and {1}")]
    DimensionMismatch(usize, usize),
    #[error("trace has zero length")]
    ZeroLength,
    #[error("traces do not start at the same point in the same direction")]
    NotComparable,
    #[error("no samples")]
    NoSamples,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Halt {
    pub time: f64,
    pub reason: String,
}

/// Fixed-step trajectory with `y = dx/dt`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicTrace {
    pub method: &'static str,
    pub step: f64,
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub halted: Option<Halt>,
}

impl GeodesicTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    /// Columns `t,x1..xn,y1..yn`.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut out = String::from("t");
        for i in 1..=n {
            out += &format!(",x{i}");
        }
        for i in 1..=n {
            out += &format!(",y{i}");
        }
        out.push('\n');
        for k in 0..self.len() {
            out += &format!("{}", self.t[k]);
            for v in self.x[k].iter().chain(&self.y[k]) {
                out += &format!(",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Cumulative chord length of the base curve.
    pub fn arclength(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.len());
        let mut acc = 0.0;
        for k in 0..self.len() {
            if k > 0 {
                acc += dist(&self.x[k], &self.x[k - 1]);
            }
            s.push(acc);
        }
        s
    }

    /// Base point at arclength `s` by linear interpolation.
    fn at_arclength(&self, arc: &[f64], s: f64) -> Vec<f64> {
        let k = arc.partition_point(|&a| a < s).clamp(1, self.len() - 1);
        let (a0, a1) = (arc[k - 1], arc[k]);
        let w = if a1 > a0 { ((s - a0) / (a1 - a0)).clamp(0.0, 1.0) } else { 0.0 };
        self.x[k - 1]
            .iter()
            .zip(&self.x[k])
            .map(|(p, q)| p + w * (q - p))
            .collect()
    }

    /// Largest distance of a base point from the line through `x(0)` along `y(0)`.
    pub fn collinearity_residual(&self) -> f64 {
        let x0 = &self.x[0];
        let d = &self.y[0];
        let dn = norm(d);
        self.x
            .iter()
            .map(|p| {
                let r: Vec<f64> = p.iter().zip(x0).map(|(a, b)| a - b).collect();
                let along: f64 = r.iter().zip(d).map(|(a, b)| a * b).sum::<f64>() / (dn * dn);
                norm(&r.iter().zip(d).map(|(a, b)| a - along * b).collect::<Vec<_>>())
            })
            .fold(0.0, f64::max)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

/// `ẏ = −2G(x, y)`.
fn accel(s: &Spray, x: &[f64], y: &[f64]) -> Result<Vec<f64>, Halt> {
    let p = Point::new(x.to_vec(), y.to_vec()).map_err(|e| Halt {
        time: f64::NAN,
        reason: e.to_string(),
    })?;
    let g = eval_vector(s.coefficients(), &p).map_err(|e| Halt {
        time: f64::NAN,
        reason: e.to_string(),
    })?;
    Ok(g.into_iter().map(|v| -2.0 * v).collect())
}

fn axpy(a: &[f64], c: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p + c * q).collect()
}

/// Classical RK4 on `ẋ = y`, `ẏ = −2G`. Stops early, keeping the partial
/// trace, when `|y|` drops below the fiber floor or evaluation fails.
pub fn integrate(s: &Spray, x0: &[f64], y0: &[f64], t_end: f64, steps: usize) -> Result<GeodesicTrace, GeodesicError> {
    let start = Point::new(x0.to_vec(), y0.to_vec())?;
    if start.dim() != s.dim() {
        return Err(GeodesicError::DimensionMismatch(s.dim(), start.dim()));
    }
    if steps == 0 || t_end.is_nan() || t_end <= 0.0 {
        return Err(GeodesicError::BadGrid);
    }
    let h = t_end / steps as f64;
    let mut trace = GeodesicTrace {
        method: "rk4",
        step: h,
        t: vec![0.0],
        x: vec![x0.to_vec()],
        y: vec![y0.to_vec()],
        halted: None,
    };
    let (mut x, mut y) = (x0.to_vec(), y0.to_vec());
    for k in 0..steps {
        let t = k as f64 * h;
        let stage = || -> Result<(Vec<f64>, Vec<f64>), Halt> {
            let k1x = y.clone();
            let k1y = accel(s, &x, &y)?;
            let (x2, y2) = (axpy(&x, h / 2.0, &k1x), axpy(&y, h / 2.0, &k1y));
            let k2y = accel(s, &x2, &y2)?;
            let k2x = y2;
            let (x3, y3) = (axpy(&x, h / 2.0, &k2x), axpy(&y, h / 2.0, &k2y));
            let k3y = accel(s, &x3, &y3)?;
            let k3x = y3;
            let (x4, y4) = (axpy(&x, h, &k3x), axpy(&y, h, &k3y));
            let k4y = accel(s, &x4, &y4)?;
            let k4x = y4;
            let combine = |base: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
                (0..base.len())
                    .map(|i| base[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
                    .collect()
            };
            Ok((combine(&x, &k1x, &k2x, &k3x, &k4x), combine(&y, &k1y, &k2y, &k3y, &k4y)))
        };
        match stage() {
            Ok((nx, ny)) if nx.iter().chain(&ny).all(|v| v.is_finite()) => {
                x = nx;
                y = ny;
                trace.t.push(t + h);
                trace.x.push(x.clone());
                trace.y.push(y.clone());
            }
            Ok(_) => {
                trace.halted = Some(Halt {
                    time: t,
                    reason: "state is no longer finite".into(),
                });
                break;
            }
            Err(mut halt) => {
                halt.time = t;
                trace.halted = Some(halt);
                break;
            }
        }
    }
    Ok(trace)
}

/// Largest `|ẏ + 2G|` and `|ẋ − y|` along the trace, with derivatives
/// from fourth-order central differences.
pub fn ode_residual(s: &Spray, trace: &GeodesicTrace) -> Result<f64, GeodesicError> {
    let h = trace.step;
    let n = trace.dim();
    let d4 = |v: &[Vec<f64>], k: usize, i: usize| {
        (-v[k + 2][i] + 8.0 * v[k + 1][i] - 8.0 * v[k - 1][i] + v[k - 2][i]) / (12.0 * h)
    };
    let mut worst = 0.0_f64;
    for k in 2..trace.len().saturating_sub(2) {
        let p = Point::new(trace.x[k].clone(), trace.y[k].clone()).map_err(GeodesicError::InitialState)?;
        for i in 0..n {
            let g = eval(&s.coefficients()[i], &p)?;
            worst = worst.max((d4(&trace.y, k, i) + 2.0 * g).abs());
            worst = worst.max((d4(&trace.x, k, i) - trace.y[k][i]).abs());
        }
    }
    Ok(worst)
}

/// Observed order from endpoints at `steps`, `2·steps`, `4·steps`.
pub fn convergence_order(s: &Spray, x0: &[f64], y0: &[f64], t_end: f64, steps: usize) -> Result<f64, GeodesicError> {
    let end = |m: usize| -> Result<Vec<f64>, GeodesicError> {
        let tr = integrate(s, x0, y0, t_end, m)?;
        if tr.halted.is_some() {
            return Err(GeodesicError::BadGrid);
        }
        let k = tr.len() - 1;
        Ok(tr.x[k].iter().chain(&tr.y[k]).copied().collect())
    };
    let (a, b, c) = (end(steps)?, end(2 * steps)?, end(4 * steps)?);
    Ok((dist(&a, &b) / dist(&b, &c)).log2())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceDistance {
    pub distance: f64,
    /// Arclength range that was compared.
    pub arclength: f64,
}

/// Maximum base-point distance after reparametrizing both traces by arclength.
pub fn trace_compare(a: &GeodesicTrace, b: &GeodesicTrace) -> Result<TraceDistance, GeodesicError> {
    if a.dim() != b.dim() {
        return Err(GeodesicError::DimensionMismatch(a.dim(), b.dim()));
    }
    if a.len() < 2 || b.len() < 2 {
        return Err(GeodesicError::ZeroLength);
    }
    let (da, db) = (&a.y[0], &b.y[0]);
    let cos = da.iter().zip(db).map(|(p, q)| p * q).sum::<f64>() / (norm(da) * norm(db));
    if dist(&a.x[0], &b.x[0]) > 1e-12 || cos < 1.0 - 1e-12 {
        return Err(GeodesicError::NotComparable);
    }
    let (sa, sb) = (a.arclength(), b.arclength());
    let len = sa[sa.len() - 1].min(sb[sb.len() - 1]);
    if len <= 0.0 {
        return Err(GeodesicError::ZeroLength);
    }
    let mut distance = 0.0_f64;
    for &s in sa.iter().chain(&sb).filter(|&&s| s <= len) {
        distance = distance.max(dist(&a.at_arclength(&sa, s), &b.at_arclength(&sb, s)));
    }
    Ok(TraceDistance { distance, arclength: len })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorSample {
    pub point: Point,
    pub p: f64,
}

/// `D = 2(G₂ − G₁)` should be `2P y`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectiveFactor {
    pub parallel: bool,
    /// Largest `|D − (D·y/|y|²) y| / max(1, |D|)`.
    pub max_parallel_residual: f64,
    /// First sample where `D` is not parallel to `y`.
    pub witness: Option<FactorSample>,
    pub samples: Vec<FactorSample>,
    /// Largest `|P(x, cy) − cP(x, y)| / max(1, |cP|)` for `c ∈ {0.5, 2}`.
    pub homogeneity_residual: f64,
    pub homogeneous: bool,
}

impl ProjectiveFactor {
    pub fn pass(&self) -> bool {
        self.parallel && self.homogeneous
    }
}

fn factor_at(s1: &Spray, s2: &Spray, p: &Point) -> Result<(f64, f64), GeodesicError> {
    let g1 = eval_vector(s1.coefficients(), p)?;
    let g2 = eval_vector(s2.coefficients(), p)?;
    let d: Vec<f64> = g2.iter().zip(&g1).map(|(a, b)| 2.0 * (a - b)).collect();
    let y2: f64 = p.y.iter().map(|c| c * c).sum();
    let dy: f64 = d.iter().zip(&p.y).map(|(a, b)| a * b).sum();
    let resid: Vec<f64> = d.iter().zip(&p.y).map(|(a, b)| a - dy / y2 * b).collect();
    Ok((dy / (2.0 * y2), norm(&resid) / norm(&d).max(1.0)))
}

pub fn projective_factor(s1: &Spray, s2: &Spray, samples: &[Point], tol: f64) -> Result<ProjectiveFactor, GeodesicError> {
    if s1.dim() != s2.dim() {
        return Err(GeodesicError::DimensionMismatch(s1.dim(), s2.dim()));
    }
    if samples.is_empty() {
        return Err(GeodesicError::NoSamples);
    }
    let mut out = ProjectiveFactor {
        parallel: true,
        max_parallel_residual: 0.0,
        witness: None,
        samples: Vec::with_capacity(samples.len()),
        homogeneity_residual: 0.0,
        homogeneous: true,
    };
    for p in samples {
        let (pv, resid) = factor_at(s1, s2, p)?;
        out.max_parallel_residual = out.max_parallel_residual.max(resid);
        let sample = FactorSample { point: p.clone(), p: pv };
        if resid >= tol && out.witness.is_none() {
            out.parallel = false;
            out.witness = Some(sample.clone());
        }
        for c in [0.5, 2.0] {
            let (pc, _) = factor_at(s1, s2, &p.scale_fiber(c))?;
            let r = (pc - c * pv).abs() / (c * pv).abs().max(1.0);
            out.homogeneity_residual = out.homogeneity_residual.max(r);
        }
        out.samples.push(sample);
    }
    out.homogeneous = out.homogeneity_residual < tol;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub factor: ProjectiveFactor,
    pub trace: TraceDistance,
    pub trace_tol: f64,
}

impl EquivalenceReport {
    pub fn pass(&self) -> bool {
        self.factor.pass() && self.trace.distance < self.trace_tol
    }
}
