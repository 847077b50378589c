use serde::Serialize;
use thiserror::Error;

use super::{eval, ops, EvalError, Expr, Point};

/// Outcome of a zero test, recording which level established it.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "level", rename_all = "snake_case")]
pub enum ZeroVerdict {
    SymbolicZero,
    NumericZero {
        max_residual: f64,
        /// Samples dropped because the expression was not defined there.
        skipped: usize,
    },
    NonZero {
        witness: Point,
        value: f64,
    },
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::NonZero { .. })
    }

    pub fn level(&self) -> &'static str {
        match self {
            ZeroVerdict::SymbolicZero => "symbolic_zero",
            ZeroVerdict::NumericZero { .. } => "numeric_zero",
            ZeroVerdict::NonZero { .. } => "non_zero",
        }
    }

    /// Largest observed magnitude (zero for a symbolic verdict).
    pub fn residual(&self) -> f64 {
        match self {
            ZeroVerdict::SymbolicZero => 0.0,
            ZeroVerdict::NumericZero { max_residual, .. } => *max_residual,
            ZeroVerdict::NonZero { value, .. } => value.abs(),
        }
    }

    /// Combine verdicts of several components: the weakest level wins and
    /// the worst residual is kept.
    pub fn combine(verdicts: impl IntoIterator<Item = ZeroVerdict>) -> ZeroVerdict {
        let mut out = ZeroVerdict::SymbolicZero;
        for v in verdicts {
            out = match (out, v) {
                (ZeroVerdict::SymbolicZero, v) => v,
                (a @ ZeroVerdict::NonZero { .. }, b @ ZeroVerdict::NonZero { .. }) => {
                    if b.residual() > a.residual() {
                        b
                    } else {
                        a
                    }
                }
                (a @ ZeroVerdict::NonZero { .. }, _) => a,
                (_, b @ ZeroVerdict::NonZero { .. }) => b,
                (
                    ZeroVerdict::NumericZero {
                        max_residual: r1,
                        skipped: s1,
                    },
                    ZeroVerdict::NumericZero {
                        max_residual: r2,
                        skipped: s2,
                    },
                ) => ZeroVerdict::NumericZero {
                    max_residual: r1.max(r2),
                    skipped: s1.max(s2),
                },
                (a, ZeroVerdict::SymbolicZero) => a,
            };
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ZeroTestError {
    #[error("no sample points supplied")]
    NoSamples,
    #[error("expression undefined at every sample point; first failure: {0}")]
    AllSamplesSkipped(EvalError),
}

/// Tri-state zero test: symbolic first, then the maximum of `|e|` over
/// `samples` against the absolute tolerance `tol`.
pub fn is_zero(e: &Expr, samples: &[Point], tol: f64) -> Result<ZeroVerdict, ZeroTestError> {
    if samples.is_empty() {
        return Err(ZeroTestError::NoSamples);
    }
    if ops::is_symbolic_zero(e) {
        return Ok(ZeroVerdict::SymbolicZero);
    }
    let mut worst: Option<(usize, f64)> = None;
    let mut skipped = 0;
    let mut first_error = None;
    for (i, p) in samples.iter().enumerate() {
        match eval(e, p) {
            Ok(v) => {
                if worst.is_none_or(|(_, w)| v.abs() > w.abs()) {
                    worst = Some((i, v));
                }
            }
            Err(err) => {
                skipped += 1;
                first_error.get_or_insert(err);
            }
        }
    }
    let Some((i, value)) = worst else {
        return Err(ZeroTestError::AllSamplesSkipped(first_error.unwrap()));
    };
    if value.abs() < tol {
        Ok(ZeroVerdict::NumericZero {
            max_residual: value.abs(),
            skipped,
        })
    } else {
        Ok(ZeroVerdict::NonZero {
            witness: samples[i].clone(),
            value,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, sample_points};

    #[test]
    fn three_levels() {
        let pts = sample_points(2, 20, 42);
        let v = is_zero(&parse("y1 - y1", 2).unwrap(), &pts, 1e-9).unwrap();
        assert_eq!(v, ZeroVerdict::SymbolicZero);

        let e = parse("sin(x1)^2 + cos(x1)^2 - 1", 2).unwrap();
        let v = is_zero(&e, &pts, 1e-9).unwrap();
        assert!(matches!(v, ZeroVerdict::NumericZero { .. }), "{v:?}");

        let mut pts = pts;
        pts.push(Point::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap());
        let v = is_zero(&parse("y1*y2", 2).unwrap(), &pts, 1e-9).unwrap();
        let ZeroVerdict::NonZero { value, .. } = v else {
            panic!("{v:?}")
        };
        assert!(value.abs() >= 1.0);
    }

    #[test]
    fn all_samples_skipped_is_an_error() {
        let p = Point::new(vec![0.0], vec![-1.0]).unwrap();
        let r = is_zero(&parse("log(y1) + x1", 1).unwrap(), &[p], 1e-9);
        assert!(matches!(r, Err(ZeroTestError::AllSamplesSkipped(_))));
        assert_eq!(
            is_zero(&parse("y1", 1).unwrap(), &[], 1e-9),
            Err(ZeroTestError::NoSamples)
        );
    }

    #[test]
    fn skipped_samples_are_counted() {
        let pts = vec![
            Point::new(vec![0.0], vec![1.0]).unwrap(),
            Point::new(vec![0.0], vec![-1.0]).unwrap(),
        ];
        let e = parse("log(y1)*0.5 - log(y1)/2 + sin(x1)^2 + cos(x1)^2 - 1", 1).unwrap();
        let v = is_zero(&e, &pts, 1e-9).unwrap();
        assert!(matches!(v, ZeroVerdict::NumericZero { skipped: 1, .. }), "{v:?}");
    }
}
