//! Built-in sprays and Finsler functions.

use thiserror::Error;

use crate::expr::{ops, parse, Expr};
use crate::spray::Spray;

pub const MAX_PRESET_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PresetError {
    #[error("unknown preset `{0}`")]
    Unknown(String),
    #[error("bad parameter in `{0}`")]
    BadParameter(String),
}

/// A spray together with a Finsler function projectively metrizing it, when
/// one is known.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: String,
    pub spray: Spray,
    pub finsler: Option<Expr>,
}

/// `|y| = sqrt(y1^2 + .. + yn^2)`.
pub fn euclidean_norm(n: usize) -> Expr {
    let squares: Vec<Expr> = (0..n).map(|i| Expr::y(i).powi(2)).collect();
    ops::sum(squares.iter()).sqrt()
}

pub fn flat(n: usize) -> Spray {
    Spray::flat(n)
}

/// `G¹ = ((y1)² + (y2)²)/2`, `G² = 2 y1 y2`.
pub fn anderson_thompson() -> Spray {
    Spray::parse(2, &["(y1^2 + y2^2)/2", "2*y1*y2"])
        .expect("static preset")
        .named("anderson-thompson")
}

/// `G^i = λ |y| y^i`: the flat spray shifted by `P = λ|y|`.
pub fn yang(lambda: f64, n: usize) -> Spray {
    let f = euclidean_norm(n);
    let g = (0..n)
        .map(|i| ops::mul(&ops::scale(&f, lambda), &Expr::y(i)))
        .collect();
    Spray::new(g)
        .expect("static preset")
        .named(format!("yang({lambda})"))
}

/// `F = sqrt((1 + x2²) y1² + (1 + x1²) y2²)`.
pub fn riemannian_finsler() -> Expr {
    parse("sqrt((1 + x2^2)*y1^2 + (1 + x1^2)*y2^2)", 2).expect("static preset")
}

/// Geodesic spray of [`riemannian_finsler`].
pub fn riemannian() -> Spray {
    Spray::parse(
        2,
        &[
            "(2*x2*y1*y2 - x1*y2^2)/(2*(1 + x2^2))",
            "(2*x1*y1*y2 - x2*y1^2)/(2*(1 + x1^2))",
        ],
    )
    .expect("static preset")
    .named("riemannian")
}

pub const PRESET_NAMES: [&str; 6] = [
    "flat2",
    "flat3",
    "flat<n>",
    "anderson-thompson",
    "yang(<lambda>[,<n>])",
    "riemannian",
];

/// Resolve a preset name such as `flat3`, `yang(0.5)`, `yang(lambda=0.5,n=3)`.
pub fn lookup(name: &str) -> Result<Preset, PresetError> {
    let key = name.trim().to_ascii_lowercase();
    let bad = || PresetError::BadParameter(name.to_string());
    if let Some(rest) = key.strip_prefix("flat") {
        let n: usize = rest.parse().map_err(|_| PresetError::Unknown(name.to_string()))?;
        if !(1..=MAX_PRESET_DIM).contains(&n) {
            return Err(bad());
        }
        return Ok(Preset {
            name: key.clone(),
            spray: flat(n),
            finsler: Some(euclidean_norm(n)),
        });
    }
    if key == "anderson-thompson" {
        return Ok(Preset {
            name: key,
            spray: anderson_thompson(),
            finsler: None,
        });
    }
    if key == "riemannian" {
        return Ok(Preset {
            name: key,
            spray: riemannian(),
            finsler: Some(riemannian_finsler()),
        });
    }
    if let Some(args) = key.strip_prefix("yang(").and_then(|r| r.strip_suffix(')')) {
        let mut lambda = None;
        let mut n = 2usize;
        for (pos, arg) in args.split(',').map(str::trim).enumerate() {
            let (k, v) = match arg.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None if pos == 0 => ("lambda", arg),
                None if pos == 1 => ("n", arg),
                None => return Err(bad()),
            };
            match k {
                "lambda" => lambda = Some(v.parse::<f64>().map_err(|_| bad())?),
                "n" => n = v.parse().map_err(|_| bad())?,
                _ => return Err(bad()),
            }
        }
        let lambda = lambda.filter(|l| l.is_finite()).ok_or_else(bad)?;
        if !(1..=MAX_PRESET_DIM).contains(&n) {
            return Err(bad());
        }
        return Ok(Preset {
            name: key,
            spray: yang(lambda, n),
            finsler: Some(euclidean_norm(n)),
        });
    }
    Err(PresetError::Unknown(name.to_string()))
}
