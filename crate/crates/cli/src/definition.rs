use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spraylab::metrizability::SemiBasicOneForm;
use spraylab::{expr, presets, Expr, Spray};

/// Input file schema. Presets are converted to the same shape so that both
/// sources hash the same way.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SprayDefinition {
    pub dim: usize,
    #[serde(rename = "G")]
    pub g: Vec<String>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Loaded {
    pub source: String,
    pub definition: SprayDefinition,
    pub spray: Spray,
    pub finsler: Option<Expr>,
    pub theta: Option<SemiBasicOneForm>,
}

impl Loaded {
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(&self.definition).expect("definition serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn name(&self) -> String {
        self.definition.name.clone().unwrap_or_else(|| self.source.clone())
    }
}

pub fn from_preset(name: &str) -> Result<Loaded> {
    let p = presets::lookup(name)?;
    let definition = SprayDefinition {
        dim: p.spray.dim(),
        g: p.spray.coefficients().iter().map(ToString::to_string).collect(),
        f: p.finsler.as_ref().map(ToString::to_string),
        theta: None,
        name: Some(p.name.clone()),
        description: None,
    };
    Ok(Loaded {
        source: format!("preset:{}", p.name),
        definition,
        spray: p.spray.named(p.name),
        finsler: p.finsler,
        theta: None,
    })
}

pub fn from_file(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let definition: SprayDefinition =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let n = definition.dim;
    if n == 0 {
        bail!("dim must be positive");
    }
    let g: Vec<&str> = definition.g.iter().map(String::as_str).collect();
    let mut spray = Spray::parse(n, &g)?;
    if let Some(name) = &definition.name {
        spray = spray.named(name.clone());
    }
    let finsler = definition
        .f
        .as_deref()
        .map(|f| expr::parse(f, n).context("parsing F"))
        .transpose()?;
    let theta = definition.theta.as_deref().map(|t| parse_theta(t, n)).transpose()?;
    Ok(Loaded {
        source: format!("file:{}", path.display()),
        definition,
        spray,
        finsler,
        theta,
    })
}

/// A path that exists is read as a definition file, anything else as a preset name.
pub fn resolve(target: &str) -> Result<Loaded> {
    let path = Path::new(target);
    if path.is_file() {
        from_file(path)
    } else {
        from_preset(target)
    }
}

pub fn parse_theta(components: &[String], n: usize) -> Result<SemiBasicOneForm> {
    if components.len() != n {
        bail!("theta needs {n} components, got {}", components.len());
    }
    let parsed = components
        .iter()
        .enumerate()
        .map(|(i, c)| expr::parse(c, n).with_context(|| format!("parsing theta component {}", i + 1)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SemiBasicOneForm::new(parsed))
}
