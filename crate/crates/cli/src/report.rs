use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "spraylab-report/1";

#[derive(Debug, Serialize)]
pub struct InputInfo {
    pub source: String,
    pub name: String,
    pub dim: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Tolerances {
    pub zero: f64,
    pub isotropy: f64,
    pub rank_relative: f64,
    pub positivity_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Sampling {
    pub seed: u64,
    pub requested: usize,
    /// `x = 0, y = (1, .., 1)` is evaluated before the random samples.
    pub probe: bool,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub input: InputInfo,
    pub sampling: Sampling,
    pub tolerances: Tolerances,
    pub pass: bool,
    pub result: Value,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self, summary: &[String]) -> String {
        let mut out = format!(
            "spraylab {} {}\ninput   {} ({}, n = {})\nsha256  {}\nseed    {}  samples {}\n",
            self.tool_version,
            self.command,
            self.input.name,
            self.input.source,
            self.input.dim,
            self.input.sha256,
            self.sampling.seed,
            self.sampling.requested,
        );
        for line in summary {
            out.push_str("  ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(if self.pass { "PASS\n" } else { "FAIL\n" });
        out
    }
}
