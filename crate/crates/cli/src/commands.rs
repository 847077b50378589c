use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};
use spraylab::expr::{self, sample_points};
use spraylab::geodesics::{self, integrate, projective_factor, trace_compare, EquivalenceReport, GeodesicTrace};
use spraylab::involutivity::{self, cartan_test, expected_g1, expected_g2, expected_per_j, BasisChoice};
use spraylab::metrizability::{check_conditions, recover_finsler, Candidate};
use spraylab::spray::DEFAULT_ISOTROPY_TOL;
use spraylab::{Point, Spray};

use crate::definition::{self, Loaded};

/// Trace distance accepted as "same unparametrized curve".
pub const TRACE_TOL: f64 = 1e-4;

pub struct Settings {
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
}

impl Settings {
    pub fn points(&self, n: usize) -> Vec<Point> {
        let probe = Point::new(vec![0.0; n], vec![1.0; n]).expect("probe point");
        std::iter::once(probe).chain(sample_points(n, self.samples, self.seed)).collect()
    }
}

pub struct Outcome {
    pub pass: bool,
    pub result: Value,
    pub summary: Vec<String>,
    pub trace_tol: Option<f64>,
}

fn verdict_line(name: &str, v: &spraylab::ZeroVerdict) -> String {
    let mark = if v.is_zero() { "ok  " } else { "FAIL" };
    format!("{mark} {name:<24} {} (residual {:.3e})", v.level(), v.residual())
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

pub fn analyze(input: &Loaded, set: &Settings) -> Result<Outcome> {
    let s = &input.spray;
    let pts = set.points(s.dim());
    s.ensure_valid(&pts, set.tol)?;
    let identities = s.identities(&pts, set.tol)?;
    let class = s.classify(&pts, set.tol, DEFAULT_ISOTROPY_TOL)?;
    let pass = identities.iter().all(|c| c.verdict.is_zero());
    let mut summary = vec![format!("classification: {}", class.label())];
    summary.extend(identities.iter().map(|c| verdict_line(c.name, &c.verdict)));
    let result = json!({
        "coefficients": s.coefficients().iter().map(ToString::to_string).collect::<Vec<_>>(),
        "connection": to_value(s.connection()),
        "jacobi": to_value(s.jacobi()),
        "jacobi_trace": s.jacobi().trace().to_string(),
        "curvature": to_value(&s.curvature().as_form()),
        "classification": to_value(&class),
        "identities": to_value(&identities),
    });
    Ok(Outcome { pass, result, summary, trace_tol: None })
}

pub fn metrizable(input: &Loaded, set: &Settings, finsler: Option<&str>, theta: &[String]) -> Result<Outcome> {
    let s = &input.spray;
    let n = s.dim();
    let candidate = if let Some(f) = finsler {
        Candidate::Finsler(expr::parse(f, n).context("parsing --finsler")?)
    } else if !theta.is_empty() {
        Candidate::Theta(definition::parse_theta(theta, n)?)
    } else if let Some(f) = &input.finsler {
        Candidate::Finsler(f.clone())
    } else if let Some(t) = &input.theta {
        Candidate::Theta(t.clone())
    } else {
        bail!("no candidate: pass --finsler or --theta, or put F or theta in the input");
    };
    let pts = set.points(n);
    s.ensure_valid(&pts, set.tol)?;
    let report = check_conditions(s, &candidate, &pts, set.tol)?;
    let recovery = if report.pass() { Some(recover_finsler(s, &report, &pts, set.tol)?) } else { None };
    let candidate_json = match &candidate {
        Candidate::Finsler(f) => json!({ "kind": "finsler", "F": f.to_string() }),
        Candidate::Theta(t) => json!({ "kind": "theta", "theta": to_value(t) }),
    };
    let mut summary = vec![
        verdict_line("L_C theta", &report.lie_liouville),
        verdict_line("d_J theta", &report.d_j),
        verdict_line("d_h theta", &report.d_h),
        format!("{:<4} {:<24} min i_S theta = {:.6e}", status(report.positivity.status == spraylab::metrizability::Status::Pass), "positivity", report.positivity.min_value),
        format!(
            "{:<4} {:<24} rank in [{}, {}], expected {}",
            status(report.rank.status == spraylab::metrizability::Status::Pass),
            "rank d theta",
            report.rank.min_rank,
            report.rank.max_rank,
            report.rank.expected
        ),
        verdict_line("d_R theta", &report.obstruction.d_r),
        verdict_line("cyclic sum", &report.obstruction.bianchi),
    ];
    if let Some(r) = &recovery {
        summary.push(format!("recovered F = {}", r.finsler));
        summary.push(format!("recovered P = {}", r.factor));
    }
    let result = json!({
        "candidate": candidate_json,
        "conditions": to_value(&report),
        "failures": report.failures(),
        "recovery": recovery.as_ref().map(to_value),
    });
    Ok(Outcome { pass: report.pass(), result, summary, trace_tol: None })
}

fn status(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

pub fn involutivity(input: &Loaded, set: &Settings, n_points: usize, basis: BasisChoice) -> Result<Outcome> {
    let s = &input.spray;
    let n = s.dim();
    if n > involutivity::MAX_DIM {
        bail!("involutivity supports n <= {}", involutivity::MAX_DIM);
    }
    let mut reports = Vec::with_capacity(n_points);
    for u in sample_points(n, n_points, set.seed) {
        reports.push(cartan_test(s, &u, basis)?);
    }
    let pass = !reports.is_empty() && reports.iter().all(|r| r.pass());
    let mut summary = vec![format!(
        "expected dim g1 = {}, dim g2 = {}, per j = {:?}",
        expected_g1(n),
        expected_g2(n),
        expected_per_j(n)
    )];
    for (k, r) in reports.iter().enumerate() {
        summary.push(format!(
            "{:<4} point {k}: g1 {} g2 {} per j {:?} cartan sum {}{}",
            status(r.pass()),
            r.dim_g1,
            r.dim_g2,
            r.per_j,
            r.cartan_sum,
            r.warning.as_deref().map(|w| format!(" ({w})")).unwrap_or_default()
        ));
    }
    let result = json!({
        "basis": to_value(&basis),
        "expected": { "dim_g1": expected_g1(n), "dim_g2": expected_g2(n), "per_j": expected_per_j(n) },
        "points": to_value(&reports),
    });
    Ok(Outcome { pass, result, summary, trace_tol: None })
}

pub struct GeodesicArgs {
    pub x0: Option<Vec<f64>>,
    pub y0: Option<Vec<f64>>,
    pub t_end: f64,
    pub steps: usize,
    pub compare: Option<String>,
    pub trace: Option<PathBuf>,
    pub compare_trace: Option<PathBuf>,
}

fn trace_summary(s: &Spray, t: &GeodesicTrace) -> Result<Value> {
    let residual = if t.len() >= 5 { Some(geodesics::ode_residual(s, t)?) } else { None };
    Ok(json!({
        "method": t.method,
        "step": t.step,
        "points": t.len(),
        "final_t": t.t.last(),
        "final_x": t.x.last(),
        "final_y": t.y.last(),
        "arclength": t.arclength().last(),
        "ode_residual": residual,
        "halted": to_value(&t.halted),
    }))
}

fn write_trace(path: &PathBuf, t: &GeodesicTrace) -> Result<()> {
    let body = if path.extension().is_some_and(|e| e == "json") {
        serde_json::to_string_pretty(t)? + "\n"
    } else {
        t.to_csv()
    };
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

pub fn geodesics(input: &Loaded, set: &Settings, args: &GeodesicArgs) -> Result<Outcome> {
    let s = &input.spray;
    let n = s.dim();
    let x0 = args.x0.clone().unwrap_or_else(|| vec![0.0; n]);
    let y0 = args.y0.clone().unwrap_or_else(|| {
        let mut y = vec![0.0; n];
        y[0] = 1.0;
        y
    });
    if x0.len() != n || y0.len() != n {
        bail!("--x0 and --y0 need {n} components");
    }
    let trace = integrate(s, &x0, &y0, args.t_end, args.steps)?;
    if let Some(p) = &args.trace {
        write_trace(p, &trace)?;
    }
    let mut pass = trace.halted.is_none();
    let mut summary = vec![match &trace.halted {
        None => format!("ok   integrated {} steps of {:.3e}", args.steps, trace.step),
        Some(h) => format!("FAIL halted at t = {} ({})", h.time, h.reason),
    }];
    let mut result = json!({
        "x0": x0,
        "y0": y0,
        "T": args.t_end,
        "steps": args.steps,
        "trace": trace_summary(s, &trace)?,
    });
    if let Some(other) = &args.compare {
        let other = definition::resolve(other)?;
        let s2 = &other.spray;
        if s2.dim() != n {
            bail!("cannot compare dimension {n} with dimension {}", s2.dim());
        }
        let pts = set.points(n);
        let factor = projective_factor(s, s2, &pts, set.tol)?;
        let trace2 = integrate(s2, &x0, &y0, args.t_end, args.steps)?;
        if let Some(p) = &args.compare_trace {
            write_trace(p, &trace2)?;
        }
        let distance = trace_compare(&trace, &trace2).map_err(|e| anyhow!("comparing traces: {e}"))?;
        let eq = EquivalenceReport { factor, trace: distance, trace_tol: TRACE_TOL };
        pass &= eq.pass() && trace2.halted.is_none();
        summary.push(format!(
            "{:<4} D parallel to y: max residual {:.3e}{}",
            status(eq.factor.parallel),
            eq.factor.max_parallel_residual,
            eq.factor
                .witness
                .as_ref()
                .map(|w| format!(", witness x = {:?} y = {:?}", w.point.x, w.point.y))
                .unwrap_or_default()
        ));
        summary.push(format!("{:<4} P homogeneity residual {:.3e}", status(eq.factor.homogeneous), eq.factor.homogeneity_residual));
        summary.push(format!(
            "{:<4} trace distance {:.3e} over arclength {:.4}",
            status(eq.trace.distance < TRACE_TOL),
            eq.trace.distance,
            eq.trace.arclength
        ));
        result["compare"] = json!({
            "against": other.source,
            "trace": trace_summary(s2, &trace2)?,
            "equivalence": to_value(&eq),
            "pass": eq.pass(),
        });
    }
    Ok(Outcome { pass, result, summary, trace_tol: Some(TRACE_TOL) })
}
