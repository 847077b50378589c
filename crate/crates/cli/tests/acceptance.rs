//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines are always printed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spraylab::expr::generate::{all_vars, central_difference, random_expr, smooth_at, GeneratorConfig};
use spraylab::expr::{diff, eval, is_zero, ops, parse, sample_points, simplify};
use spraylab::geodesics::{convergence_order, integrate, projective_factor, trace_compare};
use spraylab::involutivity::{cartan_test, expected_g1, expected_g2, expected_per_j, BasisChoice};
use spraylab::metrizability::{check_conditions, obstruction, recover_finsler, Candidate, SemiBasicOneForm, Status};
use spraylab::{presets, Point, Spray, ZeroVerdict};

const TOL: f64 = 1e-9;
const SEED: u64 = 42;

fn samples(n: usize) -> Vec<Point> {
    sample_points(n, 50, SEED)
}

fn with_probe(n: usize) -> Vec<Point> {
    let probe = Point::new(vec![0.0; n], vec![1.0; n]).unwrap();
    std::iter::once(probe).chain(samples(n)).collect()
}

fn theta(n: usize, comps: &[&str]) -> SemiBasicOneForm {
    SemiBasicOneForm::new(comps.iter().map(|c| parse(c, n).unwrap()).collect())
}

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn involutivity_counts() -> Result<String, String> {
    let start = Instant::now();
    let sprays: Vec<Spray> = vec![
        presets::flat(2),
        presets::anderson_thompson(),
        presets::yang(0.5, 2),
        presets::riemannian(),
        presets::flat(3),
        presets::yang(0.5, 3),
        presets::flat(4),
        presets::yang(0.5, 4),
    ];
    let mut points = 0;
    for s in &sprays {
        let n = s.dim();
        for u in sample_points(n, 10, SEED + n as u64) {
            let r = cartan_test(s, &u, BasisChoice::Shifted).map_err(|e| e.to_string())?;
            ensure(
                r.dim_g1 == expected_g1(n) && r.dim_g2 == expected_g2(n) && r.per_j == expected_per_j(n),
                || format!("{:?} at {:?}: g1 {} g2 {} per j {:?}", s.name(), u, r.dim_g1, r.dim_g2, r.per_j),
            )?;
            ensure(r.cartan_holds && !r.indeterminate, || format!("Cartan test fails at {u:?}: {r:?}"))?;
            points += 1;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(5), || format!("took {t:?}"))?;
    Ok(format!("{points} points, counts 4/6, 9/18, 16/40, per j n(n-j), {:.2}s", t.as_secs_f64()))
}

fn structural_identities() -> Result<String, String> {
    let start = Instant::now();
    let wanted = ["Phi = i_S R", "[J,Phi] = 3R", "[J,J] = 0", "[J,h] = 0", "[C,h] = 0", "h^2 = h", "R = [h,h]/2"];
    let sprays = [presets::flat(2), presets::anderson_thompson(), presets::yang(0.5, 2), presets::riemannian()];
    let mut checked = 0;
    for s in &sprays {
        let ids = s.identities(&samples(2), TOL).map_err(|e| e.to_string())?;
        for w in wanted {
            let c = ids.iter().find(|c| c.name == w).ok_or_else(|| format!("missing identity {w}"))?;
            ensure(c.verdict.is_zero(), || format!("{:?}: {w} is {:?}", s.name(), c.verdict))?;
            checked += 1;
        }
        ensure(ids.iter().all(|c| c.verdict.is_zero()), || format!("{:?}: {ids:?}", s.name()))?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(30), || format!("took {t:?}"))?;
    Ok(format!("{checked} identity verdicts zero at tol 1e-9 over 50 samples, {:.2}s", t.as_secs_f64()))
}

fn max_abs_diff(a: &spraylab::Expr, b: &spraylab::Expr, pts: &[Point]) -> f64 {
    pts.iter().map(|p| (eval(a, p).unwrap() - eval(b, p).unwrap()).abs()).fold(0.0, f64::max)
}

fn necessity_round_trip() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        let pts = samples(n);
        let f = presets::euclidean_norm(n);
        for lambda in [0.0, 0.5] {
            let p = ops::scale(&f, lambda);
            let s = Spray::flat(n).projective_transform(&p, &pts, TOL).map_err(|e| e.to_string())?;
            let r = check_conditions(&s, &Candidate::Finsler(f.clone()), &pts, TOL).map_err(|e| e.to_string())?;
            ensure(r.pass(), || format!("n = {n}, lambda = {lambda}: {:?}", r.failures()))?;
            let rec = recover_finsler(&s, &r, &pts, TOL).map_err(|e| e.to_string())?;
            let f_err = max_abs_diff(&rec.finsler, &f, &pts);
            // S(F)/(2F) is the factor taking S back to S_F, the opposite of the shift
            let p_err = max_abs_diff(&ops::scale(&rec.factor, -1.0), &p, &pts);
            ensure(f_err < 1e-9 && p_err < 1e-9, || format!("n = {n}, lambda = {lambda}: F {f_err:e}, P {p_err:e}"))?;
            for g in &rec.spray_coefficients {
                ensure(is_zero(g, &pts, TOL).map_err(|e| e.to_string())?.is_zero(), || format!("S_F not flat: {g}"))?;
            }
            worst = worst.max(f_err).max(p_err);
        }
    }
    Ok(format!("lambda in {{0, 0.5}}, n in {{2, 3}}: six verdicts pass, F and P recovered (max error {worst:.1e})"))
}

fn obstruction_check() -> Result<String, String> {
    let pts2 = samples(2);
    let thetas2 = [theta(2, &["x1*y2^3", "sin(y1)"]), theta(2, &["y1/sqrt(y1^2+y2^2)", "y2/sqrt(y1^2+y2^2)"])];
    for s in [presets::anderson_thompson(), presets::riemannian(), presets::yang(0.5, 2)] {
        for t in &thetas2 {
            let o = obstruction(&s, t);
            ensure(o.d_r.is_symbolic_zero() && o.bianchi.is_empty(), || format!("n = 2: {:?} {:?}", s.name(), o.d_r))?;
            ensure(o.d_r.verdict(&pts2, TOL).unwrap().is_zero(), || "n = 2 verdict".into())?;
        }
    }
    let pts3 = samples(3);
    let any3 = theta(3, &["x1*y2", "y3^2*x2", "cos(x3)*y1"]);
    let o = obstruction(&Spray::flat(3), &any3);
    ensure(o.d_r.verdict(&pts3, TOL).unwrap().is_zero(), || "flat3 d_R nonzero".into())?;
    let mut agreeing = 0;
    for s in [presets::yang(0.5, 3), Spray::flat(3), presets::yang(0.5, 2), presets::riemannian()] {
        let n = s.dim();
        let f = if s.name() == Some("riemannian") { presets::riemannian_finsler() } else { presets::euclidean_norm(n) };
        let r = check_conditions(&s, &Candidate::Finsler(f), &samples(n), TOL).map_err(|e| e.to_string())?;
        ensure(r.differential_pass(), || format!("{:?}: {:?}", s.name(), r.failures()))?;
        ensure(r.obstruction.d_r.is_zero() && r.obstruction.bianchi.is_zero(), || format!("{:?}: {:?}", s.name(), r.obstruction))?;
        agreeing += 1;
    }
    Ok(format!("zero for n = 2, flat3, yang(0.5) with d_J|y|; d_R and cyclic-sum paths agree in {agreeing} passing cases"))
}

fn negative_controls() -> Result<String, String> {
    let pts = with_probe(2);
    let r = check_conditions(&presets::anderson_thompson(), &Candidate::Finsler(presets::euclidean_norm(2)), &pts, TOL)
        .map_err(|e| e.to_string())?;
    let d_h_witness = match &r.d_h {
        ZeroVerdict::NonZero { witness, value } => format!("x = {:?}, y = {:?}, value {value:.3}", witness.x, witness.y),
        v => return Err(format!("anderson-thompson d_h is {v:?}")),
    };
    let pf = projective_factor(&presets::flat(2), &presets::anderson_thompson(), &pts, TOL).map_err(|e| e.to_string())?;
    let w = pf.witness.as_ref().ok_or("projective_factor(flat2, anderson-thompson) passed")?;
    ensure(!pf.pass() && w.point.y == vec![1.0, 1.0], || format!("witness {:?}", w.point))?;
    let r = check_conditions(&presets::flat(2), &Candidate::Theta(theta(2, &["x1", "0"])), &pts, TOL)
        .map_err(|e| e.to_string())?;
    ensure(r.rank.status == Status::Fail && r.positivity.status == Status::Fail, || format!("{:?}", r.failures()))?;
    Ok(format!("d_h fails at {d_h_witness}; factor witness y = (1,1); x1 dx1 fails rank and positivity"))
}

fn geodesic_layer() -> Result<String, String> {
    let at = presets::anderson_thompson();
    let order = convergence_order(&at, &[0.1, -0.2], &[1.0, 0.5], 1.0, 50).map_err(|e| e.to_string())?;
    ensure((3.5..=4.5).contains(&order), || format!("order {order}"))?;
    let (flat, yang) = (presets::flat(2), presets::yang(0.5, 2));
    let (x0, y0) = ([0.2, -0.1], [0.6, 0.8]);
    let a = integrate(&flat, &x0, &y0, 1.0, 1000).map_err(|e| e.to_string())?;
    let b = integrate(&yang, &x0, &y0, 1.0, 1000).map_err(|e| e.to_string())?;
    let d = trace_compare(&a, &b).map_err(|e| e.to_string())?;
    ensure(d.arclength >= 0.5 && d.distance < 1e-4, || format!("{d:?}"))?;
    let pts = with_probe(2);
    let pf = projective_factor(&flat, &yang, &pts, TOL).map_err(|e| e.to_string())?;
    ensure(pf.pass(), || format!("{pf:?}"))?;
    let mut rel: f64 = 0.0;
    for s in &pf.samples {
        let want = 0.5 * s.point.y_norm();
        rel = rel.max((s.p - want).abs() / want);
    }
    ensure(rel < 1e-8, || format!("P relative error {rel:e}"))?;
    Ok(format!("order {order:.3}; trace distance {:.1e} over arclength {:.3}; P = 0.5|y| to {rel:.1e}", d.distance, d.arclength))
}

fn expression_layer() -> Result<String, String> {
    let mut pairs = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..500u64 {
        let dim = 1 + (seed % 3) as usize;
        let e = random_expr(&mut ChaCha8Rng::seed_from_u64(seed), GeneratorConfig { dim, max_depth: 4 });
        let back = parse(&e.to_string(), dim).map_err(|err| format!("seed {seed}: {err}"))?;
        ensure(back == e && simplify(&back) == simplify(&e), || format!("seed {seed}: round trip of {e}"))?;
        for p in sample_points(dim, 5, seed) {
            if !smooth_at(&e, &p, 1e-2) {
                continue;
            }
            for v in all_vars(dim) {
                let d = diff(&e, v);
                if !smooth_at(&d, &p, 1e-2) {
                    continue;
                }
                let (Ok(exact), Some(fd)) = (eval(&d, &p), central_difference(&e, v, &p)) else { continue };
                let err = (exact - fd).abs() / exact.abs().max(fd.abs()).max(1.0);
                ensure(err < 1e-5, || format!("seed {seed}: d/d{v} of {e}: {err:e}"))?;
                worst = worst.max(err);
                pairs += 1;
            }
        }
    }
    Ok(format!("500 ASTs round-trip; {pairs} derivative checks, max rel. error {worst:.1e}"))
}

fn run_cli(args: &[&str]) -> Result<(Vec<u8>, Option<i32>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_spraylab")).args(args).output().map_err(|e| e.to_string())?;
    Ok((out.stdout, out.status.code()))
}

fn determinism() -> Result<String, String> {
    let runs: [&[&str]; 4] = [
        &["analyze", "--preset", "yang(0.5)"],
        &["metrizable", "--preset", "anderson-thompson", "--finsler", "sqrt(y1^2+y2^2)"],
        &["involutivity", "--preset", "flat3", "--n-points", "3"],
        &["geodesics", "--preset", "flat2", "--compare", "yang(0.5)", "--steps", "200"],
    ];
    for args in runs {
        let (a, ca) = run_cli(args)?;
        let (b, cb) = run_cli(args)?;
        ensure(!a.is_empty() && a == b && ca == cb, || format!("{args:?} differs between runs"))?;
        serde_json::from_slice::<serde_json::Value>(&a).map_err(|e| format!("{args:?}: {e}"))?;
    }
    Ok("4 commands, two runs each, byte-identical JSON".into())
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("involutivity counts", involutivity_counts),
        ("structural identities", structural_identities),
        ("necessity round-trip", necessity_round_trip),
        ("obstruction", obstruction_check),
        ("negative controls", negative_controls),
        ("geodesic layer", geodesic_layer),
        ("expression layer", expression_layer),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
