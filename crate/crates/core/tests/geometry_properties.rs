use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spraylab::expr::{eval, is_zero, ops, parse, sample_points};
use spraylab::geodesics::{integrate, trace_compare};
use spraylab::involutivity::{cartan, cartan_test, expected_g1, expected_g2, expected_per_j, BasisChoice, Frame};
use spraylab::metrizability::{
    check_conditions, closed_form_operators, euler_poincare, generic_operators, rank_check, recover_finsler,
    Candidate, SemiBasicOneForm, Status,
};
use spraylab::{presets, Expr, Point, Spray};

const TOL: f64 = 1e-9;

fn pts(n: usize, seed: u64) -> Vec<Point> {
    sample_points(n, 30, seed)
}

fn factors(n: usize) -> Vec<Expr> {
    let norm = presets::euclidean_norm(n);
    vec![
        ops::scale(&norm, 0.5),
        ops::mul(&Expr::x(0), &norm),
        Expr::y(0),
        ops::add(&ops::mul(&Expr::x(n - 1).sin(), &Expr::y(n - 1)), &ops::scale(&norm, 0.3)),
    ]
}

#[test]
fn isotropy_scales_with_fiber() {
    for s in [presets::anderson_thompson(), presets::yang(0.5, 3)] {
        for p in pts(s.dim(), 7).iter().take(8) {
            let a = s.isotropy_at(p).unwrap();
            for c in [0.5, 2.0, 3.0] {
                let b = s.isotropy_at(&p.scale_fiber(c)).unwrap();
                assert!((b.lambda - c * c * a.lambda).abs() <= 1e-9 * (1.0 + b.lambda.abs()));
                for (u, v) in b.eta.iter().zip(&a.eta) {
                    assert!((u - c * v).abs() <= 1e-9 * (1.0 + u.abs()));
                }
            }
        }
    }
}

#[test]
fn necessity_round_trip() {
    let finsler = [
        (Spray::flat(2), presets::euclidean_norm(2)),
        (Spray::flat(3), presets::euclidean_norm(3)),
        (presets::riemannian(), presets::riemannian_finsler()),
    ];
    for (base, f) in &finsler {
        let n = base.dim();
        let samples = pts(n, 11);
        for p in factors(n) {
            let s = base.projective_transform(&p, &samples, TOL).unwrap();
            let r = check_conditions(&s, &Candidate::Finsler(f.clone()), &samples, TOL).unwrap();
            assert!(r.pass(), "{p}: {:?}", r.failures());
            let rec = recover_finsler(&s, &r, &samples, TOL).unwrap();
            assert!(is_zero(&ops::sub(&rec.finsler, f), &samples, TOL).unwrap().is_zero());
            assert!(is_zero(&ops::add(&rec.factor, &p), &samples, TOL).unwrap().is_zero(), "{p}");
            for (a, b) in rec.spray_coefficients.iter().zip(base.coefficients()) {
                assert!(is_zero(&ops::sub(a, b), &samples, TOL).unwrap().is_zero());
            }
        }
    }
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize) -> Expr {
    let mut terms = Vec::new();
    for _ in 0..rng.random_range(1..4) {
        let mut t = Expr::constant(f64::from(rng.random_range(1..8)) / 2.0);
        for _ in 0..rng.random_range(0..4) {
            let v = if rng.random_bool(0.5) { Expr::x(rng.random_range(0..n)) } else { Expr::y(rng.random_range(0..n)) };
            t = ops::mul(&t, &v);
        }
        terms.push(t);
    }
    ops::sum(terms.iter())
}

#[test]
fn dual_path_on_random_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let sprays = [presets::anderson_thompson(), presets::yang(0.5, 2), presets::riemannian()];
    let samples = pts(2, 3);
    for _ in 0..20 {
        let theta = SemiBasicOneForm::new((0..2).map(|_| random_poly(&mut rng, 2)).collect());
        for s in &sprays {
            let (a, b) = (closed_form_operators(s, &theta), generic_operators(s, &theta));
            for (u, v) in [(&a.lie_liouville, &b.lie_liouville), (&a.d_j, &b.d_j), (&a.d_h, &b.d_h)] {
                assert!(u.sub(v).verdict(&samples, TOL).unwrap().is_zero(), "{theta:?}");
            }
        }
    }
}

#[test]
fn obstruction_paths_agree_when_differential_conditions_hold() {
    let cases = [
        (presets::yang(0.5, 3), presets::euclidean_norm(3)),
        (Spray::flat(3), presets::euclidean_norm(3)),
        (presets::riemannian(), presets::riemannian_finsler()),
        (Spray::parse(3, &["x2*y1*y2", "x3*y3^2", "x1*y1*y2"]).unwrap(), presets::euclidean_norm(3)),
    ];
    let mut exercised = 0;
    for (s, f) in &cases {
        let samples = pts(s.dim(), 5);
        let r = check_conditions(s, &Candidate::Finsler(f.clone()), &samples, TOL).unwrap();
        if r.differential_pass() {
            assert!(r.obstruction.agree());
            assert!(r.obstruction.d_r.is_zero());
            exercised += 1;
        }
    }
    assert_eq!(exercised, 3);
}

#[test]
fn contraction_recovers_finsler_function() {
    for (n, f) in [(2, presets::euclidean_norm(2)), (3, presets::euclidean_norm(3)), (2, presets::riemannian_finsler())] {
        let samples = pts(n, 9);
        let theta = euler_poincare(&f, n, &samples, TOL).unwrap();
        assert!(is_zero(&ops::sub(&theta.contract_y(), &f), &samples, TOL).unwrap().is_zero());
    }
}

fn random_quadratic_norm(rng: &mut ChaCha8Rng, n: usize) -> Expr {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let g = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            terms.push(ops::scale(&ops::mul(&Expr::y(i), &Expr::y(j)), g[(i, j)]));
        }
    }
    ops::sum(terms.iter()).sqrt()
}

#[test]
fn rank_equivalence_for_regular_finsler_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [2, 3] {
        for _ in 0..5 {
            let f = random_quadratic_norm(&mut rng, n);
            let samples = pts(n, 13);
            let theta = euler_poincare(&f, n, &samples, TOL).unwrap();
            let r = rank_check(&theta, &samples);
            assert_eq!(r.status, Status::Pass);
            assert_eq!(r.equivalence_violations, 0);
            assert_eq!((r.min_rank, r.max_rank), (2 * n - 2, 2 * n - 2));
        }
    }
    let degenerate = SemiBasicOneForm::new(vec![parse("y1*y2", 2).unwrap(), parse("x1", 2).unwrap()]);
    assert_eq!(rank_check(&degenerate, &pts(2, 13)).equivalence_violations, 0);
}

#[test]
fn operators_stay_semi_basic() {
    let theta = SemiBasicOneForm::new(vec![parse("x1*y2^2", 2).unwrap(), parse("cos(y1)*x2", 2).unwrap()]);
    for s in [presets::anderson_thompson(), presets::riemannian()] {
        let o = generic_operators(&s, &theta);
        assert!(o.lie_liouville.is_semi_basic());
        assert!(o.d_j.is_semi_basic());
        assert!(o.d_h.is_semi_basic());
    }
}

#[test]
fn traces_are_projectively_invariant() {
    let bases = [Spray::flat(2), presets::anderson_thompson(), presets::riemannian()];
    for s in &bases {
        let samples = pts(2, 17);
        for p in factors(2) {
            let t = s.projective_transform(&p, &samples, TOL).unwrap();
            let (x0, y0) = ([0.1, -0.2], [1.0, 0.5]);
            let a = integrate(s, &x0, &y0, 0.6, 600).unwrap();
            let b = integrate(&t, &x0, &y0, 0.6, 600).unwrap();
            let d = trace_compare(&a, &b).unwrap();
            assert!(d.arclength > 0.2, "{p}");
            assert!(d.distance < 1e-4, "{p}: {}", d.distance);
        }
    }
}

#[test]
fn flow_is_fiber_homogeneous() {
    let s = presets::anderson_thompson();
    let (x0, y0) = ([0.0, 0.3], [0.6, -0.4]);
    let a = integrate(&s, &x0, &y0, 1.0, 1000).unwrap();
    let b = integrate(&s, &x0, &[1.2, -0.8], 0.5, 1000).unwrap();
    assert!(trace_compare(&a, &b).unwrap().distance < 1e-6);
}

#[test]
fn involutivity_counts_are_point_and_frame_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for n in [2, 3, 4] {
        let sprays = [presets::lookup(&format!("flat{n}")).unwrap().spray, presets::yang(0.5, n)];
        for s in &sprays {
            for u in sample_points(n, 4, 99 + n as u64) {
                let r = cartan_test(s, &u, BasisChoice::Shifted).unwrap();
                assert!(r.pass(), "{r:?}");
                assert_eq!((r.dim_g1, r.dim_g2), (expected_g1(n), expected_g2(n)));
                assert_eq!(r.per_j, expected_per_j(n));
                let q = DMatrix::from_fn(n, n, |i, j| if i == j { 2.0 } else { 0.0 } + rng.random_range(-0.5..0.5));
                let f = Frame::with_change(s, &u, &q).unwrap();
                let g = cartan(&f, &u, BasisChoice::Shifted);
                assert_eq!((g.dim_g1, g.dim_g2), (r.dim_g1, r.dim_g2));
            }
        }
    }
}

#[test]
fn fiber_scaling_of_sample_points_is_exact() {
    let p = Point::new(vec![0.1, 0.2], vec![0.3, -0.4]).unwrap();
    let f = presets::euclidean_norm(2);
    assert!((eval(&f, &p.scale_fiber(2.0)).unwrap() - 1.0).abs() < 1e-15);
}
