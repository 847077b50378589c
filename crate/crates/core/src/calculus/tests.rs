use super::*;
use crate::expr::{eval, ops, parse, sample_points, Point};

fn e(s: &str, n: usize) -> Expr {
    parse(s, n).unwrap()
}

fn theta(parts: &[&str]) -> ScalarForm {
    let n = parts.len();
    ScalarForm::semi_basic(&parts.iter().map(|s| e(s, n)).collect::<Vec<_>>())
}

fn assert_zero_form(w: &ScalarForm) {
    let pts = sample_points(w.dim(), 20, 42);
    let v = w.verdict(&pts, 1e-9).unwrap();
    assert!(v.is_zero(), "{w} -> {v:?}");
}

fn assert_zero_vv(l: &VectorValuedForm) {
    let pts = sample_points(l.dim(), 20, 42);
    let v = l.verdict(&pts, 1e-9).unwrap();
    assert!(v.is_zero(), "{l} -> {v:?}");
}

/// Literal alternating operator evaluated numerically on frame vectors:
/// `(1/(k! l!)) Σ_σ ε(σ) B(L(e_σ1..e_σl), e_σ(l+1)..)`, `B` of degree `k + 1`.
fn alternator(l: &VectorValuedForm, b: &ScalarForm, args: &[usize], p: &Point) -> f64 {
    let ld = l.degree();
    let k = b.degree() - 1;
    let m = args.len();
    assert_eq!(m, k + ld);
    let mut total = 0.0;
    for perm in permutations(m) {
        let sign = parity(&perm);
        let permuted: Vec<usize> = perm.iter().map(|&i| args[i]).collect();
        let (first, rest) = permuted.split_at(ld);
        for a in 0..2 * l.dim() {
            let la = eval(&l.component(a, first), p).unwrap();
            if la == 0.0 {
                continue;
            }
            let mut idx = vec![a];
            idx.extend_from_slice(rest);
            total += sign * la * eval(&b.component(&idx), p).unwrap();
        }
    }
    total / (factorial(k) * factorial(ld))
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

fn parity(p: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn sample_vv(n: usize) -> VectorValuedForm {
    // an arbitrary vector-valued 1-form with mixed coefficients
    let mut parts = Vec::new();
    for a in 0..2 * n {
        let terms = (0..2 * n).map(|b| {
            let s = format!("x1*y{} + {}*y1^2 - x{}", 1 + (a + b) % n, a + b + 1, 1 + b % n);
            (vec![b], e(&s, n))
        });
        parts.push(ScalarForm::from_terms(n, 1, terms));
    }
    VectorValuedForm::from_parts(parts)
}

#[test]
fn inner_product_matches_literal_alternator() {
    let n = 2;
    let l = sample_vv(n);
    let b = ScalarForm::from_terms(
        n,
        2,
        [
            (vec![0, 2], e("y1*x2", n)),
            (vec![1, 3], e("sin(x1) + y2", n)),
            (vec![0, 1], e("y1^2", n)),
        ],
    );
    let ib = inner_product(&l, &b);
    let p = &sample_points(n, 3, 9)[2];
    for idx in increasing_indices(2 * n, 2) {
        let lhs = eval(&ib.component(&idx), p).unwrap();
        let rhs = alternator(&l, &b, &idx, p);
        assert!((lhs - rhs).abs() < 1e-10, "{idx:?}: {lhs} vs {rhs}");
    }
}

#[test]
fn identity_inner_product_scales_by_degree() {
    let n = 2;
    let w = ScalarForm::from_terms(n, 2, [(vec![0, 3], e("x1*y2", n)), (vec![1, 2], e("y1", n))]);
    let id = VectorValuedForm::identity(n);
    assert_eq!(inner_product(&id, &w), w.scale(2.0));
    let one = theta(&["y1", "x1"]);
    assert_eq!(inner_product(&id, &one), one);
}

#[test]
fn inner_product_on_one_forms_is_composition() {
    let n = 2;
    let l = sample_vv(n);
    let w = ScalarForm::from_terms(n, 1, [(vec![0], e("y2", n)), (vec![3], e("x1*y1", n))]);
    let iw = inner_product(&l, &w);
    for b in 0..2 * n {
        // (i_L ω)(∂_b) = ω(L(∂_b)) = Σ_a ω_a L^a_b
        let expected = ops::sum(
            (0..2 * n)
                .map(|a| ops::mul(&w.component(&[a]), &l.component(a, &[b])))
                .collect::<Vec<_>>()
                .iter(),
        );
        assert!(ops::is_symbolic_zero(&ops::sub(&iw.component(&[b]), &expected)));
    }
}

#[test]
fn inner_product_is_function_linear() {
    let n = 2;
    let l = sample_vv(n);
    let w = theta(&["y1*y2", "x2"]);
    let f = e("exp(x1) + y2^2", n);
    let lhs = inner_product(&l, &w.mul_fn(&f));
    let rhs = inner_product(&l, &w).mul_fn(&f);
    assert_zero_form(&lhs.sub(&rhs));
}

#[test]
fn d_j_of_semi_basic_one_form_matches_closed_form() {
    let n = 2;
    let j = VectorValuedForm::vertical_endomorphism(n);
    let th = theta(&["y2*x1", "y1^2 + x2*y2"]);
    let djt = lie_type_derivative(&j, &th);
    // coefficient on dx1^dx2: ∂θ_2/∂y^1 − ∂θ_1/∂y^2
    let expected = e("2*y1 - x1", n);
    assert!(ops::is_symbolic_zero(&ops::sub(&djt.component(&[0, 1]), &expected)));
    assert!(djt.is_semi_basic());
    assert!(lie_type_derivative(&j, &djt).is_symbolic_zero());
}

#[test]
fn liouville_derivative_measures_homogeneity() {
    let c1 = VectorValuedForm::liouville(1);
    let th = theta(&["y1"]);
    assert_eq!(lie_derivative(&c1, &th), th);
    let c = VectorValuedForm::liouville(2);
    let eu = theta(&["y1/sqrt(y1^2+y2^2)", "y2/sqrt(y1^2+y2^2)"]);
    assert!(lie_derivative(&c, &eu).is_symbolic_zero());
}

#[test]
fn brackets_of_canonical_objects() {
    let n = 2;
    let j = VectorValuedForm::vertical_endomorphism(n);
    let c = VectorValuedForm::liouville(n);
    assert!(fn_bracket(&j, &j).is_symbolic_zero());
    // [ℂ, J] = −J
    assert_eq!(fn_bracket(&c, &j), j.scale(-1.0));
    let id = VectorValuedForm::identity(n);
    assert!(fn_bracket(&id, &j).is_symbolic_zero());
}

#[test]
fn vector_field_bracket_is_commutator() {
    let n = 1;
    let x = VectorValuedForm::from_halves(&[e("y1", n)], &[e("x1*y1", n)]);
    let y = VectorValuedForm::from_halves(&[e("x1^2", n)], &[e("y1^3", n)]);
    let b = fn_bracket(&x, &y).field_components();
    // [X,Y]^a = X(Y^a) − Y(X^a)
    let xs = x.field_components();
    let ys = y.field_components();
    let apply = |v: &[Expr], f: &Expr| {
        ops::add(
            &ops::mul(&v[0], &ops::partial(f, crate::Var::x(0))),
            &ops::mul(&v[1], &ops::partial(f, crate::Var::y(0))),
        )
    };
    for a in 0..2 {
        let expected = ops::sub(&apply(&xs, &ys[a]), &apply(&ys, &xs[a]));
        assert!(ops::is_symbolic_zero(&ops::sub(&b[a], &expected)));
    }
}

#[test]
fn graded_antisymmetry_and_commutation_with_d() {
    let n = 2;
    let l = sample_vv(n);
    let j = VectorValuedForm::vertical_endomorphism(n);
    let lj = fn_bracket(&l, &j);
    let jl = fn_bracket(&j, &l);
    // k = l = 1: [L,K] + (−1)^{kl}[K,L] = [L,K] − [K,L]
    assert_zero_vv(&lj.sub(&jl));
    let c = VectorValuedForm::liouville(n);
    assert_zero_vv(&fn_bracket(&c, &l).add(&fn_bracket(&l, &c)));
    let w = theta(&["x2*y1", "y2^2"]);
    // d ∘ d_L = (−1)^l d_L ∘ d with l = 1
    let lhs = lie_type_derivative(&l, &w).d();
    let rhs = lie_type_derivative(&l, &w.d()).scale(-1.0);
    assert_zero_form(&lhs.sub(&rhs));
}

#[test]
fn combinations() {
    let n = 2;
    let zero_eta = ScalarForm::zero(n, 1);
    let z = build_combination(Combination::Isotropic {
        lambda: &Expr::zero(),
        eta: &zero_eta,
    })
    .unwrap();
    assert!(z.is_symbolic_zero());

    let a = ScalarForm::dx(n, 0);
    let aj = build_combination(Combination::WedgeJ(&a)).unwrap();
    // (α∧J)^{y^i}(∂x^j, ∂x^k) = α_j δ^i_k − α_k δ^i_j
    for i in 0..n {
        for jj in 0..n {
            for k in 0..n {
                let expected = f64::from(u8::from(jj == 0 && i == k)) - f64::from(u8::from(k == 0 && i == jj));
                assert_eq!(aj.component(n + i, &[jj, k]).constant_value().unwrap(), expected);
            }
        }
    }

    let err = build_combination(Combination::Curvature {
        alpha: &a,
        beta: &a,
    })
    .unwrap_err();
    assert_eq!(err, CalculusError::DegreeMismatch { expected: 2, found: 1 });
}

#[test]
fn euclidean_isotropic_formula_expands_to_projector() {
    // κ(F²J − F d_JF ⊗ ℂ) with κ = 1 has matrix |y|²δ^i_j − y^i y_j
    let n = 2;
    let f = e("sqrt(y1^2+y2^2)", n);
    let djf = lie_type_derivative(&VectorValuedForm::vertical_endomorphism(n), &ScalarForm::function(n, &f));
    let lambda = ops::powi(&f, 2);
    let eta = djf.mul_fn(&ops::scale(&f, -1.0));
    let phi = build_combination(Combination::Isotropic { lambda: &lambda, eta: &eta }).unwrap();
    for i in 0..n {
        for j in 0..n {
            let s = format!("{}(y1^2+y2^2) - y{}*y{}", if i == j { "" } else { "0*" }, i + 1, j + 1);
            let expected = e(&s, n);
            assert!(ops::is_symbolic_zero(&ops::sub(&phi.component(n + i, &[j]), &expected)));
        }
    }
}

#[test]
fn euclidean_d_theta_in_adapted_coframe() {
    // flat connection: adapted frame = natural frame; F dθ = h_ij dy^i ∧ dx^j
    let n = 2;
    let f = e("sqrt(y1^2+y2^2)", n);
    let th = theta(&["y1/sqrt(y1^2+y2^2)", "y2/sqrt(y1^2+y2^2)"]);
    let frame: Vec<_> = (0..2 * n)
        .map(|a| {
            let mut c = vec![Expr::zero(); 2 * n];
            c[a] = Expr::one();
            VectorValuedForm::vector_field(&c)
        })
        .collect();
    let fdt = components_in_frame(&th.d(), &frame).mul_fn(&f);
    for i in 0..n {
        for j in 0..n {
            let h = format!("{} - y{}*y{}/(y1^2+y2^2)", u8::from(i == j), i + 1, j + 1);
            let diff = ops::sub(&fdt.component(&[n + i, j]), &e(&h, n));
            let pts = sample_points(n, 20, 1);
            assert!(crate::expr::is_zero(&diff, &pts, 1e-12).unwrap().is_zero());
        }
    }
    assert!(fdt.component(&[0, 1]).is_literal_zero());
}

#[test]
fn lie_derivative_of_d_j_f_squared_along_flat_spray() {
    let n = 2;
    let f2 = ScalarForm::function(n, &e("y1^2 + y2^2", n));
    let s = VectorValuedForm::from_halves(&[e("y1", n), e("y2", n)], &[Expr::zero(), Expr::zero()]);
    let j = VectorValuedForm::vertical_endomorphism(n);
    let lhs = lie_derivative(&s, &lie_type_derivative(&j, &f2));
    assert_eq!(lhs, f2.d());
}
