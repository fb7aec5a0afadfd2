use std::collections::BTreeMap;

use proptest::prelude::*;

use polyint::poly::{Monomial, Polynomial, VarId};
use polyint::problems::{builtin, catalog, hamiltonian_system};
use polyint::skew::{contract_default, verify_system, ReducedSystem, SkewStructure, VerifyConfig};
use polyint::stepper::{midpoint_step, rd_midpoint_step, PolynomialField, SolverConfig};
use polyint::tower::{reduce, reduce_all, ReductionParams};

fn term(nvars: usize, max_deg: usize) -> impl Strategy<Value = (Monomial, f64)> {
    (prop::collection::vec(0..nvars, 0..=max_deg), -5.0..5.0f64).prop_map(|(vars, c)| {
        let vars: Vec<VarId> = vars.into_iter().map(VarId).collect();
        (Monomial::from_factors(&vars), c)
    })
}

fn polynomial(nvars: usize, max_deg: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(term(nvars, max_deg), 0..8).prop_map(move |terms| Polynomial::from_terms(nvars, terms))
}

fn sized_polynomial(max_vars: usize, max_deg: usize) -> impl Strategy<Value = Polynomial> {
    (1..=max_vars).prop_flat_map(move |n| polynomial(n, max_deg))
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5..1.5f64, n)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Expands a reduced polynomial back to the original variables by
/// multiplying out each auxiliary's factor monomial.
fn expand(red: &Polynomial, tower: &polyint::tower::Tower) -> Polynomial {
    let n = tower.n();
    let mut monos: Vec<Monomial> = (0..n).map(|i| Monomial::var(VarId(i))).collect();
    for a in tower.aux_vars() {
        let m = monos[a.left.0].mul(&monos[a.right.0]);
        monos.push(m);
    }
    let bindings: BTreeMap<VarId, Polynomial> = (n..tower.dim())
        .map(|i| (VarId(i), Polynomial::from_terms(n, [(monos[i].clone(), 1.0)])))
        .collect();
    red.substitute(&bindings, n).expect("substitution")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in polynomial(3, 4), b in polynomial(3, 4), c in polynomial(3, 4)) {
        prop_assert!((&a + &b).approx_eq(&(&b + &a), 1e-12));
        prop_assert!((&a * &b).approx_eq(&(&b * &a), 1e-12));
        prop_assert!((&(&a * &b) * &c).approx_eq(&(&a * &(&b * &c)), 1e-12));
        prop_assert!((&a * &(&b + &c)).approx_eq(&(&(&a * &b) + &(&a * &c)), 1e-12));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn leibniz_rule(a in polynomial(3, 4), b in polynomial(3, 4), k in 0usize..3) {
        let v = VarId(k);
        let lhs = (&a * &b).partial(v);
        let rhs = &a.partial(v) * &b + &a * &b.partial(v);
        prop_assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn print_then_parse(p in sized_polynomial(6, 6)) {
        let q = Polynomial::parse(&p.to_string(), p.nvars()).unwrap();
        prop_assert_eq!(q, p);
    }

    #[test]
    fn eval_is_a_homomorphism(a in polynomial(2, 5), b in polynomial(2, 5), x in point(2)) {
        let (va, vb) = (a.eval(&x).unwrap(), b.eval(&x).unwrap());
        prop_assert!(close((&a * &b).eval(&x).unwrap(), va * vb, 1e-10));
        prop_assert!(close((&a + &b).eval(&x).unwrap(), va + vb, 1e-12));
    }

    #[test]
    fn substitute_then_eval(p in polynomial(2, 4), s0 in polynomial(3, 2), s1 in polynomial(3, 2), x in point(3)) {
        let bindings = BTreeMap::from([(VarId(0), s0.clone()), (VarId(1), s1.clone())]);
        let composed = p.substitute(&bindings, 3).unwrap();
        let inner = [s0.eval(&x).unwrap(), s1.eval(&x).unwrap()];
        prop_assert!(close(composed.eval(&x).unwrap(), p.eval(&inner).unwrap(), 1e-9));
    }

    #[test]
    fn wedge_antisymmetry(
        n in 3usize..6,
        seed in prop::collection::vec(-1.0..1.0f64, 64),
        swap in (0usize..8, 0usize..8),
    ) {
        let m = n - 1;
        let mut it = seed.iter().copied().cycle();
        let mut vec_n = || (0..n).map(|_| it.next().unwrap()).collect::<Vec<_>>();
        let grads: Vec<Vec<f64>> = (0..m).map(|_| vec_n()).collect();
        let f = vec_n();
        let args: Vec<Vec<f64>> = (0..m).map(|_| vec_n()).collect();
        let Ok(u) = contract_default(&f, &grads, &args) else { return Ok(()) };
        let scale = u.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        // u annihilates every argument
        for a in &args {
            let d: f64 = u.iter().zip(a).map(|(x, y)| x * y).sum();
            prop_assert!(d.abs() <= 1e-10 * scale);
        }
        let (i, j) = (swap.0 % m, swap.1 % m);
        prop_assume!(i != j);
        let mut swapped = args.clone();
        swapped.swap(i, j);
        let v = contract_default(&f, &grads, &swapped).unwrap();
        for (a, b) in u.iter().zip(&v) {
            prop_assert!((a + b).abs() <= 1e-10 * scale);
        }
        let mut g2 = grads.clone();
        g2.swap(i, j);
        let w = contract_default(&f, &g2, &args).unwrap();
        for (a, b) in u.iter().zip(&w) {
            prop_assert!((a + b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn midpoint_preserves_quadratic_invariants(
        half in 1usize..4,
        entries in prop::collection::vec(-1.0..1.0f64, 36),
        x in point(6),
    ) {
        let n = 2 * half;
        let mut terms = Vec::new();
        for i in 0..n {
            for j in i..n {
                let m = Monomial::from_factors(&[VarId(i), VarId(j)]);
                terms.push((m, entries[i * 6 + j]));
            }
        }
        let q = Polynomial::from_terms(n, terms);
        let field = PolynomialField::new(polyint::problems::canonical_field(&q));
        let x = &x[..n];
        let step = midpoint_step(&field, x, 0.05, &SolverConfig::default()).unwrap();
        let (q0, q1) = (q.eval(x).unwrap(), q.eval(&step.x).unwrap());
        prop_assert!((q1 - q0).abs() <= 1e-12 * q0.abs().max(1e-3), "{q0} -> {q1}");
    }

    #[test]
    fn random_skew_systems_are_consistent(
        h in polynomial(3, 5),
        s in prop::collection::vec(-1.0..1.0f64, 3),
        x in point(3),
    ) {
        prop_assume!(h.degree() >= 1);
        let c = |v: f64| Polynomial::constant(3, v);
        let rows = vec![
            vec![c(0.0), c(s[0]), c(s[1])],
            vec![c(-s[0]), c(0.0), c(s[2])],
            vec![c(-s[1]), c(-s[2]), c(0.0)],
        ];
        let f = polyint::skew::skew_gradient_field(&rows, &h);
        let (_, ints) = reduce_all(3, std::slice::from_ref(&h), &ReductionParams::new()).unwrap();
        let sys = ReducedSystem::new(f.clone(), ints, SkewStructure::ExplicitMatrix(rows)).unwrap();
        let red = sys.reduced_field(&sys.lift(&x)).unwrap();
        for (r, p) in red.iter().zip(&f) {
            prop_assert!(close(*r, p.eval(&x).unwrap(), 1e-11));
        }
        // conserved at arbitrary extended points, not only lifted ones
        let z: Vec<f64> = sys.lift(&x).iter().enumerate().map(|(i, v)| v + 0.1 * i as f64).collect();
        let g = &sys.total_gradients(&z)[0];
        let u = sys.reduced_field(&z).unwrap();
        let dot: f64 = g.iter().zip(&u).map(|(a, b)| a * b).sum();
        let scale = g.iter().chain(&u).fold(1.0f64, |a, v| a.max(v.abs()));
        prop_assert!(dot.abs() <= 1e-10 * scale * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reduction_matches_expansion(h in sized_polynomial(6, 10)) {
        let r = reduce(&h, &ReductionParams::new()).unwrap();
        prop_assert!(r.reduced().degree() <= 2);
        let back = expand(r.reduced(), r.tower());
        let tol = 1e-12 * h.max_abs_coeff().max(1.0);
        prop_assert!(back.max_coeff_diff(&h) <= tol, "{} vs {}", back, h);
        prop_assert!(r.check_consistency().passed);
    }
}

#[test]
fn builtins_pass_verification() {
    for (name, _) in catalog() {
        let p = builtin(name).unwrap();
        let report = verify_system(&p.system, &VerifyConfig::default());
        assert!(report.passed, "{name}\n{report}");
        assert_eq!(report.samples, 200);
    }
}

#[test]
fn rd_midpoint_is_time_symmetric_on_builtins() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let cfg = SolverConfig {
        max_iter: 1000,
        ..SolverConfig::default()
    };
    for (name, _) in catalog() {
        let p = builtin(name).unwrap();
        for _ in 0..20 {
            let x: Vec<f64> = p.x0.iter().map(|v| v + rng.random_range(-0.2..0.2)).collect();
            let fwd = rd_midpoint_step(&p.system, &x, p.h, &cfg).unwrap();
            let back = rd_midpoint_step(&p.system, &fwd.x, -p.h, &cfg).unwrap();
            let err = back.x.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-11, "{name}: {err:e}");
        }
    }
}

#[test]
fn hamiltonian_helper_matches_catalog() {
    let h = Polynomial::parse("0.5*x1^2 + 0.25*x2^4", 2).unwrap();
    let sys = hamiltonian_system(&h, &ReductionParams::new()).unwrap();
    let b = builtin("quartic-oscillator").unwrap();
    let z = sys.lift(&[0.2, -0.9]);
    assert_eq!(sys.reduced_field(&z).unwrap(), b.system.reduced_field(&z).unwrap());
}
