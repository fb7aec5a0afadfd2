use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polyint::problems::{
    builtin, catalog, hamiltonian_system, nambu_2int, octic_oscillator, planar_quartic, planar_quartic_params,
    quartic_ham, quartic_oscillator, toda3, ProblemSpec,
};
use polyint::stepper::{
    avf_step, integrate, midpoint_step, rd_midpoint_step, Base, ExtendedField, Method, PolynomialField, SolverConfig,
};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn patient() -> SolverConfig {
    SolverConfig {
        max_iter: 1000,
        ..SolverConfig::default()
    }
}

#[test]
fn extended_midpoint_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cfg = SolverConfig::default();
    for p in [quartic_oscillator(), octic_oscillator(), nambu_2int()] {
        let p = p.unwrap();
        let sys = &p.system;
        for _ in 0..100 {
            let x: Vec<f64> = p.x0.iter().map(|v| v + rng.random_range(-0.3..0.3)).collect();
            let h = rng.random_range(0.01..0.05);
            let rd = rd_midpoint_step(sys, &x, h, &cfg).unwrap();
            let ext = midpoint_step(&ExtendedField(sys), &sys.lift(&x), h, &cfg).unwrap();
            let d = max_diff(&rd.x, &ext.x[..sys.n()]);
            assert!(d <= 1e-11, "{}: {d:e}", p.name);
        }
    }
}

#[test]
fn rd_mp2_matches_avf_on_planar_quartics() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let params = planar_quartic_params(1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0);
    let cfg = SolverConfig::default();
    for _ in 0..20 {
        let alpha: [f64; 14] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let h = planar_quartic(&alpha);
        let sys = hamiltonian_system(&h, &params).unwrap();
        let field = PolynomialField::new(sys.original_field().to_vec());
        let x = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        let rd = rd_midpoint_step(&sys, &x, 0.1, &cfg).unwrap();
        let avf = avf_step(&field, &x, 0.1, field.avf_nodes(), &cfg).unwrap();
        assert!(max_diff(&rd.x, &avf.x) <= 1e-11, "{:e}", max_diff(&rd.x, &avf.x));
    }
}

#[test]
fn other_weights_differ_from_avf() {
    let alpha = [0.3, -0.2, 0.5, 0.1, 0.4, 0.2, 0.7, -0.6, 0.3, 0.5, -0.4, 0.8, 0.2, 0.6];
    let h = planar_quartic(&alpha);
    let sys = hamiltonian_system(&h, &planar_quartic_params(0.0, 0.0, 0.0)).unwrap();
    let field = PolynomialField::new(sys.original_field().to_vec());
    let cfg = SolverConfig::default();
    let rd = rd_midpoint_step(&sys, &[0.4, -0.3], 0.1, &cfg).unwrap();
    let avf = avf_step(&field, &[0.4, -0.3], 0.1, field.avf_nodes(), &cfg).unwrap();
    assert!(max_diff(&rd.x, &avf.x) > 1e-8);
}

#[test]
fn rd_methods_preserve_integrals_on_builtins() {
    // h = 0.1 is too large for undamped iteration on the Nambu system
    let cfg = SolverConfig {
        max_iter: 5000,
        relaxation: 0.5,
        ..SolverConfig::default()
    };
    for (name, _) in catalog() {
        let p = builtin(name).unwrap();
        for m in Method::all().into_iter().filter(|m| m.base == Base::ReducedMidpoint) {
            let t = integrate(&p.system, m, &p.x0, 0.1, 1000, &cfg).unwrap();
            assert!(t.is_completed(), "{name} {m}: {}", t.status);
            assert!(
                t.max_integral_error() <= 1e-10,
                "{name} {m}: {:e}",
                t.max_integral_error()
            );
        }
    }
}

#[test]
fn toda_thousand_steps() {
    let p = toda3().unwrap();
    let t = integrate(&p.system, Method::RD_MP2, &p.x0, 0.1, 1000, &SolverConfig::default()).unwrap();
    assert!(t.is_completed(), "{}", t.status);
    assert_eq!(t.integral_errors[0].len(), 4);
    assert!(t.max_integral_error() <= 1e-11, "{:e}", t.max_integral_error());
}

#[test]
fn zero_steps_gives_initial_state() {
    let p = quartic_oscillator().unwrap();
    let t = integrate(&p.system, Method::RD_MP2, &p.x0, 0.1, 0, &SolverConfig::default()).unwrap();
    assert_eq!(t.len(), 1);
    assert_eq!(t.states[0], p.x0);
    assert_eq!(t.max_integral_error(), 0.0);
}

#[test]
fn midpoint_loses_stability_on_large_orbit() {
    let p = quartic_ham(0.0).unwrap();
    let x0 = [2.0 + 16.0 / 3.0, 0.0];
    let t = integrate(&p.system, Method::MP2, &x0, 0.1, 10_000, &SolverConfig::default()).unwrap();
    assert!(!t.is_completed());
}

fn terminal_error(p: &ProblemSpec, m: Method, k: usize, reference: &[f64]) -> f64 {
    let t = integrate(&p.system, m, &p.x0, 1.0 / k as f64, k, &patient()).unwrap();
    assert!(t.is_completed());
    max_diff(t.final_state(), reference)
}

/// Least-squares slope of `log e` against `log h`, ignoring errors at the round-off floor.
fn slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, e)| *e > 2e-13)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    num / den
}

#[test]
fn convergence_orders_on_nambu() {
    let p = nambu_2int().unwrap();
    let reference = integrate(&p.system, Method::RD_C8, &p.x0, 1.0 / 4000.0, 4000, &patient()).unwrap();
    let reference = reference.final_state().to_vec();
    for m in Method::all().into_iter().filter(|m| m.base != Base::Avf) {
        let pts: Vec<(f64, f64)> = [10, 20, 40, 80]
            .iter()
            .map(|&k| (1.0 / k as f64, terminal_error(&p, m, k, &reference)))
            .collect();
        let s = slope(&pts);
        assert!((s - m.order() as f64).abs() <= 0.5, "{m}: slope {s:.2} from {pts:?}");
    }
}

#[test]
fn rd_mp2_is_second_order_on_quartic() {
    let p = quartic_oscillator().unwrap();
    let reference = integrate(&p.system, Method::RD_C8, &p.x0, 1.0 / 2000.0, 2000, &patient()).unwrap();
    let reference = reference.final_state().to_vec();
    let pts: Vec<(f64, f64)> = [10, 20, 40, 80]
        .iter()
        .map(|&k| (1.0 / k as f64, terminal_error(&p, Method::RD_MP2, k, &reference)))
        .collect();
    assert!((slope(&pts) - 2.0).abs() < 0.2);
}
