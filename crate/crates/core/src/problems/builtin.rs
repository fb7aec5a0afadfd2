use std::sync::Arc;

use super::{hamiltonian_system, ProblemError, ProblemSpec};
use crate::poly::{Monomial, Polynomial, VarId};
use crate::skew::{ReducedSystem, SkewStructure};
use crate::tower::{reduce_all, ReducedIntegral, ReductionParams, Splitting, Tower};

pub(crate) const NAMES: [&str; 5] = [
    "quartic-oscillator",
    "octic-oscillator",
    "quartic-ham",
    "nambu-2int",
    "toda3",
];

/// Names and one-line descriptions of the built-in problems.
pub fn catalog() -> Vec<(&'static str, &'static str)> {
    let desc = [
        "H = x1^2/2 + x2^4/4, canonical structure",
        "H = x1^2/2 + x2^8/8, canonical structure",
        "H = x1^2/2 + x2^4 + x1^2*x2^2, canonical structure",
        "3D Nambu system with integrals of degree 8 and 4, explicit reduced field",
        "periodic Toda lattice with 3 particles, 4 integrals, wedge structure",
    ];
    NAMES.into_iter().zip(desc).collect()
}

pub fn builtin(name: &str) -> Result<ProblemSpec, ProblemError> {
    match name {
        "quartic-oscillator" => quartic_oscillator(),
        "octic-oscillator" => octic_oscillator(),
        "quartic-ham" => quartic_ham(0.0),
        "nambu-2int" => nambu_2int(),
        "toda3" => toda3(),
        _ => Err(ProblemError::Unknown(name.to_string())),
    }
}

fn poly(s: &str, n: usize) -> Polynomial {
    Polynomial::parse(s, n).expect("built-in polynomial")
}

fn split(w: f64, l: &str, r: &str) -> Splitting {
    Splitting::parse(w, l, r).expect("built-in splitting")
}

fn mono(s: &str) -> Monomial {
    s.parse().expect("built-in monomial")
}

pub fn quartic_oscillator() -> Result<ProblemSpec, ProblemError> {
    let h = poly("0.5*x1^2 + 0.25*x2^4", 2);
    let params = ReductionParams::new();
    let sys = hamiltonian_system(&h, &params)?;
    ProblemSpec::new("quartic-oscillator", sys, params, vec![1.0, 1.0], 0.1)
}

pub fn octic_oscillator() -> Result<ProblemSpec, ProblemError> {
    let h = poly("0.5*x1^2 + 0.125*x2^8", 2);
    let params = ReductionParams::new();
    let sys = hamiltonian_system(&h, &params)?;
    ProblemSpec::new("octic-oscillator", sys, params, vec![1.0, 1.0], 0.1)
}

/// `x1^2 x2^2` is reduced as `alpha (x1^2)(x2^2) + (1 - alpha) (x1 x2)^2`.
pub fn quartic_ham(alpha: f64) -> Result<ProblemSpec, ProblemError> {
    let h = poly("0.5*x1^2 + x2^4 + x1^2*x2^2", 2);
    let mut alts = Vec::new();
    if alpha != 0.0 {
        alts.push(split(alpha, "x1^2", "x2^2"));
    }
    if alpha != 1.0 {
        alts.push(split(1.0 - alpha, "x1*x2", "x1*x2"));
    }
    let params = ReductionParams::new().with_split(mono("x1^2*x2^2"), alts)?;
    let sys = hamiltonian_system(&h, &params)?;
    ProblemSpec::new("quartic-ham", sys, params, vec![2.0, 0.0], 0.1)
}

/// Orbit initial conditions `(2 + 2i/3, 0)`, `i = 0..=12`.
pub fn quartic_ham_orbit_ics() -> Vec<Vec<f64>> {
    (0..=12).map(|i| vec![2.0 + 2.0 * i as f64 / 3.0, 0.0]).collect()
}

/// Splittings for the planar quartic Hamiltonian under which the
/// reduced midpoint rule is parametrised by `b1, b2, b3`.
pub fn planar_quartic_params(b1: f64, b2: f64, b3: f64) -> ReductionParams {
    ReductionParams::new()
        .with_split(
            mono("x1^2*x2"),
            vec![split(b1, "x1^2", "x2"), split(1.0 - b1, "x1*x2", "x1")],
        )
        .and_then(|p| {
            p.with_split(
                mono("x1*x2^2"),
                vec![split(b2, "x2^2", "x1"), split(1.0 - b2, "x1*x2", "x2")],
            )
        })
        .and_then(|p| {
            p.with_split(
                mono("x1^2*x2^2"),
                vec![split(b3, "x1*x2", "x1*x2"), split(1.0 - b3, "x1^2", "x2^2")],
            )
        })
        .expect("valid splittings")
}

/// `H = sum a_k m_k` over the 14 monomials of degree 1..=4 in two variables.
pub fn planar_quartic(alpha: &[f64; 14]) -> Polynomial {
    const MONOMIALS: [&str; 14] = [
        "x1",
        "x2",
        "x1^2",
        "x1*x2",
        "x2^2",
        "x1^3",
        "x1^2*x2",
        "x1*x2^2",
        "x2^3",
        "x1^4",
        "x1^3*x2",
        "x1^2*x2^2",
        "x1*x2^3",
        "x2^4",
    ];
    Polynomial::from_terms(2, MONOMIALS.iter().zip(alpha).map(|(m, &a)| (mono(m), a)))
}

/// `f = grad H1 x grad H2` with the reduced field transcribed over the tower
/// `y11, y22, y33, y13, y1111 = y11^2, y2222 = y22^2`.
pub fn nambu_2int() -> Result<ProblemSpec, ProblemError> {
    let h1 = poly("x1^4*x2^4 + x1*x3 + x2^4*x3^2", 3);
    let h2 = poly("x2^2 - 1", 3) * poly("x1^2 + x2^2 + x3^2", 3);
    let g1 = h1.gradient(3);
    let g2 = h2.gradient(3);
    let field = vec![
        &g1[1] * &g2[2] - &g1[2] * &g2[1],
        &g1[2] * &g2[0] - &g1[0] * &g2[2],
        &g1[0] * &g2[1] - &g1[1] * &g2[0],
    ];

    let mut tower = Tower::new(3);
    let (x1, x2, x3) = (VarId(0), VarId(1), VarId(2));
    let y11 = tower.product(x1, x1);
    let y22 = tower.product(x2, x2);
    let y33 = tower.product(x3, x3);
    let y13 = tower.product(x1, x3);
    let y1111 = tower.product(y11, y11);
    let y2222 = tower.product(y22, y22);
    let dim = tower.dim();
    let tower = Arc::new(tower);

    let v = |id: VarId| Polynomial::var(dim, id);
    let c = |a: f64| Polynomial::constant(dim, a);
    let h1_red = &v(y1111) * &v(y2222) + v(y13) + &v(y2222) * &v(y33);
    let h2_red = (v(y22) - c(1.0)) * (v(y11) + v(y22) + v(y33));

    let (x1, x2, x3) = (v(x1), v(x2), v(x3));
    let p = &v(y22) - &c(1.0);
    let q = v(y11) + v(y22) * 2.0 + v(y33) - c(1.0);
    let r = &x1 + &(&x3 * &v(y2222)) * 2.0;
    let s = &x3 + &(&(&x1 * &v(y11)) * &v(y2222)) * 4.0;
    let t = &v(y33) + &v(y1111);
    let reduced_field = vec![
        &(&(&(&x2 * &x3) * &v(y22)) * &t) * &p * 8.0 - &(&(&x2 * &r) * &q) * 2.0,
        &(&(&x1 * &r) * &p) * 2.0 - &(&(&x3 * &s) * &p) * 2.0,
        &(&(&x2 * &s) * &q) * 2.0 - &(&(&(&x1 * &x2) * &v(y22)) * &t) * &p * 8.0,
    ];

    let integrals = vec![
        ReducedIntegral::new(h1, h1_red, tower.clone())?,
        ReducedIntegral::new(h2, h2_red, tower)?,
    ];
    let sys = ReducedSystem::new(field, integrals, SkewStructure::ExplicitField(reduced_field))?;
    ProblemSpec::new("nambu-2int", sys, ReductionParams::new(), vec![0.5; 3], 0.05)
}

/// Periodic Toda lattice, state `(a1, a2, a3, b1, b2, b3)`.
pub fn toda3() -> Result<ProblemSpec, ProblemError> {
    let n = 6;
    let field = [
        "x1*x5 - x1*x4",
        "x2*x6 - x2*x5",
        "x3*x4 - x3*x6",
        "x1 - x3",
        "x2 - x1",
        "x3 - x2",
    ]
    .map(|s| poly(s, n))
    .to_vec();
    let integrals = vec![
        poly("x4 + x5 + x6", n),
        poly("x1*x2*x3", n),
        poly("x4^3 + x5^3 + x6^3", n).scale(1.0 / 3.0) + poly("x1*x4 + x2*x5 + x3*x6 + x1*x5 + x2*x6 + x3*x4", n),
        poly("x4^2 + x5^2 + x6^2", n).scale(0.5) + poly("x1 + x2 + x3", n),
    ];
    let params = ReductionParams::new();
    let (_, reduced) = reduce_all(n, &integrals, &params)?;
    let sys = ReducedSystem::new(field, reduced, SkewStructure::DefaultWedge)?;
    let x0 = (1..=6).map(|i| i as f64 / 6.0).collect();
    ProblemSpec::new("toda3", sys, params, x0, 0.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skew::GRAM_THRESHOLD;
    use crate::stepper::{integrate, Method, SolverConfig};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn all_builtins_load() {
        for (name, _) in catalog() {
            let p = builtin(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(p.name, name);
            assert_eq!(p.x0.len(), p.n());
        }
        assert!(matches!(builtin("lorenz"), Err(ProblemError::Unknown(_))));
    }

    #[test]
    fn quartic_oscillator_field() {
        let p = quartic_oscillator().unwrap();
        let f: Vec<f64> = p.field().iter().map(|c| c.eval(&[1.0, 2.0]).unwrap()).collect();
        assert_eq!(f, vec![-8.0, 1.0]);
    }

    #[test]
    fn quartic_ham_field() {
        let p = quartic_ham(0.0).unwrap();
        let expected = [poly("-2*x1^2*x2 - 4*x2^3", 2), poly("2*x1*x2^2 + x1", 2)];
        for (a, b) in p.field().iter().zip(&expected) {
            assert!(a.approx_eq(b, 1e-15), "{a} vs {b}");
        }
        // alpha = 0 pairs x1^2 x2^2 as (x1 x2)^2
        let tower = p.system.tower();
        assert!(tower.find_product(VarId(0), VarId(1)).is_some());
        assert!(tower.find_product(VarId(0), VarId(0)).is_none());
        assert!(quartic_ham(0.5).is_ok());
    }

    #[test]
    fn orbit_ics() {
        let ics = quartic_ham_orbit_ics();
        assert_eq!(ics.len(), 13);
        assert_eq!(ics[0], vec![2.0, 0.0]);
        assert!((ics[8][0] - (2.0 + 16.0 / 3.0)).abs() < 1e-15);
        assert_eq!(ics[12], vec![10.0, 0.0]);
    }

    #[test]
    fn nambu_reduced_field_matches_original() {
        let p = nambu_2int().unwrap();
        let sys = &p.system;
        assert_eq!(sys.dim(), 9);
        for x in [[0.5, 0.5, 0.5], [-1.2, 0.3, 1.7], [0.9, -1.1, -0.4]] {
            let red = sys.reduced_field(&sys.lift(&x)).unwrap();
            let orig = sys.eval_original_field(&x);
            let scale = orig.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            assert!(close(&red, &orig, 1e-11 * scale), "{red:?} vs {orig:?}");
        }
    }

    #[test]
    fn nambu_auto_reduction_agrees() {
        // auto-reduced integrals, evaluated on the explicit tower's lift, match
        let p = nambu_2int().unwrap();
        let (_, auto) = reduce_all(
            3,
            &[p.integrals()[0].clone(), p.integrals()[1].clone()],
            &ReductionParams::new(),
        )
        .unwrap();
        for r in &auto {
            assert!(r.check_consistency().passed);
        }
        for x in [[0.5, 0.5, 0.5], [1.3, -0.7, 0.2]] {
            for (a, b) in auto.iter().zip(p.system.integrals()) {
                let za = a.tower().lift(&x);
                let zb = b.tower().lift(&x);
                let (ra, rb) = (a.reduced().eval(&za).unwrap(), b.reduced().eval(&zb).unwrap());
                assert!((ra - rb).abs() < 1e-12 * ra.abs().max(1.0));
            }
        }
    }

    #[test]
    fn toda_tower_and_gram() {
        let p = toda3().unwrap();
        let t = p.system.tower();
        let (a1, a2, a3) = (VarId(0), VarId(1), VarId(2));
        // a1 a2 a3 reduces to y12 a3, already quadratic
        assert!(t.find_product(a1, a2).is_some());
        assert!(t.find_product(a2, a3).is_none());
        for b in 3..6 {
            assert!(t.find_product(VarId(b), VarId(b)).is_some());
        }
        assert_eq!(t.aux_vars().len(), 4);
        // gradients are independent at the start
        let g = p.system.eval_original_gradients(&p.x0);
        let m = nalgebra::DMatrix::from_fn(4, 4, |i, j| g[i].iter().zip(&g[j]).map(|(a, b)| a * b).sum::<f64>());
        let scale: f64 = g.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>()).product();
        assert!(m.determinant().abs() > GRAM_THRESHOLD * scale);
    }

    #[test]
    fn toda_short_run_conserves_integrals() {
        let p = toda3().unwrap();
        let t = integrate(&p.system, Method::RD_MP2, &p.x0, p.h, 100, &SolverConfig::default()).unwrap();
        assert!(t.is_completed());
        assert!(t.max_integral_error() <= 1e-11, "{}", t.max_integral_error());
    }

    #[test]
    fn prop1_params_are_valid() {
        let params = planar_quartic_params(1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0);
        assert_eq!(params.get(&mono("x1^2*x2")).unwrap().len(), 2);
        let mut alpha = [0.0; 14];
        alpha[11] = 1.0;
        assert_eq!(planar_quartic(&alpha), poly("x1^2*x2^2", 2));
        assert!(hamiltonian_system(&planar_quartic(&[0.3; 14]), &params).is_ok());
    }
}
