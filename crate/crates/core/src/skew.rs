//! Skew structures and reduced-degree vector fields.
//!
//! A [`ReducedSystem`] packages an ODE `x' = f(x)` with its polynomial first
//! integrals, their reduced quadratic forms over a shared [`Tower`], and an
//! antisymmetric structure that turns total gradients back into a vector
//! field on the extended space.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::poly::Polynomial;
use crate::tower::{ReducedIntegral, Tower, TowerError};

/// Relative threshold on the Gram determinant of the integral gradients.
pub const GRAM_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SkewError {
    #[error("gradients are nearly dependent: Gram determinant {det:e} below {threshold:e}")]
    Singular { det: f64, threshold: f64 },
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Tower(#[from] TowerError),
}

#[derive(Clone, Debug)]
pub enum SkewStructure {
    /// `J = [[0, -I], [I, 0]]`; even dimension, single integral.
    CanonicalJ,
    /// `S(x)`, an antisymmetric matrix of polynomials in the original
    /// variables; single integral.
    ExplicitMatrix(Vec<Vec<Polynomial>>),
    /// The reduced vector field given directly as polynomials on the extended space.
    ExplicitField(Vec<Polynomial>),
    /// Wedge of the original field with the original integral gradients,
    /// built pointwise; any number of integrals below `n`.
    DefaultWedge,
}

impl SkewStructure {
    pub fn name(&self) -> &'static str {
        match self {
            Self::CanonicalJ => "canonical",
            Self::ExplicitMatrix(_) => "matrix",
            Self::ExplicitField(_) => "explicit-field",
            Self::DefaultWedge => "wedge",
        }
    }
}

/// Evaluates the antisymmetric `(m+1)`-form built from `f_val` and `grads`
/// against `args`, normalised by the Gram determinant of `grads`.
///
/// The result `u` has `u_i = det M_i / det Gram(grads)`, where the first column
/// of `M_i` is `(f_i, g1_i, .., gm_i)` and column `j+1` holds the inner products
/// of `(f, g1, .., gm)` with `args_j`. When `f_val` is orthogonal to every
/// gradient, contracting with `args = grads` returns `f_val`.
pub fn contract_default(f_val: &[f64], grads: &[Vec<f64>], args: &[Vec<f64>]) -> Result<Vec<f64>, SkewError> {
    let n = f_val.len();
    let m = grads.len();
    if args.len() != m {
        return Err(SkewError::InvalidStructure(format!(
            "{} arguments for {m} gradients",
            args.len()
        )));
    }
    for v in grads.iter().chain(args) {
        if v.len() != n {
            return Err(SkewError::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let gram = DMatrix::from_fn(m, m, |a, b| dot(&grads[a], &grads[b]));
    let det = gram.determinant();
    let threshold = GRAM_THRESHOLD * grads.iter().map(|g| dot(g, g)).product::<f64>();
    if !(det.abs() >= threshold) || det == 0.0 {
        return Err(SkewError::Singular { det, threshold });
    }

    // Laplace expansion along the first column: u = sum_a (-1)^a C_a w_a with
    // C_a the minor of the inner-product block with row a removed.
    let rows: Vec<&[f64]> = std::iter::once(f_val).chain(grads.iter().map(Vec::as_slice)).collect();
    let block = DMatrix::from_fn(m + 1, m, |a, j| dot(rows[a], &args[j]));
    let mut u = vec![0.0; n];
    for (a, w) in rows.iter().enumerate() {
        let minor = block.clone().remove_row(a).determinant();
        let c = if a % 2 == 0 { minor } else { -minor };
        for (ui, wi) in u.iter_mut().zip(w.iter()) {
            *ui += c * wi;
        }
    }
    u.iter_mut().for_each(|ui| *ui /= det);
    Ok(u)
}

/// An ODE in multi-skew-gradient form over a reduced tower.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    n: usize,
    tower: Arc<Tower>,
    integrals: Vec<ReducedIntegral>,
    structure: SkewStructure,
    original_field: Vec<Polynomial>,
    original_gradients: Vec<Vec<Polynomial>>,
}

impl ReducedSystem {
    pub fn new(
        original_field: Vec<Polynomial>,
        integrals: Vec<ReducedIntegral>,
        structure: SkewStructure,
    ) -> Result<Self, SkewError> {
        let invalid = |s: String| Err(SkewError::InvalidStructure(s));
        let n = original_field.len();
        let Some(first) = integrals.first() else {
            return invalid("at least one integral is required".into());
        };
        let tower = first.tower().clone();
        if tower.n() != n {
            return invalid(format!("tower over {} variables, field has {n}", tower.n()));
        }
        if integrals.iter().any(|r| !Arc::ptr_eq(r.tower(), &tower)) {
            return invalid("integrals must share one tower".into());
        }
        if integrals.len() >= n {
            return invalid(format!(
                "{} integrals in dimension {n}; need fewer integrals than variables",
                integrals.len()
            ));
        }
        if let Some(p) = original_field.iter().find(|p| p.nvars() != n) {
            return invalid(format!("field component has {} variables, expected {n}", p.nvars()));
        }
        let m = integrals.len();
        let structure = match structure {
            SkewStructure::CanonicalJ if !n.is_multiple_of(2) => {
                return invalid(format!("canonical structure needs even dimension, got {n}"))
            }
            SkewStructure::CanonicalJ | SkewStructure::ExplicitMatrix(_) if m != 1 => {
                return invalid(format!("{} structure takes one integral, got {m}", structure.name()))
            }
            SkewStructure::ExplicitMatrix(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return invalid(format!("structure matrix must be {n}x{n}"));
                }
                if rows.iter().flatten().any(|p| p.nvars() != n) {
                    return invalid("structure entries must be polynomials in x".into());
                }
                for i in 0..n {
                    for j in 0..=i {
                        let sum = &rows[i][j] + &rows[j][i];
                        if !sum.approx_eq(&Polynomial::zero(n), 1e-12) {
                            return invalid(format!("structure matrix not antisymmetric at ({i},{j})"));
                        }
                    }
                }
                SkewStructure::ExplicitMatrix(rows)
            }
            SkewStructure::ExplicitField(field) => {
                if field.len() != n {
                    return invalid(format!("explicit field has {} components, expected {n}", field.len()));
                }
                if field.iter().any(|p| p.nvars() > tower.dim()) {
                    return invalid("explicit field uses variables beyond the tower".into());
                }
                SkewStructure::ExplicitField(field.iter().map(|p| p.embed(tower.dim())).collect())
            }
            other => other,
        };
        let original_gradients = integrals.iter().map(|r| r.original().gradient(n)).collect();
        Ok(Self {
            n,
            tower,
            integrals,
            structure,
            original_field,
            original_gradients,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of integrals.
    pub fn m(&self) -> usize {
        self.integrals.len()
    }

    /// Extended dimension.
    pub fn dim(&self) -> usize {
        self.tower.dim()
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn integrals(&self) -> &[ReducedIntegral] {
        &self.integrals
    }

    pub fn structure(&self) -> &SkewStructure {
        &self.structure
    }

    pub fn original_field(&self) -> &[Polynomial] {
        &self.original_field
    }

    pub fn eval_original_field(&self, x: &[f64]) -> Vec<f64> {
        self.original_field.iter().map(|p| p.eval_unchecked(x)).collect()
    }

    /// Original integrals `H_i(x)`.
    pub fn eval_integrals(&self, x: &[f64]) -> Vec<f64> {
        self.integrals.iter().map(|r| r.original().eval_unchecked(x)).collect()
    }

    pub fn eval_original_gradients(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.original_gradients
            .iter()
            .map(|g| g.iter().map(|p| p.eval_unchecked(x)).collect())
            .collect()
    }

    pub fn lift(&self, x: &[f64]) -> Vec<f64> {
        self.tower.lift(x)
    }

    /// Total gradients of every reduced integral at `z`.
    pub fn total_gradients(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let mut adj = vec![0.0; self.dim()];
        self.integrals
            .iter()
            .map(|r| {
                r.total_gradient_into(z, &mut adj);
                adj[..self.n].to_vec()
            })
            .collect()
    }

    /// The reduced-degree vector field at the extended point `z`.
    pub fn reduced_field(&self, z: &[f64]) -> Result<Vec<f64>, SkewError> {
        if z.len() != self.dim() {
            return Err(SkewError::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        let mut out = vec![0.0; self.n];
        self.reduced_field_into(z, &mut out)?;
        Ok(out)
    }

    /// Unchecked variant of [`reduced_field`](Self::reduced_field).
    pub fn reduced_field_into(&self, z: &[f64], out: &mut [f64]) -> Result<(), SkewError> {
        let n = self.n;
        let x = &z[..n];
        match &self.structure {
            SkewStructure::ExplicitField(field) => {
                for (o, p) in out.iter_mut().zip(field) {
                    *o = p.eval_unchecked(z);
                }
            }
            SkewStructure::CanonicalJ => {
                let g = self.single_gradient(z);
                let half = n / 2;
                for i in 0..half {
                    out[i] = -g[i + half];
                    out[i + half] = g[i];
                }
            }
            SkewStructure::ExplicitMatrix(rows) => {
                let g = self.single_gradient(z);
                for (o, row) in out.iter_mut().zip(rows) {
                    *o = row.iter().zip(&g).map(|(s, gj)| s.eval_unchecked(x) * gj).sum();
                }
            }
            SkewStructure::DefaultWedge => {
                let f_val = self.eval_original_field(x);
                let grads = self.eval_original_gradients(x);
                let args = self.total_gradients(z);
                out.copy_from_slice(&contract_default(&f_val, &grads, &args)?);
            }
        }
        Ok(())
    }

    fn single_gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut adj = vec![0.0; self.dim()];
        self.integrals[0].total_gradient_into(z, &mut adj);
        adj.truncate(self.n);
        adj
    }

    /// Vector field of the extended ODE: the reduced field on the `x` block
    /// and the product-rule velocities `v' = a b' + b a'` on the auxiliaries.
    pub fn extended_field(&self, z: &[f64]) -> Result<Vec<f64>, SkewError> {
        let mut dz = vec![0.0; self.dim()];
        let fx = self.reduced_field(z)?;
        dz[..self.n].copy_from_slice(&fx);
        self.tower.push_forward(z, &mut dz);
        Ok(dz)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub samples: usize,
    pub seed: u64,
    /// Points are drawn uniformly from `[-half_width, half_width]^n`.
    pub half_width: f64,
    pub tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            samples: 200,
            seed: 20_211_014,
            half_width: 2.0,
            tol: 1e-10,
        }
    }
}

/// Largest residuals seen by [`verify_system`]. Residuals are relative to
/// the magnitude of the quantities being compared, floored at one.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub samples: usize,
    /// Per integral: `|f . grad H_i|`.
    pub orthogonality: Vec<f64>,
    /// `|reduced_field(lift(x)) - f(x)|`.
    pub field_consistency: f64,
    /// Per integral: coefficient residual of the reduced form pulled back.
    pub integral_consistency: Vec<f64>,
    /// `|S_ij + S_ji|` for explicit matrices.
    pub antisymmetry: Option<f64>,
    /// Sample points where the wedge structure was singular.
    pub singular_points: usize,
    pub tol: f64,
    pub passed: bool,
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "samples: {}", self.samples)?;
        for (i, r) in self.orthogonality.iter().enumerate() {
            writeln!(f, "f . grad H{}: {r:.3e}", i + 1)?;
        }
        for (i, r) in self.integral_consistency.iter().enumerate() {
            writeln!(f, "reduced H{} consistency: {r:.3e}", i + 1)?;
        }
        writeln!(f, "reduced field at lifted points: {:.3e}", self.field_consistency)?;
        if let Some(a) = self.antisymmetry {
            writeln!(f, "structure antisymmetry: {a:.3e}")?;
        }
        if self.singular_points > 0 {
            writeln!(f, "singular sample points: {}", self.singular_points)?;
        }
        write!(
            f,
            "{} (tolerance {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.tol
        )
    }
}

/// Samples random points and checks that the field conserves every integral,
/// that the reduced field agrees with the original on lifted points, and that
/// explicit structures are antisymmetric.
pub fn verify_system(sys: &ReducedSystem, cfg: &VerifyConfig) -> VerifyReport {
    let n = sys.n();
    let m = sys.m();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut orthogonality = vec![0.0f64; m];
    let mut field_consistency = 0.0f64;
    let mut antisymmetry = matches!(sys.structure(), SkewStructure::ExplicitMatrix(_)).then_some(0.0f64);
    let mut singular_points = 0;

    for _ in 0..cfg.samples {
        let x: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-cfg.half_width..=cfg.half_width))
            .collect();
        let f = sys.eval_original_field(&x);
        for (i, g) in sys.eval_original_gradients(&x).iter().enumerate() {
            let dot: f64 = f.iter().zip(g).map(|(a, b)| a * b).sum();
            let scale: f64 = f.iter().zip(g).map(|(a, b)| (a * b).abs()).sum();
            orthogonality[i] = orthogonality[i].max(dot.abs() / scale.max(1.0));
        }
        match sys.reduced_field(&sys.lift(&x)) {
            Ok(r) => {
                let scale = f.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
                let diff = r.iter().zip(&f).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
                field_consistency = field_consistency.max(diff / scale);
            }
            Err(SkewError::Singular { .. }) => singular_points += 1,
            Err(e) => panic!("reduced field failed on a valid point: {e}"),
        }
        if let (Some(a), SkewStructure::ExplicitMatrix(rows)) = (antisymmetry.as_mut(), sys.structure()) {
            let vals: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| r.iter().map(|p| p.eval_unchecked(&x)).collect())
                .collect();
            let scale = vals.iter().flatten().fold(1.0f64, |acc, v| acc.max(v.abs()));
            for i in 0..n {
                for j in 0..n {
                    *a = a.max((vals[i][j] + vals[j][i]).abs() / scale);
                }
            }
        }
    }

    let integral_consistency: Vec<f64> = sys
        .integrals()
        .iter()
        .map(|r| {
            let c = r.check_consistency();
            c.residual / r.original().max_abs_coeff().max(1.0)
        })
        .collect();
    let tol = cfg.tol;
    let passed = orthogonality.iter().all(|&r| r <= tol)
        && integral_consistency.iter().all(|&r| r <= tol)
        && field_consistency <= tol
        && antisymmetry.is_none_or(|a| a <= tol)
        && singular_points == 0;
    VerifyReport {
        samples: cfg.samples,
        orthogonality,
        field_consistency,
        integral_consistency,
        antisymmetry,
        singular_points,
        tol,
        passed,
    }
}

/// Builds `S` for the canonical structure as an explicit polynomial matrix.
pub fn canonical_matrix(n: usize) -> Vec<Vec<Polynomial>> {
    assert!(n.is_multiple_of(2), "canonical structure needs even dimension");
    let half = n / 2;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = if i < half && j == i + half {
                        -1.0
                    } else if i >= half && j + half == i {
                        1.0
                    } else {
                        0.0
                    };
                    Polynomial::constant(n, c)
                })
                .collect()
        })
        .collect()
}

/// `S(x) grad H(x)` as polynomials; the original field of a single-integral
/// skew-gradient system.
pub fn skew_gradient_field(s: &[Vec<Polynomial>], h: &Polynomial) -> Vec<Polynomial> {
    let n = h.nvars();
    let grad = h.gradient(n);
    s.iter()
        .map(|row| {
            row.iter()
                .zip(&grad)
                .fold(Polynomial::zero(n), |acc, (sij, gj)| &acc + &(sij * gj))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::{reduce, reduce_all, ReductionParams};

    fn p(s: &str, n: usize) -> Polynomial {
        Polynomial::parse(s, n).unwrap()
    }

    fn quartic() -> ReducedSystem {
        let h = p("0.5*x1^2 + 0.25*x2^4", 2);
        let field = skew_gradient_field(&canonical_matrix(2), &h);
        let r = reduce(&h, &ReductionParams::new()).unwrap();
        ReducedSystem::new(field, vec![r], SkewStructure::CanonicalJ).unwrap()
    }

    fn octic() -> ReducedSystem {
        let h = p("0.5*x1^2 + 0.125*x2^8", 2);
        let field = skew_gradient_field(&canonical_matrix(2), &h);
        let r = reduce(&h, &ReductionParams::new()).unwrap();
        ReducedSystem::new(field, vec![r], SkewStructure::CanonicalJ).unwrap()
    }

    #[test]
    fn quartic_reduced_field() {
        let sys = quartic();
        assert_eq!(sys.original_field(), &[p("-x2^3", 2), p("x1", 2)]);
        let (x1, x2, y) = (0.7, -1.3, 2.9);
        let f = sys.reduced_field(&[x1, x2, y]).unwrap();
        assert_eq!(f, vec![-x2 * y, x1]);
    }

    #[test]
    fn octic_reduced_field() {
        let sys = octic();
        let (x1, x2, y1, y2) = (0.4, 1.1, -0.6, 3.0);
        let f = sys.reduced_field(&[x1, x2, y1, y2]).unwrap();
        assert!((f[0] - (-x2 * y1 * y2)).abs() < 1e-15);
        assert_eq!(f[1], x1);
    }

    #[test]
    fn reduced_field_matches_original_on_lift() {
        for sys in [quartic(), octic()] {
            for x in [[1.0, 2.0], [-0.3, 0.8], [2.0, -1.5]] {
                let r = sys.reduced_field(&sys.lift(&x)).unwrap();
                let f = sys.eval_original_field(&x);
                for (a, b) in r.iter().zip(&f) {
                    assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn wedge_recovers_canonical_j() {
        // quartic oscillator at x = (1, 2): f = (-8, 1), grad H = (1, 8)
        let f = [-8.0, 1.0];
        let g = vec![1.0, 8.0];
        let out = contract_default(&f, std::slice::from_ref(&g), std::slice::from_ref(&g)).unwrap();
        assert!((out[0] + 8.0).abs() < 1e-14 && (out[1] - 1.0).abs() < 1e-14);
        // the induced matrix is J: its columns are the images of e1, e2
        let c1 = contract_default(&f, &[vec![1.0, 8.0]], &[vec![1.0, 0.0]]).unwrap();
        let c2 = contract_default(&f, &[vec![1.0, 8.0]], &[vec![0.0, 1.0]]).unwrap();
        let s = [[c1[0], c2[0]], [c1[1], c2[1]]];
        let j = [[0.0, -1.0], [1.0, 0.0]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((s[a][b] - j[a][b]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn wedge_matches_literal_determinants() {
        // u_i = det(M_i) / det(G) with M_i built column by column
        let f = vec![0.3, -1.2, 0.7, 2.0];
        let grads = vec![vec![1.0, 0.5, -0.2, 0.1], vec![0.0, 1.0, 3.0, -1.0]];
        let args = vec![vec![0.4, 0.1, 0.9, -0.5], vec![1.5, -0.3, 0.2, 0.8]];
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let w = [&f, &grads[0], &grads[1]];
        let gram = DMatrix::from_fn(2, 2, |a, b| dot(&grads[a], &grads[b]));
        let got = contract_default(&f, &grads, &args).unwrap();
        for i in 0..4 {
            let mi = DMatrix::from_fn(
                3,
                3,
                |a, col| {
                    if col == 0 {
                        w[a][i]
                    } else {
                        dot(w[a], &args[col - 1])
                    }
                },
            );
            let expected = mi.determinant() / gram.determinant();
            assert!((got[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn wedge_singular_gradients() {
        let g = vec![1.0, 2.0, 3.0];
        let err = contract_default(&[0.0, 0.0, 0.0], &[g.clone(), g.clone()], &[g.clone(), g]).unwrap_err();
        assert!(matches!(err, SkewError::Singular { .. }));
    }

    #[test]
    fn canonical_requires_even_dimension_and_one_integral() {
        let h = p("x1^2 + x2^2 + x3^2", 3);
        let r = reduce(&h, &ReductionParams::new()).unwrap();
        let field = vec![Polynomial::zero(3); 3];
        assert!(ReducedSystem::new(field, vec![r], SkewStructure::CanonicalJ).is_err());
    }

    #[test]
    fn too_many_integrals_rejected() {
        let hs = [p("x1", 2), p("x2", 2)];
        let (_, rs) = reduce_all(2, &hs, &ReductionParams::new()).unwrap();
        let err = ReducedSystem::new(vec![Polynomial::zero(2); 2], rs, SkewStructure::DefaultWedge);
        assert!(matches!(err, Err(SkewError::InvalidStructure(_))));
    }

    #[test]
    fn non_antisymmetric_matrix_rejected() {
        let h = p("x1^2 + x2^2", 2);
        let r = reduce(&h, &ReductionParams::new()).unwrap();
        let s = vec![vec![p("0", 2), p("x1", 2)], vec![p("x1", 2), p("0", 2)]];
        let res = ReducedSystem::new(vec![Polynomial::zero(2); 2], vec![r], SkewStructure::ExplicitMatrix(s));
        assert!(matches!(res, Err(SkewError::InvalidStructure(_))));
    }

    #[test]
    fn verify_quartic_passes() {
        let report = verify_system(&quartic(), &VerifyConfig::default());
        assert!(report.passed, "{report}");
    }

    #[test]
    fn verify_flags_wrong_integral() {
        // field of the quartic oscillator, but claim H = x1^2 + x2^2
        let sys = quartic();
        let r = reduce(&p("x1^2 + x2^2", 2), &ReductionParams::new()).unwrap();
        let bad = ReducedSystem::new(sys.original_field().to_vec(), vec![r], SkewStructure::CanonicalJ).unwrap();
        let report = verify_system(&bad, &VerifyConfig::default());
        assert!(!report.passed);
        assert!(report.orthogonality[0] > 1e-3);
    }

    #[test]
    fn explicit_matrix_with_state_dependence() {
        // S(x) = x3 * (e1 e2^T - e2 e1^T) on R^3, H = x1^2 x2^2 + x3^2
        let n = 3;
        let z = Polynomial::zero(n);
        let s = vec![
            vec![z.clone(), p("x3", n), z.clone()],
            vec![p("-x3", n), z.clone(), z.clone()],
            vec![z.clone(), z.clone(), z.clone()],
        ];
        let h = p("x1^2*x2^2 + x3^2", n);
        let field = skew_gradient_field(&s, &h);
        let r = reduce(&h, &ReductionParams::new()).unwrap();
        let sys = ReducedSystem::new(field, vec![r], SkewStructure::ExplicitMatrix(s)).unwrap();
        let report = verify_system(&sys, &VerifyConfig::default());
        assert!(report.passed, "{report}");
        assert_eq!(report.antisymmetry, Some(0.0));
    }

    #[test]
    fn extended_field_product_rule() {
        let sys = quartic();
        let z = [0.5, -0.7, 0.2];
        let dz = sys.extended_field(&z).unwrap();
        // y' = 2 x2 x2' = 2 x2 x1
        assert!((dz[2] - 2.0 * z[1] * z[0]).abs() < 1e-15);
    }
}
