//! Auxiliary-variable towers and reduced-degree integrals.
//!
//! Every auxiliary variable is the product of two earlier variables (original
//! coordinates or other auxiliaries), so its defining relation `v = a * b` is
//! a quadratic invariant of the extended flow. Reducing a polynomial integral
//! rewrites each monomial of degree three or more as a product of exactly two
//! tower variables, leaving a quadratic polynomial on the extended space.
//!
//! Extended coordinates are laid out as `(x_1..x_n, v_1..v_k)`, auxiliaries in
//! creation order, so every auxiliary's factors precede it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::poly::{Monomial, PolyError, Polynomial, VarId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TowerError {
    #[error("extended point has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("integral has {got} variables, tower expects {expected}")]
    SpaceMismatch { expected: usize, got: usize },
    #[error("reduced integral has degree {0}, expected at most 2")]
    NotQuadratic(i32),
    #[error("splitting {left} | {right} does not multiply to {monomial}")]
    InvalidSplit {
        monomial: Monomial,
        left: Monomial,
        right: Monomial,
    },
    #[error("splitting weights for {monomial} sum to {sum}, expected 1")]
    WeightSum { monomial: Monomial, sum: f64 },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// One auxiliary variable `id = left * right`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuxVar {
    pub id: VarId,
    pub left: VarId,
    pub right: VarId,
    /// Degree of the lift of `id` as a polynomial in the original variables.
    pub degree: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tower {
    n: usize,
    aux: Vec<AuxVar>,
    index: HashMap<(VarId, VarId), VarId>,
}

impl Tower {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            aux: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Number of original variables.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Extended dimension: original plus auxiliary variables.
    pub fn dim(&self) -> usize {
        self.n + self.aux.len()
    }

    pub fn aux_vars(&self) -> &[AuxVar] {
        &self.aux
    }

    pub fn is_empty(&self) -> bool {
        self.aux.is_empty()
    }

    pub fn degree_of(&self, v: VarId) -> u32 {
        if v.0 < self.n {
            1
        } else {
            self.aux[v.0 - self.n].degree
        }
    }

    /// Returns the auxiliary variable for `a * b`, creating it if needed.
    pub fn product(&mut self, a: VarId, b: VarId) -> VarId {
        assert!(a.0 < self.dim() && b.0 < self.dim(), "factor outside tower");
        let key = if a <= b { (a, b) } else { (b, a) };
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = VarId(self.dim());
        self.aux.push(AuxVar {
            id,
            left: key.0,
            right: key.1,
            degree: self.degree_of(a) + self.degree_of(b),
        });
        self.index.insert(key, id);
        id
    }

    /// Looks up an existing product without creating it.
    pub fn find_product(&self, a: VarId, b: VarId) -> Option<VarId> {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.index.get(&key).copied()
    }

    /// Variable whose lift is the product of `factors` (a flat list of
    /// original variables), built as a balanced binary tree: the first
    /// `ceil(len/2)` factors on the left, the rest on the right.
    pub fn build_from_factors(&mut self, factors: &[VarId]) -> VarId {
        assert!(!factors.is_empty(), "empty factor list");
        if factors.len() == 1 {
            return factors[0];
        }
        let k = factors.len().div_ceil(2);
        let left = self.build_from_factors(&factors[..k]);
        let right = self.build_from_factors(&factors[k..]);
        self.product(left, right)
    }

    /// Rewrites `h` (a polynomial in the original variables) as a polynomial
    /// of degree at most two in the extended variables, growing the tower as
    /// needed. The result lives in the extended space as it stands on return.
    pub fn reduce(&mut self, h: &Polynomial, params: &ReductionParams) -> Result<Polynomial, TowerError> {
        if h.nvars() != self.n {
            return Err(TowerError::SpaceMismatch {
                expected: self.n,
                got: h.nvars(),
            });
        }
        let mut terms = Vec::with_capacity(h.terms().len());
        for (m, c) in h.terms() {
            if let Some(alternatives) = params.get(m) {
                for s in alternatives {
                    let u = self.build_from_factors(&s.left.flatten());
                    let v = self.build_from_factors(&s.right.flatten());
                    terms.push((Monomial::from_factors(&[u, v]), c * s.weight));
                }
                continue;
            }
            let d = m.degree() as usize;
            if d <= 2 {
                terms.push((m.clone(), *c));
                continue;
            }
            let flat = m.flatten();
            let k = d.div_ceil(2);
            let u = self.build_from_factors(&flat[..k]);
            let v = self.build_from_factors(&flat[k..]);
            terms.push((Monomial::from_factors(&[u, v]), *c));
        }
        Ok(Polynomial::from_terms(self.dim(), terms))
    }

    /// Extended point `(x, v_1(x), ..., v_k(x))`.
    pub fn lift(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "lift expects {} coordinates", self.n);
        let mut z = Vec::with_capacity(self.dim());
        z.extend_from_slice(x);
        z.resize(self.dim(), 0.0);
        self.fill_aux(&mut z);
        z
    }

    /// Recomputes the auxiliary entries of `z` from its first `n` entries.
    pub fn fill_aux(&self, z: &mut [f64]) {
        for a in &self.aux {
            z[a.id.0] = z[a.left.0] * z[a.right.0];
        }
    }

    /// Each extended variable as a polynomial in the original variables.
    pub fn lift_polynomials(&self) -> Vec<Polynomial> {
        let mut out: Vec<Polynomial> = (0..self.n).map(|i| Polynomial::var(self.n, VarId(i))).collect();
        for a in &self.aux {
            let p = &out[a.left.0] * &out[a.right.0];
            out.push(p);
        }
        out
    }

    /// The induced quadratic invariants `v - left * right`, one per auxiliary.
    pub fn quadric_integrals(&self) -> Vec<Polynomial> {
        let dim = self.dim();
        self.aux
            .iter()
            .map(|a| {
                Polynomial::from_terms(
                    dim,
                    [
                        (Monomial::var(a.id), 1.0),
                        (Monomial::from_factors(&[a.left, a.right]), -1.0),
                    ],
                )
            })
            .collect()
    }

    /// Rows `d v / d x` for every extended variable at `z`, computed forward
    /// with the product rule on the factor values stored in `z`.
    pub fn jacobian(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let mut rows: Vec<Vec<f64>> = (0..self.n)
            .map(|i| {
                let mut e = vec![0.0; self.n];
                e[i] = 1.0;
                e
            })
            .collect();
        for a in &self.aux {
            let (l, r) = (a.left.0, a.right.0);
            let row = (0..self.n).map(|j| z[r] * rows[l][j] + z[l] * rows[r][j]).collect();
            rows.push(row);
        }
        rows
    }

    /// Reverse-mode chain rule: given `adj[k] = dH/dz_k` treating all extended
    /// variables as independent, folds every auxiliary adjoint into its
    /// factors so that `adj[..n]` becomes the total gradient in `x`.
    pub fn pull_back(&self, z: &[f64], adj: &mut [f64]) {
        for a in self.aux.iter().rev() {
            let g = adj[a.id.0];
            if g != 0.0 {
                adj[a.left.0] += g * z[a.right.0];
                adj[a.right.0] += g * z[a.left.0];
            }
        }
    }

    /// Forward-mode companion of [`pull_back`](Self::pull_back): given the
    /// x-velocity in `dz[..n]`, fills the auxiliary velocities
    /// `dv = left * d(right) + right * d(left)`.
    pub fn push_forward(&self, z: &[f64], dz: &mut [f64]) {
        for a in &self.aux {
            let (l, r) = (a.left.0, a.right.0);
            dz[a.id.0] = z[l] * dz[r] + z[r] * dz[l];
        }
    }
}

impl fmt::Display for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tower over {} variables, {} auxiliary", self.n, self.aux.len())?;
        for a in &self.aux {
            writeln!(f, "  {} = {}*{}  (degree {})", a.id, a.left, a.right, a.degree)?;
        }
        Ok(())
    }
}

/// One way to write a monomial as `left * right`, with a weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Splitting {
    pub weight: f64,
    pub left: Monomial,
    pub right: Monomial,
}

impl Splitting {
    pub fn new(weight: f64, left: Monomial, right: Monomial) -> Self {
        Self { weight, left, right }
    }

    /// Parses both halves, e.g. `Splitting::parse(0.5, "x1^2", "x2")`.
    pub fn parse(weight: f64, left: &str, right: &str) -> Result<Self, TowerError> {
        let parse = |s: &str| s.parse::<Monomial>().map_err(PolyError::from);
        Ok(Self::new(weight, parse(left)?, parse(right)?))
    }
}

/// Overrides of the canonical splitting for selected monomials. Each listed
/// monomial is replaced by a weighted combination of alternative splittings;
/// the weights must sum to one so the consistency condition still holds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReductionParams {
    overrides: BTreeMap<Monomial, Vec<Splitting>>,
}

impl ReductionParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.overrides.is_empty()
    }

    pub fn with_split(mut self, monomial: Monomial, alternatives: Vec<Splitting>) -> Result<Self, TowerError> {
        let sum: f64 = alternatives.iter().map(|s| s.weight).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(TowerError::WeightSum { monomial, sum });
        }
        for s in &alternatives {
            if s.left.is_one() || s.right.is_one() || s.left.mul(&s.right) != monomial {
                return Err(TowerError::InvalidSplit {
                    monomial,
                    left: s.left.clone(),
                    right: s.right.clone(),
                });
            }
        }
        self.overrides.insert(monomial, alternatives);
        Ok(self)
    }

    pub fn get(&self, m: &Monomial) -> Option<&[Splitting]> {
        self.overrides.get(m).map(Vec::as_slice)
    }
}

/// Outcome of comparing a reduced integral, pulled back through the tower,
/// with the original.
#[derive(Clone, Debug, PartialEq)]
pub struct Consistency {
    pub passed: bool,
    pub residual: f64,
    /// `(monomial, original coefficient, pulled-back coefficient)` for every
    /// term that differs beyond tolerance.
    pub offending: Vec<(Monomial, f64, f64)>,
}

/// A polynomial integral together with its quadratic form on the extended
/// space of a shared tower.
#[derive(Clone, Debug)]
pub struct ReducedIntegral {
    original: Polynomial,
    reduced: Polynomial,
    tower: Arc<Tower>,
    partials: Vec<(usize, Polynomial)>,
}

impl ReducedIntegral {
    /// Pairs `original` with an explicitly given `reduced` form. The reduced
    /// polynomial is embedded into the tower's extended space.
    pub fn new(original: Polynomial, reduced: Polynomial, tower: Arc<Tower>) -> Result<Self, TowerError> {
        if original.nvars() != tower.n() {
            return Err(TowerError::SpaceMismatch {
                expected: tower.n(),
                got: original.nvars(),
            });
        }
        if reduced.nvars() > tower.dim() {
            return Err(TowerError::SpaceMismatch {
                expected: tower.dim(),
                got: reduced.nvars(),
            });
        }
        if reduced.degree() > 2 {
            return Err(TowerError::NotQuadratic(reduced.degree()));
        }
        let reduced = reduced.embed(tower.dim());
        let partials = (0..tower.dim())
            .map(|i| (i, reduced.partial(VarId(i))))
            .filter(|(_, p)| !p.is_zero())
            .collect();
        Ok(Self {
            original,
            reduced,
            tower,
            partials,
        })
    }

    pub fn original(&self) -> &Polynomial {
        &self.original
    }

    pub fn reduced(&self) -> &Polynomial {
        &self.reduced
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    /// `dH~/dx + sum_k (dv_k/dx)^T dH~/dv_k` at the extended point `z`.
    pub fn total_gradient(&self, z: &[f64]) -> Result<Vec<f64>, TowerError> {
        let dim = self.tower.dim();
        if z.len() != dim {
            return Err(TowerError::DimensionMismatch {
                expected: dim,
                got: z.len(),
            });
        }
        let mut adj = vec![0.0; dim];
        self.total_gradient_into(z, &mut adj);
        adj.truncate(self.tower.n());
        Ok(adj)
    }

    /// Unchecked variant writing into `adj` (length = extended dimension);
    /// on return `adj[..n]` holds the total gradient.
    pub fn total_gradient_into(&self, z: &[f64], adj: &mut [f64]) {
        adj.fill(0.0);
        for (i, p) in &self.partials {
            adj[*i] = p.eval_unchecked(z);
        }
        self.tower.pull_back(z, adj);
    }

    /// Substitutes the lift of every auxiliary variable and compares with the
    /// original integral, coefficient by coefficient.
    pub fn check_consistency(&self) -> Consistency {
        let n = self.tower.n();
        let lifts = self.tower.lift_polynomials();
        let bindings: BTreeMap<VarId, Polynomial> = lifts
            .into_iter()
            .enumerate()
            .skip(n)
            .map(|(i, p)| (VarId(i), p))
            .collect();
        let back = self
            .reduced
            .substitute(&bindings, n)
            .expect("tower lifts live in the original space");
        let residual = back.max_coeff_diff(&self.original);
        let tol = 1e-12 * self.original.max_abs_coeff().max(1.0);
        let mut monomials: Vec<&Monomial> = back
            .terms()
            .iter()
            .chain(self.original.terms())
            .map(|(m, _)| m)
            .collect();
        monomials.sort();
        monomials.dedup();
        let offending = monomials
            .into_iter()
            .map(|m| (m.clone(), self.original.coefficient(m), back.coefficient(m)))
            .filter(|(_, a, b)| (a - b).abs() > tol)
            .collect();
        Consistency {
            passed: residual <= tol,
            residual,
            offending,
        }
    }
}

/// Reduces a list of integrals over one shared tower.
pub fn reduce_all(
    n: usize,
    integrals: &[Polynomial],
    params: &ReductionParams,
) -> Result<(Arc<Tower>, Vec<ReducedIntegral>), TowerError> {
    let mut tower = Tower::new(n);
    let reduced = integrals
        .iter()
        .map(|h| tower.reduce(h, params))
        .collect::<Result<Vec<_>, _>>()?;
    let tower = Arc::new(tower);
    let out = integrals
        .iter()
        .zip(reduced)
        .map(|(h, r)| ReducedIntegral::new(h.clone(), r, tower.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((tower, out))
}

/// Reduces a single integral with a fresh tower.
pub fn reduce(h: &Polynomial, params: &ReductionParams) -> Result<ReducedIntegral, TowerError> {
    let (_, mut v) = reduce_all(h.nvars(), std::slice::from_ref(h), params)?;
    Ok(v.remove(0))
}
