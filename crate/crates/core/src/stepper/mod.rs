//! Implicit one-step integrators: the midpoint rule, its reduced-degree
//! variant, the averaged vector field method, and symmetric compositions.
//!
//! Every implicit step is solved by fixed-point iteration from `x' = x`.

pub mod coeffs;
pub mod quadrature;

use std::fmt;
use std::str::FromStr;

use crate::poly::Polynomial;
use crate::skew::{ReducedSystem, SkewError};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Stop once successive iterates differ by at most this (max-norm).
    pub tol: f64,
    pub max_iter: usize,
    /// Iterates beyond this max-norm count as divergence.
    pub divergence_bound: f64,
    /// Damping factor; `1.0` is plain fixed-point iteration.
    pub relaxation: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1.11e-15,
            max_iter: 100,
            divergence_bound: 1e8,
            relaxation: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StepError {
    #[error("fixed-point iteration did not converge after {iterations} iterations (last update {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("iterate diverged at iteration {iteration} (norm {norm:e})")]
    Divergence { iteration: usize, norm: f64 },
    #[error(transparent)]
    Field(#[from] SkewError),
    #[error("sub-step {index}: {source}")]
    SubStep { index: usize, source: Box<StepError> },
    #[error("composition coefficients sum to {sum}, expected 1")]
    Coefficients { sum: f64 },
    #[error("state has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl StepError {
    /// The innermost error, looking through sub-step wrappers.
    pub fn root(&self) -> &StepError {
        match self {
            Self::SubStep { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn is_divergence(&self) -> bool {
        matches!(self.root(), Self::Divergence { .. })
    }
}

/// Result of one (possibly composed) step.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub x: Vec<f64>,
    /// Fixed-point iterations, summed over sub-steps.
    pub iterations: usize,
}

pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<(), SkewError>;
}

/// A vector field with polynomial components.
#[derive(Clone, Debug)]
pub struct PolynomialField {
    components: Vec<Polynomial>,
    degree: usize,
}

impl PolynomialField {
    pub fn new(components: Vec<Polynomial>) -> Self {
        let degree = components.iter().map(|p| p.degree().max(0) as usize).max().unwrap_or(0);
        Self { components, degree }
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Gauss-Legendre nodes that make the averaged field exact.
    pub fn avf_nodes(&self) -> usize {
        quadrature::nodes_for_degree(self.degree)
    }
}

impl VectorField for PolynomialField {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<(), SkewError> {
        for (o, p) in out.iter_mut().zip(&self.components) {
            *o = p.eval_unchecked(x);
        }
        Ok(())
    }
}

/// The extended ODE on `(x, y)`; see [`ReducedSystem::extended_field`].
pub struct ExtendedField<'a>(pub &'a ReducedSystem);

impl VectorField for ExtendedField<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval_into(&self, z: &[f64], out: &mut [f64]) -> Result<(), SkewError> {
        out.copy_from_slice(&self.0.extended_field(z)?);
        Ok(())
    }
}

/// Residuals that stop shrinking within this factor of the tolerance count as converged.
const STALL_FACTOR: f64 = 4.0;

/// Solves `x' = G(x') = x + h g(x')` by (optionally damped) iteration, where
/// `g` fills its second argument. Convergence is judged on the undamped
/// update `|G(x_k) - x_k|`, and the undamped image is returned.
fn fixed_point<G>(x: &[f64], h: f64, cfg: &SolverConfig, mut g: G) -> Result<Step, StepError>
where
    G: FnMut(&[f64], &mut [f64]) -> Result<(), StepError>,
{
    let n = x.len();
    let omega = cfg.relaxation;
    let mut cur = x.to_vec();
    let mut image = vec![0.0; n];
    let mut fval = vec![0.0; n];
    let mut diff = f64::INFINITY;
    let mut prev_diff = f64::INFINITY;
    for iteration in 1..=cfg.max_iter {
        g(&cur, &mut fval)?;
        diff = 0.0;
        let mut norm = 0.0f64;
        let mut finite = true;
        for i in 0..n {
            let v = x[i] + h * fval[i];
            finite &= v.is_finite();
            diff = diff.max((v - cur[i]).abs());
            norm = norm.max(v.abs());
            image[i] = v;
        }
        if !finite || norm > cfg.divergence_bound {
            return Err(StepError::Divergence {
                iteration,
                norm: if finite { norm } else { f64::INFINITY },
            });
        }
        // iterates can cycle within a few ulps of a large solution, and a
        // noisy field stalls the updates a little above the tolerance
        let tol = cfg.tol.max(4.0 * f64::EPSILON * norm);
        let stalled = diff >= prev_diff && diff <= STALL_FACTOR * tol;
        if diff <= tol || stalled {
            return Ok(Step {
                x: image,
                iterations: iteration,
            });
        }
        prev_diff = diff;
        if omega == 1.0 {
            std::mem::swap(&mut cur, &mut image);
        } else {
            for (c, v) in cur.iter_mut().zip(&image) {
                *c += omega * (v - *c);
            }
        }
    }
    Err(StepError::NonConvergence {
        iterations: cfg.max_iter,
        residual: diff,
    })
}

fn check_dim(x: &[f64], expected: usize) -> Result<(), StepError> {
    if x.len() != expected {
        return Err(StepError::DimensionMismatch { expected, got: x.len() });
    }
    Ok(())
}

/// Implicit midpoint rule `(x' - x)/h = f((x + x')/2)`.
pub fn midpoint_step<F: VectorField + ?Sized>(f: &F, x: &[f64], h: f64, cfg: &SolverConfig) -> Result<Step, StepError> {
    check_dim(x, f.dim())?;
    let mut mid = vec![0.0; x.len()];
    fixed_point(x, h, cfg, |xk, out| {
        for ((m, a), b) in mid.iter_mut().zip(x).zip(xk) {
            *m = 0.5 * (a + b);
        }
        f.eval_into(&mid, out).map_err(StepError::from)
    })
}

/// Reduced-degree midpoint step: the reduced field is evaluated at the
/// average of the lifted endpoints `(x, y(x))` and `(x', y(x'))`.
pub fn rd_midpoint_step(sys: &ReducedSystem, x: &[f64], h: f64, cfg: &SolverConfig) -> Result<Step, StepError> {
    check_dim(x, sys.n())?;
    let n = sys.n();
    let tower = sys.tower();
    let z0 = tower.lift(x);
    let mut zk = vec![0.0; sys.dim()];
    let mut mid = vec![0.0; sys.dim()];
    fixed_point(x, h, cfg, |xk, out| {
        zk[..n].copy_from_slice(xk);
        tower.fill_aux(&mut zk);
        for ((m, a), b) in mid.iter_mut().zip(&z0).zip(&zk) {
            *m = 0.5 * (a + b);
        }
        sys.reduced_field_into(&mid, out).map_err(StepError::from)
    })
}

/// Averaged vector field step `(x' - x)/h = ∫_0^1 f(x + s(x' - x)) ds`,
/// with the integral taken by a `nodes`-point Gauss-Legendre rule.
pub fn avf_step<F: VectorField + ?Sized>(
    f: &F,
    x: &[f64],
    h: f64,
    nodes: usize,
    cfg: &SolverConfig,
) -> Result<Step, StepError> {
    check_dim(x, f.dim())?;
    let (xi, w) = quadrature::gauss_legendre(nodes);
    let mut p = vec![0.0; x.len()];
    let mut tmp = vec![0.0; x.len()];
    fixed_point(x, h, cfg, |xk, out| {
        out.fill(0.0);
        for (s, wq) in xi.iter().zip(&w) {
            for ((pi, a), b) in p.iter_mut().zip(x).zip(xk) {
                *pi = a + s * (b - a);
            }
            f.eval_into(&p, &mut tmp)?;
            for (o, t) in out.iter_mut().zip(&tmp) {
                *o += wq * t;
            }
        }
        Ok(())
    })
}

/// `Φ_{b_s h} ∘ ... ∘ Φ_{b_1 h}` for a base step `Φ`.
pub fn compose_step<S>(coeffs: &[f64], x: &[f64], h: f64, mut base: S) -> Result<Step, StepError>
where
    S: FnMut(&[f64], f64) -> Result<Step, StepError>,
{
    let sum: f64 = coeffs.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(StepError::Coefficients { sum });
    }
    let mut cur = x.to_vec();
    let mut iterations = 0;
    for (index, b) in coeffs.iter().enumerate() {
        let step = base(&cur, b * h).map_err(|e| StepError::SubStep {
            index,
            source: Box::new(e),
        })?;
        cur = step.x;
        iterations += step.iterations;
    }
    Ok(Step { x: cur, iterations })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    Midpoint,
    ReducedMidpoint,
    Avf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Single,
    Disrk4,
    Disrk6,
    C8,
}

impl Scheme {
    pub fn coefficients(self) -> Vec<f64> {
        match self {
            Self::Single => vec![1.0],
            Self::Disrk4 => coeffs::disrk4(),
            Self::Disrk6 => coeffs::disrk6(),
            Self::C8 => coeffs::c8(),
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Self::Single => 2,
            Self::Disrk4 => 4,
            Self::Disrk6 => 6,
            Self::C8 => 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Method {
    pub base: Base,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown method `{0}`")]
pub struct UnknownMethod(pub String);

impl Method {
    pub const MP2: Method = Method::new(Base::Midpoint, Scheme::Single);
    pub const RD_MP2: Method = Method::new(Base::ReducedMidpoint, Scheme::Single);
    pub const AVF: Method = Method::new(Base::Avf, Scheme::Single);
    pub const DISRK4: Method = Method::new(Base::Midpoint, Scheme::Disrk4);
    pub const RD_DISRK4: Method = Method::new(Base::ReducedMidpoint, Scheme::Disrk4);
    pub const DISRK6: Method = Method::new(Base::Midpoint, Scheme::Disrk6);
    pub const RD_DISRK6: Method = Method::new(Base::ReducedMidpoint, Scheme::Disrk6);
    pub const C8: Method = Method::new(Base::Midpoint, Scheme::C8);
    pub const RD_C8: Method = Method::new(Base::ReducedMidpoint, Scheme::C8);

    pub const fn new(base: Base, scheme: Scheme) -> Self {
        Self { base, scheme }
    }

    /// Every supported method, in display order.
    pub fn all() -> Vec<Method> {
        let mut out = Vec::new();
        for scheme in [Scheme::Single, Scheme::Disrk4, Scheme::Disrk6, Scheme::C8] {
            for base in [Base::Midpoint, Base::ReducedMidpoint, Base::Avf] {
                out.push(Method::new(base, scheme));
            }
        }
        out
    }

    pub fn name(&self) -> String {
        let prefix = match self.base {
            Base::Midpoint => "",
            Base::ReducedMidpoint => "rd-",
            Base::Avf => "avf-",
        };
        match (self.base, self.scheme) {
            (Base::Avf, Scheme::Single) => "avf".to_string(),
            (_, Scheme::Single) => format!("{prefix}mp2"),
            (_, Scheme::Disrk4) => format!("{prefix}disrk4"),
            (_, Scheme::Disrk6) => format!("{prefix}disrk6"),
            (_, Scheme::C8) => format!("{prefix}c8"),
        }
    }

    pub fn order(&self) -> u32 {
        self.scheme.order()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        Method::all()
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| UnknownMethod(s.to_string()))
    }
}

/// A method bound to a system, ready to take steps.
pub struct Integrator<'a> {
    sys: &'a ReducedSystem,
    method: Method,
    cfg: SolverConfig,
    field: PolynomialField,
    coeffs: Vec<f64>,
}

impl<'a> Integrator<'a> {
    pub fn new(sys: &'a ReducedSystem, method: Method, cfg: SolverConfig) -> Self {
        Self {
            sys,
            method,
            cfg,
            field: PolynomialField::new(sys.original_field().to_vec()),
            coeffs: method.scheme.coefficients(),
        }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    fn base_step(&self, x: &[f64], h: f64) -> Result<Step, StepError> {
        match self.method.base {
            Base::Midpoint => midpoint_step(&self.field, x, h, &self.cfg),
            Base::ReducedMidpoint => rd_midpoint_step(self.sys, x, h, &self.cfg),
            Base::Avf => avf_step(&self.field, x, h, self.field.avf_nodes(), &self.cfg),
        }
    }

    pub fn step(&self, x: &[f64], h: f64) -> Result<Step, StepError> {
        if self.method.scheme == Scheme::Single {
            return self.base_step(x, h);
        }
        compose_step(&self.coeffs, x, h, |y, hb| self.base_step(y, hb))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Completed,
    /// The step producing state `step` blew up.
    Diverged {
        step: usize,
        reason: String,
    },
    /// The step producing state `step` could not be solved.
    SolverFailure {
        step: usize,
        reason: String,
    },
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::Diverged { .. } => "diverged",
            Self::SolverFailure { .. } => "solver-failure",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Completed => f.write_str("completed"),
            Self::Diverged { step, reason } => write!(f, "diverged at step {step}: {reason}"),
            Self::SolverFailure { step, reason } => write!(f, "solver failure at step {step}: {reason}"),
        }
    }
}

/// States `x_0..x_k` on the grid `t = k h`, with integral drifts
/// `H_i(x_k) - H_i(x_0)` and per-step iteration counts.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub method: Method,
    pub h: f64,
    pub states: Vec<Vec<f64>>,
    pub integral_errors: Vec<Vec<f64>>,
    /// `iterations[0]` is zero; `iterations[k]` belongs to the step into `x_k`.
    pub iterations: Vec<usize>,
    pub status: Status,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_completed(&self) -> bool {
        self.status == Status::Completed
    }

    /// Largest `|H_i(x_k) - H_i(x_0)|` over all recorded states.
    pub fn max_integral_error(&self) -> f64 {
        self.integral_errors
            .iter()
            .flatten()
            .fold(0.0, |acc, e| acc.max(e.abs()))
    }
}

/// Takes `steps` steps of size `h` from `x0`. Stops early, with a
/// non-completed status, on divergence or solver failure.
pub fn integrate(
    sys: &ReducedSystem,
    method: Method,
    x0: &[f64],
    h: f64,
    steps: usize,
    cfg: &SolverConfig,
) -> Result<Trajectory, StepError> {
    check_dim(x0, sys.n())?;
    let integrator = Integrator::new(sys, method, cfg.clone());
    let h0 = sys.eval_integrals(x0);
    let mut traj = Trajectory {
        method,
        h,
        states: vec![x0.to_vec()],
        integral_errors: vec![vec![0.0; h0.len()]],
        iterations: vec![0],
        status: Status::Completed,
    };
    for k in 1..=steps {
        let x = traj.states.last().expect("nonempty");
        let step = match integrator.step(x, h) {
            Ok(s) => s,
            Err(e) => {
                let reason = e.to_string();
                traj.status = if e.is_divergence() {
                    Status::Diverged { step: k, reason }
                } else {
                    Status::SolverFailure { step: k, reason }
                };
                break;
            }
        };
        let norm = step.x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !norm.is_finite() || norm > cfg.divergence_bound {
            traj.status = Status::Diverged {
                step: k,
                reason: format!("state norm {norm:e}"),
            };
            break;
        }
        let errs = sys
            .eval_integrals(&step.x)
            .iter()
            .zip(&h0)
            .map(|(a, b)| a - b)
            .collect();
        traj.states.push(step.x);
        traj.integral_errors.push(errs);
        traj.iterations.push(step.iterations);
    }
    Ok(traj)
}
