//! Built-in example systems and a loader for user problem files.

mod builtin;
mod file;

use std::sync::Arc;

use crate::poly::{Polynomial, VarId};
use crate::skew::{verify_system, ReducedSystem, SkewError, SkewStructure, VerifyConfig, VerifyReport};
use crate::tower::{reduce_all, ReductionParams, TowerError};

pub use builtin::{
    builtin, catalog, nambu_2int, octic_oscillator, planar_quartic, planar_quartic_params, quartic_ham,
    quartic_ham_orbit_ics, quartic_oscillator, toda3,
};
pub use file::{load_problem, parse_problem};

#[derive(Debug, thiserror::Error)]
pub enum ProblemError {
    #[error("unknown problem `{0}` (try one of: {names})", names = builtin::NAMES.join(", "))]
    Unknown(String),
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing `{0}`")]
    Missing(&'static str),
    #[error("cannot read problem file: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Skew(#[from] SkewError),
    #[error("verification failed\n{0}")]
    Verification(Box<VerifyReport>),
    #[error("structure is singular at the initial condition: {0}")]
    SingularStart(SkewError),
}

/// A fully wired problem: the reduced system plus run defaults.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub name: String,
    pub system: Arc<ReducedSystem>,
    pub params: ReductionParams,
    pub x0: Vec<f64>,
    pub h: f64,
}

impl ProblemSpec {
    /// Wires `system`, verifying it and checking the structure is regular at `x0`.
    pub fn new(
        name: impl Into<String>,
        system: ReducedSystem,
        params: ReductionParams,
        x0: Vec<f64>,
        h: f64,
    ) -> Result<Self, ProblemError> {
        if x0.len() != system.n() {
            return Err(SkewError::DimensionMismatch {
                expected: system.n(),
                got: x0.len(),
            }
            .into());
        }
        let report = verify_system(&system, &VerifyConfig::default());
        if !report.passed {
            return Err(ProblemError::Verification(Box::new(report)));
        }
        system
            .reduced_field(&system.lift(&x0))
            .map_err(ProblemError::SingularStart)?;
        Ok(Self {
            name: name.into(),
            system: Arc::new(system),
            params,
            x0,
            h,
        })
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn m(&self) -> usize {
        self.system.m()
    }

    pub fn field(&self) -> &[Polynomial] {
        self.system.original_field()
    }

    pub fn integrals(&self) -> Vec<&Polynomial> {
        self.system.integrals().iter().map(|r| r.original()).collect()
    }
}

/// `J grad H` with `J = [[0, -I], [I, 0]]`.
pub fn canonical_field(h: &Polynomial) -> Vec<Polynomial> {
    let n = h.nvars();
    let half = n / 2;
    (0..n)
        .map(|i| {
            if i < half {
                -h.partial(VarId(i + half))
            } else {
                h.partial(VarId(i - half))
            }
        })
        .collect()
}

/// Canonical Hamiltonian system for `h`, reduced with `params`.
pub fn hamiltonian_system(h: &Polynomial, params: &ReductionParams) -> Result<ReducedSystem, ProblemError> {
    let n = h.nvars();
    let (_, integrals) = reduce_all(n, std::slice::from_ref(h), params)?;
    Ok(ReducedSystem::new(
        canonical_field(h),
        integrals,
        SkewStructure::CanonicalJ,
    )?)
}
