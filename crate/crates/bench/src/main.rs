use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use polyint::problems::{catalog, ProblemError};
use polyint::skew::{verify_system, VerifyConfig};
use polyint::stepper::{Method, SolverConfig, Status};
use polyint_bench::{
    converge, orbits, resolve_problem, run, write_converge_csv, write_orbits_csv, write_trajectory_csv, ConvergeConfig,
    OrbitsConfig, RunConfig,
};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_SOLVER_FAILURE: u8 = 4;

#[derive(Parser)]
#[command(name = "polyint", version, about = "Reduced-degree integrators for polynomial ODEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one problem and write the trajectory as CSV.
    Run(RunArgs),
    /// Measure terminal errors against a fine reference and fit convergence orders.
    Converge(ConvergeArgs),
    /// Stability sweep over the quartic Hamiltonian orbit initial conditions.
    Orbits(OrbitsArgs),
    /// Verify a problem at random sample points.
    Check(CheckArgs),
    /// List the built-in problems.
    List,
}

#[derive(Args)]
struct SolverArgs {
    /// Fixed-point tolerance on the max-norm residual.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Damping factor in (0, 1].
    #[arg(long)]
    relaxation: Option<f64>,
    #[arg(long)]
    divergence_bound: Option<f64>,
}

impl SolverArgs {
    fn apply(&self, mut cfg: SolverConfig) -> Result<SolverConfig> {
        if let Some(t) = self.tol {
            anyhow::ensure!(t > 0.0, "--tol must be positive");
            cfg.tol = t;
        }
        if let Some(m) = self.max_iter {
            anyhow::ensure!(m >= 1, "--max-iter must be at least 1");
            cfg.max_iter = m;
        }
        if let Some(r) = self.relaxation {
            anyhow::ensure!(r > 0.0 && r <= 1.0, "--relaxation must be in (0, 1]");
            cfg.relaxation = r;
        }
        if let Some(b) = self.divergence_bound {
            anyhow::ensure!(b > 0.0, "--divergence-bound must be positive");
            cfg.divergence_bound = b;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    /// Built-in problem name or path to a problem file.
    #[arg(long)]
    problem: String,
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Step size; defaults to the problem's.
    #[arg(long, value_parser = parse_real)]
    h: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Initial condition, comma separated; defaults to the problem's.
    #[arg(long, value_delimiter = ',', value_parser = parse_real, allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long)]
    problem: String,
    /// Methods to compare; all eight midpoint-based methods by default.
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<Method>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_real, default_value = "1/10,1/20,1/40,1/80")]
    h_list: Vec<f64>,
    #[arg(long, value_parser = parse_real, default_value = "1")]
    t_end: f64,
    /// Errors at or below this are excluded from the slope fit.
    #[arg(long, default_value_t = 2e-13)]
    floor: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct OrbitsArgs {
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<Method>>,
    #[arg(long, value_parser = parse_real)]
    h: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Relative energy drift above which a completed orbit counts as unstable.
    #[arg(long)]
    drift_limit: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = VerifyConfig::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = VerifyConfig::default().samples)]
    samples: usize,
    #[arg(long, default_value_t = VerifyConfig::default().tol)]
    tol: f64,
}

/// A real number, or a fraction `a/b`.
fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("invalid number `{s}`"));
    let v = match s.split_once('/') {
        Some((a, b)) => parse(a)? / parse(b)?,
        None => parse(s)?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e| {
        let names: Vec<String> = Method::all().iter().map(Method::name).collect();
        format!("{e}; expected one of {}", names.join(", "))
    })
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Failure with an exit code attached.
struct Failure(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e = e.into();
        let code = match e.downcast_ref::<ProblemError>() {
            Some(ProblemError::Verification(_)) => EXIT_CHECK_FAILED,
            _ => EXIT_USAGE,
        };
        Failure(code, e)
    }
}

fn cmd_run(a: RunArgs) -> Result<u8, Failure> {
    let p = resolve_problem(&a.problem)?;
    let x0 = a.x0.unwrap_or_else(|| p.x0.clone());
    if x0.len() != p.n() {
        return Err(anyhow::anyhow!("--x0 has {} values, problem dimension is {}", x0.len(), p.n()).into());
    }
    let cfg = RunConfig {
        method: a.method,
        h: a.h.unwrap_or(p.h),
        steps: a.steps,
        x0,
        solver: a.solver.apply(SolverConfig::default())?,
    };
    let t = run(&p, &cfg)?;
    let mut w = output(&a.out)?;
    write_trajectory_csv(&mut w, &p, &cfg, &t)?;
    w.flush()?;
    Ok(match t.status {
        Status::Completed => 0,
        Status::Diverged { .. } => {
            eprintln!("{}", t.status);
            EXIT_DIVERGED
        }
        Status::SolverFailure { .. } => {
            eprintln!("{}", t.status);
            EXIT_SOLVER_FAILURE
        }
    })
}

fn cmd_converge(a: ConvergeArgs) -> Result<u8, Failure> {
    let p = resolve_problem(&a.problem)?;
    let methods = a.methods.unwrap_or_else(|| {
        Method::all()
            .into_iter()
            .filter(|m| m.base != polyint::stepper::Base::Avf)
            .collect()
    });
    let cfg = ConvergeConfig {
        methods,
        hs: a.h_list,
        t_end: a.t_end,
        solver: a.solver.apply(SolverConfig::default())?,
        floor: a.floor,
    };
    let report = converge(&p, &cfg)?;
    let mut w = output(&a.out)?;
    write_converge_csv(&mut w, &p, &cfg, &report)?;
    w.flush()?;
    Ok(0)
}

fn cmd_orbits(a: OrbitsArgs) -> Result<u8, Failure> {
    let mut cfg = OrbitsConfig::default();
    if let Some(m) = a.methods {
        cfg.methods = m;
    }
    if let Some(h) = a.h {
        cfg.h = h;
    }
    if let Some(s) = a.steps {
        cfg.steps = s;
    }
    if let Some(d) = a.drift_limit {
        cfg.drift_limit = d;
    }
    cfg.solver = a.solver.apply(cfg.solver)?;
    let rows = orbits(&cfg)?;
    let mut w = output(&a.out)?;
    write_orbits_csv(&mut w, &cfg, &rows)?;
    w.flush()?;
    Ok(0)
}

fn cmd_check(a: CheckArgs) -> Result<u8, Failure> {
    let p = match resolve_problem(&a.problem) {
        Ok(p) => p,
        Err(e) => {
            if let Some(ProblemError::Verification(report)) = e.downcast_ref::<ProblemError>() {
                println!("{}: {report}", a.problem);
                return Ok(EXIT_CHECK_FAILED);
            }
            return Err(e.into());
        }
    };
    let cfg = VerifyConfig {
        samples: a.samples,
        seed: a.seed,
        tol: a.tol,
        ..VerifyConfig::default()
    };
    let report = verify_system(&p.system, &cfg);
    println!(
        "{} (n = {}, m = {}, structure {})",
        p.name,
        p.n(),
        p.m(),
        p.system.structure().name()
    );
    println!("{}", p.system.tower());
    println!("{report}");
    Ok(if report.passed { 0 } else { EXIT_CHECK_FAILED })
}

fn cmd_list() -> Result<u8, Failure> {
    for (name, desc) in catalog() {
        println!("{name:<20} {desc}");
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Orbits(a) => cmd_orbits(a),
        Command::Check(a) => cmd_check(a),
        Command::List => cmd_list(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
