//! Experiment drivers behind the `polyint` command: single runs, convergence
//! studies and the orbit-stability sweep, each with a CSV writer.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use polyint::problems::{builtin, catalog, load_problem, quartic_ham, quartic_ham_orbit_ics, ProblemSpec};
use polyint::stepper::{integrate, Method, SolverConfig, Status, Trajectory};

/// Built-in name, or a path to a problem file.
pub fn resolve_problem(name: &str) -> Result<ProblemSpec> {
    if catalog().iter().any(|(n, _)| *n == name) {
        return Ok(builtin(name)?);
    }
    if Path::new(name).exists() {
        return load_problem(name).with_context(|| format!("loading `{name}`"));
    }
    Ok(builtin(name)?)
}

/// Formats with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(",")
}

fn solver_footer(w: &mut impl Write, cfg: &SolverConfig) -> std::io::Result<()> {
    writeln!(w, "# tol: {}", fmt_real(cfg.tol))?;
    writeln!(w, "# max_iter: {}", cfg.max_iter)?;
    writeln!(w, "# relaxation: {}", fmt_real(cfg.relaxation))?;
    writeln!(w, "# divergence_bound: {}", fmt_real(cfg.divergence_bound))
}

pub struct RunConfig {
    pub method: Method,
    pub h: f64,
    pub steps: usize,
    pub x0: Vec<f64>,
    pub solver: SolverConfig,
}

pub fn run(p: &ProblemSpec, cfg: &RunConfig) -> Result<Trajectory> {
    Ok(integrate(
        &p.system,
        cfg.method,
        &cfg.x0,
        cfg.h,
        cfg.steps,
        &cfg.solver,
    )?)
}

pub fn write_trajectory_csv(w: &mut impl Write, p: &ProblemSpec, cfg: &RunConfig, t: &Trajectory) -> Result<()> {
    let (n, m) = (p.n(), p.m());
    {
        let mut csv = csv::Writer::from_writer(&mut *w);
        let mut header = vec!["step".to_string(), "t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=m).map(|i| format!("dH{i}")));
        header.push("iters".into());
        csv.write_record(&header)?;
        for k in 0..t.len() {
            let mut row = vec![k.to_string(), fmt_real(t.time(k))];
            row.extend(t.states[k].iter().map(|v| fmt_real(*v)));
            row.extend(t.integral_errors[k].iter().map(|v| fmt_real(*v)));
            row.push(t.iterations[k].to_string());
            csv.write_record(&row)?;
        }
        csv.flush()?;
    }
    writeln!(w, "# status: {}", t.status)?;
    writeln!(w, "# problem: {}", p.name)?;
    writeln!(w, "# method: {}", cfg.method)?;
    writeln!(w, "# h: {}", fmt_real(cfg.h))?;
    writeln!(w, "# steps: {}", cfg.steps)?;
    writeln!(w, "# x0: {}", fmt_list(&cfg.x0))?;
    solver_footer(w, &cfg.solver)?;
    writeln!(w, "# max_abs_dH: {}", fmt_real(t.max_integral_error()))?;
    Ok(())
}

/// Least-squares slope of `log e` against `log h` over points with
/// `e > floor`; `None` with fewer than two such points.
pub fn fit_slope(points: &[(f64, f64)], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(h, e)| e.is_finite() && *e > floor && *h > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (den > 0.0).then_some(num / den)
}

pub struct ConvergeConfig {
    pub methods: Vec<Method>,
    pub hs: Vec<f64>,
    pub t_end: f64,
    pub solver: SolverConfig,
    /// Errors at or below this are treated as round-off and left out of the fit.
    pub floor: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergeRow {
    pub method: Method,
    pub h: f64,
    pub steps: usize,
    /// Max-norm terminal error; NaN when the run failed.
    pub error: f64,
    pub status: Status,
}

pub struct ConvergeReport {
    pub rows: Vec<ConvergeRow>,
    pub slopes: Vec<(Method, Option<f64>)>,
    pub reference_h: f64,
    pub reference_steps: usize,
}

fn steps_for(t_end: f64, h: f64) -> Result<usize> {
    let k = (t_end / h).round();
    if !(h > 0.0) || k < 1.0 || (k * h - t_end).abs() > 1e-9 * t_end.abs().max(1.0) {
        bail!("t-end {t_end} is not a whole number of steps of size {h}");
    }
    Ok(k as usize)
}

pub fn converge(p: &ProblemSpec, cfg: &ConvergeConfig) -> Result<ConvergeReport> {
    if cfg.hs.is_empty() || cfg.methods.is_empty() {
        bail!("need at least one method and one step size");
    }
    let steps: Vec<usize> = cfg.hs.iter().map(|&h| steps_for(cfg.t_end, h)).collect::<Result<_>>()?;
    let h_min = cfg.hs.iter().copied().fold(f64::INFINITY, f64::min);
    let reference_h = h_min / 50.0;
    let reference_steps = steps_for(cfg.t_end, reference_h)?;
    let reference = integrate(
        &p.system,
        Method::RD_C8,
        &p.x0,
        reference_h,
        reference_steps,
        &cfg.solver,
    )?;
    if !reference.is_completed() {
        bail!("reference run failed: {}", reference.status);
    }
    let xr = reference.final_state();

    let cells: Vec<(Method, f64, usize)> = cfg
        .methods
        .iter()
        .flat_map(|&m| cfg.hs.iter().zip(&steps).map(move |(&h, &k)| (m, h, k)))
        .collect();
    let rows: Vec<ConvergeRow> = cells
        .par_iter()
        .map(|&(method, h, k)| {
            let t = integrate(&p.system, method, &p.x0, h, k, &cfg.solver)?;
            let error = if t.is_completed() {
                t.final_state()
                    .iter()
                    .zip(xr)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            } else {
                f64::NAN
            };
            Ok(ConvergeRow {
                method,
                h,
                steps: k,
                error,
                status: t.status,
            })
        })
        .collect::<Result<_>>()?;

    let slopes = cfg
        .methods
        .iter()
        .map(|&m| {
            let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.method == m).map(|r| (r.h, r.error)).collect();
            (m, fit_slope(&pts, cfg.floor))
        })
        .collect();
    Ok(ConvergeReport {
        rows,
        slopes,
        reference_h,
        reference_steps,
    })
}

pub fn write_converge_csv(w: &mut impl Write, p: &ProblemSpec, cfg: &ConvergeConfig, r: &ConvergeReport) -> Result<()> {
    {
        let mut csv = csv::Writer::from_writer(&mut *w);
        csv.write_record(["method", "h", "steps", "error", "status", "slope"])?;
        for row in &r.rows {
            let slope = r
                .slopes
                .iter()
                .find(|(m, _)| *m == row.method)
                .and_then(|(_, s)| *s)
                .map(fmt_real)
                .unwrap_or_default();
            csv.write_record([
                row.method.name(),
                fmt_real(row.h),
                row.steps.to_string(),
                fmt_real(row.error),
                row.status.label().to_string(),
                slope,
            ])?;
        }
        csv.flush()?;
    }
    writeln!(w, "# problem: {}", p.name)?;
    writeln!(w, "# t_end: {}", fmt_real(cfg.t_end))?;
    writeln!(
        w,
        "# reference: rd-c8 h={} steps={}",
        fmt_real(r.reference_h),
        r.reference_steps
    )?;
    writeln!(w, "# floor: {}", fmt_real(cfg.floor))?;
    solver_footer(w, &cfg.solver)?;
    for row in r.rows.iter().filter(|row| row.status != Status::Completed) {
        writeln!(w, "# failed: {} h={}: {}", row.method, fmt_real(row.h), row.status)?;
    }
    Ok(())
}

pub struct OrbitsConfig {
    pub methods: Vec<Method>,
    pub h: f64,
    pub steps: usize,
    pub solver: SolverConfig,
    /// A completed orbit whose energy moved by more than this fraction of
    /// `|H(x0)|` is counted as unstable.
    pub drift_limit: f64,
}

impl Default for OrbitsConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::MP2, Method::AVF, Method::RD_MP2],
            h: 0.1,
            steps: 10_000,
            solver: SolverConfig {
                max_iter: 1000,
                relaxation: 0.7,
                ..SolverConfig::default()
            },
            drift_limit: 0.5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrbitRow {
    pub i: usize,
    pub method: Method,
    pub x0: Vec<f64>,
    pub stable: bool,
    pub max_dh: f64,
    pub status: Status,
    /// Steps taken before the run ended.
    pub steps: usize,
}

/// Integrates the quartic Hamiltonian from each orbit initial condition
/// with each method.
pub fn orbits(cfg: &OrbitsConfig) -> Result<Vec<OrbitRow>> {
    let p = quartic_ham(0.0)?;
    let ics = quartic_ham_orbit_ics();
    let cells: Vec<(usize, Method)> = ics
        .iter()
        .enumerate()
        .flat_map(|(i, _)| cfg.methods.iter().map(move |&m| (i, m)))
        .collect();
    cells
        .par_iter()
        .map(|&(i, method)| {
            let x0 = &ics[i];
            let t = integrate(&p.system, method, x0, cfg.h, cfg.steps, &cfg.solver)?;
            let h0 = p.system.eval_integrals(x0)[0];
            let max_dh = t.max_integral_error();
            let stable = t.is_completed() && max_dh <= cfg.drift_limit * h0.abs();
            Ok(OrbitRow {
                i,
                method,
                x0: x0.clone(),
                stable,
                max_dh,
                steps: t.len() - 1,
                status: t.status,
            })
        })
        .collect()
}

pub fn write_orbits_csv(w: &mut impl Write, cfg: &OrbitsConfig, rows: &[OrbitRow]) -> Result<()> {
    {
        let mut csv = csv::Writer::from_writer(&mut *w);
        csv.write_record(["i", "method", "x1", "x2", "stable", "max_abs_dH", "status", "steps"])?;
        for r in rows {
            csv.write_record([
                r.i.to_string(),
                r.method.name(),
                fmt_real(r.x0[0]),
                fmt_real(r.x0[1]),
                r.stable.to_string(),
                fmt_real(r.max_dh),
                r.status.label().to_string(),
                r.steps.to_string(),
            ])?;
        }
        csv.flush()?;
    }
    writeln!(w, "# problem: quartic-ham")?;
    writeln!(w, "# h: {}", fmt_real(cfg.h))?;
    writeln!(w, "# steps: {}", cfg.steps)?;
    writeln!(w, "# drift_limit: {}", fmt_real(cfg.drift_limit))?;
    solver_footer(w, &cfg.solver)?;
    Ok(())
}
