use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use qes_core::families::ces_exact_spectrum;
use qes_core::verify::{auto_grid, auto_grid_with_points, eigensolve, resolved_eigensolve};
use qes_core::{cross_check_methods, verify_model, Grid, QesModel, SpectralReport};

use crate::config::{FamilyName, ModelConfig, Sweep, TableFormat};
use crate::error::CliError;

/// Deepest level `spectrum` will compute.
pub const MAX_N: usize = 8;

/// Pass threshold for `crosscheck`.
pub const CROSSCHECK_TOL: f64 = 1e-8;

/// Points used when only L is overridden.
const DEFAULT_POINTS: usize = 4001;

/// Prints -0 as 0.
fn num(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Grid from the config overrides; `None` leaves the choice to the caller.
fn grid_override(cfg: &ModelConfig, model: &QesModel) -> Result<Option<Grid>, CliError> {
    let g = cfg.grid.unwrap_or_default();
    let decay = cfg.tolerances().target_decay;
    Ok(match (g.half_width, g.points) {
        (Some(l), Some(n)) => Some(Grid::new(l, n)?),
        (None, Some(n)) => Some(auto_grid_with_points(model, decay, n).0),
        (Some(l), None) => Some(Grid::new(l, DEFAULT_POINTS)?),
        (None, None) => None,
    })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.into(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn summary(cfg: &ModelConfig, model: &QesModel) -> String {
    let fam = match cfg.family().builtin() {
        Some(f) => f.name(),
        None => "custom",
    };
    format!(
        "family={fam} x0={} epsilon={} E0=0 E1={}",
        num(model.x0),
        num(model.epsilon),
        num(model.epsilon)
    )
}

#[derive(Serialize)]
struct Row {
    x: f64,
    v_minus: f64,
    v_plus: f64,
    w: f64,
    w1: f64,
    psi0: f64,
    psi1: f64,
}

const HEADER: [&str; 7] = ["x", "v_minus", "v_plus", "w", "w1", "psi0", "psi1"];

fn table(model: &QesModel, grid: &Grid) -> Vec<Row> {
    grid.xs()
        .into_iter()
        .map(|x| Row {
            x,
            v_minus: model.v_minus(x),
            v_plus: model.v_plus(x),
            w: model.w.w(x),
            w1: model.w1.w(x),
            psi0: model.psi0.psi(x),
            psi1: model.psi1.psi(x),
        })
        .collect()
}

fn table_format(cfg: &ModelConfig, path: &Path) -> TableFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => TableFormat::Json,
        Some(e) if e.eq_ignore_ascii_case("csv") => TableFormat::Csv,
        _ => cfg.output.as_ref().and_then(|o| o.format).unwrap_or_default(),
    }
}

fn write_table(rows: &[Row], path: &Path, format: TableFormat) -> Result<(), CliError> {
    let io_err = |source| CliError::Io { path: path.into(), source };
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_path(path)?;
            w.write_record(HEADER)?;
            for r in rows {
                let cells = [r.x, r.v_minus, r.v_plus, r.w, r.w1, r.psi0, r.psi1];
                w.write_record(cells.iter().map(|c| format!("{c:.16e}")))?;
            }
            w.flush().map_err(io_err)
        }
        TableFormat::Json => {
            let text = serde_json::to_string_pretty(rows)?;
            std::fs::write(path, text).map_err(io_err)
        }
    }
}

pub fn build(cfg: &ModelConfig) -> Result<bool, CliError> {
    let model = cfg.build_model()?;
    println!("{}", summary(cfg, &model));
    if let Some(path) = cfg.output.as_ref().and_then(|o| o.path.as_deref()) {
        let grid = match grid_override(cfg, &model)? {
            Some(g) => g,
            None => auto_grid(&model, cfg.tolerances().target_decay).0,
        };
        write_table(&table(&model, &grid), path, table_format(cfg, path))?;
        eprintln!("wrote {} rows (L = {}) to {}", grid.points, grid.half_width, path.display());
    }
    Ok(true)
}

/// Each swept value as its own validated config, in ascending order.
fn sweep_configs(cfg: &ModelConfig, sweep: &Sweep) -> Result<Vec<(f64, ModelConfig)>, CliError> {
    let mut values = sweep.values();
    values.sort_by(f64::total_cmp);
    values
        .into_iter()
        .map(|v| {
            let mut c = cfg.clone();
            c.params.insert(sweep.key.clone(), v);
            Ok((v, c.validated()?))
        })
        .collect()
}

/// Runs `f` on every swept config concurrently. Results keep the sorted
/// order; the first failure (in that order) is returned.
fn fan_out<T: Send>(
    cfg: &ModelConfig,
    sweep: &Sweep,
    f: impl Fn(&ModelConfig) -> Result<T, CliError> + Sync,
) -> Result<Vec<(f64, ModelConfig, T)>, CliError> {
    let configs = sweep_configs(cfg, sweep)?;
    let results: Vec<Result<T, CliError>> = configs.par_iter().map(|(_, c)| f(c)).collect();
    configs.into_iter().zip(results).map(|((v, c), r)| r.map(|t| (v, c, t))).collect()
}

pub fn build_sweep(cfg: &ModelConfig, sweep: &Sweep) -> Result<bool, CliError> {
    let rows = fan_out(cfg, sweep, |c| c.build_model().map(|m| summary(c, &m)))?;
    for (v, _, line) in rows {
        println!("{}={} {line}", sweep.key, num(v));
    }
    Ok(true)
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    config: &'a ModelConfig,
    report: &'a SpectralReport,
}

fn run_verify(cfg: &ModelConfig) -> Result<SpectralReport, CliError> {
    let model = cfg.build_model()?;
    let grid = grid_override(cfg, &model)?;
    Ok(verify_model(&model, grid, &cfg.tolerances())?)
}

pub fn verify(cfg: &ModelConfig, out: Option<&Path>) -> Result<bool, CliError> {
    let report = run_verify(cfg)?;
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("check {} failed: {:e} > {:e}", c.name, c.value, c.threshold);
    }
    write_output(out, &serde_json::to_string_pretty(&VerifyOutput { config: cfg, report: &report })?)?;
    Ok(report.passed)
}

pub fn verify_sweep(cfg: &ModelConfig, sweep: &Sweep, out: Option<&Path>) -> Result<bool, CliError> {
    let runs = fan_out(cfg, sweep, run_verify)?;
    let passed = runs.iter().all(|(_, _, r)| r.passed);
    for (v, _, r) in runs.iter().filter(|(_, _, r)| !r.passed) {
        eprintln!("{}={}: verification failed", sweep.key, num(*v));
        for c in r.checks.iter().filter(|c| !c.passed) {
            eprintln!("  check {} failed: {:e} > {:e}", c.name, c.value, c.threshold);
        }
    }
    let outputs: Vec<VerifyOutput> = runs.iter().map(|(_, config, report)| VerifyOutput { config, report }).collect();
    write_output(out, &serde_json::to_string_pretty(&outputs)?)?;
    Ok(passed)
}

#[derive(Serialize)]
struct Level {
    n: usize,
    analytic: Option<f64>,
    numeric: f64,
    abs_diff: Option<f64>,
}

#[derive(Serialize)]
struct SpectrumOutput<'a> {
    config: &'a ModelConfig,
    grid_used: Grid,
    energy_tolerance: f64,
    levels: Vec<Level>,
    passed: bool,
}

pub fn spectrum(cfg: &ModelConfig, n_max: usize, out: Option<&Path>) -> Result<bool, CliError> {
    if n_max > MAX_N {
        return Err(CliError::Usage(format!("n_max = {n_max} exceeds supported excited-state depth ({MAX_N})")));
    }
    let model = cfg.build_model()?;
    let tol = cfg.tolerances();
    let tol_e = tol.energy * model.epsilon.max(1.0);
    let v = |x: f64| model.v_minus(x);
    let k = n_max + 1;
    let (numeric, grid) = match grid_override(cfg, &model)? {
        Some(g) => (eigensolve(&v, &g, k)?.0, g),
        None => {
            let (e, _, g) = resolved_eigensolve(&v, &auto_grid(&model, tol.target_decay).0, k, tol_e / 4.0)?;
            (e, g)
        }
    };
    let analytic: Vec<Option<f64>> = match cfg.family() {
        FamilyName::PolyPhiCes => ces_exact_spectrum(cfg.params["a"], cfg.params["b"], n_max)?.into_iter().map(Some).collect(),
        _ => (0..k).map(|n| [Some(0.0), Some(model.epsilon)].get(n).copied().flatten()).collect(),
    };
    let levels: Vec<Level> = numeric
        .iter()
        .zip(analytic)
        .enumerate()
        .map(|(n, (&e, a))| Level { n, analytic: a, numeric: e, abs_diff: a.map(|a| (e - a).abs()) })
        .collect();
    let passed = levels.iter().filter_map(|l| l.abs_diff).all(|d| d <= tol_e);

    println!("{:>2}  {:>24}  {:>24}  {:>10}", "n", "analytic", "numeric", "|diff|");
    for l in &levels {
        let a = l.analytic.map_or("-".to_string(), |a| format!("{}", num(a)));
        let d = l.abs_diff.map_or("-".to_string(), |d| format!("{d:.3e}"));
        println!("{:>2}  {a:>24}  {:>24}  {d:>10}", l.n, num(l.numeric));
    }
    eprintln!("grid L = {}, N = {}; energy tolerance {tol_e:e}", grid.half_width, grid.points);
    if let Some(p) = out {
        let report = SpectrumOutput { config: cfg, grid_used: grid, energy_tolerance: tol_e, levels, passed };
        write_output(Some(p), &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(passed)
}

#[derive(Serialize)]
struct CrossOutput<'a> {
    config: &'a ModelConfig,
    v_minus_sup: f64,
    psi0_sup: f64,
    psi1_sup: f64,
    epsilon_diff: f64,
    x0_diff: f64,
    max: f64,
    threshold: f64,
    passed: bool,
}

fn run_crosscheck(cfg: &ModelConfig) -> Result<CrossOutput<'_>, CliError> {
    let (phi, eps) = cfg.phi()?;
    let cc = cross_check_methods(&phi, eps)?;
    let max = cc.max();
    Ok(CrossOutput {
        config: cfg,
        v_minus_sup: cc.v_minus_sup,
        psi0_sup: cc.psi0_sup,
        psi1_sup: cc.psi1_sup,
        epsilon_diff: cc.epsilon_diff,
        x0_diff: cc.x0_diff,
        max,
        threshold: CROSSCHECK_TOL,
        passed: max < CROSSCHECK_TOL,
    })
}

fn print_crosscheck(c: &CrossOutput) {
    println!("v_minus_sup={:e}", c.v_minus_sup);
    println!("psi0_sup={:e}", c.psi0_sup);
    println!("psi1_sup={:e}", c.psi1_sup);
    println!("epsilon_diff={:e}", c.epsilon_diff);
    println!("x0_diff={:e}", c.x0_diff);
    println!("max={:e} threshold={:e} passed={}", c.max, c.threshold, c.passed);
}

pub fn crosscheck(cfg: &ModelConfig, out: Option<&Path>) -> Result<bool, CliError> {
    let c = run_crosscheck(cfg)?;
    print_crosscheck(&c);
    if let Some(p) = out {
        write_output(Some(p), &serde_json::to_string_pretty(&c)?)?;
    }
    Ok(c.passed)
}

pub fn crosscheck_sweep(cfg: &ModelConfig, sweep: &Sweep, out: Option<&Path>) -> Result<bool, CliError> {
    let configs = sweep_configs(cfg, sweep)?;
    let results: Vec<Result<CrossOutput, CliError>> = configs.par_iter().map(|(_, c)| run_crosscheck(c)).collect();
    let mut outputs = Vec::with_capacity(results.len());
    for ((v, _), r) in configs.iter().zip(results) {
        let c = r?;
        println!("{}={} max={:e} passed={}", sweep.key, num(*v), c.max, c.passed);
        outputs.push(c);
    }
    if let Some(p) = out {
        write_output(Some(p), &serde_json::to_string_pretty(&outputs)?)?;
    }
    Ok(outputs.iter().all(|c| c.passed))
}
