use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use tfjoint::eigensolver::SolverRegistry;
use tfjoint::extrapolation::{fit_series, ConvergenceSeries};
use tfjoint::minimizer::{minimize_over_xi, MinimizationReport, MinimizerConfig};

use super::{finalize, init_threads, require, Context};
use crate::cache::{cache_key, Cache};
use crate::config::{parse_range, Resolver};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Run};

#[derive(Args, Debug)]
pub struct CellArgs {
    #[arg(long)]
    photons: Option<usize>,
    #[arg(long)]
    modes: Option<usize>,
    #[command(flatten)]
    numerics: NumericArgs,
}

#[derive(Args, Debug)]
pub struct NumericArgs {
    /// Width of the Hermite-Gauss basis
    #[arg(long)]
    time_scale: Option<f64>,
    /// Points of the coarse ξ grid
    #[arg(long)]
    grid_points: Option<usize>,
    /// Eigenpair residual tolerance
    #[arg(long)]
    tolerance: Option<f64>,
}

/// Everything that determines one `(n, m)` minimum, and its cache key.
#[derive(Debug, Clone)]
struct CellSpec {
    time_scale: f64,
    grid_points: usize,
    tolerance: f64,
    solver: String,
    seed: u64,
}

impl CellSpec {
    fn resolve(
        args: &NumericArgs,
        r: &mut Resolver<'_>,
        solver: &str,
        seed: u64,
    ) -> CliResult<Self> {
        let spec = Self {
            time_scale: r.value("time-scale", args.time_scale, 1.0)?,
            grid_points: r.value("grid-points", args.grid_points, 33)?,
            tolerance: r.value("tolerance", args.tolerance, 1e-10)?,
            solver: solver.to_string(),
            seed,
        };
        require(spec.time_scale > 0.0 && spec.time_scale.is_finite(), || {
            format!("--time-scale must be > 0, got {}", spec.time_scale)
        })?;
        require(spec.grid_points >= 3, || {
            "--grid-points must be >= 3".into()
        })?;
        require(spec.tolerance > 0.0, || "--tolerance must be > 0".into())?;
        Ok(spec)
    }

    fn config(&self) -> CliResult<MinimizerConfig> {
        Ok(MinimizerConfig {
            time_scale: self.time_scale,
            grid_points: self.grid_points,
            tolerance: self.tolerance,
            seed: self.seed,
            solver: SolverRegistry::with_builtins().get(&self.solver)?,
            ..MinimizerConfig::default()
        })
    }

    fn key(&self, n: usize, m: usize) -> String {
        let mut p = BTreeMap::new();
        p.insert("photons".to_string(), n.to_string());
        p.insert("modes".to_string(), m.to_string());
        p.insert("time-scale".to_string(), self.time_scale.to_string());
        p.insert("grid-points".to_string(), self.grid_points.to_string());
        p.insert("tolerance".to_string(), self.tolerance.to_string());
        p.insert("solver".to_string(), self.solver.clone());
        p.insert("seed".to_string(), self.seed.to_string());
        cache_key("min-uncertainty", &p)
    }
}

/// Returns the report and whether it came from the cache.
fn solve_cell(
    spec: &CellSpec,
    config: &MinimizerConfig,
    cache: &Cache,
    n: usize,
    m: usize,
) -> CliResult<(MinimizationReport, bool)> {
    let key = spec.key(n, m);
    if let Some(report) = cache.load::<MinimizationReport>(&key) {
        return Ok((report, true));
    }
    let report = minimize_over_xi(n, m, config)?;
    cache.store(&key, &report)?;
    Ok((report, false))
}

fn check_cell(n: usize, m: usize) -> CliResult<()> {
    require(n >= 2, || format!("--photons must be >= 2, got {n}"))?;
    require(m >= 2, || format!("--modes must be >= 2, got {m}"))
}

fn result_row(report: &MinimizationReport) -> Vec<Cell> {
    let b = &report.best;
    vec![
        b.n.into(),
        b.m.into(),
        b.xi.into(),
        b.delta_tau2.into(),
        b.delta_omega2.into(),
        b.product.into(),
    ]
}

const RESULT_HEADER: [&str; 6] = ["n", "m", "xi", "delta_tau2", "delta_omega2", "R"];

pub fn min_uncertainty(ctx: Context, args: CellArgs) -> CliResult<()> {
    let (settings, mut r) = ctx.settings()?;
    let n = r.value("photons", args.photons, 2)?;
    let m = r.value("modes", args.modes, 4)?;
    let spec = CellSpec::resolve(&args.numerics, &mut r, &settings.solver, settings.seed)?;
    check_cell(n, m)?;
    let config = spec.config()?;
    init_threads(settings.threads)?;
    let cache = Cache::new(settings.cache_dir.as_deref());
    let mut run = Run::new("min-uncertainty", &settings.output_dir, r.into_map())?;
    let outcome = (|| {
        let (report, cached) = solve_cell(&spec, &config, &cache, n, m)?;
        if cached {
            run.cache_hits += 1;
        } else {
            run.cache_misses += 1;
            run.eigensolves += report.eigensolves;
        }
        run.write_csv(
            "min_uncertainty.csv",
            &RESULT_HEADER,
            vec![result_row(&report)],
        )?;
        run.write_json(&format!("min_uncertainty_n{n}_m{m}.json"), &report)?;
        let b = &report.best;
        println!(
            "n={n} m={m} xi*={} R={} dual_bound={}{}",
            crate::output::fmt_sig(b.xi),
            crate::output::fmt_sig(b.product),
            crate::output::fmt_sig(report.eigenvalue_criterion.dual_bound),
            if cached { " (cached)" } else { "" }
        );
        Ok(())
    })();
    finalize(run, outcome)
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Photon-number range, e.g. 2-5
    #[arg(long)]
    photons: Option<String>,
    /// Mode-count range, e.g. 2-15
    #[arg(long)]
    modes: Option<String>,
    /// Polynomial order in 1/m of the extrapolation
    #[arg(long)]
    order: Option<usize>,
    #[command(flatten)]
    numerics: NumericArgs,
}

#[derive(Debug, Clone, Serialize)]
struct SeriesSummary {
    points: usize,
    target: f64,
    r_inf: Option<f64>,
    deviation: Option<f64>,
    rms_residual: Option<f64>,
    condition_number: Option<f64>,
    fit_error: Option<String>,
    /// `(m, m + 1, increase)` where `R` grew by more than 1e-9.
    monotonicity_violations: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, Serialize)]
struct CellFailure {
    n: usize,
    m: usize,
    error: String,
}

#[derive(Debug, Clone, Serialize)]
struct SweepSummary {
    order: usize,
    series: BTreeMap<String, SeriesSummary>,
    failures: Vec<CellFailure>,
}

fn summarize(n: usize, points: Vec<(usize, f64)>, order: usize) -> SeriesSummary {
    let target = 1.0 - 2.0 / n as f64;
    let count = points.len();
    let series = match ConvergenceSeries::new(n, points) {
        Ok(s) => s,
        Err(e) => {
            return SeriesSummary {
                points: count,
                target,
                r_inf: None,
                deviation: None,
                rms_residual: None,
                condition_number: None,
                fit_error: Some(e.to_string()),
                monotonicity_violations: Vec::new(),
            }
        }
    };
    let violations = series.monotonicity_violations(1e-9);
    match fit_series(&series, order) {
        Ok(fit) => SeriesSummary {
            points: count,
            target,
            r_inf: Some(fit.r_inf),
            deviation: Some(fit.r_inf - target),
            rms_residual: Some(fit.rms_residual),
            condition_number: Some(fit.condition_number),
            fit_error: None,
            monotonicity_violations: violations,
        },
        Err(e) => SeriesSummary {
            points: count,
            target,
            r_inf: None,
            deviation: None,
            rms_residual: None,
            condition_number: None,
            fit_error: Some(e.to_string()),
            monotonicity_violations: violations,
        },
    }
}

pub fn sweep(ctx: Context, args: SweepArgs) -> CliResult<()> {
    let (settings, mut r) = ctx.settings()?;
    let photons = parse_range(&r.value("photons", args.photons, "2-5".to_string())?)?;
    let modes = parse_range(&r.value("modes", args.modes, "2-15".to_string())?)?;
    let order = r.value("order", args.order, 6)?;
    let spec = CellSpec::resolve(&args.numerics, &mut r, &settings.solver, settings.seed)?;
    for &n in &photons {
        for &m in &modes {
            check_cell(n, m)?;
        }
    }
    let config = spec.config()?;
    init_threads(settings.threads)?;
    let cache = Cache::new(settings.cache_dir.as_deref());
    let mut run = Run::new("sweep", &settings.output_dir, r.into_map())?;

    let cells: Vec<(usize, usize)> = photons
        .iter()
        .flat_map(|&n| modes.iter().map(move |&m| (n, m)))
        .collect();
    let progress = Mutex::new(0usize);
    let total = cells.len();
    // largest cells first so the tail of the queue is short
    let mut queue = cells.clone();
    queue.sort_by_key(|&(n, m)| std::cmp::Reverse(tfjoint::fock_enr::binomial(n + m - 1, n)));
    let mut outcomes: Vec<((usize, usize), CliResult<(MinimizationReport, bool)>)> = queue
        .par_iter()
        .map(|&(n, m)| {
            let outcome = solve_cell(&spec, &config, &cache, n, m);
            let mut done = progress.lock().expect("progress lock");
            *done += 1;
            match &outcome {
                Ok((rep, cached)) => eprintln!(
                    "[{}/{total}] n={n} m={m} R={}{}",
                    *done,
                    crate::output::fmt_sig(rep.best.product),
                    if *cached { " (cached)" } else { "" }
                ),
                Err(e) => eprintln!("[{}/{total}] n={n} m={m} failed: {e}", *done),
            }
            ((n, m), outcome)
        })
        .collect();
    outcomes.sort_by_key(|(cell, _)| *cell);

    let outcome = (|| {
        let mut rows = Vec::new();
        let mut per_n: BTreeMap<usize, Vec<(usize, MinimizationReport)>> = BTreeMap::new();
        let mut failures = Vec::new();
        for ((n, m), outcome) in outcomes {
            match outcome {
                Ok((report, cached)) => {
                    if cached {
                        run.cache_hits += 1;
                    } else {
                        run.cache_misses += 1;
                        run.eigensolves += report.eigensolves;
                    }
                    rows.push(vec![n.into(), m.into(), report.best.product.into()]);
                    per_n.entry(n).or_default().push((m, report));
                }
                Err(e) => failures.push(CellFailure {
                    n,
                    m,
                    error: e.to_string(),
                }),
            }
        }
        run.write_csv("sweep.csv", &["n", "m", "R"], rows)?;
        let mut series = BTreeMap::new();
        for (&n, reports) in &per_n {
            let rows = reports.iter().map(|(_, rep)| result_row(rep)).collect();
            run.write_csv(&format!("series_n{n}.csv"), &RESULT_HEADER, rows)?;
            let points = reports
                .iter()
                .map(|(m, rep)| (*m, rep.best.product))
                .collect();
            let summary = summarize(n, points, order);
            if let Some(r_inf) = summary.r_inf {
                println!(
                    "n={n}: R_inf={} (1 - 2/n = {}), rms {}",
                    crate::output::fmt_sig(r_inf),
                    crate::output::fmt_sig(summary.target),
                    crate::output::fmt_sig(summary.rms_residual.unwrap_or(f64::NAN))
                );
            }
            series.insert(n.to_string(), summary);
        }
        let failed = failures.len();
        run.write_json(
            "sweep_summary.json",
            &SweepSummary {
                order,
                series,
                failures,
            },
        )?;
        println!(
            "sweep: {} cells, {} cached, {} eigensolves, {failed} failed",
            total, run.cache_hits, run.eigensolves
        );
        if failed > 0 {
            return Err(CliError::Numeric(format!(
                "{failed} of {total} sweep cells failed"
            )));
        }
        Ok(())
    })();
    finalize(run, outcome)
}

#[derive(Args, Debug)]
pub struct ExtrapolateArgs {
    /// Long-format CSV with columns n, m, R (as written by sweep)
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    order: Option<usize>,
}

fn read_long_format(path: &Path) -> CliResult<BTreeMap<usize, Vec<(usize, f64)>>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::Usage(format!("{} has no column {name:?}", path.display())))
    };
    let (cn, cm, cr) = (column("n")?, column("m")?, column("R")?);
    let mut out: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("").trim().to_string();
        let bad = |what: &str| CliError::Usage(format!("row {}: bad {what}", line + 2));
        let n: usize = field(cn).parse().map_err(|_| bad("n"))?;
        let m: usize = field(cm).parse().map_err(|_| bad("m"))?;
        let r: f64 = field(cr).parse().map_err(|_| bad("R"))?;
        out.entry(n).or_default().push((m, r));
    }
    for points in out.values_mut() {
        points.sort_by_key(|p| p.0);
    }
    Ok(out)
}

pub fn extrapolate(ctx: Context, args: ExtrapolateArgs) -> CliResult<()> {
    let (settings, mut r) = ctx.settings()?;
    let input = r
        .optional("input", args.input.map(|p| p.display().to_string()))?
        .ok_or_else(|| CliError::Usage("extrapolate needs --input".into()))?;
    let order = r.value("order", args.order, 6)?;
    let data = read_long_format(Path::new(&input))?;
    let mut run = Run::new("extrapolate", &settings.output_dir, r.into_map())?;
    let outcome = (|| {
        let mut rows = Vec::new();
        let mut details = BTreeMap::new();
        for (n, points) in data {
            let s = summarize(n, points, order);
            rows.push(vec![
                n.into(),
                s.points.into(),
                order.into(),
                s.r_inf.into(),
                s.target.into(),
                s.deviation.into(),
                s.rms_residual.into(),
                s.condition_number.into(),
                s.fit_error.clone().unwrap_or_default().into(),
            ]);
            details.insert(n.to_string(), s);
        }
        run.write_csv(
            "extrapolation.csv",
            &[
                "n",
                "points",
                "order",
                "r_inf",
                "target",
                "deviation",
                "rms_residual",
                "condition_number",
                "error",
            ],
            rows,
        )?;
        run.write_json("extrapolation.json", &details)?;
        Ok(())
    })();
    finalize(run, outcome)
}
