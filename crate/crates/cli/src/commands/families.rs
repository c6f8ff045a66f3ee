use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use tfjoint::gaussian_family::{
    check_minimum_condition, closed_form_product, numeric_product_oracle, GaussianStateParams,
    OracleProducts,
};
use tfjoint::gaussian_field::{fit_scaling, scan_minimum, ScalingFit, ScanMinimum};
use tfjoint::number_mixtures::{
    general_bound, simplified_bound, verify_chain, ChainReport, GeneralBound, GeneratorRegistry,
};

use super::{finalize, init_threads, require, Context};
use crate::config::parse_list;
use crate::error::CliResult;
use crate::output::{fmt_sig, Cell, Run};

#[derive(Args, Debug)]
pub struct GaussianArgs {
    /// Photon numbers, comma separated
    #[arg(long)]
    photons: Option<String>,
    /// Values of γ/δ, comma separated
    #[arg(long)]
    ratios: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    /// Random points for the minimum-state condition
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Serialize)]
struct GaussianRow {
    n: usize,
    gamma: f64,
    delta: f64,
    closed_form: f64,
    oracle: Option<OracleProducts>,
    oracle_note: Option<String>,
    minimum_condition_residual: f64,
}

pub fn gaussian(ctx: Context, args: GaussianArgs) -> CliResult<()> {
    let (settings, mut r) = ctx.settings()?;
    let photons: Vec<usize> = parse_list(&r.value("photons", args.photons, "2,3".to_string())?)?;
    let ratios: Vec<f64> =
        parse_list(&r.value("ratios", args.ratios, "0.1,0.3,1,2".to_string())?)?;
    let delta = r.value("delta", args.delta, 1.0)?;
    let samples = r.value("samples", args.samples, 64)?;
    require(samples > 0, || "--samples must be > 0".into())?;
    let mut run = Run::new("gaussian", &settings.output_dir, r.into_map())?;
    let outcome = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        let mut rows = Vec::new();
        let mut details = Vec::new();
        for &n in &photons {
            for &ratio in &ratios {
                let p = GaussianStateParams::new(n, ratio * delta, delta)?;
                let points: Vec<Vec<f64>> = (0..samples)
                    .map(|_| (0..n).map(|_| rng.random_range(-3.0..3.0)).collect())
                    .collect();
                let (oracle, note) = match numeric_product_oracle(&p) {
                    Ok(o) => (Some(o), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                let row = GaussianRow {
                    n,
                    gamma: p.gamma(),
                    delta,
                    closed_form: closed_form_product(&p),
                    oracle,
                    oracle_note: note,
                    minimum_condition_residual: check_minimum_condition(&p, &points)?,
                };
                rows.push(vec![
                    n.into(),
                    row.gamma.into(),
                    delta.into(),
                    row.closed_form.into(),
                    row.oracle.map(|o| o.product()).into(),
                    row.oracle
                        .map(|o| (o.product() - row.closed_form).abs())
                        .into(),
                    row.oracle.map(|o| o.doubling_change).into(),
                    row.minimum_condition_residual.into(),
                ]);
                details.push(row);
            }
        }
        run.write_csv(
            "gaussian.csv",
            &[
                "n",
                "gamma",
                "delta",
                "closed_form",
                "oracle",
                "abs_difference",
                "oracle_doubling_change",
                "minimum_condition_residual",
            ],
            rows,
        )?;
        run.write_json("gaussian.json", &details)?;
        Ok(())
    })();
    finalize(run, outcome)
}

#[derive(Args, Debug)]
pub struct MixtureArgs {
    /// Generator specs such as poisson:10, thermal:4, bsv:3 or file:p.csv,
    /// comma separated
    #[arg(long)]
    distribution: Option<String>,
}

#[derive(Serialize)]
struct MixtureDetail {
    distribution: String,
    mean_n: f64,
    pair_mean: f64,
    general_bound: GeneralBound,
    simplified_bound: Option<f64>,
    /// Chain evaluated with subspace values on the bound `Δτ_n ΔΩ_n = √(1 − 2/n)`.
    chain: Option<ChainReport>,
    chain_note: Option<String>,
}

pub fn mixture_bound(ctx: Context, args: MixtureArgs) -> CliResult<()> {
    let (settings, mut r) = ctx.settings()?;
    let specs = r.value("distribution", args.distribution, "poisson:10".to_string())?;
    let registry = GeneratorRegistry::with_builtins();
    let dists = specs
        .split(',')
        .map(|s| Ok((s.trim().to_string(), registry.resolve(s.trim())?)))
        .collect::<CliResult<Vec<_>>>()?;
    let mut run = Run::new("mixture-bound", &settings.output_dir, r.into_map())?;
    let outcome = (|| {
        let mut rows = Vec::new();
        let mut details = Vec::new();
        for (name, dist) in dists {
            let bound = general_bound(&dist)?;
            let mean = dist.mean();
            let simplified = simplified_bound(mean).ok();
            let pairs = dist.pair_mean();
            let factor = if pairs > 0.0 {
                1.0 - 2.0 * dist.p(2) / pairs
            } else {
                f64::NAN
            };
            let tau: Vec<f64> = vec![1.0; dist.max_n() + 1];
            let omega: Vec<f64> = (0..=dist.max_n())
                .map(|n| {
                    if n >= 2 {
                        (1.0 - 2.0 / n as f64).sqrt()
                    } else {
                        0.0
                    }
                })
                .collect();
            let (chain, note) = match verify_chain(&dist, &tau, &omega) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            rows.push(vec![
                name.clone().into(),
                mean.into(),
                pairs.into(),
                dist.p(2).into(),
                bound.value.into(),
                bound.degenerate.into(),
                simplified.into(),
                simplified.map(|s| s * factor).into(),
                chain.as_ref().map_or(Cell::Empty, |c| c.all_hold().into()),
            ]);
            println!(
                "{name}: <n>={} general_bound={} simplified={}",
                fmt_sig(mean),
                fmt_sig(bound.value),
                simplified.map_or("n/a".to_string(), fmt_sig)
            );
            details.push(MixtureDetail {
                distribution: name,
                mean_n: mean,
                pair_mean: pairs,
                general_bound: bound,
                simplified_bound: simplified,
                chain,
                chain_note: note,
            });
        }
        run.write_csv(
            "mixture_bound.csv",
            &[
                "distribution",
                "mean_n",
                "pair_mean",
                "p2",
                "general_bound",
                "degenerate",
                "simplified_bound",
                "simplified_with_p2_factor",
                "chain_holds",
            ],
            rows,
        )?;
        run.write_json("mixture_bound.json", &details)?;
        Ok(())
    })();
    finalize(run, outcome)
}

#[derive(Args, Debug)]
pub struct BsvArgs {
    /// Target mean photon numbers, comma separated
    #[arg(long)]
    mean_photons: Option<String>,
    /// Spacing of the Schmidt-ratio grid on [0, 1)
    #[arg(long)]
    mu_step: Option<f64>,
    /// Maximum number of Schmidt modes kept
    #[arg(long)]
    mode_cap: Option<usize>,
}

#[derive(Serialize)]
struct BsvSummary {
    fit: Option<ScalingFit>,
    fit_error: Option<String>,
    reference_c: f64,
    scans: Vec<ScanMinimum>,
}

pub fn bsv_scan(ctx: Context, args: BsvArgs) -> CliResult<()> {
    let (settings, mut r) = ctx.settings()?;
    let targets: Vec<f64> = parse_list(&r.value(
        "mean-photons",
        args.mean_photons,
        "10,30,100,300,1000".to_string(),
    )?)?;
    let step = r.value("mu-step", args.mu_step, 0.05)?;
    let cap = r.value(
        "mode-cap",
        args.mode_cap,
        tfjoint::gaussian_field::DEFAULT_MODE_CAP,
    )?;
    require(step > 0.0 && step < 1.0, || {
        "--mu-step must lie in (0, 1)".into()
    })?;
    let grid: Vec<f64> = (0..)
        .map(|i| i as f64 * step)
        .take_while(|&mu| mu < 1.0 - 1e-12)
        .collect();
    init_threads(settings.threads)?;
    let mut run = Run::new("bsv-scan", &settings.output_dir, r.into_map())?;
    let outcome = (|| {
        use rayon::prelude::*;
        let scans = targets
            .par_iter()
            .map(|&t| scan_minimum(t, &grid, cap))
            .collect::<Result<Vec<_>, _>>()?;
        let mut rows = Vec::new();
        let mut grid_rows = Vec::new();
        for s in &scans {
            let b = &s.best;
            rows.push(vec![
                s.target_mean_n.into(),
                b.mu.into(),
                b.gain.into(),
                b.mean_n.into(),
                b.product.into(),
                ((1.0 - b.product) * b.mean_n).into(),
                (1.0 - 2.0 / b.mean_n).into(),
                b.mode_count.into(),
            ]);
            for p in &s.grid {
                grid_rows.push(vec![
                    s.target_mean_n.into(),
                    p.mu.into(),
                    p.product.into(),
                    p.mode_count.into(),
                ]);
            }
        }
        run.write_csv(
            "bsv_scan.csv",
            &[
                "target_mean_n",
                "mu",
                "gain",
                "mean_n",
                "R",
                "deficit_times_n",
                "mixture_floor",
                "modes",
            ],
            rows,
        )?;
        run.write_csv(
            "bsv_grid.csv",
            &["target_mean_n", "mu", "R", "modes"],
            grid_rows,
        )?;
        let points: Vec<(f64, f64)> = scans
            .iter()
            .map(|s| (s.best.mean_n, s.best.product))
            .collect();
        let (fit, fit_error) = match fit_scaling(&points) {
            Ok(f) => {
                println!(
                    "1 - R = c <n>^-k: k={} c={} (reference c=0.18)",
                    fmt_sig(f.k),
                    fmt_sig(f.c)
                );
                (Some(f), None)
            }
            Err(e) => (None, Some(e.to_string())),
        };
        let summary = BsvSummary {
            fit,
            fit_error,
            reference_c: 0.18,
            scans,
        };
        run.write_json("bsv_scan.json", &summary)?;
        Ok(())
    })();
    finalize(run, outcome)
}
