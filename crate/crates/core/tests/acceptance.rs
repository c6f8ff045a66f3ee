//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
//! if any fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tfjoint::eigensolver::{DenseSolver, EigenSolver, LanczosSolver, SolveOptions};
use tfjoint::extrapolation::{fit_series, ConvergenceSeries};
use tfjoint::fock_enr::EnrBasis;
use tfjoint::gaussian_family::{
    check_minimum_condition, closed_form_product, numeric_product_oracle, GaussianStateParams,
};
use tfjoint::gaussian_field::{
    build_ensemble, default_mu_grid, ensemble_observables, fit_scaling, scan_minimum, solve_gain,
    DEFAULT_MODE_CAP,
};
use tfjoint::hg_modes::{build_one_body_matrices, max_oracle_deviation, ModeBasisSpec};
use tfjoint::minimizer::{minimize_over_xi, MinimizerConfig, UncertaintyProblem};
use tfjoint::number_mixtures::{general_bound, verify_chain, PhotonNumberDistribution};
use tfjoint::operators::{assemble_omega2, assemble_tau2, assemble_uncertainty_hamiltonian};

type Outcome = (bool, String);

/// `R_n^(m)` for n = 2..5, m = 2..15.
fn sweep() -> BTreeMap<usize, Vec<(usize, f64)>> {
    let config = MinimizerConfig::default();
    let cells: Vec<(usize, usize)> = (2..=5)
        .flat_map(|n| (2..=15).map(move |m| (n, m)))
        .collect();
    let results: Vec<(usize, usize, f64)> = cells
        .par_iter()
        .map(|&(n, m)| {
            let report = minimize_over_xi(n, m, &config).expect("sweep cell");
            (n, m, report.best.product)
        })
        .collect();
    let mut series: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (n, m, r) in results {
        series.entry(n).or_default().push((m, r));
    }
    series.values_mut().for_each(|s| s.sort_by_key(|p| p.0));
    series
}

fn criterion_1(series: &BTreeMap<usize, Vec<(usize, f64)>>) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (&n, points) in series {
        let fit = fit_series(&ConvergenceSeries::new(n, points.clone()).unwrap(), 6).unwrap();
        let target = 1.0 - 2.0 / n as f64;
        ok &= (fit.r_inf - target).abs() <= 0.02;
        parts.push(format!(
            "n={n} R_inf={:.5} (target {:.5})",
            fit.r_inf, target
        ));
    }
    (ok, parts.join(", "))
}

fn criterion_2(series: &BTreeMap<usize, Vec<(usize, f64)>>) -> Outcome {
    let mut violations = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for (&n, points) in series {
        let s = ConvergenceSeries::new(n, points.clone()).unwrap();
        for w in points.windows(2) {
            worst = worst.max(w[1].1 - w[0].1);
        }
        violations.extend(s.monotonicity_violations(1e-9).into_iter().map(|v| (n, v)));
    }
    (
        violations.is_empty(),
        format!(
            "{} violations, largest step R(m+1) - R(m) = {worst:.3e}",
            violations.len()
        ),
    )
}

fn criterion_3(series: &BTreeMap<usize, Vec<(usize, f64)>>) -> Outcome {
    let mut worst = f64::INFINITY;
    for (&n, points) in series {
        for &(_, r) in points {
            worst = worst.min(r - (1.0 - 2.0 / n as f64));
        }
    }
    (worst >= -1e-6, format!("min R - (1 - 2/n) = {worst:.3e}"))
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for n in [2, 3] {
        for ratio in [0.1, 0.3, 1.0, 2.0] {
            for delta in [0.7, 1.0] {
                let p = GaussianStateParams::new(n, ratio * delta, delta).unwrap();
                let oracle = numeric_product_oracle(&p).unwrap();
                worst = worst.max((closed_form_product(&p) - oracle.product()).abs());
            }
        }
        let p = GaussianStateParams::new(n, 0.8, 0.8).unwrap();
        exact &= closed_form_product(&p) == 1.0;
    }
    (
        worst <= 1e-6 && exact,
        format!("max |closed form - quadrature| = {worst:.2e}, gamma = delta gives 1: {exact}"),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_limit: f64 = 0.0;
    let mut least_violation = f64::INFINITY;
    for n in 2..=4 {
        let samples: Vec<Vec<f64>> = (0..64)
            .map(|_| {
                (0..n)
                    .map(|_| rand::Rng::random_range(&mut rng, -3.0..3.0))
                    .collect()
            })
            .collect();
        let limit = GaussianStateParams::new(n, 0.0, 1.3).unwrap();
        worst_limit = worst_limit.max(check_minimum_condition(&limit, &samples).unwrap());
        let separable = GaussianStateParams::new(n, 1.3, 1.3).unwrap();
        least_violation =
            least_violation.min(check_minimum_condition(&separable, &samples).unwrap());
    }
    (
        worst_limit <= 1e-10 && least_violation >= 0.1,
        format!(
            "gamma = 0 residual {worst_limit:.2e}, gamma = delta residual {least_violation:.3}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut failures = 0;
    for _ in 0..1000 {
        let dist = common::random_distribution(&mut rng);
        let (tau, omega) = common::admissible_values(&mut rng, dist.max_n());
        match verify_chain(&dist, &tau, &omega) {
            Ok(report) if report.all_hold() => {}
            _ => failures += 1,
        }
    }
    (
        failures == 0,
        format!("{failures} of 1000 distributions violate a link"),
    )
}

fn criterion_7() -> Outcome {
    let dist = PhotonNumberDistribution::new(vec![0.0, 0.0, 1.0]).unwrap();
    let bound = general_bound(&dist).unwrap();
    (
        bound.value == 0.0,
        format!("general bound = {}", bound.value),
    )
}

fn criterion_8() -> Outcome {
    let mut points = Vec::new();
    let mut bounds_ok = true;
    for target in [10.0, 30.0, 100.0, 300.0, 1000.0] {
        let scan = scan_minimum(target, &default_mu_grid(), DEFAULT_MODE_CAP).unwrap();
        let r = scan.best.product;
        bounds_ok &= r >= 1.0 - 2.0 / scan.best.mean_n - 1e-9 && r < 1.0;
        points.push((scan.best.mean_n, r));
    }
    let fit = fit_scaling(&points).unwrap();
    let ok = bounds_ok && (0.85..=1.15).contains(&fit.k) && (0.05..=0.5).contains(&fit.c);
    (
        ok,
        format!(
            "k = {:.4}, c = {:.4} (reference 0.18), bounds respected: {bounds_ok}",
            fit.k, fit.c
        ),
    )
}

fn criterion_9() -> Outcome {
    let mu = 0.5;
    let gain = solve_gain(mu, 1e-8).unwrap();
    let ensemble = build_ensemble(mu, gain, DEFAULT_MODE_CAP).unwrap();
    let field = ensemble_observables(&ensemble).unwrap().product;
    let modes = ensemble.mode_count().max(2);
    let problem = UncertaintyProblem::new(2, modes, 1.0).unwrap();
    let basis = problem.basis();
    let mut state = vec![0.0; basis.dim()];
    for (&k, &r) in ensemble.mode_indices.iter().zip(&ensemble.squeeze_params) {
        let mut occ = vec![0u8; modes];
        occ[k] = 2;
        state[basis.index_of(&occ).unwrap()] = r.tanh();
    }
    let enr = problem.evaluate_state(0.5, &state, 0.0).product;
    let pair_diff = (field - enr).abs();

    let mut single_dev: f64 = 0.0;
    for g in [0.1, 1.0, 3.0] {
        let single = build_ensemble(0.0, g, DEFAULT_MODE_CAP).unwrap();
        single_dev = single_dev.max((ensemble_observables(&single).unwrap().product - 1.0).abs());
    }
    (
        pair_diff <= 1e-6 && single_dev <= 1e-10,
        format!(
            "Wick {field:.10} vs ENR {enr:.10} ({} modes, diff {pair_diff:.2e}); single mode |R - 1| = {single_dev:.2e}",
            modes
        ),
    )
}

fn criterion_10() -> Outcome {
    let spec = ModeBasisSpec::unit(21).unwrap();
    let hg = max_oracle_deviation(&spec, &build_one_body_matrices(&spec)).unwrap();

    let mut assembly: f64 = 0.0;
    for n in 2..=3 {
        for m in 2..=5 {
            let basis = Arc::new(EnrBasis::new(n, m).unwrap());
            let ob = build_one_body_matrices(&ModeBasisSpec::unit(m).unwrap());
            let tau = assemble_tau2(&basis, &ob).unwrap().matrix().to_dense();
            let omega = assemble_omega2(&basis, &ob).unwrap().matrix().to_dense();
            let (tau_ref, omega_ref) = common::dense_operators(&basis, 1.0);
            assembly = assembly
                .max(common::max_entry_difference(&tau, &tau_ref))
                .max(common::max_entry_difference(&omega, &omega_ref));
        }
    }

    let mut eigen: f64 = 0.0;
    let mut largest = 0;
    for (n, m, xi) in [(2, 60, 0.5), (3, 20, 0.4), (4, 12, 0.6), (5, 9, 0.5)] {
        let basis = Arc::new(EnrBasis::new(n, m).unwrap());
        let ob = build_one_body_matrices(&ModeBasisSpec::unit(m).unwrap());
        let tau = assemble_tau2(&basis, &ob).unwrap();
        let omega = assemble_omega2(&basis, &ob).unwrap();
        let h = assemble_uncertainty_hamiltonian(&tau, &omega, xi).unwrap();
        let options = SolveOptions::default();
        let dense = DenseSolver.lowest(h.matrix(), 1, &options).unwrap()[0].eigenvalue;
        let lanczos = LanczosSolver::default()
            .lowest(h.matrix(), 1, &options)
            .unwrap()[0]
            .eigenvalue;
        eigen = eigen.max((dense - lanczos).abs());
        largest = largest.max(basis.dim());
    }
    (
        hg <= 1e-10 && assembly <= 1e-12 && eigen <= 1e-8,
        format!(
            "HG vs quadrature {hg:.2e}, sparse vs dense {assembly:.2e}, Lanczos vs dense {eigen:.2e} (dim up to {largest})"
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, m) in [(2, 8), (3, 6)] {
        let products: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&s| {
                let config = MinimizerConfig {
                    time_scale: s,
                    ..MinimizerConfig::default()
                };
                minimize_over_xi(n, m, &config).unwrap().best.product
            })
            .collect();
        let spread = products.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - products.iter().copied().fold(f64::INFINITY, f64::min);
        ok &= spread <= 1e-6;
        parts.push(format!("(n={n}, m={m}) spread {spread:.2e}"));
    }
    (ok, parts.join(", "))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let series = sweep();
    let sweep_time = start.elapsed();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("extrapolated limits", Box::new(|| criterion_1(&series))),
        (
            "nested-basis monotonicity",
            Box::new(|| criterion_2(&series)),
        ),
        ("subspace lower bound", Box::new(|| criterion_3(&series))),
        ("Gaussian closed form", Box::new(criterion_4)),
        ("minimum-state condition", Box::new(criterion_5)),
        ("mixture chain", Box::new(criterion_6)),
        ("biphoton limit", Box::new(criterion_7)),
        ("BSV scaling", Box::new(criterion_8)),
        ("Wick cross-check", Box::new(criterion_9)),
        ("oracle suite", Box::new(criterion_10)),
        ("scale invariance", Box::new(criterion_11)),
    ];
    println!("sweep n=2..5, m=2..15 finished in {:.1?}", sweep_time);
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {detail} [{:.1?}]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            t.elapsed()
        );
    }
    if failed == 0 {
        println!("acceptance: all 11 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria fail");
        ExitCode::FAILURE
    }
}
