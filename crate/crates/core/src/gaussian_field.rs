//! Multimode squeezed vacuum through Wick's theorem.
//!
//! The Schmidt modes are the Hermite-Gauss modes themselves, with geometric
//! coefficients `λ_k ∝ μ^k` (the decomposition of a double-Gaussian joint
//! amplitude) and squeezing `r_k = g λ_k`. All modes are real, so `N` and
//! `M` are real symmetric and, here, diagonal.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hg_modes::{build_one_body_matrices, ModeBasisSpec, OneBodyMatrices};
use crate::optimize::{brent_minimize, find_root};

pub const DEFAULT_MODE_CAP: usize = 600;

/// Retained modes satisfy `sinh²(r_K) < TRUNCATION * ⟨n⟩` for the last one.
pub const TRUNCATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtEnsemble {
    pub mode_indices: Vec<usize>,
    pub squeeze_params: Vec<f64>,
    pub schmidt_ratio: f64,
    pub gain: f64,
}

impl SchmidtEnsemble {
    pub fn mode_count(&self) -> usize {
        self.mode_indices.len()
    }

    pub fn mean_photons(&self) -> f64 {
        self.squeeze_params.iter().map(|r| r.sinh().powi(2)).sum()
    }
}

fn check_ratio(mu: f64) -> Result<()> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::InvalidParameter(format!(
            "Schmidt ratio must lie in [0, 1), got {mu}"
        )));
    }
    Ok(())
}

/// Untruncated `λ_k = √(1−μ²) μ^k`.
fn coefficient(mu: f64, k: usize) -> f64 {
    if k == 0 {
        (1.0 - mu * mu).sqrt()
    } else {
        (1.0 - mu * mu).sqrt() * mu.powi(k as i32)
    }
}

/// `Σ_k sinh²(g λ_k)` over the untruncated geometric spectrum.
pub fn mean_photons(mu: f64, gain: f64) -> f64 {
    let mut total = 0.0;
    for k in 0.. {
        let lambda = coefficient(mu, k);
        let term = (gain * lambda).sinh().powi(2);
        total += term;
        if lambda == 0.0 || term <= 1e-17 * total {
            break;
        }
    }
    total
}

pub fn build_ensemble(mu: f64, gain: f64, mode_cap: usize) -> Result<SchmidtEnsemble> {
    check_ratio(mu)?;
    if !(gain > 0.0 && gain.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gain must be > 0, got {gain}"
        )));
    }
    let target = mean_photons(mu, gain);
    let mut lambdas = Vec::new();
    for k in 0.. {
        let lambda = coefficient(mu, k);
        if lambda == 0.0 {
            break;
        }
        if k == mode_cap {
            return Err(Error::TruncationCap { cap: mode_cap });
        }
        lambdas.push(lambda);
        if (gain * lambda).sinh().powi(2) < TRUNCATION * target {
            break;
        }
    }
    let norm = lambdas.iter().map(|l| l * l).sum::<f64>().sqrt();
    Ok(SchmidtEnsemble {
        mode_indices: (0..lambdas.len()).collect(),
        squeeze_params: lambdas.iter().map(|l| gain * l / norm).collect(),
        schmidt_ratio: mu,
        gain,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldCorrelators {
    /// `⟨a†_j a_k⟩`
    pub n: DMatrix<f64>,
    /// `⟨a_j a_k⟩`
    pub m: DMatrix<f64>,
}

impl FieldCorrelators {
    pub fn vacuum(modes: usize) -> Self {
        Self {
            n: DMatrix::zeros(modes, modes),
            m: DMatrix::zeros(modes, modes),
        }
    }

    pub fn mode_count(&self) -> usize {
        self.n.nrows()
    }
}

/// Squeezed-vacuum second moments in the HG basis of size
/// `max(mode_indices) + 1`.
pub fn correlators(ensemble: &SchmidtEnsemble) -> FieldCorrelators {
    let size = ensemble.mode_indices.iter().max().map_or(0, |k| k + 1);
    let mut corr = FieldCorrelators::vacuum(size);
    for (&k, &r) in ensemble.mode_indices.iter().zip(&ensemble.squeeze_params) {
        corr.n[(k, k)] += r.sinh().powi(2);
        corr.m[(k, k)] += r.sinh() * r.cosh();
    }
    corr
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldObservables {
    pub delta_t2: f64,
    pub delta_omega2_single: f64,
    pub delta_tau2: f64,
    pub delta_omega2: f64,
    pub mean_n: f64,
    pub pair_mean: f64,
    pub product: f64,
    /// `tr(D N) / tr N`; zero for real symmetric `N`.
    pub mean_omega: f64,
}

/// Wick expectation of `Σ (A[m,q] δ_np + A[n,p] δ_mq + c B[m,q] B[n,p]) a†_m a†_n a_p a_q`
/// for real `N`, `M`.
fn quartic_expectation(a: &DMatrix<f64>, c: f64, b: &DMatrix<f64>, corr: &FieldCorrelators) -> f64 {
    let (n, m) = (&corr.n, &corr.m);
    let tr_n = n.trace();
    let delta_part = 2.0
        * a.component_mul(&(n * tr_n + n * n + m * m.transpose()))
            .sum();
    let bn = b.component_mul(n).sum();
    let x = b * n.transpose();
    let exchange = (&x * &x).trace();
    let anomalous = m.component_mul(&(b * m.transpose() * b.transpose())).sum();
    delta_part + c * (bn * bn + exchange + anomalous)
}

pub fn observables_from_correlators(
    corr: &FieldCorrelators,
    onebody: &OneBodyMatrices,
) -> Result<FieldObservables> {
    let k = corr.mode_count();
    if onebody.mode_count() < k {
        return Err(Error::DimensionMismatch {
            expected: k,
            actual: onebody.mode_count(),
        });
    }
    let cut = |x: &DMatrix<f64>| x.view((0, 0), (k, k)).into_owned();
    let (t, t2, d, d2) = (
        cut(&onebody.t),
        cut(&onebody.t2),
        cut(&onebody.d),
        cut(&onebody.d2),
    );
    let (n, m) = (&corr.n, &corr.m);
    let mean_n = n.trace();
    let pair_mean = mean_n * mean_n + (n * n).trace() + (m.transpose() * m).trace();
    if !(pair_mean > 0.0) {
        return Err(Error::NoPhotonPairs);
    }
    let mean_t = t.component_mul(n).sum() / mean_n;
    let delta_t2 = t2.component_mul(n).sum() / mean_n - mean_t * mean_t;
    let mean_omega = d.component_mul(n).sum() / mean_n;
    let delta_omega2_single = -d2.component_mul(n).sum() / mean_n - mean_omega * mean_omega;
    let delta_tau2 = quartic_expectation(&t2, -2.0, &t, corr) / pair_mean;
    let delta_omega2 = -quartic_expectation(&d2, 2.0, &d, corr) / pair_mean;
    Ok(FieldObservables {
        delta_t2,
        delta_omega2_single,
        delta_tau2,
        delta_omega2,
        mean_n,
        pair_mean,
        product: delta_tau2 * delta_omega2,
        mean_omega,
    })
}

/// Observables of an ensemble, with unit time scale.
pub fn ensemble_observables(ensemble: &SchmidtEnsemble) -> Result<FieldObservables> {
    let corr = correlators(ensemble);
    let modes = corr.mode_count().max(2);
    let onebody = build_one_body_matrices(&ModeBasisSpec::unit(modes)?);
    if corr.mode_count() < 2 {
        let mut padded = FieldCorrelators::vacuum(2);
        padded.n[(0, 0)] = corr.n[(0, 0)];
        padded.m[(0, 0)] = corr.m[(0, 0)];
        return observables_from_correlators(&padded, &onebody);
    }
    observables_from_correlators(&corr, &onebody)
}

/// Gain giving `Σ sinh²(g λ_k) = target` at Schmidt ratio `mu`.
pub fn solve_gain(mu: f64, target_mean_n: f64) -> Result<f64> {
    check_ratio(mu)?;
    if !(target_mean_n > 0.0 && target_mean_n.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target mean photon number must be > 0, got {target_mean_n}"
        )));
    }
    // sinh²(g λ_0) alone reaches the target at this gain
    let hi = target_mean_n.sqrt().asinh() / coefficient(mu, 0) * (1.0 + 1e-12);
    find_root(
        |g| Ok(mean_photons(mu, g) - target_mean_n),
        0.0,
        hi,
        1e-15 * hi,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub mu: f64,
    pub gain: f64,
    pub mean_n: f64,
    pub product: f64,
    pub mode_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMinimum {
    pub target_mean_n: f64,
    pub best: ScanPoint,
    pub grid: Vec<ScanPoint>,
}

pub fn evaluate_ratio(mu: f64, target_mean_n: f64, mode_cap: usize) -> Result<ScanPoint> {
    let gain = solve_gain(mu, target_mean_n)?;
    let ensemble = build_ensemble(mu, gain, mode_cap)?;
    let obs = ensemble_observables(&ensemble)?;
    Ok(ScanPoint {
        mu,
        gain,
        mean_n: obs.mean_n,
        product: obs.product,
        mode_count: ensemble.mode_count(),
    })
}

/// `{0, 0.05, ..., 0.95}`
pub fn default_mu_grid() -> Vec<f64> {
    (0..20).map(|i| i as f64 * 0.05).collect()
}

/// Grid scan over `μ`, then Brent refinement between the neighbours of the
/// best grid point.
pub fn scan_minimum(target_mean_n: f64, mu_grid: &[f64], mode_cap: usize) -> Result<ScanMinimum> {
    if mu_grid.is_empty() {
        return Err(Error::InvalidParameter("empty Schmidt-ratio grid".into()));
    }
    let grid = mu_grid
        .iter()
        .map(|&mu| evaluate_ratio(mu, target_mean_n, mode_cap))
        .collect::<Result<Vec<_>>>()?;
    let (best_index, _) = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.product.total_cmp(&b.1.product))
        .expect("nonempty grid");
    let mut sorted: Vec<f64> = mu_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let centre = grid[best_index].mu;
    let pos = sorted.iter().position(|&m| m == centre).unwrap_or(0);
    let lo = sorted[pos.saturating_sub(1)];
    let hi = if pos + 1 < sorted.len() {
        sorted[pos + 1]
    } else {
        0.5 * (centre + 1.0)
    };
    let mut best = grid[best_index].clone();
    if hi > lo {
        let mut seen = Vec::new();
        brent_minimize(
            |mu| {
                let point = evaluate_ratio(mu, target_mean_n, mode_cap)?;
                let product = point.product;
                seen.push(point);
                Ok(product)
            },
            lo,
            hi,
            centre,
            1e-7,
            60,
        )?;
        if let Some(p) = seen
            .into_iter()
            .min_by(|a, b| a.product.total_cmp(&b.product))
        {
            if p.product < best.product {
                best = p;
            }
        }
    }
    Ok(ScanMinimum {
        target_mean_n,
        best,
        grid,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub k: f64,
    pub c: f64,
    pub rms: f64,
    pub points_used: usize,
}

/// Least squares of `log(1 − R) = log c − k log⟨n⟩` over points with
/// `⟨n⟩ ≥ 10`.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if let Some((n, r)) = points.iter().find(|(_, r)| !(*r < 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "R = {r} at <n> = {n} has no nonclassical deficit"
        )));
    }
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, _)| *n >= 10.0)
        .map(|&(n, r)| (n.ln(), (1.0 - r).ln()))
        .collect();
    if used.len() < 4 {
        return Err(Error::Underdetermined {
            needed: 4,
            got: used.len(),
        });
    }
    let count = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / count;
    let my = used.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (used
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / count)
        .sqrt();
    Ok(ScalingFit {
        k: -slope,
        c: intercept.exp(),
        rms,
        points_used: used.len(),
    })
}
