//! Exchange-symmetric Gaussian n-photon states.
//!
//! The joint temporal density is
//! `A_n exp(-(γ²/n)(Σ t_i)² - (δ²/n) Σ_{i<j} (t_i - t_j)²)` and the amplitude
//! is its positive square root.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussHermite;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianStateParams {
    n: usize,
    gamma: f64,
    delta: f64,
}

impl GaussianStateParams {
    /// `gamma = 0` is accepted for the limiting (unnormalizable) state.
    pub fn new(n: usize, gamma: f64, delta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::PhotonNumber(n));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be >= 0, got {gamma}"
            )));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be > 0, got {delta}"
            )));
        }
        Ok(Self { n, gamma, delta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `A_n`; zero for `gamma = 0`.
    pub fn normalization(&self) -> f64 {
        self.gamma * self.delta.powi(self.n as i32 - 1) / PI.powf(self.n as f64 / 2.0)
    }

    /// `∂_i φ / φ` at `t`.
    pub fn log_gradient(&self, t: &[f64]) -> Vec<f64> {
        let n = self.n as f64;
        let sum: f64 = t.iter().sum();
        let (g2, d2) = (self.gamma * self.gamma, self.delta * self.delta);
        // Σ_{j≠i} (t_i − t_j) = n t_i − Σ t
        t.iter()
            .map(|&ti| -(g2 / n) * sum - (d2 / n) * (n * ti - sum))
            .collect()
    }
}

/// `Δτ² ΔΩ² = 1 − (2/n)(1 − γ²/δ²)`; the `γ = 0` limit gives `1 − 2/n`.
pub fn closed_form_product(params: &GaussianStateParams) -> f64 {
    let ratio = params.gamma / params.delta;
    1.0 - 2.0 / params.n as f64 * (1.0 - ratio * ratio)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleProducts {
    pub delta_tau2: f64,
    pub delta_omega2: f64,
    /// Change of the product between the half-order and full-order rules.
    pub doubling_change: f64,
}

impl OracleProducts {
    pub fn product(&self) -> f64 {
        self.delta_tau2 * self.delta_omega2
    }
}

pub const ORACLE_NODES: usize = 64;

/// `⟨(t_1 − t_2)²⟩` and `⟨((∂_1 + ∂_2) φ)²⟩` by tensor-product Gauss-Hermite
/// quadrature in the centroid / relative frame, for `n ∈ {2, 3}`.
pub fn numeric_product_oracle(params: &GaussianStateParams) -> Result<OracleProducts> {
    if !(2..=3).contains(&params.n) {
        return Err(Error::InvalidParameter(format!(
            "quadrature oracle supports n in {{2, 3}}, got {}",
            params.n
        )));
    }
    if params.gamma <= 0.0 {
        return Err(Error::InvalidParameter(
            "quadrature oracle needs gamma > 0 (normalizable density)".into(),
        ));
    }
    let fine = oracle_with(params, &GaussHermite::new(ORACLE_NODES));
    let coarse = oracle_with(params, &GaussHermite::new(ORACLE_NODES / 2));
    let change = (fine.0 * fine.1 - coarse.0 * coarse.1).abs();
    if change > 1e-9 {
        return Err(Error::QuadratureNotConverged { change });
    }
    Ok(OracleProducts {
        delta_tau2: fine.0,
        delta_omega2: fine.1,
        doubling_change: change,
    })
}

/// Orthonormal basis of the plane `Σ t_i = 0` (Helmert vectors).
fn relative_basis(n: usize) -> Vec<Vec<f64>> {
    (1..n)
        .map(|k| {
            let norm = ((k * (k + 1)) as f64).sqrt();
            (0..n)
                .map(|i| match i.cmp(&k) {
                    std::cmp::Ordering::Less => 1.0 / norm,
                    std::cmp::Ordering::Equal => -(k as f64) / norm,
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect()
        })
        .collect()
}

fn oracle_with(params: &GaussianStateParams, rule: &GaussHermite) -> (f64, f64) {
    let n = params.n;
    let basis = relative_basis(n);
    let centroid = 1.0 / (n as f64).sqrt();
    let (x, w) = (rule.nodes(), rule.weights());
    let k = x.len();
    let dims = n;
    let mut index = vec![0usize; dims];
    let (mut mass, mut tau, mut omega) = (0.0, 0.0, 0.0);
    let mut t = vec![0.0; n];
    'outer: loop {
        // density exp(-γ² S² - δ² |y|²) after S = u/γ, y = v/δ
        let s = x[index[0]] / params.gamma;
        let mut weight = w[index[0]];
        t.iter_mut().for_each(|ti| *ti = s * centroid);
        for (axis, b) in basis.iter().enumerate() {
            let y = x[index[axis + 1]] / params.delta;
            weight *= w[index[axis + 1]];
            t.iter_mut().zip(b).for_each(|(ti, bi)| *ti += y * bi);
        }
        let g = params.log_gradient(&t);
        mass += weight;
        tau += weight * (t[0] - t[1]).powi(2);
        omega += weight * (g[0] + g[1]).powi(2);

        for d in 0..dims {
            index[d] += 1;
            if index[d] < k {
                continue 'outer;
            }
            index[d] = 0;
        }
        break;
    }
    (tau / mass, omega / mass)
}

/// Worst deviation from `∂_i φ = c Σ_{k≠i} (t_k − t_i) φ` over the sample
/// points, with one constant `c` fitted by least squares. Both sides are
/// divided by `φ > 0`, and the deviation is relative to the largest
/// left-hand side.
pub fn check_minimum_condition(params: &GaussianStateParams, samples: &[Vec<f64>]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::DegenerateSamples("no sample points".into()));
    }
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for t in samples {
        if t.len() != params.n {
            return Err(Error::DimensionMismatch {
                expected: params.n,
                actual: t.len(),
            });
        }
        let sum: f64 = t.iter().sum();
        let n = params.n as f64;
        lhs.extend(params.log_gradient(t));
        rhs.extend(t.iter().map(|&ti| sum - n * ti));
    }
    let rr: f64 = rhs.iter().map(|r| r * r).sum();
    let scale = lhs.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    if rr == 0.0 || scale == 0.0 {
        return Err(Error::DegenerateSamples(
            "all sample points lie on the diagonal t_1 = ... = t_n".into(),
        ));
    }
    let c = lhs.iter().zip(&rhs).map(|(l, r)| l * r).sum::<f64>() / rr;
    let worst = lhs
        .iter()
        .zip(&rhs)
        .fold(0.0f64, |m, (l, r)| m.max((l - c * r).abs()));
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        for n in 2..6 {
            let p = GaussianStateParams::new(n, 0.7, 0.7).unwrap();
            assert_eq!(closed_form_product(&p), 1.0);
        }
        let p = GaussianStateParams::new(4, 0.0, 1.0).unwrap();
        assert_eq!(closed_form_product(&p), 0.5);
        let p = GaussianStateParams::new(2, 2.0, 1.0).unwrap();
        assert_eq!(closed_form_product(&p), 4.0);
    }

    #[test]
    fn separable_pair_has_unit_variances() {
        let p = GaussianStateParams::new(2, 1.0, 1.0).unwrap();
        let o = numeric_product_oracle(&p).unwrap();
        assert!((o.delta_tau2 - 1.0).abs() < 1e-12);
        assert!((o.delta_omega2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_matches_closed_form_for_three_photons() {
        let p = GaussianStateParams::new(3, 0.3, 1.0).unwrap();
        let o = numeric_product_oracle(&p).unwrap();
        assert!((o.product() - (1.0 - 2.0 / 3.0 * 0.91)).abs() < 1e-10);
    }

    #[test]
    fn normalization_integrates_to_one() {
        let p = GaussianStateParams::new(2, 0.5, 1.5).unwrap();
        // trapezoid rule in the original frame; spectrally accurate here
        let h = 0.02;
        let mut total = 0.0;
        for i in -500..=500 {
            for j in -500..=500 {
                let (t1, t2) = (i as f64 * h, j as f64 * h);
                let exponent = -0.125 * (t1 + t2).powi(2) - 1.125 * (t1 - t2).powi(2);
                total += exponent.exp() * h * h;
            }
        }
        assert!((total * p.normalization() - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn oracle_rejects_unsupported_inputs() {
        let p = GaussianStateParams::new(4, 1.0, 1.0).unwrap();
        assert!(numeric_product_oracle(&p).is_err());
        let p = GaussianStateParams::new(2, 0.0, 1.0).unwrap();
        assert!(numeric_product_oracle(&p).is_err());
        assert!(GaussianStateParams::new(1, 1.0, 1.0).is_err());
        assert!(GaussianStateParams::new(2, 1.0, 0.0).is_err());
    }

    #[test]
    fn minimum_condition() {
        let samples: Vec<Vec<f64>> = (0..50)
            .map(|i| {
                let x = i as f64 * 0.37;
                vec![x.sin(), (1.3 * x).cos(), (0.7 * x + 0.2).sin()]
            })
            .collect();
        let limit = GaussianStateParams::new(3, 0.0, 1.0).unwrap();
        assert!(check_minimum_condition(&limit, &samples).unwrap() <= 1e-12);
        let separable = GaussianStateParams::new(3, 1.0, 1.0).unwrap();
        assert!(check_minimum_condition(&separable, &samples).unwrap() > 0.1);
        let diagonal = vec![vec![0.5, 0.5, 0.5]];
        assert!(check_minimum_condition(&limit, &diagonal).is_err());
    }
}
