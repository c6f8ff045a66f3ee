//! Infinite-basis extrapolation of `R(m)` by a polynomial in `1/m`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSeries {
    n: usize,
    points: Vec<(usize, f64)>,
}

impl ConvergenceSeries {
    /// `points` must have strictly increasing `m`.
    pub fn new(n: usize, points: Vec<(usize, f64)>) -> Result<Self> {
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::NonIncreasing {
                    previous: w[0].0,
                    next: w[1].0,
                });
            }
        }
        Ok(Self { n, points })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[(usize, f64)] {
        &self.points
    }

    /// Consecutive pairs where `R` grows by more than `slack`.
    pub fn monotonicity_violations(&self, slack: f64) -> Vec<(usize, usize, f64)> {
        self.points
            .windows(2)
            .filter(|w| w[1].1 > w[0].1 + slack)
            .map(|w| (w[0].0, w[1].0, w[1].1 - w[0].1))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationFit {
    pub r_inf: f64,
    /// `a_1 .. a_order`, multiplying `m^-1 .. m^-order`.
    pub coefficients: Vec<f64>,
    pub rms_residual: f64,
    /// Of the column-scaled design matrix.
    pub condition_number: f64,
}

impl ExtrapolationFit {
    pub fn evaluate(&self, m: f64) -> f64 {
        let x = 1.0 / m;
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, a| (acc + a) * x)
            + self.r_inf
    }
}

/// Least-squares fit of `R(m) = R_inf + Σ a_i m^-i`, `i = 1..order`.
pub fn fit_series(series: &ConvergenceSeries, order: usize) -> Result<ExtrapolationFit> {
    let rows = series.points.len();
    let cols = order + 1;
    if rows < order + 2 {
        return Err(Error::Underdetermined {
            needed: order + 2,
            got: rows,
        });
    }
    let mut design = DMatrix::from_fn(rows, cols, |r, c| {
        (1.0 / series.points[r].0 as f64).powi(c as i32)
    });
    let scales: Vec<f64> = (0..cols).map(|c| design.column(c).norm()).collect();
    for (c, s) in scales.iter().enumerate() {
        design.column_mut(c).scale_mut(1.0 / s);
    }
    let rhs = DVector::from_iterator(rows, series.points.iter().map(|p| p.1));
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let scaled = svd
        .solve(&rhs, smax * 1e-15)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let residual = &design * &scaled - &rhs;
    let coeffs: Vec<f64> = scaled.iter().zip(&scales).map(|(x, s)| x / s).collect();
    Ok(ExtrapolationFit {
        r_inf: coeffs[0],
        coefficients: coeffs[1..].to_vec(),
        rms_residual: (residual.norm_squared() / rows as f64).sqrt(),
        condition_number: smax / smin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64) -> ConvergenceSeries {
        ConvergenceSeries::new(2, (2..=15).map(|m| (m, f(m as f64))).collect()).unwrap()
    }

    #[test]
    fn recovers_exact_polynomial() {
        let s = synthetic(|m| 0.5 + 3.0 / m - 2.0 / (m * m));
        let fit = fit_series(&s, 6).unwrap();
        assert!((fit.r_inf - 0.5).abs() < 1e-10, "{}", fit.r_inf);
        assert!((fit.coefficients[0] - 3.0).abs() < 1e-7);
        assert!(fit.rms_residual < 1e-12);
        assert!(fit.condition_number.is_finite() && fit.condition_number > 1.0);
        assert!((fit.evaluate(7.0) - (0.5 + 3.0 / 7.0 - 2.0 / 49.0)).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let short = ConvergenceSeries::new(2, (2..9).map(|m| (m, 1.0)).collect()).unwrap();
        assert_eq!(
            fit_series(&short, 6).unwrap_err(),
            Error::Underdetermined { needed: 8, got: 7 }
        );
        assert!(matches!(
            ConvergenceSeries::new(2, vec![(3, 1.0), (3, 0.9)]),
            Err(Error::NonIncreasing { .. })
        ));
    }

    #[test]
    fn monotonicity_audit() {
        let s = ConvergenceSeries::new(3, vec![(2, 1.0), (3, 0.8), (4, 0.81), (5, 0.7)]).unwrap();
        let v = s.monotonicity_violations(1e-9);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].0, v[0].1), (3, 4));
    }
}
