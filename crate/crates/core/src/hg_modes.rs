//! Hermite-Gauss temporal modes and their one-body matrix elements.
//!
//! Modes at time scale `s` are `psi_k(t / s) / sqrt(s)`. All matrices are
//! exact projections of the continuum operators onto the first `m` modes:
//! `t2` is the projection of `t^2`, which differs from the truncated product
//! `t * t` in the last two rows and columns.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, hermite_polynomials};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeBasisSpec {
    mode_count: usize,
    time_scale: f64,
}

impl ModeBasisSpec {
    pub fn new(mode_count: usize, time_scale: f64) -> Result<Self> {
        if mode_count < 2 {
            return Err(Error::ModeCount(mode_count));
        }
        if !(time_scale > 0.0 && time_scale.is_finite()) {
            return Err(Error::TimeScale(time_scale));
        }
        Ok(Self {
            mode_count,
            time_scale,
        })
    }

    /// Unit time scale.
    pub fn unit(mode_count: usize) -> Result<Self> {
        Self::new(mode_count, 1.0)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }
}

/// Matrices of `t`, `t^2`, `d/dt` and `d^2/dt^2` in the mode basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OneBodyMatrices {
    pub t: DMatrix<f64>,
    pub t2: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub d2: DMatrix<f64>,
}

impl OneBodyMatrices {
    pub fn mode_count(&self) -> usize {
        self.t.nrows()
    }
}

pub fn build_one_body_matrices(spec: &ModeBasisSpec) -> OneBodyMatrices {
    let m = spec.mode_count;
    let s = spec.time_scale;
    let mut t = DMatrix::zeros(m, m);
    let mut t2 = DMatrix::zeros(m, m);
    let mut d = DMatrix::zeros(m, m);
    let mut d2 = DMatrix::zeros(m, m);
    for k in 0..m {
        let kf = k as f64;
        if k + 1 < m {
            let up = ((kf + 1.0) / 2.0).sqrt();
            t[(k, k + 1)] = up * s;
            t[(k + 1, k)] = up * s;
            d[(k, k + 1)] = up / s;
            d[(k + 1, k)] = -up / s;
        }
        t2[(k, k)] = (kf + 0.5) * s * s;
        d2[(k, k)] = -(kf + 0.5) / (s * s);
        if k + 2 < m {
            let skip = ((kf + 1.0) * (kf + 2.0)).sqrt() / 2.0;
            t2[(k, k + 2)] = skip * s * s;
            t2[(k + 2, k)] = skip * s * s;
            d2[(k, k + 2)] = skip / (s * s);
            d2[(k + 2, k)] = skip / (s * s);
        }
    }
    OneBodyMatrices { t, t2, d, d2 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OneBodyOp {
    Time,
    TimeSquared,
    Derivative,
    SecondDerivative,
}

impl OneBodyOp {
    pub const ALL: [OneBodyOp; 4] = [
        OneBodyOp::Time,
        OneBodyOp::TimeSquared,
        OneBodyOp::Derivative,
        OneBodyOp::SecondDerivative,
    ];

    pub fn label(self) -> &'static str {
        match self {
            OneBodyOp::Time => "t",
            OneBodyOp::TimeSquared => "t2",
            OneBodyOp::Derivative => "d",
            OneBodyOp::SecondDerivative => "d2",
        }
    }

    pub fn select(self, matrices: &OneBodyMatrices) -> &DMatrix<f64> {
        match self {
            OneBodyOp::Time => &matrices.t,
            OneBodyOp::TimeSquared => &matrices.t2,
            OneBodyOp::Derivative => &matrices.d,
            OneBodyOp::SecondDerivative => &matrices.d2,
        }
    }
}

/// Overlap `int psi_j(t) [op psi_k](t) dt` by Gauss-Hermite quadrature.
///
/// Mode functions are evaluated pointwise from the Hermite recurrence; the
/// derivative uses `h_k' = sqrt(2k) h_{k-1}` and the second derivative the
/// Hermite differential equation `psi_k'' = (x^2 - 2k - 1) psi_k`. Only the
/// integral is numerical.
pub fn quadrature_element(spec: &ModeBasisSpec, j: usize, op: OneBodyOp, k: usize) -> Result<f64> {
    let m = spec.mode_count;
    for index in [j, k] {
        if index >= m {
            return Err(Error::ModeIndex {
                index,
                mode_count: m,
            });
        }
    }
    let s = spec.time_scale;
    let kmax = j.max(k);
    let kf = k as f64;
    // substitute t = s x; psi_j(t/s) psi_k(t/s) / s dt = psi_j(x) psi_k(x) dx
    let integral = quadrature::rule_160().integrate(|x| {
        let h = hermite_polynomials(x, kmax);
        match op {
            OneBodyOp::Time => h[j] * x * h[k],
            OneBodyOp::TimeSquared => h[j] * x * x * h[k],
            OneBodyOp::Derivative => {
                let dh = if k == 0 {
                    0.0
                } else {
                    (2.0 * kf).sqrt() * h[k - 1]
                };
                h[j] * (dh - x * h[k])
            }
            OneBodyOp::SecondDerivative => h[j] * (x * x - 2.0 * kf - 1.0) * h[k],
        }
    });
    let scale = match op {
        OneBodyOp::Time => s,
        OneBodyOp::TimeSquared => s * s,
        OneBodyOp::Derivative => 1.0 / s,
        OneBodyOp::SecondDerivative => 1.0 / (s * s),
    };
    Ok(integral * scale)
}

/// Gram matrix of the first `m` modes evaluated by quadrature.
pub fn quadrature_gram(spec: &ModeBasisSpec) -> DMatrix<f64> {
    let m = spec.mode_count;
    let rule = quadrature::rule_160();
    let values: Vec<Vec<f64>> = rule
        .nodes()
        .iter()
        .map(|&x| hermite_polynomials(x, m - 1))
        .collect();
    DMatrix::from_fn(m, m, |j, k| {
        values
            .iter()
            .zip(rule.weights())
            .map(|(h, w)| w * h[j] * h[k])
            .sum()
    })
}

/// Largest `|analytic - quadrature|` over all elements and operators.
pub fn max_oracle_deviation(spec: &ModeBasisSpec, matrices: &OneBodyMatrices) -> Result<f64> {
    let m = spec.mode_count;
    let mut worst = 0.0f64;
    for op in OneBodyOp::ALL {
        let analytic = op.select(matrices);
        if analytic.nrows() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: analytic.nrows(),
            });
        }
        for j in 0..m {
            for k in 0..m {
                let q = quadrature_element(spec, j, op, k)?;
                worst = worst.max((analytic[(j, k)] - q).abs());
            }
        }
    }
    Ok(worst)
}
