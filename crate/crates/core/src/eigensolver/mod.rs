//! Lowest eigenpairs of sparse symmetric operators.
//!
//! Solvers implement [`EigenSolver`] and are looked up by name through a
//! [`SolverRegistry`], so callers (the minimizer, the CLI) pick an algorithm
//! at runtime. Built-ins: `dense`, `lanczos` and `auto`.

mod dense;
mod lanczos;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::TwoPhotonOperator;
use crate::sparse::{norm, CsrMatrix};

pub use dense::DenseSolver;
pub use lanczos::LanczosSolver;

/// Default dimension up to which `auto` solves densely.
pub const DEFAULT_DENSE_LIMIT: usize = 250;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl EigenResult {
    pub(crate) fn from_vector(matrix: &CsrMatrix, mut v: Vec<f64>, iterations: usize) -> Self {
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        let hv = matrix.matvec(&v);
        let eigenvalue: f64 = v.iter().zip(&hv).map(|(a, b)| a * b).sum();
        let residual_norm = hv
            .iter()
            .zip(&v)
            .map(|(h, x)| (h - eigenvalue * x).powi(2))
            .sum::<f64>()
            .sqrt();
        Self {
            eigenvalue,
            eigenvector: v,
            residual_norm,
            iterations,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions<'a> {
    /// Residual target: `||H v - lambda v|| <= tolerance * max(1, |lambda|)`.
    pub tolerance: f64,
    pub seed: u64,
    /// Matrix-vector product budget for iterative solvers.
    pub max_matvecs: usize,
    /// Optional starting guess (iterative solvers only).
    pub warm_start: Option<&'a [f64]>,
}

impl Default for SolveOptions<'_> {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            seed: 0,
            max_matvecs: 20_000,
            warm_start: None,
        }
    }
}

pub trait EigenSolver: Send + Sync {
    fn name(&self) -> &'static str;

    /// The `count` lowest eigenpairs in ascending order.
    fn lowest(
        &self,
        matrix: &CsrMatrix,
        count: usize,
        options: &SolveOptions<'_>,
    ) -> Result<Vec<EigenResult>>;
}

/// Dense below a dimension threshold, Lanczos above.
#[derive(Debug, Clone)]
pub struct AutoSolver {
    pub dense_limit: usize,
    dense: DenseSolver,
    lanczos: LanczosSolver,
}

impl AutoSolver {
    pub fn new(dense_limit: usize) -> Self {
        Self {
            dense_limit,
            dense: DenseSolver,
            lanczos: LanczosSolver::default(),
        }
    }
}

impl Default for AutoSolver {
    fn default() -> Self {
        Self::new(DEFAULT_DENSE_LIMIT)
    }
}

impl EigenSolver for AutoSolver {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn lowest(
        &self,
        matrix: &CsrMatrix,
        count: usize,
        options: &SolveOptions<'_>,
    ) -> Result<Vec<EigenResult>> {
        if matrix.dim() <= self.dense_limit {
            self.dense.lowest(matrix, count, options)
        } else {
            self.lanczos.lowest(matrix, count, options)
        }
    }
}

#[derive(Clone)]
pub struct SolverRegistry {
    solvers: BTreeMap<&'static str, Arc<dyn EigenSolver>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        Self {
            solvers: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(DenseSolver));
        registry.register(Arc::new(LanczosSolver::default()));
        registry.register(Arc::new(AutoSolver::default()));
        registry
    }

    /// Registers a solver under its own name, replacing any previous entry.
    pub fn register(&mut self, solver: Arc<dyn EigenSolver>) {
        self.solvers.insert(solver.name(), solver);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn EigenSolver>> {
        self.solvers
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "eigensolver",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.keys().copied().collect()
    }
}

impl Default for SolverRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

/// Ground state with the `auto` strategy.
pub fn ground_state(op: &TwoPhotonOperator, tolerance: f64, seed: u64) -> Result<EigenResult> {
    let options = SolveOptions {
        tolerance,
        seed,
        ..SolveOptions::default()
    };
    let mut pairs = AutoSolver::default().lowest(op.matrix(), 1, &options)?;
    Ok(pairs.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lookup() {
        let registry = SolverRegistry::with_builtins();
        assert_eq!(registry.names(), vec!["auto", "dense", "lanczos"]);
        assert_eq!(registry.get("lanczos").unwrap().name(), "lanczos");
        let err = registry.get("jacobi").err().unwrap();
        assert!(matches!(err, Error::UnknownStrategy { .. }));
    }

    #[test]
    fn diagonal_ground_state() {
        let m = CsrMatrix::diagonal(&[3.0, 1.0, 2.0]);
        for name in ["dense", "lanczos", "auto"] {
            let solver = SolverRegistry::with_builtins().get(name).unwrap();
            let pairs = solver.lowest(&m, 2, &SolveOptions::default()).unwrap();
            assert!((pairs[0].eigenvalue - 1.0).abs() < 1e-12, "{name}");
            assert!(
                (pairs[0].eigenvector[1].abs() - 1.0).abs() < 1e-10,
                "{name}"
            );
            assert!((pairs[1].eigenvalue - 2.0).abs() < 1e-12, "{name}");
        }
    }

    #[test]
    fn identity_ground_state() {
        let m = CsrMatrix::diagonal(&vec![1.0; 50]);
        for name in ["dense", "lanczos"] {
            let solver = SolverRegistry::with_builtins().get(name).unwrap();
            let pairs = solver.lowest(&m, 1, &SolveOptions::default()).unwrap();
            assert!((pairs[0].eigenvalue - 1.0).abs() < 1e-12);
            assert!((norm(&pairs[0].eigenvector) - 1.0).abs() < 1e-12);
        }
    }
}
