//! Minimum joint uncertainty product in a fixed `(n, m)` truncation.
//!
//! For each ξ the ground state of `H(ξ) = ξ τ² + (1 − ξ) Ω²` is computed and
//! the normalized product `R = Δτ² ΔΩ²` is evaluated on it. A coarse ξ grid
//! is followed by Brent refinement around the best grid point.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eigensolver::{AutoSolver, EigenResult, EigenSolver, SolveOptions};
use crate::error::{Error, Result};
use crate::fock_enr::EnrBasis;
use crate::hg_modes::{build_one_body_matrices, ModeBasisSpec, OneBodyMatrices};
use crate::operators::{
    assemble_omega2, assemble_one_body, assemble_tau2, assemble_uncertainty_hamiltonian,
    TwoPhotonOperator,
};
use crate::optimize::brent_minimize;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateResult {
    pub n: usize,
    pub m: usize,
    pub xi: f64,
    pub ground_energy: f64,
    pub delta_tau2: f64,
    pub delta_omega2: f64,
    pub product: f64,
    pub mean_t: f64,
    pub mean_omega: f64,
    pub residual_norm: f64,
}

#[derive(Clone)]
pub struct MinimizerConfig {
    pub time_scale: f64,
    pub grid_points: usize,
    pub xi_min: f64,
    pub xi_max: f64,
    pub solver: Arc<dyn EigenSolver>,
    pub tolerance: f64,
    pub seed: u64,
    /// Relative gap below which the two lowest eigenvectors are both tried.
    pub degeneracy_gap: f64,
    pub refine_tolerance: f64,
    pub max_refine_evaluations: usize,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        Self {
            time_scale: 1.0,
            grid_points: 33,
            xi_min: 0.02,
            xi_max: 0.98,
            solver: Arc::new(AutoSolver::default()),
            tolerance: 1e-10,
            seed: 0,
            degeneracy_gap: 1e-10,
            refine_tolerance: 1e-8,
            max_refine_evaluations: 60,
        }
    }
}

impl std::fmt::Debug for MinimizerConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MinimizerConfig")
            .field("time_scale", &self.time_scale)
            .field("grid_points", &self.grid_points)
            .field("xi_min", &self.xi_min)
            .field("xi_max", &self.xi_max)
            .field("solver", &self.solver.name())
            .field("tolerance", &self.tolerance)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

impl MinimizerConfig {
    pub fn xi_grid(&self) -> Vec<f64> {
        let k = self.grid_points.max(2);
        (0..k)
            .map(|i| self.xi_min + (self.xi_max - self.xi_min) * i as f64 / (k - 1) as f64)
            .collect()
    }
}

/// Operators for one `(n, m, s)` problem, assembled once and reused for
/// every ξ.
pub struct UncertaintyProblem {
    basis: Arc<EnrBasis>,
    spec: ModeBasisSpec,
    onebody: OneBodyMatrices,
    tau2: TwoPhotonOperator,
    omega2: TwoPhotonOperator,
    time: CsrMatrix,
    derivative: CsrMatrix,
}

/// Ground state at one ξ, with the vector kept for warm starts.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub result: GroundStateResult,
    pub eigenvector: Vec<f64>,
}

impl UncertaintyProblem {
    pub fn new(n: usize, m: usize, time_scale: f64) -> Result<Self> {
        let spec = ModeBasisSpec::new(m, time_scale)?;
        let basis = Arc::new(EnrBasis::new(n, m)?);
        Self::from_parts(basis, spec)
    }

    pub fn from_parts(basis: Arc<EnrBasis>, spec: ModeBasisSpec) -> Result<Self> {
        let onebody = build_one_body_matrices(&spec);
        let tau2 = assemble_tau2(&basis, &onebody)?;
        let omega2 = assemble_omega2(&basis, &onebody)?;
        let time = assemble_one_body(&basis, &onebody.t)?;
        let derivative = assemble_one_body(&basis, &onebody.d)?;
        Ok(Self {
            basis,
            spec,
            onebody,
            tau2,
            omega2,
            time,
            derivative,
        })
    }

    pub fn basis(&self) -> &Arc<EnrBasis> {
        &self.basis
    }

    pub fn spec(&self) -> &ModeBasisSpec {
        &self.spec
    }

    pub fn onebody(&self) -> &OneBodyMatrices {
        &self.onebody
    }

    pub fn tau2(&self) -> &TwoPhotonOperator {
        &self.tau2
    }

    pub fn omega2(&self) -> &TwoPhotonOperator {
        &self.omega2
    }

    fn pairs(&self) -> f64 {
        let n = self.basis.photon_number() as f64;
        n * (n - 1.0)
    }

    /// Normalized observables of an arbitrary state (need not be an
    /// eigenvector; `ground_energy` is then the `H(ξ)` expectation).
    pub fn evaluate_state(&self, xi: f64, state: &[f64], residual_norm: f64) -> GroundStateResult {
        let pairs = self.pairs();
        let norm2: f64 = state.iter().map(|x| x * x).sum();
        let tau = self.tau2.expectation(state) / norm2;
        let omega = self.omega2.expectation(state) / norm2;
        let n = self.basis.photon_number() as f64;
        let delta_tau2 = tau / pairs;
        let delta_omega2 = omega / pairs;
        GroundStateResult {
            n: self.basis.photon_number(),
            m: self.basis.mode_count(),
            xi,
            ground_energy: xi * tau + (1.0 - xi) * omega,
            delta_tau2,
            delta_omega2,
            product: delta_tau2 * delta_omega2,
            mean_t: self.time.quadratic_form(state) / norm2 / n,
            // v^T D v vanishes for real v; kept as a computed diagnostic
            mean_omega: self.derivative.quadratic_form(state) / norm2 / n,
            residual_norm,
        }
    }

    /// Solves `H(ξ)` and evaluates the product on its ground state. When
    /// the two lowest levels are degenerate the smaller product is kept.
    pub fn solve_at(
        &self,
        xi: f64,
        config: &MinimizerConfig,
        warm_start: Option<&[f64]>,
    ) -> Result<Evaluation> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::XiOutOfRange(xi));
        }
        let h = assemble_uncertainty_hamiltonian(&self.tau2, &self.omega2, xi)?;
        let options = SolveOptions {
            tolerance: config.tolerance,
            seed: config.seed,
            warm_start,
            ..SolveOptions::default()
        };
        let count = if self.basis.dim() >= 2 { 2 } else { 1 };
        let pairs = config.solver.lowest(h.matrix(), count, &options)?;
        Ok(self.pick(xi, pairs, config.degeneracy_gap))
    }

    fn pick(&self, xi: f64, pairs: Vec<EigenResult>, gap: f64) -> Evaluation {
        let mut candidates = pairs.into_iter();
        let first = candidates.next().expect("solver returned no eigenpairs");
        let mut best = Evaluation {
            result: self.evaluate_with_energy(xi, &first),
            eigenvector: first.eigenvector.clone(),
        };
        for other in candidates {
            let scale = first.eigenvalue.abs().max(1.0);
            if (other.eigenvalue - first.eigenvalue).abs() < gap * scale {
                let result = self.evaluate_with_energy(xi, &other);
                if result.product < best.result.product {
                    best = Evaluation {
                        result,
                        eigenvector: other.eigenvector,
                    };
                }
            }
        }
        best
    }

    fn evaluate_with_energy(&self, xi: f64, pair: &EigenResult) -> GroundStateResult {
        let mut result = self.evaluate_state(xi, &pair.eigenvector, pair.residual_norm);
        result.ground_energy = pair.eigenvalue;
        result
    }
}

/// The ground-eigenvalue criterion, reported next to the product minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueCriterion {
    /// Grid ξ with the lowest normalized ground energy.
    pub lowest_energy_xi: f64,
    pub lowest_energy: f64,
    pub product_at_lowest_energy: f64,
    /// `min_ξ E0(ξ)² / (4 ξ (1−ξ))` over all evaluated ξ, with normalized
    /// `E0`. Each term bounds the product of every state from below, so this
    /// is the tightest bound the evaluated ξ give.
    pub dual_bound: f64,
    pub dual_bound_xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizationReport {
    pub best: GroundStateResult,
    pub scan: Vec<GroundStateResult>,
    pub refined: Vec<GroundStateResult>,
    pub eigenvalue_criterion: EigenvalueCriterion,
    pub eigensolves: usize,
}

impl MinimizationReport {
    /// `ξ Δτ² − (1−ξ) ΔΩ²` relative to their mean, at the optimum.
    pub fn balance_defect(&self) -> f64 {
        let b = &self.best;
        let lhs = b.xi * b.delta_tau2;
        let rhs = (1.0 - b.xi) * b.delta_omega2;
        (lhs - rhs).abs() / (0.5 * (lhs + rhs))
    }
}

fn criterion(results: &[&GroundStateResult]) -> EigenvalueCriterion {
    let pairs = |r: &GroundStateResult| (r.n * (r.n - 1)) as f64;
    let lowest = results
        .iter()
        .min_by(|a, b| (a.ground_energy / pairs(a)).total_cmp(&(b.ground_energy / pairs(b))))
        .expect("empty scan");
    let dual = |r: &GroundStateResult| {
        let e = r.ground_energy / pairs(r);
        e * e / (4.0 * r.xi * (1.0 - r.xi))
    };
    let tightest = results
        .iter()
        .min_by(|a, b| dual(a).total_cmp(&dual(b)))
        .expect("empty scan");
    EigenvalueCriterion {
        lowest_energy_xi: lowest.xi,
        lowest_energy: lowest.ground_energy / pairs(lowest),
        product_at_lowest_energy: lowest.product,
        dual_bound: dual(tightest),
        dual_bound_xi: tightest.xi,
    }
}

/// Product on the ground state of `H(ξ)` for a single ξ.
pub fn product_at_xi(
    n: usize,
    m: usize,
    xi: f64,
    config: &MinimizerConfig,
) -> Result<GroundStateResult> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::XiOutOfRange(xi));
    }
    let problem = UncertaintyProblem::new(n, m, config.time_scale)?;
    Ok(problem.solve_at(xi, config, None)?.result)
}

pub fn minimize_over_xi(
    n: usize,
    m: usize,
    config: &MinimizerConfig,
) -> Result<MinimizationReport> {
    let problem = UncertaintyProblem::new(n, m, config.time_scale)?;
    minimize_problem(&problem, config)
}

/// Grid scan with warm starts along ξ, then Brent refinement between the
/// neighbours of the best grid point.
pub fn minimize_problem(
    problem: &UncertaintyProblem,
    config: &MinimizerConfig,
) -> Result<MinimizationReport> {
    let grid = config.xi_grid();
    if let Some(&bad) = grid.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
        return Err(Error::XiOutOfRange(bad));
    }
    let mut scan: Vec<GroundStateResult> = Vec::with_capacity(grid.len());
    let mut warm: Option<Vec<f64>> = None;
    let mut best_vector = Vec::new();
    let mut best_index = 0;
    for (i, &xi) in grid.iter().enumerate() {
        let eval = problem.solve_at(xi, config, warm.as_deref())?;
        if scan.is_empty() || eval.result.product < scan[best_index].product {
            best_index = i;
            best_vector.clone_from(&eval.eigenvector);
        }
        scan.push(eval.result);
        warm = Some(eval.eigenvector);
    }
    let mut eigensolves = grid.len();

    let lo = grid[best_index.saturating_sub(1)];
    let hi = grid[(best_index + 1).min(grid.len() - 1)];
    let mut refined: Vec<GroundStateResult> = Vec::new();
    let mut best = scan[best_index].clone();
    if hi > lo {
        let mut warm = best_vector;
        let mut failure = None;
        let outcome = brent_minimize(
            |xi| {
                let eval = problem.solve_at(xi, config, Some(&warm)).inspect_err(|e| {
                    failure = Some(e.clone());
                })?;
                warm = eval.eigenvector;
                let product = eval.result.product;
                refined.push(eval.result);
                Ok(product)
            },
            lo,
            hi,
            grid[best_index],
            config.refine_tolerance,
            config.max_refine_evaluations,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        outcome?;
        // the first evaluation repeats the grid point
        eigensolves += refined.len();
        if let Some(r) = refined
            .iter()
            .min_by(|a, b| a.product.total_cmp(&b.product))
        {
            if r.product < best.product {
                best = r.clone();
            }
        }
    }
    // On a flat stretch of R(ξ) any ξ is optimal; prefer the one where the
    // two terms balance, which a smooth interior minimum satisfies anyway.
    let balanced = best.delta_omega2 / (best.delta_tau2 + best.delta_omega2);
    if (balanced - best.xi).abs() > 1e-9 && balanced > 0.0 && balanced < 1.0 {
        let eval = problem.solve_at(balanced, config, None)?;
        eigensolves += 1;
        if eval.result.product <= best.product * (1.0 + 1e-12) {
            best = eval.result.clone();
        }
        refined.push(eval.result);
    }
    let all: Vec<&GroundStateResult> = scan.iter().chain(refined.iter()).collect();
    let eigenvalue_criterion = criterion(&all);
    Ok(MinimizationReport {
        best,
        scan,
        refined,
        eigenvalue_criterion,
        eigensolves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::DenseSolver;

    fn dense_config() -> MinimizerConfig {
        MinimizerConfig {
            solver: Arc::new(DenseSolver),
            ..MinimizerConfig::default()
        }
    }

    #[test]
    fn all_photons_in_hg0_is_separable() {
        for n in 2..=4 {
            let problem = UncertaintyProblem::new(n, 4, 1.0).unwrap();
            let mut state = vec![0.0; problem.basis().dim()];
            let mut occupation = vec![0u8; 4];
            occupation[0] = n as u8;
            state[problem.basis().index_of(&occupation).unwrap()] = 1.0;
            let r = problem.evaluate_state(0.5, &state, 0.0);
            assert!((r.product - 1.0).abs() < 1e-13, "n={n}: {}", r.product);
            assert!((r.delta_tau2 - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn minimum_respects_subspace_bound() {
        for (n, m) in [(2, 4), (3, 4), (4, 3)] {
            let report = minimize_over_xi(n, m, &dense_config()).unwrap();
            let bound = 1.0 - 2.0 / n as f64;
            let b = &report.best;
            assert!(b.product >= bound - 1e-6);
            assert!(b.product < 1.0);
            assert!(b.delta_tau2 > 0.0 && b.delta_omega2 > 0.0);
            assert!(report.eigenvalue_criterion.dual_bound <= b.product + 1e-9);
            assert!(b.mean_t.abs() < 1e-6 && b.mean_omega.abs() < 1e-6);
        }
    }

    #[test]
    fn refinement_beats_grid() {
        let report = minimize_over_xi(3, 5, &dense_config()).unwrap();
        let grid_best = report
            .scan
            .iter()
            .map(|r| r.product)
            .fold(f64::INFINITY, f64::min);
        assert!(report.best.product <= grid_best);
        assert!(report.balance_defect() < 0.01);
    }

    #[test]
    fn rejects_endpoint_xi() {
        let config = dense_config();
        assert!(matches!(
            product_at_xi(2, 2, 0.0, &config),
            Err(Error::XiOutOfRange(_))
        ));
        assert!(product_at_xi(2, 2, 0.5, &config).is_ok());
    }
}
