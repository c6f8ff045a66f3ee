use nalgebra::SymmetricEigen;

use super::{EigenResult, EigenSolver, SolveOptions};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Full symmetric eigendecomposition of the densified matrix.
#[derive(Debug, Clone, Copy, Default)]
pub struct DenseSolver;

impl EigenSolver for DenseSolver {
    fn name(&self) -> &'static str {
        "dense"
    }

    fn lowest(
        &self,
        matrix: &CsrMatrix,
        count: usize,
        options: &SolveOptions<'_>,
    ) -> Result<Vec<EigenResult>> {
        let dim = matrix.dim();
        if count == 0 || count > dim {
            return Err(Error::InvalidParameter(format!(
                "requested {count} eigenpairs of a {dim}-dimensional operator"
            )));
        }
        let eig = SymmetricEigen::new(matrix.to_dense());
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut out = Vec::with_capacity(count);
        for &i in order.iter().take(count) {
            let v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            let pair = EigenResult::from_vector(matrix, v, 1);
            let allowed = options.tolerance * pair.eigenvalue.abs().max(1.0);
            if pair.residual_norm > allowed.max(1e-12 * matrix.norm_bound()) {
                return Err(Error::NoConvergence {
                    iterations: 1,
                    residual: pair.residual_norm,
                });
            }
            out.push(pair);
        }
        Ok(out)
    }
}
