//! Thick-restart Lanczos with full reorthogonalization.
//!
//! The Krylov basis `V` and its image `W = H V` are stored explicitly. The
//! projected matrix `V^T H V` is kept in full (not just its tridiagonal part),
//! so after a restart that retains the lowest Ritz vectors the expansion
//! simply continues from the pending Lanczos direction.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EigenResult, EigenSolver, SolveOptions};
use crate::error::{Error, Result};
use crate::sparse::{dot, norm, CsrMatrix};

#[derive(Debug, Clone)]
pub struct LanczosSolver {
    /// Krylov basis size that triggers a restart.
    pub max_basis: usize,
    /// Extra Ritz vectors kept across a restart beyond the requested count.
    pub keep_extra: usize,
}

impl Default for LanczosSolver {
    fn default() -> Self {
        Self {
            max_basis: 64,
            keep_extra: 12,
        }
    }
}

struct Krylov {
    v: Vec<Vec<f64>>,
    w: Vec<Vec<f64>>,
    /// Row-major projected matrix, `len x len`.
    g: Vec<Vec<f64>>,
}

impl Krylov {
    fn len(&self) -> usize {
        self.v.len()
    }

    /// Orthogonalizes `x` against the basis (two passes); returns the norm
    /// left over.
    fn orthogonalize(&self, x: &mut [f64]) -> f64 {
        for _ in 0..2 {
            for b in &self.v {
                let c = dot(b, x);
                x.iter_mut().zip(b).for_each(|(xi, bi)| *xi -= c * bi);
            }
        }
        norm(x)
    }

    fn push(&mut self, v: Vec<f64>, w: Vec<f64>) {
        let k = self.len();
        let mut column: Vec<f64> = self.v.iter().map(|b| dot(b, &w)).collect();
        column.push(dot(&v, &w));
        for (i, row) in self.g.iter_mut().enumerate() {
            row.push(column[i]);
        }
        self.g.push(column);
        debug_assert_eq!(self.g.len(), k + 1);
        self.v.push(v);
        self.w.push(w);
    }

    fn ritz(&self) -> (Vec<f64>, DMatrix<f64>) {
        let k = self.len();
        let g = DMatrix::from_fn(k, k, |i, j| 0.5 * (self.g[i][j] + self.g[j][i]));
        let eig = SymmetricEigen::new(g);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }

    fn combine(basis: &[Vec<f64>], coeffs: impl Iterator<Item = f64>) -> Vec<f64> {
        let dim = basis[0].len();
        let mut out = vec![0.0; dim];
        for (b, c) in basis.iter().zip(coeffs) {
            if c != 0.0 {
                out.iter_mut().zip(b).for_each(|(o, bi)| *o += c * bi);
            }
        }
        out
    }

    fn restart(&mut self, values: &[f64], vectors: &DMatrix<f64>, keep: usize) {
        let v: Vec<Vec<f64>> = (0..keep)
            .map(|c| Self::combine(&self.v, vectors.column(c).iter().copied()))
            .collect();
        let w: Vec<Vec<f64>> = (0..keep)
            .map(|c| Self::combine(&self.w, vectors.column(c).iter().copied()))
            .collect();
        self.g = (0..keep)
            .map(|i| {
                (0..keep)
                    .map(|j| if i == j { values[i] } else { 0.0 })
                    .collect()
            })
            .collect();
        self.v = v;
        self.w = w;
    }

    fn refresh_image(&mut self, matrix: &CsrMatrix) {
        self.w = self.v.iter().map(|b| matrix.matvec(b)).collect();
        let k = self.len();
        self.g = (0..k)
            .map(|i| (0..k).map(|j| dot(&self.v[i], &self.w[j])).collect())
            .collect();
    }
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random::<f64>() - 0.5).collect()
}

impl EigenSolver for LanczosSolver {
    fn name(&self) -> &'static str {
        "lanczos"
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
        let max_basis = self.max_basis.max(count + 2).min(dim);
        let keep = (count + self.keep_extra)
            .min(max_basis.saturating_sub(2))
            .max(count);
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

        let mut pending = match options.warm_start {
            Some(guess) if guess.len() == dim && norm(guess) > 0.0 => {
                let scale = 1e-4 * norm(guess) / (dim as f64).sqrt();
                let noise = random_vector(&mut rng, dim);
                guess
                    .iter()
                    .zip(noise)
                    .map(|(g, r)| g + scale * r)
                    .collect()
            }
            Some(guess) if guess.len() != dim => {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: guess.len(),
                })
            }
            _ => random_vector(&mut rng, dim),
        };

        let floor = 1e-13 * matrix.norm_bound();
        let mut krylov = Krylov {
            v: Vec::new(),
            w: Vec::new(),
            g: Vec::new(),
        };
        let mut matvecs = 0usize;
        let mut best_residual = f64::INFINITY;

        // `pending` is kept orthogonal to the whole current basis, so after a
        // thick restart it is still the common residual direction of the
        // retained Ritz vectors.
        let mut scale = norm(&pending);
        let mut left = krylov.orthogonalize(&mut pending);
        loop {
            if krylov.len() < dim {
                if left <= 1e-10 * scale || left == 0.0 {
                    // invariant subspace; continue from a fresh random direction
                    pending = random_vector(&mut rng, dim);
                    left = krylov.orthogonalize(&mut pending);
                }
                pending.iter_mut().for_each(|x| *x /= left);
                let v = std::mem::take(&mut pending);
                let w = matrix.matvec(&v);
                matvecs += 1;
                pending = w.clone();
                krylov.push(v, w);
                scale = norm(&pending);
                left = krylov.orthogonalize(&mut pending);
            }

            let k = krylov.len();
            if k > count || k == dim {
                let (values, vectors) = krylov.ritz();
                let mut converged = true;
                for c in 0..count {
                    let y = vectors.column(c);
                    let hx = Krylov::combine(&krylov.w, y.iter().copied());
                    let x = Krylov::combine(&krylov.v, y.iter().copied());
                    let r = hx
                        .iter()
                        .zip(&x)
                        .map(|(h, xi)| (h - values[c] * xi).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    let allowed = (options.tolerance * values[c].abs().max(1.0)).max(floor);
                    if c == 0 {
                        best_residual = best_residual.min(r);
                    }
                    if r > allowed {
                        converged = false;
                    }
                }
                if converged || k == dim {
                    let pairs: Vec<EigenResult> = (0..count)
                        .map(|c| {
                            let x = Krylov::combine(&krylov.v, vectors.column(c).iter().copied());
                            EigenResult::from_vector(matrix, x, matvecs)
                        })
                        .collect();
                    matvecs += count;
                    let verified = pairs.iter().all(|p| {
                        p.residual_norm
                            <= (options.tolerance * p.eigenvalue.abs().max(1.0)).max(floor)
                    });
                    if verified || k == dim {
                        return Ok(pairs);
                    }
                    // stored image drifted; recompute it exactly and continue
                    krylov.refresh_image(matrix);
                    matvecs += krylov.len();
                }
                if krylov.len() >= max_basis {
                    krylov.restart(&values, &vectors, keep);
                }
            }
            if matvecs >= options.max_matvecs {
                return Err(Error::NoConvergence {
                    iterations: matvecs,
                    residual: best_residual,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolver::DenseSolver;

    fn laplacian(dim: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..dim {
            t.push((i as u32, i as u32, 2.0 + 0.01 * i as f64));
            if i + 1 < dim {
                t.push((i as u32, i as u32 + 1, -1.0));
                t.push((i as u32 + 1, i as u32, -1.0));
            }
        }
        CsrMatrix::from_triplets(dim, t)
    }

    #[test]
    fn agrees_with_dense_on_a_chain() {
        let m = laplacian(400);
        let opts = SolveOptions::default();
        let dense = DenseSolver.lowest(&m, 2, &opts).unwrap();
        let lanczos = LanczosSolver::default().lowest(&m, 2, &opts).unwrap();
        for (a, b) in dense.iter().zip(&lanczos) {
            assert!((a.eigenvalue - b.eigenvalue).abs() < 1e-9);
            assert!(b.residual_norm <= 1e-10 * b.eigenvalue.abs().max(1.0));
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let m = laplacian(300);
        let opts = SolveOptions {
            seed: 7,
            ..SolveOptions::default()
        };
        let a = LanczosSolver::default().lowest(&m, 1, &opts).unwrap();
        let b = LanczosSolver::default().lowest(&m, 1, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_warm_start_still_converges() {
        let m = laplacian(200);
        let opts = SolveOptions::default();
        let first = LanczosSolver::default().lowest(&m, 1, &opts).unwrap();
        let again = LanczosSolver::default()
            .lowest(
                &m,
                2,
                &SolveOptions {
                    warm_start: Some(&first[0].eigenvector),
                    ..SolveOptions::default()
                },
            )
            .unwrap();
        assert!((again[0].eigenvalue - first[0].eigenvalue).abs() < 1e-10);
        assert!(again[1].eigenvalue > again[0].eigenvalue);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let m = laplacian(500);
        let opts = SolveOptions {
            max_matvecs: 5,
            tolerance: 1e-14,
            ..SolveOptions::default()
        };
        let err = LanczosSolver::default().lowest(&m, 1, &opts).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }
}
