//! Sparse two-photon observables on an ENR basis.
//!
//! Every observable here is a normal-ordered quartic form
//! `sum C[m,n,p,q] a+_m a+_n a_p a_q` whose coefficients come from the mode
//! matrices:
//!
//! * delay `tau^2`: `C = T2[m,q] d[n,p] + T2[n,p] d[m,q] - 2 T[m,q] T[n,p]`
//! * sum frequency `Omega^2`: `C = -(D2[m,q] d[n,p] + D2[n,p] d[m,q] + 2 D[m,q] D[n,p])`
//!
//! (`d` is the Kronecker delta). `C[m,n,p,q] = C[n,m,q,p]` multiplies the same
//! operator, so only one of each mirrored pair is applied, with doubled weight.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock_enr::EnrBasis;
use crate::hg_modes::OneBodyMatrices;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OperatorKind {
    Tau2,
    Omega2,
    PairCount,
    Uncertainty { xi: f64 },
}

#[derive(Debug, Clone)]
pub struct TwoPhotonOperator {
    basis: Arc<EnrBasis>,
    matrix: CsrMatrix,
    kind: OperatorKind,
}

impl TwoPhotonOperator {
    pub fn basis(&self) -> &Arc<EnrBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn expectation(&self, state: &[f64]) -> f64 {
        self.matrix.quadratic_form(state)
    }
}

/// A single normal-ordered term `coefficient * a+_j a+_k a_l a_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticTerm {
    pub creators: (usize, usize),
    pub annihilators: (usize, usize),
    pub coefficient: f64,
}

pub fn tau2_coefficient(ob: &OneBodyMatrices, m: usize, n: usize, p: usize, q: usize) -> f64 {
    let mut c = -2.0 * ob.t[(m, q)] * ob.t[(n, p)];
    if n == p {
        c += ob.t2[(m, q)];
    }
    if m == q {
        c += ob.t2[(n, p)];
    }
    c
}

pub fn omega2_coefficient(ob: &OneBodyMatrices, m: usize, n: usize, p: usize, q: usize) -> f64 {
    let mut c = 2.0 * ob.d[(m, q)] * ob.d[(n, p)];
    if n == p {
        c += ob.d2[(m, q)];
    }
    if m == q {
        c += ob.d2[(n, p)];
    }
    -c
}

/// Nonzero terms of a quartic form, folded over the `(m,q) <-> (n,p)` mirror.
pub fn quartic_terms<F>(mode_count: usize, coefficient: F) -> Vec<QuarticTerm>
where
    F: Fn(usize, usize, usize, usize) -> f64,
{
    let mut terms = Vec::new();
    for m in 0..mode_count {
        for q in 0..mode_count {
            for n in 0..mode_count {
                for p in 0..mode_count {
                    let weight = match (m, q).cmp(&(n, p)) {
                        std::cmp::Ordering::Less => 2.0,
                        std::cmp::Ordering::Equal => 1.0,
                        std::cmp::Ordering::Greater => continue,
                    };
                    let c = coefficient(m, n, p, q);
                    if c != 0.0 {
                        terms.push(QuarticTerm {
                            creators: (m, n),
                            annihilators: (p, q),
                            coefficient: weight * c,
                        });
                    }
                }
            }
        }
    }
    terms
}

struct AnnihilatorGroup {
    pair: (usize, usize),
    creators: Vec<((usize, usize), f64)>,
}

fn group_terms(terms: &[QuarticTerm]) -> Vec<AnnihilatorGroup> {
    let mut sorted: Vec<_> = terms.to_vec();
    sorted.sort_by_key(|t| (t.annihilators, t.creators));
    let mut groups: Vec<AnnihilatorGroup> = Vec::new();
    for t in sorted {
        match groups.last_mut() {
            Some(g) if g.pair == t.annihilators => g.creators.push((t.creators, t.coefficient)),
            _ => groups.push(AnnihilatorGroup {
                pair: t.annihilators,
                creators: vec![(t.creators, t.coefficient)],
            }),
        }
    }
    groups
}

/// Sparse matrix of `sum_terms c a+_j a+_k a_l a_q` on the basis.
pub fn assemble_quartic(basis: &EnrBasis, terms: &[QuarticTerm]) -> CsrMatrix {
    let groups = group_terms(terms);
    let m = basis.mode_count();
    let triplets: Vec<(u32, u32, f64)> = (0..basis.dim())
        .into_par_iter()
        .flat_map_iter(|source| {
            let occ = basis.state(source);
            let mut scratch = vec![0u8; m];
            let mut local = Vec::new();
            for group in &groups {
                let (l, q) = group.pair;
                let available = if l == q {
                    occ[l] >= 2
                } else {
                    occ[l] >= 1 && occ[q] >= 1
                };
                if !available {
                    continue;
                }
                for &(creators, c) in &group.creators {
                    scratch.copy_from_slice(occ);
                    if let Some((target, amp)) =
                        basis.apply_quartic_in_place(creators, group.pair, &mut scratch)
                    {
                        local.push((target as u32, source as u32, c * amp));
                    }
                }
            }
            local
        })
        .collect();
    CsrMatrix::from_triplets(basis.dim(), triplets)
}

fn check_modes(basis: &EnrBasis, ob: &OneBodyMatrices) -> Result<()> {
    if ob.mode_count() != basis.mode_count() {
        return Err(Error::DimensionMismatch {
            expected: basis.mode_count(),
            actual: ob.mode_count(),
        });
    }
    Ok(())
}

pub fn assemble_tau2(basis: &Arc<EnrBasis>, ob: &OneBodyMatrices) -> Result<TwoPhotonOperator> {
    check_modes(basis, ob)?;
    let terms = quartic_terms(basis.mode_count(), |m, n, p, q| {
        tau2_coefficient(ob, m, n, p, q)
    });
    Ok(TwoPhotonOperator {
        basis: Arc::clone(basis),
        matrix: assemble_quartic(basis, &terms),
        kind: OperatorKind::Tau2,
    })
}

pub fn assemble_omega2(basis: &Arc<EnrBasis>, ob: &OneBodyMatrices) -> Result<TwoPhotonOperator> {
    check_modes(basis, ob)?;
    let terms = quartic_terms(basis.mode_count(), |m, n, p, q| {
        omega2_coefficient(ob, m, n, p, q)
    });
    Ok(TwoPhotonOperator {
        basis: Arc::clone(basis),
        matrix: assemble_quartic(basis, &terms),
        kind: OperatorKind::Omega2,
    })
}

/// `n(n-1) = sum_jk a+_j a+_k a_k a_j`, assembled through the same quartic path.
pub fn assemble_pair_count(basis: &Arc<EnrBasis>) -> TwoPhotonOperator {
    let terms = quartic_terms(
        basis.mode_count(),
        |m, n, p, q| {
            if m == q && n == p {
                1.0
            } else {
                0.0
            }
        },
    );
    TwoPhotonOperator {
        basis: Arc::clone(basis),
        matrix: assemble_quartic(basis, &terms),
        kind: OperatorKind::PairCount,
    }
}

/// `xi tau^2 + (1 - xi) Omega^2`
pub fn assemble_uncertainty_hamiltonian(
    tau2: &TwoPhotonOperator,
    omega2: &TwoPhotonOperator,
    xi: f64,
) -> Result<TwoPhotonOperator> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::XiOutOfRange(xi));
    }
    if tau2.basis != omega2.basis {
        return Err(Error::BasisMismatch);
    }
    if tau2.kind != OperatorKind::Tau2 || omega2.kind != OperatorKind::Omega2 {
        return Err(Error::InvalidParameter(
            "uncertainty hamiltonian needs a tau2 and an omega2 operator".into(),
        ));
    }
    Ok(TwoPhotonOperator {
        basis: Arc::clone(&tau2.basis),
        matrix: tau2.matrix.linear_combination(xi, &omega2.matrix, 1.0 - xi),
        kind: OperatorKind::Uncertainty { xi },
    })
}

/// `sum_jk A[j,k] a+_j a_k` (not necessarily symmetric).
pub fn assemble_one_body(basis: &EnrBasis, matrix: &DMatrix<f64>) -> Result<CsrMatrix> {
    let m = basis.mode_count();
    if matrix.nrows() != m || matrix.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: matrix.nrows(),
        });
    }
    let mut triplets = Vec::new();
    for source in 0..basis.dim() {
        for j in 0..m {
            for k in 0..m {
                let a = matrix[(j, k)];
                if a == 0.0 {
                    continue;
                }
                if let Some((target, amp)) = basis.apply_quadratic_term(j, k, source)? {
                    triplets.push((target as u32, source as u32, a * amp));
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(basis.dim(), triplets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hg_modes::{build_one_body_matrices, ModeBasisSpec};

    fn setup(n: usize, m: usize) -> (Arc<EnrBasis>, OneBodyMatrices) {
        let basis = Arc::new(EnrBasis::new(n, m).unwrap());
        let ob = build_one_body_matrices(&ModeBasisSpec::unit(m).unwrap());
        (basis, ob)
    }

    fn unit_vector(dim: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        v
    }

    #[test]
    fn tau2_expectations_for_two_modes() {
        let (basis, ob) = setup(2, 2);
        let tau = assemble_tau2(&basis, &ob).unwrap();
        let mixed = unit_vector(3, basis.index_of(&[1, 1]).unwrap());
        let bunched = unit_vector(3, basis.index_of(&[2, 0]).unwrap());
        assert!((tau.expectation(&mixed) - 2.0).abs() < 1e-13);
        assert!((tau.expectation(&bunched) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn omega2_expectation_for_two_modes() {
        let (basis, ob) = setup(2, 2);
        let omega = assemble_omega2(&basis, &ob).unwrap();
        let mixed = unit_vector(3, basis.index_of(&[1, 1]).unwrap());
        // centroid in HG1, relative coordinate in HG0: 2 * 2 * (3/2)
        assert!((omega.expectation(&mixed) - 6.0).abs() < 1e-13);
        assert!(omega.matrix().symmetry_defect() < 1e-14);
    }

    #[test]
    fn pair_count_is_constant() {
        for (n, expected) in [(2, 2.0), (3, 6.0), (5, 20.0)] {
            let (basis, _) = setup(n, 3);
            let pc = assemble_pair_count(&basis);
            let dense = pc.matrix().to_dense();
            let dim = basis.dim();
            let diff = (dense - DMatrix::<f64>::identity(dim, dim) * expected)
                .abs()
                .max();
            assert!(diff < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn hamiltonian_endpoints_are_exact() {
        let (basis, ob) = setup(3, 4);
        let tau = assemble_tau2(&basis, &ob).unwrap();
        let omega = assemble_omega2(&basis, &ob).unwrap();
        let h0 = assemble_uncertainty_hamiltonian(&tau, &omega, 0.0).unwrap();
        let h1 = assemble_uncertainty_hamiltonian(&tau, &omega, 1.0).unwrap();
        assert_eq!(h0.matrix().to_dense(), omega.matrix().to_dense());
        assert_eq!(h1.matrix().to_dense(), tau.matrix().to_dense());
        assert!(matches!(
            assemble_uncertainty_hamiltonian(&tau, &omega, 1.5),
            Err(Error::XiOutOfRange(_))
        ));
        assert!(assemble_uncertainty_hamiltonian(&omega, &tau, 0.5).is_err());
    }

    #[test]
    fn basis_mismatch_is_rejected() {
        let (b1, ob) = setup(2, 3);
        let (b2, _) = setup(3, 3);
        let tau = assemble_tau2(&b1, &ob).unwrap();
        let omega = assemble_omega2(&b2, &ob).unwrap();
        assert_eq!(
            assemble_uncertainty_hamiltonian(&tau, &omega, 0.5).unwrap_err(),
            Error::BasisMismatch
        );
        let (_, ob4) = setup(2, 4);
        assert!(matches!(
            assemble_tau2(&b1, &ob4),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn observables_are_positive_semidefinite() {
        for n in 2..=3 {
            for m in 2..=6 {
                let (basis, ob) = setup(n, m);
                for op in [
                    assemble_tau2(&basis, &ob).unwrap(),
                    assemble_omega2(&basis, &ob).unwrap(),
                ] {
                    let dense = op.matrix().to_dense();
                    let scale = dense.abs().max().max(1.0);
                    let min = dense.symmetric_eigenvalues().min();
                    assert!(min >= -1e-9 * scale, "n={n} m={m} {:?}: {min}", op.kind());
                    assert!(op.matrix().symmetry_defect() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn ground_mode_state_is_classical() {
        // all photons in HG0: <tau^2> / n(n-1) = 2 Var(t) = 1
        for n in 2..=5 {
            let (basis, ob) = setup(n, 4);
            let tau = assemble_tau2(&basis, &ob).unwrap();
            let omega = assemble_omega2(&basis, &ob).unwrap();
            let mut occ = vec![0u8; 4];
            occ[0] = n as u8;
            let v = unit_vector(basis.dim(), basis.index_of(&occ).unwrap());
            let pairs = (n * (n - 1)) as f64;
            assert!((tau.expectation(&v) / pairs - 1.0).abs() < 1e-13);
            assert!((omega.expectation(&v) / pairs - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn one_body_number_operator() {
        let (basis, _) = setup(3, 3);
        let ident = DMatrix::<f64>::identity(3, 3);
        let number = assemble_one_body(&basis, &ident).unwrap();
        let dense = number.to_dense();
        let dim = basis.dim();
        assert!(
            (dense - DMatrix::<f64>::identity(dim, dim) * 3.0)
                .abs()
                .max()
                < 1e-13
        );
    }
}
