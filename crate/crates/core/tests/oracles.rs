mod common;

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tfjoint::eigensolver::{DenseSolver, EigenSolver, LanczosSolver, SolveOptions};
use tfjoint::fock_enr::EnrBasis;
use tfjoint::hg_modes::{build_one_body_matrices, max_oracle_deviation, ModeBasisSpec};
use tfjoint::operators::{assemble_omega2, assemble_tau2, assemble_uncertainty_hamiltonian};

#[test]
fn one_body_matrices_match_independent_integration() {
    for scale in [0.5, 1.0, 2.0] {
        let ob = build_one_body_matrices(&ModeBasisSpec::new(12, scale).unwrap());
        let [t, t2, d, d2] = common::trapezoid_one_body(12, scale);
        for (lib, reference) in [(&ob.t, &t), (&ob.t2, &t2), (&ob.d, &d), (&ob.d2, &d2)] {
            let diff = common::max_entry_difference(lib, reference);
            assert!(diff < 1e-11, "scale {scale}: {diff}");
        }
    }
}

#[test]
fn one_body_matrices_match_gauss_hermite_up_to_mode_20() {
    for scale in [0.5, 1.0, 2.0] {
        let spec = ModeBasisSpec::new(21, scale).unwrap();
        let dev = max_oracle_deviation(&spec, &build_one_body_matrices(&spec)).unwrap();
        assert!(dev <= 1e-10, "scale {scale}: {dev}");
    }
}

#[test]
fn sparse_assembly_matches_first_quantized_reference() {
    for n in 2..=3 {
        for m in 2..=5 {
            for scale in [0.5, 1.0, 2.0] {
                let basis = Arc::new(EnrBasis::new(n, m).unwrap());
                let ob = build_one_body_matrices(&ModeBasisSpec::new(m, scale).unwrap());
                let tau = assemble_tau2(&basis, &ob).unwrap().matrix().to_dense();
                let omega = assemble_omega2(&basis, &ob).unwrap().matrix().to_dense();
                let (tau_ref, omega_ref) = common::dense_operators(&basis, scale);
                let dt = common::max_entry_difference(&tau, &tau_ref);
                let dw = common::max_entry_difference(&omega, &omega_ref);
                assert!(
                    dt <= 1e-12 && dw <= 1e-12,
                    "n {n} m {m} s {scale}: {dt} {dw}"
                );
            }
        }
    }
}

#[test]
fn one_photon_in_each_of_the_lowest_modes() {
    let basis = Arc::new(EnrBasis::new(2, 2).unwrap());
    let (tau, omega) = common::dense_operators(&basis, 1.0);
    let i = basis.index_of(&[1, 1]).unwrap();
    assert!((tau[(i, i)] - 2.0).abs() < 1e-12);
    assert!((omega[(i, i)] - 6.0).abs() < 1e-12);
}

fn lowest_pair(n: usize, m: usize, xi: f64) -> (f64, f64, usize) {
    let basis = Arc::new(EnrBasis::new(n, m).unwrap());
    let ob = build_one_body_matrices(&ModeBasisSpec::unit(m).unwrap());
    let tau = assemble_tau2(&basis, &ob).unwrap();
    let omega = assemble_omega2(&basis, &ob).unwrap();
    let h = assemble_uncertainty_hamiltonian(&tau, &omega, xi).unwrap();
    let h = h.matrix();
    let options = SolveOptions::default();
    let dense = DenseSolver.lowest(h, 1, &options).unwrap()[0].eigenvalue;
    let lanczos = LanczosSolver::default().lowest(h, 1, &options).unwrap()[0].eigenvalue;
    (dense, lanczos, basis.dim())
}

#[test]
fn lanczos_matches_dense_ground_energies() {
    for (n, m, xi) in [
        (2, 20, 0.3),
        (3, 10, 0.5),
        (4, 8, 0.7),
        (5, 7, 0.45),
        (2, 40, 0.5),
    ] {
        let (dense, lanczos, dim) = lowest_pair(n, m, xi);
        assert!(
            (dense - lanczos).abs() <= 1e-8,
            "n {n} m {m} dim {dim}: {dense} vs {lanczos}"
        );
    }
}

#[test]
fn rayleigh_quotients_stay_above_the_ground_energy() {
    let basis = Arc::new(EnrBasis::new(3, 6).unwrap());
    let ob = build_one_body_matrices(&ModeBasisSpec::unit(6).unwrap());
    let tau = assemble_tau2(&basis, &ob).unwrap();
    let omega = assemble_omega2(&basis, &ob).unwrap();
    let h = assemble_uncertainty_hamiltonian(&tau, &omega, 0.4).unwrap();
    let h = h.matrix();
    let ground = DenseSolver.lowest(h, 1, &SolveOptions::default()).unwrap()[0].eigenvalue;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let v: Vec<f64> = (0..h.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let q = h.quadratic_form(&v) / v.iter().map(|x| x * x).sum::<f64>();
        assert!(q >= ground - 1e-12);
    }
}

#[test]
fn operators_are_positive_semidefinite() {
    let basis = Arc::new(EnrBasis::new(3, 5).unwrap());
    let ob = build_one_body_matrices(&ModeBasisSpec::unit(5).unwrap());
    for op in [
        assemble_tau2(&basis, &ob).unwrap(),
        assemble_omega2(&basis, &ob).unwrap(),
    ] {
        let dense: DMatrix<f64> = op.matrix().to_dense();
        let min = dense.symmetric_eigenvalues().min();
        assert!(min >= -1e-10, "{min}");
    }
}
