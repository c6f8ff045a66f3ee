//! Brute-force references built without the library's second-quantized
//! machinery: one-body matrices by trapezoid integration and two-photon
//! operators in the first-quantized tensor-product basis, projected onto
//! symmetric occupation states.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tfjoint::fock_enr::EnrBasis;
use tfjoint::number_mixtures::PhotonNumberDistribution;

/// Orthonormal Hermite functions `ψ_0..ψ_{count-1}` at `x` (unit scale).
pub fn hermite_functions(count: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; count.max(2)];
    out[0] = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
    out[1] = 2f64.sqrt() * x * out[0];
    for k in 2..count {
        out[k] = (2.0 / k as f64).sqrt() * x * out[k - 1]
            - ((k - 1) as f64 / k as f64).sqrt() * out[k - 2];
    }
    out.truncate(count);
    out
}

/// `t`, `t²`, `d/dt`, `d²/dt²` in the HG basis of width `scale`, by the
/// trapezoid rule on a wide grid.
pub fn trapezoid_one_body(modes: usize, scale: f64) -> [DMatrix<f64>; 4] {
    let h = 0.005;
    let steps = (25.0 / h) as i64;
    let mut t = DMatrix::zeros(modes, modes);
    let mut t2 = DMatrix::zeros(modes, modes);
    let mut d = DMatrix::zeros(modes, modes);
    let mut d2 = DMatrix::zeros(modes, modes);
    for i in -steps..=steps {
        let x = i as f64 * h;
        let psi = hermite_functions(modes + 1, x);
        // ψ_k' = √(k/2) ψ_{k-1} − √((k+1)/2) ψ_{k+1}
        let dpsi: Vec<f64> = (0..modes)
            .map(|k| {
                let down = if k > 0 {
                    (k as f64 / 2.0).sqrt() * psi[k - 1]
                } else {
                    0.0
                };
                down - ((k + 1) as f64 / 2.0).sqrt() * psi[k + 1]
            })
            .collect();
        for a in 0..modes {
            for b in 0..modes {
                let w = psi[a] * psi[b] * h;
                t[(a, b)] += x * w;
                t2[(a, b)] += x * x * w;
                d[(a, b)] += psi[a] * dpsi[b] * h;
                d2[(a, b)] -= dpsi[a] * dpsi[b] * h;
            }
        }
    }
    [
        t * scale,
        t2 * (scale * scale),
        d / scale,
        d2 / (scale * scale),
    ]
}

fn tensor_index(digits: &[usize], modes: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * modes + d)
}

fn digits_of(mut index: usize, n: usize, modes: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in (0..n).rev() {
        out[slot] = index % modes;
        index /= modes;
    }
    out
}

/// Matrix of `Σ_{i≠j} [A_i + A_j + c B_i B_j]` on the `modes^n` tensor space.
fn pair_operator(
    n: usize,
    modes: usize,
    a: &DMatrix<f64>,
    c: f64,
    b: &DMatrix<f64>,
) -> DMatrix<f64> {
    let size = modes.pow(n as u32);
    let mut out = DMatrix::zeros(size, size);
    for col in 0..size {
        let src = digits_of(col, n, modes);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for x in 0..modes {
                    let mut dst = src.clone();
                    dst[i] = x;
                    out[(tensor_index(&dst, modes), col)] += a[(x, src[i])];
                    let mut dst = src.clone();
                    dst[j] = x;
                    out[(tensor_index(&dst, modes), col)] += a[(x, src[j])];
                    for y in 0..modes {
                        let mut dst = src.clone();
                        dst[i] = x;
                        dst[j] = y;
                        out[(tensor_index(&dst, modes), col)] +=
                            c * b[(x, src[i])] * b[(y, src[j])];
                    }
                }
            }
        }
    }
    out
}

/// Columns: normalized symmetric states in the order of `basis`.
fn symmetrizer(basis: &EnrBasis) -> DMatrix<f64> {
    let (n, modes) = (basis.photon_number(), basis.mode_count());
    let size = modes.pow(n as u32);
    let mut s = DMatrix::zeros(size, basis.dim());
    for row in 0..size {
        let digits = digits_of(row, n, modes);
        let mut occ = vec![0u8; modes];
        digits.iter().for_each(|&d| occ[d] += 1);
        let col = basis.index_of(&occ).expect("tensor state has n photons");
        s[(row, col)] = 1.0;
    }
    for mut col in s.column_iter_mut() {
        let norm = col.norm();
        col /= norm;
    }
    s
}

/// Dense `τ²` and `Ω²` in the ENR basis ordering.
pub fn dense_operators(basis: &EnrBasis, scale: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, modes) = (basis.photon_number(), basis.mode_count());
    let [t, t2, d, d2] = trapezoid_one_body(modes, scale);
    let s = symmetrizer(basis);
    let tau = pair_operator(n, modes, &t2, -2.0, &t);
    let omega = -pair_operator(n, modes, &d2, 2.0, &d);
    (s.transpose() * tau * &s, s.transpose() * omega * &s)
}

pub fn max_entry_difference(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

pub fn random_distribution(rng: &mut ChaCha8Rng) -> PhotonNumberDistribution {
    loop {
        let len = rng.random_range(3..14);
        let weights: Vec<f64> = (0..len)
            .map(|_| {
                if rng.random_bool(0.3) {
                    0.0
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        if let Ok(d) = PhotonNumberDistribution::normalized(weights) {
            if d.mean() >= 2.0 && d.pair_mean() > 0.0 {
                return d;
            }
        }
    }
}

/// Subspace standard deviations with `Δτ ΔΩ ≥ √(1 − 2/n)`, sometimes tight.
pub fn admissible_values(rng: &mut ChaCha8Rng, max_n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut tau = vec![0.0; max_n + 1];
    let mut omega = vec![0.0; max_n + 1];
    for n in 2..=max_n {
        let floor = (1.0 - 2.0 / n as f64).sqrt();
        let product = if rng.random_bool(0.3) {
            floor
        } else {
            floor + rng.random::<f64>()
        };
        let t = rng.random_range(0.2..3.0);
        tau[n] = t;
        omega[n] = product / t;
    }
    (tau, omega)
}
