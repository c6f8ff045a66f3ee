//! Gauss-Hermite quadrature and normalized Hermite polynomials.
//!
//! The rule integrates `f(x) exp(-x^2)` over the real line; an `n`-node rule is
//! exact for polynomials up to degree `2n - 1`. Nodes are found by Newton
//! iteration on the orthonormal three-term recurrence, which keeps the tiny
//! outer weights accurate to full relative precision.

use std::sync::OnceLock;

/// `pi^(-1/4)`
const PI_M4: f64 = 0.751_125_544_464_942_5;

#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let nf = n as f64;
        let half = n.div_ceil(2);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let mut z = 0.0f64;
        for i in 0..half {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut derivative = 0.0;
            for _ in 0..200 {
                let (p_n, p_prev) = orthonormal_pair(z, n);
                derivative = (2.0 * nf).sqrt() * p_prev;
                let step = p_n / derivative;
                z -= step;
                if step.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            // one more evaluation at the converged root for the weight
            let (_, p_prev) = orthonormal_pair(z, n);
            derivative = if p_prev != 0.0 {
                (2.0 * nf).sqrt() * p_prev
            } else {
                derivative
            };
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (derivative * derivative);
            w[n - 1 - i] = w[i];
        }
        if n % 2 == 1 {
            x[n / 2] = 0.0;
        }
        x.reverse();
        w.reverse();
        Self {
            nodes: x,
            weights: w,
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sum_i w_i f(x_i)`, approximating `int f(x) exp(-x^2) dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Shared 160-node rule used by the one-body matrix-element oracle.
pub fn rule_160() -> &'static GaussHermite {
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| GaussHermite::new(160))
}

/// `(h_n(x), h_{n-1}(x))` for the orthonormal recurrence with `h_0 = pi^(-1/4)`.
fn orthonormal_pair(x: f64, n: usize) -> (f64, f64) {
    let mut p1 = PI_M4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let jf = j as f64;
        let p3 = p2;
        p2 = p1;
        p1 = x * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

/// Normalized Hermite polynomials `h_0..=h_kmax` at `x`, such that
/// `psi_k(x) = h_k(x) exp(-x^2 / 2)` is the k-th Hermite-Gauss function.
pub fn hermite_polynomials(x: f64, kmax: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(kmax + 1);
    h.push(PI_M4);
    if kmax >= 1 {
        h.push(2.0f64.sqrt() * x * PI_M4);
    }
    for k in 1..kmax {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// Hermite-Gauss function `psi_k(x)`.
pub fn hermite_function(k: usize, x: f64) -> f64 {
    hermite_polynomials(x, k)[k] * (-0.5 * x * x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn low_moments_are_exact() {
        for order in [1, 2, 5, 64, 128, 160] {
            let rule = GaussHermite::new(order);
            let m0 = rule.integrate(|_| 1.0);
            assert!((m0 - PI.sqrt()).abs() < 1e-13, "order {order}: {m0}");
            if order >= 2 {
                let m2 = rule.integrate(|x| x * x);
                assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-13);
            }
            if order >= 3 {
                let m4 = rule.integrate(|x| x.powi(4));
                assert!((m4 - 0.75 * PI.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let rule = GaussHermite::new(33);
        let x = rule.nodes();
        for i in 0..x.len() {
            assert!((x[i] + x[x.len() - 1 - i]).abs() < 1e-13);
            if i > 0 {
                assert!(x[i] > x[i - 1]);
            }
        }
        assert!(x[16].abs() < 1e-15);
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let rule = rule_160();
        for j in 0..12 {
            for k in 0..12 {
                let gram = rule.integrate(|x| {
                    let h = hermite_polynomials(x, 12);
                    h[j] * h[k]
                });
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((gram - expected).abs() < 1e-13, "({j},{k}) {gram}");
            }
        }
    }

    #[test]
    fn ground_function_matches_closed_form() {
        let x = 0.7;
        let expected = PI.powf(-0.25) * (-x * x / 2.0f64).exp();
        assert!((hermite_function(0, x) - expected).abs() < 1e-15);
    }
}
