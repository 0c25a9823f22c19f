//! Discretisations of `π^{-d/2} ∫ e^{−‖w‖²} φ(w) dw`, i.e. expectations
//! under `w ~ N(0, ½·I)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest tensor order accepted per axis.
pub const MAX_ORDER: usize = 64;
/// Default cap on integrand evaluations per point.
pub const DEFAULT_BUDGET_CAP: u64 = 64 * 64 * 64 * 64;
/// Fewest Monte-Carlo samples accepted.
pub const MIN_SAMPLES: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QuadratureRule {
    GaussHermiteTensor { order_per_axis: usize },
    MonteCarlo { samples: u64, seed: u64 },
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule::GaussHermiteTensor { order_per_axis: 24 }
    }
}

impl QuadratureRule {
    pub const fn tensor(order_per_axis: usize) -> Self {
        QuadratureRule::GaussHermiteTensor { order_per_axis }
    }

    pub const fn monte_carlo(samples: u64, seed: u64) -> Self {
        QuadratureRule::MonteCarlo { samples, seed }
    }

    /// Integrand evaluations per point in `dim` dimensions.
    pub fn evaluations(&self, dim: u32) -> u64 {
        match *self {
            QuadratureRule::GaussHermiteTensor { order_per_axis } => {
                (order_per_axis as u64).saturating_pow(dim)
            }
            QuadratureRule::MonteCarlo { samples, .. } => samples,
        }
    }

    pub fn validate(&self, cap: u64) -> Result<()> {
        match *self {
            QuadratureRule::GaussHermiteTensor { order_per_axis } => {
                if order_per_axis < 2 {
                    return Err(Error::Rule("order_per_axis must be at least 2"));
                }
                if order_per_axis > MAX_ORDER {
                    return Err(Error::Budget {
                        requested: self.evaluations(4),
                        cap: (MAX_ORDER as u64).pow(4).min(cap),
                    });
                }
            }
            QuadratureRule::MonteCarlo { samples, .. } => {
                if samples < MIN_SAMPLES {
                    return Err(Error::Rule("monte carlo needs at least 1000 samples"));
                }
            }
        }
        let requested = self.evaluations(4);
        if requested > cap {
            return Err(Error::Budget { requested, cap });
        }
        Ok(())
    }

    /// Nodes for 4-dimensional expectations, after checking the budget.
    pub fn nodes(&self, cap: u64) -> Result<NodeSet> {
        self.validate(cap)?;
        Ok(match *self {
            QuadratureRule::GaussHermiteTensor { order_per_axis } => {
                NodeSet::Tensor(GaussHermite::new(order_per_axis))
            }
            QuadratureRule::MonteCarlo { samples, seed } => NodeSet::Sampled(normal_half_samples(samples, seed)),
        })
    }
}

/// Nodes and weights of the `n`-point Gauss–Hermite rule for weight
/// `e^{−t²}`, nodes in decreasing order. Newton iteration on the
/// orthonormal Hermite recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Hermite order must be positive");
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => libm::sqrt(2.0 * nf + 1.0) - 1.85575 * libm::pow(2.0 * nf + 1.0, -0.16667),
            1 => z - 1.14 * libm::pow(nf, 0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * libm::sqrt(2.0 / (jf + 1.0)) * p2 - libm::sqrt(jf / (jf + 1.0)) * p3;
            }
            pp = libm::sqrt(2.0 * nf) * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if libm::fabs(z - z1) <= 3e-15 * libm::fabs(z).max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// A one-dimensional rule for `E[φ(t)]`, `t ~ N(0, ½)`: Gauss–Hermite nodes
/// with weights divided by `√π`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        let (nodes, mut weights) = gauss_hermite(n);
        let s = 1.0 / libm::sqrt(core::f64::consts::PI);
        weights.iter_mut().for_each(|v| *v *= s);
        GaussHermite { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Tensor-product expectation over `dim ≤ 4` independent `N(0, ½)`
    /// variables.
    pub fn expect(&self, dim: usize, mut phi: impl FnMut(&[f64]) -> f64) -> f64 {
        assert!((1..=4).contains(&dim));
        let n = self.order();
        let mut idx = [0usize; 4];
        let mut w = [0.0; 4];
        let mut total = 0.0;
        'outer: loop {
            let mut weight = 1.0;
            for k in 0..dim {
                w[k] = self.nodes[idx[k]];
                weight *= self.weights[idx[k]];
            }
            total += weight * phi(&w[..dim]);
            for k in (0..dim).rev() {
                idx[k] += 1;
                if idx[k] < n {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
        total
    }
}

/// `samples` draws of `w ~ N(0, ½·I₄)` from a ChaCha8 stream.
pub fn normal_half_samples(samples: u64, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, core::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
    (0..samples)
        .map(|_| core::array::from_fn(|_| normal.sample(&mut rng)))
        .collect()
}

/// Prepared nodes for 4-dimensional expectations under `N(0, ½·I₄)`.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeSet {
    Tensor(GaussHermite),
    Sampled(Vec<[f64; 4]>),
}

/// An expectation and, for sampled rules, its standard error (0 for
/// deterministic rules).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        match self {
            NodeSet::Tensor(gh) => gh.order().pow(4),
            NodeSet::Sampled(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `E[φ(w)]` for `w ~ N(0, ½·I₄)`.
    pub fn expect(&self, mut phi: impl FnMut(&[f64; 4]) -> f64) -> Estimate {
        match self {
            NodeSet::Tensor(gh) => {
                let n = gh.order();
                let (x, wt) = (&gh.nodes, &gh.weights);
                let mut total = 0.0;
                for a in 0..n {
                    let mut s1 = 0.0;
                    for b in 0..n {
                        let mut s2 = 0.0;
                        for c in 0..n {
                            let mut s3 = 0.0;
                            for d in 0..n {
                                s3 += wt[d] * phi(&[x[a], x[b], x[c], x[d]]);
                            }
                            s2 += wt[c] * s3;
                        }
                        s1 += wt[b] * s2;
                    }
                    total += wt[a] * s1;
                }
                Estimate {
                    value: total,
                    std_error: 0.0,
                }
            }
            NodeSet::Sampled(points) => {
                // Welford running moments.
                let mut mean = 0.0;
                let mut m2 = 0.0;
                for (k, w) in points.iter().enumerate() {
                    let v = phi(w);
                    let delta = v - mean;
                    mean += delta / (k as f64 + 1.0);
                    m2 += delta * (v - mean);
                }
                let n = points.len() as f64;
                let var = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
                Estimate {
                    value: mean,
                    std_error: libm::sqrt(var / n),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn double_factorial_odd(k: u32) -> f64 {
        (1..=k).filter(|i| i % 2 == 1).map(|i| i as f64).product()
    }

    #[test]
    fn weights_sum_to_sqrt_pi() {
        for n in [2, 3, 5, 8, 16, 24, 32, 40, 64] {
            let (_, w) = gauss_hermite(n);
            let s: f64 = w.iter().sum();
            assert!((s / core::f64::consts::PI.sqrt() - 1.0).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn exact_for_polynomials() {
        // ∫ t^{2k} e^{−t²} dt = √π (2k−1)!!/2^k, exact for 2k ≤ 2n − 1.
        let n = 12;
        let (x, w) = gauss_hermite(n);
        for k in 0..(n as u32) {
            let got: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(2 * k as i32)).sum();
            let want = core::f64::consts::PI.sqrt() * double_factorial_odd(2 * k) / 2f64.powi(k as i32);
            assert!((got / want - 1.0).abs() < 1e-12, "k = {k}");
            let odd: f64 = x.iter().zip(&w).map(|(t, wi)| wi * t.powi(2 * k as i32 + 1)).sum();
            assert!(odd.abs() < 1e-10 * want.max(1.0));
        }
    }

    #[test]
    fn nodes_are_hermite_roots() {
        // H_3(t) = 8t³ − 12t, roots 0, ±√(3/2).
        let (x, _) = gauss_hermite(3);
        assert!((x[0] - 1.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn tensor_second_moment() {
        let gh = GaussHermite::new(8);
        let v = gh.expect(2, |w| w[0] * w[0] + w[1] * w[1]);
        assert!((v - 1.0).abs() < 1e-14);
        let ns = NodeSet::Tensor(gh);
        let e = ns.expect(|w| w.iter().map(|t| t * t).sum());
        assert!((e.value - 2.0).abs() < 1e-13);
        assert_eq!(ns.len(), 4096);
    }

    #[test]
    fn sampled_nodes_are_deterministic() {
        let a = normal_half_samples(2000, 42);
        let b = normal_half_samples(2000, 42);
        assert_eq!(a, b);
        assert_ne!(a, normal_half_samples(2000, 43));
        let e = NodeSet::Sampled(a).expect(|w| w[0] * w[0]);
        assert!((e.value - 0.5).abs() < 5.0 * e.std_error);
    }

    #[test]
    fn budget_guard() {
        assert!(QuadratureRule::tensor(64).validate(DEFAULT_BUDGET_CAP).is_ok());
        assert!(matches!(
            QuadratureRule::tensor(65).validate(DEFAULT_BUDGET_CAP),
            Err(Error::Budget { .. })
        ));
        assert!(matches!(
            QuadratureRule::tensor(32).validate(1000),
            Err(Error::Budget { requested: 1_048_576, cap: 1000 })
        ));
        assert!(QuadratureRule::tensor(1).validate(DEFAULT_BUDGET_CAP).is_err());
        assert!(QuadratureRule::monte_carlo(10, 1).validate(DEFAULT_BUDGET_CAP).is_err());
    }
}
