//! Gaussian Wigner functions of coherent states, their marginals, their
//! evolution and their `ℏ → 0` forms.
//!
//! Every object here is a normalised Gaussian
//! `ρ(u) = √det(P/2π) · exp(−½ (u − c)ᵀ P (u − c))`, so `P` is the inverse
//! covariance.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::{evolution_hbar0, EvolutionMatrix};
use crate::error::{Error, Result};
use crate::funcspace::TestFunction;
use crate::linalg::{self, Mat4};
use crate::params::{DerivedParams, ParamSet};
use crate::phasemap::{PhaseMap, PhasePoint};
use crate::quadrature::{normal_half_samples, Estimate, GaussHermite, QuadratureRule, DEFAULT_BUDGET_CAP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGaussian {
    pub dim: usize,
    pub center: Vec<f64>,
    /// Row-major `dim × dim`.
    pub precision: Vec<f64>,
    pub norm_const: f64,
}

impl WignerGaussian {
    pub fn new(center: Vec<f64>, precision: Vec<f64>) -> Result<Self> {
        let dim = center.len();
        if !matches!(dim, 1 | 2 | 4) {
            return Err(Error::Dimension { expected: 4, got: dim });
        }
        if precision.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                got: precision.len(),
            });
        }
        let scale = precision.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
        for i in 0..dim {
            for j in 0..i {
                if libm::fabs(precision[i * dim + j] - precision[j * dim + i]) > 1e-12 * scale {
                    return Err(Error::Gaussian("precision is not symmetric"));
                }
            }
        }
        if linalg::cholesky(&precision, dim).is_none() {
            return Err(Error::Gaussian("precision is not positive definite"));
        }
        let det = linalg::det(&precision, dim);
        let norm_const = libm::sqrt(det / libm::pow(2.0 * PI, dim as f64));
        Ok(WignerGaussian {
            dim,
            center,
            precision,
            norm_const,
        })
    }

    /// Isotropic Gaussian with precision `p·I`.
    pub fn isotropic(center: Vec<f64>, p: f64) -> Result<Self> {
        let dim = center.len();
        let mut prec = vec![0.0; dim * dim];
        for i in 0..dim {
            prec[i * dim + i] = p;
        }
        Self::new(center, prec)
    }

    pub fn density(&self, u: &[f64]) -> f64 {
        let n = self.dim;
        let d: Vec<f64> = (0..n).map(|i| u[i] - self.center[i]).collect();
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                q += d[i] * self.precision[i * n + j] * d[j];
            }
        }
        self.norm_const * libm::exp(-0.5 * q)
    }

    pub fn covariance(&self) -> Vec<f64> {
        linalg::inverse(&self.precision, self.dim).expect("positive definite precision")
    }

    /// Marginal over the coordinates *not* listed in `keep`.
    pub fn marginal(&self, keep: &[usize]) -> Result<WignerGaussian> {
        let cov = self.covariance();
        let k = keep.len();
        let mut sub = vec![0.0; k * k];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                sub[a * k + b] = cov[i * self.dim + j];
            }
        }
        let prec = linalg::inverse(&sub, k).ok_or(Error::Gaussian("singular marginal covariance"))?;
        let sym: Vec<f64> = (0..k * k)
            .map(|ij| 0.5 * (prec[ij] + prec[(ij % k) * k + ij / k]))
            .collect();
        WignerGaussian::new(keep.iter().map(|&i| self.center[i]).collect(), sym)
    }

    /// `∫ρ` by Gauss–Hermite in the eigenbasis of `P`, with `ρ` evaluated
    /// through [`Self::density`].
    pub fn total_mass(&self, order: usize) -> f64 {
        let n = self.dim;
        let (vals, vecs) = linalg::symmetric_eigen(&self.precision, n);
        // u = c + V diag(√(2/λ)) t, t ~ weight e^{−‖t‖²}
        let scales: Vec<f64> = vals.iter().map(|l| libm::sqrt(2.0 / l)).collect();
        let jac: f64 = scales.iter().product::<f64>() * libm::pow(PI, n as f64 / 2.0);
        let gh = GaussHermite::new(order);
        let mut u = [0.0; 4];
        gh.expect(n, |t| {
            for i in 0..n {
                u[i] = self.center[i] + (0..n).map(|k| vecs[i * n + k] * scales[k] * t[k]).sum::<f64>();
            }
            let t2: f64 = t.iter().map(|x| x * x).sum();
            self.density(&u[..n]) * libm::exp(t2)
        }) * jac
    }
}

/// Single-degree-of-freedom coherent-state Wigner function,
/// `(1/πℏ) e^{−((q−q₀)² + (p−p₀)²)/ℏ}`.
pub fn wigner_1dof(hbar: f64, q0: f64, p0: f64, q: f64, p: f64) -> f64 {
    let (dq, dp) = (q - q0, p - p0);
    libm::exp(-(dq * dq + dp * dp) / hbar) / (PI * hbar)
}

pub fn wigner_1dof_gaussian(hbar: f64, q0: f64, p0: f64) -> Result<WignerGaussian> {
    if !(hbar > 0.0) {
        return Err(Error::Domain {
            name: "hbar",
            value: hbar,
            reason: "must be strictly positive",
        });
    }
    WignerGaussian::isotropic(vec![q0, p0], 2.0 / hbar)
}

/// `(4J/π²) e^{−2‖Ĵ(r − r₀)‖²}`.
pub fn wigner_4d(pm: &PhaseMap, r0: &PhasePoint) -> Result<WignerGaussian> {
    if !(pm.j_det > 0.0) {
        return Err(Error::Singular("det Ĵ vanishes"));
    }
    let p = pm.j.transpose().matmul(&pm.j).scale(4.0);
    let mut g = WignerGaussian::new(r0.to_array().to_vec(), p.to_flat())?;
    g.norm_const = 4.0 * pm.j_det / (PI * PI);
    Ok(g)
}

/// The commutative product of two oscillator Wigner functions,
/// `(1/(πℏ)²) e^{−(mω/ℏ)|Δx|² − (1/(ℏmω))|Δy|²}`.
pub fn wigner_4d_theta0(p: &ParamSet, r0: &PhasePoint, r: &PhasePoint) -> f64 {
    let mw = p.m_omega();
    let (a, b) = (r.to_array(), r0.to_array());
    let dx = (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]);
    let dy = (a[2] - b[2]) * (a[2] - b[2]) + (a[3] - b[3]) * (a[3] - b[3]);
    libm::exp(-mw / p.hbar * dx - dy / (p.hbar * mw)) / (PI * p.hbar * PI * p.hbar)
}

/// `a = λ₋√K₊ / (2μ(λ₊+λ₋))`, `b = λ₊√K₋ / (2μ(λ₊+λ₋))`.
pub fn ab_coeffs(d: &DerivedParams) -> (f64, f64) {
    let c = 1.0 / (2.0 * d.mu * d.lambda_sum());
    (
        c * d.lambda_minus * libm::sqrt(d.k_plus),
        c * d.lambda_plus * libm::sqrt(d.k_minus),
    )
}

/// Precision `4J/(a² + b²)` of the `y`-marginal of [`wigner_4d`].
pub fn marginal_precision(d: &DerivedParams, pm: &PhaseMap) -> f64 {
    let (a, b) = ab_coeffs(d);
    4.0 * pm.j_det / (a * a + b * b)
}

/// The `(x₁, x₂)`-integral of [`wigner_4d`] centred at `(y₁₀, y₂₀)`.
pub fn wigner_marginal_y(d: &DerivedParams, pm: &PhaseMap, y0: [f64; 2]) -> Result<WignerGaussian> {
    WignerGaussian::isotropic(y0.to_vec(), marginal_precision(d, pm))
}

/// `ℏ → 0` marginal in its textbook form,
/// `R^θ(y) = (1/(πm²ω²θ)) e^{−|y − y₀|²/(m²ω²θ)}`.
pub fn wigner_marginal_hbar0(p: &ParamSet, y0: [f64; 2]) -> Result<WignerGaussian> {
    let mw = p.m_omega();
    if !(p.theta > 0.0) {
        return Err(Error::Domain {
            name: "theta",
            value: p.theta,
            reason: "must be strictly positive",
        });
    }
    WignerGaussian::isotropic(y0.to_vec(), 2.0 / (mw * mw * p.theta))
}

/// Point reached from `r₀` after time `t`: `A_{−t} r₀`.
pub fn evolved_center(ev: &EvolutionMatrix, r0: &PhasePoint) -> PhasePoint {
    PhasePoint::from_array(ev.inverse().a_t.apply(&r0.to_array()))
}

/// [`wigner_4d`] recentred along the trajectory; the precision is unchanged.
pub fn wigner_evolved(pm: &PhaseMap, ev: &EvolutionMatrix, r0: &PhasePoint) -> Result<WignerGaussian> {
    wigner_4d(pm, &evolved_center(ev, r0))
}

pub fn wigner_evolved_marginal(
    d: &DerivedParams,
    pm: &PhaseMap,
    ev: &EvolutionMatrix,
    r0: &PhasePoint,
) -> Result<WignerGaussian> {
    let c = evolved_center(ev, r0);
    wigner_marginal_y(d, pm, [c.y1, c.y2])
}

/// `R^θ` centred at the `y`-part of `A^{0,θ}_{−t} r₀`: the first momentum
/// centre moves to `y₁₀ cos ωt + x₁₀ sin ωt`, the second stays at `y₂₀`.
pub fn wigner_evolved_marginal_hbar0(p: &ParamSet, r0: &PhasePoint, t: f64) -> Result<WignerGaussian> {
    let c = evolved_center(&evolution_hbar0(p.omega, t), r0);
    wigner_marginal_hbar0(p, [c.y1, c.y2])
}

/// `R_{y₂₀}(y₂) = (1/(√(πθ) mω)) e^{−(y₂ − y₂₀)²/(m²ω²θ)}`.
pub fn wigner_final_1d(p: &ParamSet, y20: f64, y2: f64) -> f64 {
    let mw = p.m_omega();
    let d = y2 - y20;
    libm::exp(-d * d / (mw * mw * p.theta)) / (libm::sqrt(PI * p.theta) * mw)
}

/// Lower-triangular factor `L` with `P = LLᵀ`, and `L⁻ᵀ` (row-major).
fn whitening(w: &WignerGaussian) -> Result<Vec<f64>> {
    let n = w.dim;
    let l = linalg::cholesky(&w.precision, n).ok_or(Error::Gaussian("precision is not positive definite"))?;
    let l_inv = linalg::inverse(&l, n).ok_or(Error::Gaussian("singular Cholesky factor"))?;
    Ok((0..n * n).map(|ij| l_inv[(ij % n) * n + ij / n]).collect())
}

/// `∫ φ ρ` for a map `φ` on ℝ^dim.
pub fn expectation(
    phi: impl Fn(&[f64]) -> f64,
    w: &WignerGaussian,
    rule: QuadratureRule,
) -> Result<Estimate> {
    let n = w.dim;
    let m = whitening(w)?;
    let sqrt2 = core::f64::consts::SQRT_2;
    let mut u = [0.0; 4];
    let mut map = |t: &[f64]| {
        for i in 0..n {
            u[i] = w.center[i] + sqrt2 * (0..n).map(|k| m[i * n + k] * t[k]).sum::<f64>();
        }
        phi(&u[..n])
    };
    let requested = rule.evaluations(n as u32);
    if requested > DEFAULT_BUDGET_CAP {
        return Err(Error::Budget {
            requested,
            cap: DEFAULT_BUDGET_CAP,
        });
    }
    match rule {
        QuadratureRule::GaussHermiteTensor { order_per_axis } => {
            if order_per_axis < 2 {
                return Err(Error::Rule("order_per_axis must be at least 2"));
            }
            Ok(Estimate {
                value: GaussHermite::new(order_per_axis).expect(n, &mut map),
                std_error: 0.0,
            })
        }
        QuadratureRule::MonteCarlo { samples, seed } => {
            let pts = normal_half_samples(samples, seed);
            let (mut mean, mut m2) = (0.0, 0.0);
            for (k, t) in pts.iter().enumerate() {
                let v = map(&t[..n]);
                let delta = v - mean;
                mean += delta / (k as f64 + 1.0);
                m2 += delta * (v - mean);
            }
            let s = samples as f64;
            Ok(Estimate {
                value: mean,
                std_error: libm::sqrt(m2 / (s - 1.0) / s),
            })
        }
    }
}

/// `∫ F ρ` for a test function on ℝ⁴.
pub fn expectation_4d(f: &TestFunction, w: &WignerGaussian, rule: QuadratureRule) -> Result<Estimate> {
    if w.dim != 4 {
        return Err(Error::Dimension { expected: 4, got: w.dim });
    }
    expectation(|u| f.eval(&[u[0], u[1], u[2], u[3]]), w, rule)
}

/// Exact `∫ F ρ` when `F` is a Gaussian bump or constant.
pub fn expectation_closed_form(f: &TestFunction, w: &WignerGaussian) -> Option<f64> {
    if w.dim != 4 {
        return None;
    }
    let cov = Mat4::from_flat(&w.covariance());
    let c = [w.center[0], w.center[1], w.center[2], w.center[3]];
    f.gaussian_expectation(&Mat4::identity(), &cov, &c)
}

/// Per-axis standard deviations. Directions whose precision eigenvalue is
/// zero or negligible report `∞`.
pub fn localization_widths(w: &WignerGaussian) -> Vec<f64> {
    let n = w.dim;
    let (vals, vecs) = linalg::symmetric_eigen(&w.precision, n);
    let top = vals.iter().fold(0.0f64, |m, v| m.max(*v));
    (0..n)
        .map(|i| {
            let mut var = 0.0;
            for k in 0..n {
                let v2 = vecs[i * n + k] * vecs[i * n + k];
                if vals[k] <= 1e-15 * top {
                    if v2 > 1e-24 {
                        return f64::INFINITY;
                    }
                    continue;
                }
                var += v2 / vals[k];
            }
            libm::sqrt(var)
        })
        .collect()
}

/// Distance between "evolve, then take the `y`-marginal" and "take the
/// `y`-marginal, then evolve it with the `y`-block of `A_{−t}`" in the
/// `ℏ → 0` regime. Nonzero whenever the evolution mixes `x` into `y`.
pub fn marginal_evolution_gap(p: &ParamSet, r0: &PhasePoint, t: f64) -> f64 {
    let ev = evolution_hbar0(p.omega, t);
    let a = evolved_center(&ev, r0);
    let inv = ev.inverse().a_t;
    let y = [
        inv.0[2][2] * r0.y1 + inv.0[2][3] * r0.y2,
        inv.0[3][2] * r0.y1 + inv.0[3][3] * r0.y2,
    ];
    libm::hypot(a.y1 - y[0], a.y2 - y[1])
}
