//! The linear map `Ĵ` from phase points to coherent labels, the shift map
//! `h` of the smoothing integral, and the coherent-state overlap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm_sq, Mat4};
use crate::params::{DerivedParams, ParamSet};

/// A point `(x1, x2, y1, y2)` of ℝ⁴.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        PhasePoint { x1, x2, y1, y2 }
    }

    #[inline]
    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.y1, self.y2]
    }

    #[inline]
    pub fn from_array(a: [f64; 4]) -> Self {
        PhasePoint::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

impl From<[f64; 4]> for PhasePoint {
    fn from(a: [f64; 4]) -> Self {
        PhasePoint::from_array(a)
    }
}

/// `Ĵ`, its determinant and inverse, and the matrix of `w ↦ h(w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMap {
    pub j: Mat4,
    pub j_det: f64,
    pub h: Mat4,
    pub j_inv: Mat4,
}

impl PhaseMap {
    /// `h(w)`.
    #[inline]
    pub fn shift(&self, w: &[f64; 4]) -> [f64; 4] {
        self.h.apply(w)
    }

    /// Largest entrywise deviation of `(Ĵh)ᵀ(Ĵh)` from the identity.
    pub fn isometry_defect(&self) -> f64 {
        orthogonality_defect(&self.j.matmul(&self.h))
    }
}

pub fn orthogonality_defect(a: &Mat4) -> f64 {
    a.transpose().matmul(a).max_abs_diff(&Mat4::identity())
}

fn check_k(d: &DerivedParams) -> Result<()> {
    if !(d.k_plus > 0.0) || !(d.k_minus > 0.0) {
        return Err(Error::Singular("K± must be strictly positive"));
    }
    Ok(())
}

/// `Ĵ` entrywise.
pub fn j_matrix(d: &DerivedParams) -> Mat4 {
    let hbar = d.params.hbar;
    let c = 1.0 / (2.0 * d.mu * d.lambda_sum());
    let (sp, sm) = (libm::sqrt(d.k_plus), libm::sqrt(d.k_minus));
    let (lp, lm) = (d.lambda_plus, d.lambda_minus);
    Mat4([
        [lm * sp, 0.0, 0.0, -hbar * sp],
        [-lp * sm, 0.0, 0.0, -hbar * sm],
        [0.0, lm * sp, hbar * sp, 0.0],
        [0.0, lp * sm, -hbar * sm, 0.0],
    ])
    .scale(c)
}

/// Closed-form `det Ĵ = (ℏ√(K₊K₋) / (4μ²(λ₊+λ₋)))²`.
pub fn j_determinant(d: &DerivedParams) -> f64 {
    let r = d.params.hbar * libm::sqrt(d.k_plus) * libm::sqrt(d.k_minus)
        / (4.0 * d.mu * d.mu * d.lambda_sum());
    r * r
}

/// Closed-form `Ĵ⁻¹`, which stays well conditioned where `Ĵ` does not.
pub fn j_inverse(d: &DerivedParams) -> Mat4 {
    let hbar = d.params.hbar;
    let two_mu = 2.0 * d.mu;
    let (sp, sm) = (libm::sqrt(d.k_plus), libm::sqrt(d.k_minus));
    let (ap, am) = (two_mu / sp, two_mu / sm);
    let (bp, bm) = (ap * d.lambda_plus / hbar, am * d.lambda_minus / hbar);
    Mat4([
        [ap, -am, 0.0, 0.0],
        [0.0, 0.0, ap, am],
        [0.0, 0.0, bp, -bm],
        [-bp, -bm, 0.0, 0.0],
    ])
}

/// Prefactor of `f`.
fn f_prefactor(d: &DerivedParams) -> f64 {
    let ParamSet { hbar, theta, .. } = d.params;
    let mw = d.params.m_omega();
    d.mu * libm::sqrt(libm::sqrt(4.0 * hbar * hbar + mw * mw * theta * theta))
        / (2.0 * libm::sqrt(mw) * hbar)
}

/// Prefactor of `g`, fixed so that `Ĵ∘h` is orthogonal for every `θ`.
fn g_prefactor(d: &DerivedParams) -> f64 {
    let ParamSet { hbar, theta, .. } = d.params;
    let mw = d.params.m_omega();
    let a = 4.0 * hbar * hbar + mw * mw * theta * theta;
    let b = 4.0 * hbar * hbar + 2.0 * mw * mw * theta * theta;
    d.mu * libm::sqrt(mw) * libm::sqrt(libm::sqrt(a)) / libm::sqrt(b)
}

/// Prefactor of `g` as the textbook display writes it. Agrees with
/// [`g_prefactor`] only at `θ = 0`.
fn g_prefactor_printed(d: &DerivedParams) -> f64 {
    let ParamSet { hbar, theta, .. } = d.params;
    let mw = d.params.m_omega();
    d.mu * libm::sqrt(mw) / libm::sqrt(libm::sqrt(4.0 * hbar * hbar + mw * mw * theta * theta))
}

pub fn f_fun(d: &DerivedParams, a: f64, b: f64) -> f64 {
    f_prefactor(d) * (a / libm::sqrt(d.gamma_plus) + b / libm::sqrt(d.gamma_minus))
}

pub fn g_fun(d: &DerivedParams, a: f64, b: f64) -> f64 {
    g_prefactor(d) * (a / libm::sqrt(d.gamma_plus) - b / libm::sqrt(d.gamma_minus))
}

pub fn g_fun_printed(d: &DerivedParams, a: f64, b: f64) -> f64 {
    g_prefactor_printed(d) * (a / libm::sqrt(d.gamma_plus) - b / libm::sqrt(d.gamma_minus))
}

fn h_from_prefactors(d: &DerivedParams, p: f64, q: f64) -> Mat4 {
    let (sp, sm) = (libm::sqrt(d.gamma_plus), libm::sqrt(d.gamma_minus));
    Mat4([
        [p / sp, p / sm, 0.0, 0.0],
        [0.0, 0.0, p / sp, p / sm],
        [0.0, 0.0, q / sp, -q / sm],
        [-q / sp, q / sm, 0.0, 0.0],
    ])
}

/// Matrix of `h(w) = (f(w₁,w₂), f(w₃,w₄), g(w₃,w₄), −g(w₁,w₂))`.
pub fn h_matrix(d: &DerivedParams) -> Mat4 {
    h_from_prefactors(d, f_prefactor(d), g_prefactor(d))
}

/// The same map built with the printed `g` prefactor.
pub fn h_matrix_printed(d: &DerivedParams) -> Mat4 {
    h_from_prefactors(d, f_prefactor(d), g_prefactor_printed(d))
}

pub fn build(d: &DerivedParams) -> Result<PhaseMap> {
    check_k(d)?;
    let j = j_matrix(d);
    let j_det = j_determinant(d);
    if !(j_det > 0.0) || !j_det.is_finite() {
        return Err(Error::Singular("det Ĵ is not a positive finite number"));
    }
    Ok(PhaseMap {
        j,
        j_det,
        h: h_matrix(d),
        j_inv: j_inverse(d),
    })
}

/// Closed-form limits of `Ĵ`: `θ → 0` at the given `ℏ`, and `ℏ → 0` at the
/// given `θ`.
pub fn limit_maps(p: &ParamSet) -> (Mat4, Mat4) {
    let mw = p.m_omega();
    let s = libm::sqrt(mw);
    let c0 = 1.0 / (2.0 * libm::sqrt(p.hbar));
    let j_theta0 = Mat4([
        [s, 0.0, 0.0, -1.0 / s],
        [-s, 0.0, 0.0, -1.0 / s],
        [0.0, s, 1.0 / s, 0.0],
        [0.0, s, -1.0 / s, 0.0],
    ])
    .scale(c0);
    let c1 = 1.0 / (mw * libm::sqrt(2.0 * p.theta));
    let mut j_hbar0 = Mat4::zeros();
    j_hbar0.0[0][3] = -c1;
    j_hbar0.0[2][2] = c1;
    (j_theta0, j_hbar0)
}

/// `h` at `θ = 0`, from `f_{ℏ,0}(x,y) = √(ℏ/mω)(x+y)` and
/// `g_{ℏ,0}(x,y) = √(mωℏ)(x−y)`.
pub fn h_theta0(p: &ParamSet) -> Mat4 {
    let mw = p.m_omega();
    let a = libm::sqrt(p.hbar / mw);
    let b = libm::sqrt(mw * p.hbar);
    Mat4([
        [a, a, 0.0, 0.0],
        [0.0, 0.0, a, a],
        [0.0, 0.0, b, -b],
        [-b, b, 0.0, 0.0],
    ])
}

/// `g_{0,θ}(x,y) = mω√(θ/2)(x/√γ₊ − y/√γ₋)` with `γ± = (1 ± 1/√2)/2`.
pub fn g_hbar0(p: &ParamSet, a: f64, b: f64) -> f64 {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let (gp, gm) = (0.5 * (1.0 + s), 0.5 * (1.0 - s));
    p.m_omega() * libm::sqrt(0.5 * p.theta) * (a / libm::sqrt(gp) - b / libm::sqrt(gm))
}

/// `f` as `ℏ → 0`: `(mω/2)(θ^{3/2}/ℏ)(x/√γ₊ + y/√γ₋)`.
pub fn f_hbar0(p: &ParamSet, a: f64, b: f64) -> f64 {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let (gp, gm) = (0.5 * (1.0 + s), 0.5 * (1.0 - s));
    0.5 * p.m_omega() * p.theta * libm::sqrt(p.theta) / p.hbar
        * (a / libm::sqrt(gp) + b / libm::sqrt(gm))
}

/// `|⟨z_r|z_{r'}⟩|² = exp(−‖Ĵ(r − r')‖²)`.
pub fn overlap_kernel(pm: &PhaseMap, r: &PhasePoint, r2: &PhasePoint) -> f64 {
    let (a, b) = (r.to_array(), r2.to_array());
    let u = [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]];
    libm::exp(-norm_sq(&pm.j.apply(&u)))
}
