//! Free evolution: block rotations in the `(x₁,y₁)` and `(x₂,y₂)` planes.

use serde::{Deserialize, Serialize};

use crate::linalg::Mat4;
use crate::params::DerivedParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Exact,
    Theta0,
    Hbar0,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionMatrix {
    pub a_t: Mat4,
    pub t: f64,
    pub regime: Regime,
}

impl EvolutionMatrix {
    /// `A_{−t}`, which for block rotations is the transpose.
    pub fn inverse(&self) -> EvolutionMatrix {
        EvolutionMatrix {
            a_t: self.a_t.transpose(),
            t: -self.t,
            regime: self.regime,
        }
    }

    pub fn determinant(&self) -> f64 {
        self.a_t.determinant()
    }
}

/// `ω± = λ±/(mμ)`.
pub fn frequencies(d: &DerivedParams) -> (f64, f64) {
    let mmu = d.params.m * d.mu;
    (d.lambda_plus / mmu, d.lambda_minus / mmu)
}

/// Rotation by `ω₁t` in the first plane and `ω₂t` in the second.
pub fn rotation(omega_1: f64, omega_2: f64, t: f64) -> Mat4 {
    let (s1, c1) = libm::sincos(omega_1 * t);
    let (s2, c2) = libm::sincos(omega_2 * t);
    Mat4([
        [c1, 0.0, s1, 0.0],
        [0.0, c2, 0.0, s2],
        [-s1, 0.0, c1, 0.0],
        [0.0, -s2, 0.0, c2],
    ])
}

pub fn evolution(d: &DerivedParams, t: f64) -> EvolutionMatrix {
    let (wp, wm) = frequencies(d);
    EvolutionMatrix {
        a_t: rotation(wp, wm, t),
        t,
        regime: Regime::Exact,
    }
}

/// Both planes rotate at `ω`.
pub fn evolution_theta0(omega: f64, t: f64) -> EvolutionMatrix {
    EvolutionMatrix {
        a_t: rotation(omega, omega, t),
        t,
        regime: Regime::Theta0,
    }
}

/// First plane rotates at `ω`, second plane frozen.
pub fn evolution_hbar0(omega: f64, t: f64) -> EvolutionMatrix {
    EvolutionMatrix {
        a_t: rotation(omega, 0.0, t),
        t,
        regime: Regime::Hbar0,
    }
}

/// `Ω = [[0, I], [−I, 0]]` in `(x₁, x₂, y₁, y₂)` ordering.
pub fn symplectic_form() -> Mat4 {
    Mat4([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive, ParamSet};
    use proptest::prelude::*;

    #[test]
    fn frequencies_in_both_limits() {
        let d = derive(&ParamSet::new(1.0, 0.0)).unwrap();
        assert_eq!(frequencies(&d), (1.0, 1.0));
        let d = derive(&ParamSet::new(1e-3, 1.0)).unwrap();
        let (wp, wm) = frequencies(&d);
        assert!((wp - 1.0).abs() < 1e-5);
        assert!((wm - 1e-6).abs() < 1e-5);
        assert_eq!(wp * d.params.m * d.mu, d.lambda_plus);
    }

    #[test]
    fn identity_at_time_zero() {
        let d = derive(&ParamSet::new(0.4, 0.9)).unwrap();
        assert_eq!(evolution(&d, 0.0).a_t, Mat4::identity());
    }

    #[test]
    fn exact_regime_approaches_frozen_plane() {
        let d = derive(&ParamSet::new(1e-4, 1.0)).unwrap();
        let a = evolution(&d, 1.0).a_t;
        assert!(a.max_abs_diff(&evolution_hbar0(1.0, 1.0).a_t) < 1e-4);
        let d = derive(&ParamSet::new(1.0, 1e-6)).unwrap();
        assert!(evolution(&d, 1.0).a_t.max_abs_diff(&evolution_theta0(1.0, 1.0).a_t) < 1e-4);
    }

    #[test]
    fn full_period() {
        let a = evolution_theta0(2.0, core::f64::consts::PI).a_t;
        assert!(a.max_abs_diff(&Mat4::identity()) < 1e-10);
    }

    #[test]
    fn frozen_plane_is_untouched() {
        let a = evolution_hbar0(1.3, 0.77).a_t;
        for k in 0..4 {
            let e = if k == 1 { 1.0 } else { 0.0 };
            let f = if k == 3 { 1.0 } else { 0.0 };
            assert_eq!(a.0[1][k], e);
            assert_eq!(a.0[k][1], e);
            assert_eq!(a.0[3][k], f);
            assert_eq!(a.0[k][3], f);
        }
    }

    proptest! {
        #[test]
        fn group_structure(
            t in -10.0f64..10.0,
            s in -10.0f64..10.0,
            hbar in 1e-3f64..2.0,
            theta in 0.0f64..2.0,
        ) {
            let d = derive(&ParamSet::new(hbar, theta)).unwrap();
            let at = evolution(&d, t);
            let a_s = evolution(&d, s);
            let ats = evolution(&d, t + s);
            prop_assert!((at.determinant() - 1.0).abs() < 1e-12);
            prop_assert!(at.a_t.matmul(&evolution(&d, -t).a_t).max_abs_diff(&Mat4::identity()) < 1e-12);
            prop_assert!(at.a_t.matmul(&at.a_t.transpose()).max_abs_diff(&Mat4::identity()) < 1e-12);
            prop_assert!(at.a_t.matmul(&a_s.a_t).max_abs_diff(&ats.a_t) < 1e-10);
            let om = symplectic_form();
            prop_assert!(at.a_t.transpose().matmul(&om).matmul(&at.a_t).max_abs_diff(&om) < 1e-12);
            prop_assert_eq!(at.inverse().a_t, at.a_t.transpose());
        }
    }
}
