//! Built-in test functions on ℝ⁴, each with declared limits at infinity.

use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat4};
use crate::phasemap::PhasePoint;

/// The shape of a test function and its constructor parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionKind {
    /// `F ≡ c`.
    Constant { c: f64 },
    /// `exp(−Σ (rᵢ − cᵢ)²/σᵢ²)`.
    GaussianBump { center: [f64; 4], widths: [f64; 4] },
    /// `s(x₁)s(x₂)·G(y₁,y₂)` with `s(x) = tanh²(x/L)` and `G` a Gaussian in y.
    SigmoidTimesGaussian {
        x_scale: f64,
        y_center: [f64; 2],
        y_widths: [f64; 2],
    },
    /// `s(x₁)s(x₂)s(y₁)·exp(−(y₂ − c)²/w²)`: saturates in three directions
    /// and leaves a Gaussian profile in `y₂`.
    SaturatingProfile {
        scale: f64,
        y2_center: f64,
        y2_width: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub label: String,
    #[serde(flatten)]
    pub kind: FunctionKind,
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: v,
            reason: "must be finite and strictly positive",
        })
    }
}

#[inline]
fn sat(x: f64, scale: f64) -> f64 {
    let t = libm::tanh(x / scale);
    t * t
}

#[inline]
fn gauss(x: f64, c: f64, w: f64) -> f64 {
    let u = (x - c) / w;
    libm::exp(-u * u)
}

impl TestFunction {
    pub fn constant(c: f64) -> Self {
        TestFunction {
            label: String::from("constant"),
            kind: FunctionKind::Constant { c },
        }
    }

    pub fn gaussian_bump(center: PhasePoint, widths: [f64; 4]) -> Result<Self> {
        for w in widths {
            check_positive("widths", w)?;
        }
        Ok(TestFunction {
            label: String::from("gaussian_bump"),
            kind: FunctionKind::GaussianBump {
                center: center.to_array(),
                widths,
            },
        })
    }

    pub fn sigmoid_times_gaussian(x_scale: f64, y_center: [f64; 2], y_widths: [f64; 2]) -> Result<Self> {
        check_positive("x_scale", x_scale)?;
        check_positive("y_widths", y_widths[0])?;
        check_positive("y_widths", y_widths[1])?;
        Ok(TestFunction {
            label: String::from("sigmoid_times_gaussian"),
            kind: FunctionKind::SigmoidTimesGaussian {
                x_scale,
                y_center,
                y_widths,
            },
        })
    }

    pub fn saturating_profile(scale: f64, y2_center: f64, y2_width: f64) -> Result<Self> {
        check_positive("scale", scale)?;
        check_positive("y2_width", y2_width)?;
        Ok(TestFunction {
            label: String::from("saturating_profile"),
            kind: FunctionKind::SaturatingProfile {
                scale,
                y2_center,
                y2_width,
            },
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Re-runs the constructor checks, for values that came from a config.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            FunctionKind::Constant { c } if !c.is_finite() => Err(Error::Domain {
                name: "c",
                value: *c,
                reason: "must be finite",
            }),
            FunctionKind::Constant { .. } => Ok(()),
            FunctionKind::GaussianBump { widths, .. } => {
                widths.iter().try_for_each(|&w| check_positive("widths", w))
            }
            FunctionKind::SigmoidTimesGaussian { x_scale, y_widths, .. } => {
                check_positive("x_scale", *x_scale)?;
                y_widths.iter().try_for_each(|&w| check_positive("y_widths", w))
            }
            FunctionKind::SaturatingProfile { scale, y2_width, .. } => {
                check_positive("scale", *scale)?;
                check_positive("y2_width", *y2_width)
            }
        }
    }

    #[inline]
    pub fn eval(&self, r: &[f64; 4]) -> f64 {
        match &self.kind {
            FunctionKind::Constant { c } => *c,
            FunctionKind::GaussianBump { center, widths } => {
                let mut q = 0.0;
                for i in 0..4 {
                    let u = (r[i] - center[i]) / widths[i];
                    q += u * u;
                }
                libm::exp(-q)
            }
            FunctionKind::SigmoidTimesGaussian {
                x_scale,
                y_center,
                y_widths,
            } => {
                sat(r[0], *x_scale)
                    * sat(r[1], *x_scale)
                    * gauss(r[2], y_center[0], y_widths[0])
                    * gauss(r[3], y_center[1], y_widths[1])
            }
            FunctionKind::SaturatingProfile {
                scale,
                y2_center,
                y2_width,
            } => sat(r[0], *scale) * sat(r[1], *scale) * sat(r[2], *scale) * gauss(r[3], *y2_center, *y2_width),
        }
    }

    pub fn eval_point(&self, r: &PhasePoint) -> f64 {
        self.eval(&r.to_array())
    }

    /// `lim F` as `|x₁|, |x₂| → ∞`, as a function of `(y₁, y₂)`.
    pub fn asymptote_y(&self, y1: f64, y2: f64) -> Option<f64> {
        Some(match &self.kind {
            FunctionKind::Constant { c } => *c,
            FunctionKind::GaussianBump { .. } => 0.0,
            FunctionKind::SigmoidTimesGaussian { y_center, y_widths, .. } => {
                gauss(y1, y_center[0], y_widths[0]) * gauss(y2, y_center[1], y_widths[1])
            }
            FunctionKind::SaturatingProfile {
                scale,
                y2_center,
                y2_width,
            } => sat(y1, *scale) * gauss(y2, *y2_center, *y2_width),
        })
    }

    /// `lim F` as `|x₁|, |x₂|, |y₁| → ∞`, as a function of `y₂`.
    pub fn asymptote_y2(&self, y2: f64) -> Option<f64> {
        Some(match &self.kind {
            FunctionKind::Constant { c } => *c,
            FunctionKind::GaussianBump { .. } | FunctionKind::SigmoidTimesGaussian { .. } => 0.0,
            FunctionKind::SaturatingProfile {
                y2_center, y2_width, ..
            } => gauss(y2, *y2_center, *y2_width),
        })
    }

    pub fn require_asymptote_y(&self) -> Result<()> {
        self.asymptote_y(0.0, 0.0).map(|_| ()).ok_or_else(|| Error::MissingAsymptote {
            label: self.label.clone(),
            which: "F_inf(y1, y2)",
        })
    }

    pub fn require_asymptote_y2(&self) -> Result<()> {
        self.asymptote_y2(0.0).map(|_| ()).ok_or_else(|| Error::MissingAsymptote {
            label: self.label.clone(),
            which: "F_inf(y2)",
        })
    }

    /// Infimum and supremum of `F` over ℝ⁴.
    pub fn bounds(&self) -> (f64, f64) {
        match &self.kind {
            FunctionKind::Constant { c } => (*c, *c),
            _ => (0.0, 1.0),
        }
    }

    /// `|F(x,x,y₁,y₂) − F_∞(y₁,y₂)|`, the residual of the declared asymptote.
    pub fn asymptote_residual(&self, x: f64, y1: f64, y2: f64) -> Option<f64> {
        let a = self.asymptote_y(y1, y2)?;
        Some(libm::fabs(self.eval(&[x, x, y1, y2]) - a))
    }

    /// `|F(x,x,x,y₂) − F_∞(y₂)|`.
    pub fn asymptote_y2_residual(&self, x: f64, y2: f64) -> Option<f64> {
        let a = self.asymptote_y2(y2)?;
        Some(libm::fabs(self.eval(&[x, x, x, y2]) - a))
    }

    /// Exact `E[F(A r + ξ)]` for `ξ ~ N(0, Σ)`, when `F` is Gaussian or
    /// constant. `None` for the other shapes.
    pub fn gaussian_expectation(&self, a: &Mat4, sigma: &Mat4, r: &[f64; 4]) -> Option<f64> {
        match &self.kind {
            FunctionKind::Constant { c } => Some(*c),
            FunctionKind::GaussianBump { center, widths } => {
                let ar = a.apply(r);
                let v = [ar[0] - center[0], ar[1] - center[1], ar[2] - center[2], ar[3] - center[3]];
                let d: [f64; 4] = core::array::from_fn(|i| 1.0 / (widths[i] * widths[i]));
                // det(I + 2DΣ) and (D⁻¹ + 2Σ)⁻¹
                let mut m = Mat4::identity();
                let mut s = Mat4::diag(core::array::from_fn(|i| 1.0 / d[i]));
                for i in 0..4 {
                    for j in 0..4 {
                        m.0[i][j] += 2.0 * d[i] * sigma.0[i][j];
                        s.0[i][j] += 2.0 * sigma.0[i][j];
                    }
                }
                let det = m.determinant();
                let s_inv = linalg::inverse(&s.to_flat(), 4)?;
                let s_inv = Mat4::from_flat(&s_inv);
                let sv = s_inv.apply(&v);
                let q: f64 = (0..4).map(|i| v[i] * sv[i]).sum();
                Some(libm::exp(-q) / libm::sqrt(det))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stg() -> TestFunction {
        TestFunction::sigmoid_times_gaussian(1.0, [0.5, -0.5], [1.0, 1.5]).unwrap()
    }

    #[test]
    fn bump_peak_and_decay() {
        let f = TestFunction::gaussian_bump(PhasePoint::ORIGIN, [1.0; 4]).unwrap();
        assert_eq!(f.eval(&[0.0; 4]), 1.0);
        assert!(f.eval(&[30.0, 0.0, 0.0, 0.0]) < 1e-300);
        assert!(TestFunction::gaussian_bump(PhasePoint::ORIGIN, [1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn sigmoid_saturates() {
        let f = stg();
        for &(y1, y2) in &[(0.0, 0.0), (0.5, -0.5), (-1.0, 2.0)] {
            let g = f.asymptote_y(y1, y2).unwrap();
            assert!((f.eval(&[1e3, 1e3, y1, y2]) - g).abs() < 1e-6);
            assert!((f.eval(&[-1e3, 1e3, y1, y2]) - g).abs() < 1e-6);
        }
    }

    #[test]
    fn residuals_decrease() {
        for f in [stg(), TestFunction::saturating_profile(1.0, 0.3, 1.0).unwrap()] {
            let r: [f64; 3] = core::array::from_fn(|k| {
                f.asymptote_residual(10f64.powi(k as i32 + 1) * 0.2, 0.4, 0.1).unwrap()
            });
            assert!(r[0] > r[1] && r[1] >= r[2], "{r:?}");
            let r2: [f64; 2] = core::array::from_fn(|k| {
                f.asymptote_y2_residual(10f64.powi(k as i32) * 0.5, 0.1).unwrap()
            });
            assert!(r2[0] >= r2[1]);
        }
    }

    #[test]
    fn constant_everywhere() {
        let f = TestFunction::constant(1.0);
        assert_eq!(f.eval(&[3.0, -2.0, 1e9, 0.0]), 1.0);
        assert_eq!(f.asymptote_y(1.0, 2.0), Some(1.0));
        assert_eq!(f.asymptote_y2(-7.0), Some(1.0));
        let z = TestFunction::constant(0.0);
        assert_eq!(z.eval(&[1.0; 4]), 0.0);
    }

    #[test]
    fn closed_form_without_shift_is_eval() {
        let f = TestFunction::gaussian_bump(PhasePoint::new(0.2, -0.1, 0.4, 1.0), [1.0, 0.7, 1.3, 2.0]).unwrap();
        let r = [0.5, 0.5, -0.2, 0.1];
        let v = f.gaussian_expectation(&Mat4::identity(), &Mat4::zeros(), &r).unwrap();
        assert!((v - f.eval(&r)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_one_axis_integral() {
        // Variance s² on axis 0 only: E[exp(−(x+ξ)²)] = exp(−x²/(1+2s²))/√(1+2s²).
        let f = TestFunction::gaussian_bump(PhasePoint::ORIGIN, [1.0; 4]).unwrap();
        let mut sigma = Mat4::zeros();
        sigma.0[0][0] = 0.8;
        let x = 0.9;
        let got = f.gaussian_expectation(&Mat4::identity(), &sigma, &[x, 0.0, 0.0, 0.0]).unwrap();
        let want = (-x * x / 2.6f64).exp() / 2.6f64.sqrt();
        assert!((got - want).abs() < 1e-15);
        assert!(stg().gaussian_expectation(&Mat4::identity(), &sigma, &[0.0; 4]).is_none());
    }

    proptest! {
        #[test]
        fn builtins_are_bounded(r in proptest::array::uniform4(-50.0f64..50.0)) {
            let fs = [
                TestFunction::constant(0.3),
                TestFunction::gaussian_bump(PhasePoint::ORIGIN, [1.0; 4]).unwrap(),
                stg(),
                TestFunction::saturating_profile(1.0, 0.0, 1.0).unwrap(),
            ];
            for f in &fs {
                let v = f.eval(&r);
                let (lo, hi) = f.bounds();
                prop_assert!(v.is_finite() && v >= lo && v <= hi);
            }
        }
    }
}
