//! The composed quantise/de-quantise map `F ↦ F_{ℏ,θ}`, its time-evolved
//! form, and the reduced closed forms that survive `ℏ → 0`.
//!
//! `F_{ℏ,θ}(r) = π^{-2} ∫ e^{−‖w‖²} F(r + h(w)) dw`, which is the expectation
//! of `F(r + Hw)` for `w ~ N(0, ½·I₄)`. The same value is reachable through
//! the overlap kernel, `(J/π²) ∫ F(r') e^{−‖Ĵ(r − r')‖²} dr'`; the two agree
//! because `ĴH` is orthogonal.

use alloc::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::TestFunction;
use crate::linalg::{norm_sq, Mat4};
use crate::params::{DerivedParams, ParamSet};
use crate::phasemap::PhaseMap;
use crate::quadrature::{Estimate, GaussHermite, NodeSet, QuadratureRule, DEFAULT_BUDGET_CAP};

/// Tolerance on `|det A_t − 1|` for the evolved map.
pub const UNIMODULAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// Shift by `h(w)`.
    Shift,
    /// Importance-sampled overlap-kernel integral over `r'`.
    Kernel,
}

/// `F_{ℏ,θ}` (or its evolved variant) ready for evaluation.
#[derive(Debug, Clone)]
pub struct SmoothedFunction {
    pub source: TestFunction,
    pub params: ParamSet,
    pub rule: QuadratureRule,
    pub form: Form,
    /// `A_t`, identity for the static map.
    pub evolution: Mat4,
    pm: PhaseMap,
    ah: Mat4,
    nodes: Arc<NodeSet>,
    j_inv_lu: Mat4,
    j_det_lu: f64,
}

impl SmoothedFunction {
    fn assemble(
        f: &TestFunction,
        d: &DerivedParams,
        pm: &PhaseMap,
        a: Mat4,
        rule: QuadratureRule,
        form: Form,
        nodes: Arc<NodeSet>,
    ) -> Result<Self> {
        let j_inv_lu = pm.j.inverse().ok_or(Error::Singular("Ĵ has no LU inverse"))?;
        Ok(SmoothedFunction {
            source: f.clone(),
            params: d.params,
            rule,
            form,
            evolution: a,
            pm: *pm,
            ah: a.matmul(&pm.h),
            nodes,
            j_inv_lu,
            j_det_lu: pm.j.determinant(),
        })
    }

    pub fn phase_map(&self) -> &PhaseMap {
        &self.pm
    }

    /// Value and standard error at `r` (error is 0 for tensor rules).
    pub fn eval_with_error(&self, r: &[f64; 4]) -> Estimate {
        let f = &self.source;
        match self.form {
            Form::Shift => {
                let base = self.evolution.apply(r);
                let ah = &self.ah.0;
                self.nodes.expect(|w| {
                    let mut u = base;
                    for (i, ui) in u.iter_mut().enumerate() {
                        *ui += ah[i][0] * w[0] + ah[i][1] * w[1] + ah[i][2] * w[2] + ah[i][3] * w[3];
                    }
                    f.eval(&u)
                })
            }
            Form::Kernel => {
                // r' = r + Ĵ⁻¹ξ has density q(r') = (det Ĵ/π²) e^{−‖ξ‖²}.
                let pi2 = core::f64::consts::PI * core::f64::consts::PI;
                let j = &self.pm.j;
                let a = &self.evolution;
                let j_det = self.pm.j_det;
                self.nodes.expect(|xi| {
                    let d = self.j_inv_lu.apply(xi);
                    let rp = [r[0] + d[0], r[1] + d[1], r[2] + d[2], r[3] + d[3]];
                    let diff = [r[0] - rp[0], r[1] - rp[1], r[2] - rp[2], r[3] - rp[3]];
                    let overlap = libm::exp(-norm_sq(&j.apply(&diff)));
                    let q = self.j_det_lu / pi2 * libm::exp(-norm_sq(xi));
                    j_det / pi2 * f.eval(&a.apply(&rp)) * overlap / q
                })
            }
        }
    }

    pub fn eval(&self, r: &[f64; 4]) -> f64 {
        self.eval_with_error(r).value
    }

    /// Exact value for Gaussian and constant sources.
    pub fn closed_form(&self, r: &[f64; 4]) -> Option<f64> {
        let sigma = self.ah.matmul(&self.ah.transpose()).scale(0.5);
        self.source.gaussian_expectation(&self.evolution, &sigma, r)
    }
}

/// Builder carrying the evaluation budget and optionally shared nodes.
#[derive(Debug, Clone)]
pub struct Smoother {
    pub rule: QuadratureRule,
    pub cap: u64,
    nodes: Arc<NodeSet>,
}

impl Smoother {
    pub fn new(rule: QuadratureRule) -> Result<Self> {
        Self::with_cap(rule, DEFAULT_BUDGET_CAP)
    }

    pub fn with_cap(rule: QuadratureRule, cap: u64) -> Result<Self> {
        let nodes = Arc::new(rule.nodes(cap)?);
        Ok(Smoother { rule, cap, nodes })
    }

    pub fn smooth(&self, f: &TestFunction, d: &DerivedParams, pm: &PhaseMap) -> Result<SmoothedFunction> {
        SmoothedFunction::assemble(f, d, pm, Mat4::identity(), self.rule, Form::Shift, self.nodes.clone())
    }

    pub fn smooth_kernel_form(&self, f: &TestFunction, d: &DerivedParams, pm: &PhaseMap) -> Result<SmoothedFunction> {
        if !matches!(self.rule, QuadratureRule::MonteCarlo { .. }) {
            return Err(Error::Rule("the kernel form needs a monte carlo rule"));
        }
        SmoothedFunction::assemble(f, d, pm, Mat4::identity(), self.rule, Form::Kernel, self.nodes.clone())
    }

    pub fn smooth_evolved(
        &self,
        f: &TestFunction,
        d: &DerivedParams,
        pm: &PhaseMap,
        a_t: &Mat4,
    ) -> Result<SmoothedFunction> {
        let det = a_t.determinant();
        if !(libm::fabs(det - 1.0) <= UNIMODULAR_TOL) {
            return Err(Error::NotUnimodular(det));
        }
        SmoothedFunction::assemble(f, d, pm, *a_t, self.rule, Form::Shift, self.nodes.clone())
    }
}

pub fn smooth(f: &TestFunction, d: &DerivedParams, pm: &PhaseMap, rule: QuadratureRule) -> Result<SmoothedFunction> {
    Smoother::new(rule)?.smooth(f, d, pm)
}

pub fn smooth_kernel_form(
    f: &TestFunction,
    d: &DerivedParams,
    pm: &PhaseMap,
    rule: QuadratureRule,
) -> Result<SmoothedFunction> {
    Smoother::new(rule)?.smooth_kernel_form(f, d, pm)
}

pub fn smooth_evolved(
    f: &TestFunction,
    d: &DerivedParams,
    pm: &PhaseMap,
    a_t: &Mat4,
    rule: QuadratureRule,
) -> Result<SmoothedFunction> {
    Smoother::new(rule)?.smooth_evolved(f, d, pm, a_t)
}

/// Gauss–Hermite order used by the reduced forms.
pub const REDUCTION_ORDER: usize = 64;

/// `ℏ → 0` limit of `F_{ℏ,θ}`: a 2D Gaussian smoothing of `F_∞(y₁,y₂)` with
/// per-axis standard deviation `mω√(2θ)`.
#[derive(Debug, Clone)]
pub struct StaticReduction {
    pub source: TestFunction,
    pub params: ParamSet,
    scale: f64,
    gh: GaussHermite,
}

impl StaticReduction {
    /// `(1/π) ∫ e^{−‖v‖²} F_∞(y + 2mω√θ·v) dv`.
    pub fn eval(&self, y1: f64, y2: f64) -> f64 {
        let f = &self.source;
        let s = self.scale;
        self.gh.expect(2, |v| {
            f.asymptote_y(y1 + s * v[0], y2 + s * v[1]).unwrap_or(f64::NAN)
        })
    }

    /// Per-axis standard deviation of the smoothing kernel.
    pub fn kernel_std(&self) -> f64 {
        self.scale * core::f64::consts::FRAC_1_SQRT_2
    }
}

pub fn hbar0_static_reduction(f: &TestFunction, p: &ParamSet) -> Result<StaticReduction> {
    f.require_asymptote_y()?;
    reduction_domain(p)?;
    Ok(StaticReduction {
        source: f.clone(),
        params: *p,
        scale: 2.0 * p.m_omega() * libm::sqrt(p.theta),
        gh: GaussHermite::new(REDUCTION_ORDER),
    })
}

/// `ℏ → 0` limit of the evolved map: a 1D smoothing of `F_∞(y₂)` that no
/// longer depends on time.
#[derive(Debug, Clone)]
pub struct DynamicReduction {
    pub source: TestFunction,
    pub params: ParamSet,
    pub t: f64,
    scale: f64,
    gh: GaussHermite,
}

impl DynamicReduction {
    /// `(1/√π) ∫ e^{−v²} F_∞(y₂ + 2mω√θ·v) dv`.
    pub fn eval(&self, y2: f64) -> f64 {
        let f = &self.source;
        let s = self.scale;
        self.gh.expect(1, |v| f.asymptote_y2(y2 + s * v[0]).unwrap_or(f64::NAN))
    }
}

pub fn hbar0_dynamic_reduction(f: &TestFunction, p: &ParamSet, t: f64) -> Result<DynamicReduction> {
    f.require_asymptote_y2()?;
    reduction_domain(p)?;
    Ok(DynamicReduction {
        source: f.clone(),
        params: *p,
        t,
        scale: 2.0 * p.m_omega() * libm::sqrt(p.theta),
        gh: GaussHermite::new(REDUCTION_ORDER),
    })
}

fn reduction_domain(p: &ParamSet) -> Result<()> {
    if !(p.theta > 0.0) || !p.theta.is_finite() {
        return Err(Error::Domain {
            name: "theta",
            value: p.theta,
            reason: "the reduced forms need theta > 0",
        });
    }
    if !(p.m_omega() > 0.0) {
        return Err(Error::Domain {
            name: "m",
            value: p.m,
            reason: "must be strictly positive",
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolution;
    use crate::params::derive;
    use crate::phasemap::{build, PhasePoint};
    use crate::quadrature::normal_half_samples;

    fn setup(hbar: f64, theta: f64) -> (DerivedParams, PhaseMap) {
        let d = derive(&ParamSet::new(hbar, theta)).unwrap();
        let pm = build(&d).unwrap();
        (d, pm)
    }

    fn bump() -> TestFunction {
        TestFunction::gaussian_bump(PhasePoint::ORIGIN, [1.0; 4]).unwrap()
    }

    const PROBES: [[f64; 4]; 4] = [
        [0.0, 0.0, 0.0, 0.0],
        [0.5, -0.3, 0.2, 1.0],
        [-1.2, 0.4, 0.9, -0.6],
        [2.0, 1.5, -1.0, 0.3],
    ];

    #[test]
    fn unital_on_constants() {
        let (d, pm) = setup(0.3, 0.8);
        let s = smooth(&TestFunction::constant(1.0), &d, &pm, QuadratureRule::tensor(8)).unwrap();
        for r in PROBES {
            assert!((s.eval(&r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_matches_closed_form() {
        let (d, pm) = setup(1.0, 0.1);
        let s = smooth(&bump(), &d, &pm, QuadratureRule::tensor(32)).unwrap();
        for r in PROBES {
            let exact = s.closed_form(&r).unwrap();
            assert!((s.eval(&r) - exact).abs() < 1e-8);
        }
    }

    /// Brute-force oracle: the integral written out with raw Gauss–Hermite
    /// weights and `h` evaluated through `f`, `g` directly.
    #[test]
    fn tensor_matches_direct_sum() {
        use crate::phasemap::{f_fun, g_fun};
        use crate::quadrature::gauss_hermite;
        let (d, pm) = setup(0.5, 0.4);
        let f = TestFunction::saturating_profile(1.0, 0.2, 1.5).unwrap();
        let (x, w) = gauss_hermite(6);
        let r = [0.3, -0.2, 0.5, 0.1];
        let mut total = 0.0;
        for a in 0..6 {
            for b in 0..6 {
                for c in 0..6 {
                    for e in 0..6 {
                        let h = [
                            f_fun(&d, x[a], x[b]),
                            f_fun(&d, x[c], x[e]),
                            g_fun(&d, x[c], x[e]),
                            -g_fun(&d, x[a], x[b]),
                        ];
                        let u = [r[0] + h[0], r[1] + h[1], r[2] + h[2], r[3] + h[3]];
                        total += w[a] * w[b] * w[c] * w[e] * f.eval(&u);
                    }
                }
            }
        }
        total /= core::f64::consts::PI * core::f64::consts::PI;
        let s = smooth(&f, &d, &pm, QuadratureRule::tensor(6)).unwrap();
        assert!((s.eval(&r) - total).abs() < 1e-14);
    }

    #[test]
    fn kernel_form_normalisation() {
        let (d, pm) = setup(1.0, 0.1);
        let sm = Smoother::new(QuadratureRule::monte_carlo(20_000, 7)).unwrap();
        let k = sm.smooth_kernel_form(&TestFunction::constant(1.0), &d, &pm).unwrap();
        let e = k.eval_with_error(&PROBES[1]);
        assert!((e.value - 1.0).abs() < 1e-10, "{e:?}");
        let kb = sm.smooth_kernel_form(&bump(), &d, &pm).unwrap();
        let sb = sm.smooth(&bump(), &d, &pm).unwrap();
        let exact = sb.closed_form(&PROBES[1]).unwrap();
        let ek = kb.eval_with_error(&PROBES[1]);
        assert!((ek.value - exact).abs() < 4.0 * ek.std_error);
        assert!(Smoother::new(QuadratureRule::tensor(4)).unwrap().smooth_kernel_form(&bump(), &d, &pm).is_err());
    }

    #[test]
    fn shift_covariance() {
        let (d, pm) = setup(0.7, 0.3);
        let c = [0.4, -0.2, 0.9, 0.1];
        let shifted = TestFunction::gaussian_bump(PhasePoint::from_array(c), [1.0; 4]).unwrap();
        let rule = QuadratureRule::tensor(20);
        let s0 = smooth(&bump(), &d, &pm, rule).unwrap();
        let s1 = smooth(&shifted, &d, &pm, rule).unwrap();
        for r in PROBES {
            let rs = [r[0] + c[0], r[1] + c[1], r[2] + c[2], r[3] + c[3]];
            assert!((s1.eval(&rs) - s0.eval(&r)).abs() < 1e-8);
        }
    }

    #[test]
    fn evolved_at_time_zero_is_static() {
        let (d, pm) = setup(0.6, 0.2);
        let rule = QuadratureRule::tensor(10);
        let a0 = evolution(&d, 0.0).a_t;
        let s = smooth(&bump(), &d, &pm, rule).unwrap();
        let e = smooth_evolved(&bump(), &d, &pm, &a0, rule).unwrap();
        for r in PROBES {
            assert_eq!(s.eval(&r), e.eval(&r));
        }
        let mut bad = a0;
        bad.0[0][0] = 2.0;
        assert!(matches!(
            smooth_evolved(&bump(), &d, &pm, &bad, rule),
            Err(Error::NotUnimodular(_))
        ));
    }

    #[test]
    fn evolved_closed_form() {
        let (d, pm) = setup(0.5, 0.5);
        let a = evolution(&d, 0.9).a_t;
        let s = smooth_evolved(&bump(), &d, &pm, &a, QuadratureRule::tensor(48)).unwrap();
        for r in PROBES {
            let (a, b) = (s.eval(&r), s.closed_form(&r).unwrap());
            assert!((a - b).abs() < 1e-8, "{a} {b}");
        }
    }

    #[test]
    fn monte_carlo_error_shrinks() {
        let (d, pm) = setup(1.0, 0.1);
        let a = Smoother::new(QuadratureRule::monte_carlo(4_000, 3)).unwrap();
        let b = Smoother::new(QuadratureRule::monte_carlo(64_000, 3)).unwrap();
        let ea = a.smooth(&bump(), &d, &pm).unwrap().eval_with_error(&PROBES[0]);
        let eb = b.smooth(&bump(), &d, &pm).unwrap().eval_with_error(&PROBES[0]);
        assert!(eb.std_error < ea.std_error / 3.0);
        assert_eq!(normal_half_samples(10, 3)[..], normal_half_samples(4_000, 3)[..10]);
    }

    #[test]
    fn static_reduction_closed_form() {
        let f = TestFunction::sigmoid_times_gaussian(1.0, [0.0, 0.0], [1.0, 1.0]).unwrap();
        let p = ParamSet::new(1.0, 0.3);
        let red = hbar0_static_reduction(&f, &p).unwrap();
        let var = 2.0 * p.theta;
        let k = 1.0 + 2.0 * var;
        for &(y1, y2) in &[(0.0, 0.0), (0.7, -1.1), (2.0, 0.5)] {
            let want = (-(y1 * y1 + y2 * y2) / k).exp() / k;
            assert!((red.eval(y1, y2) - want).abs() < 1e-8);
        }
        let c = hbar0_static_reduction(&TestFunction::constant(0.4), &p).unwrap();
        assert!((c.eval(3.0, -2.0) - 0.4).abs() < 1e-14);
        assert!((red.kernel_std() - (2.0 * p.theta).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dynamic_reduction_closed_form() {
        let f = TestFunction::saturating_profile(1.0, 0.0, 1.0).unwrap();
        let p = ParamSet::new(1.0, 0.25);
        let red = hbar0_dynamic_reduction(&f, &p, 0.0).unwrap();
        for y in [-2.0, -0.3, 0.0, 0.8, 1.7] {
            let want = core::f64::consts::FRAC_1_SQRT_2 * (-y * y / 2.0f64).exp();
            assert!((red.eval(y) - want).abs() < 1e-12);
        }
        let other = hbar0_dynamic_reduction(&f, &p, 17.0).unwrap();
        assert_eq!(red.eval(0.3).to_bits(), other.eval(0.3).to_bits());
        assert!(hbar0_dynamic_reduction(&f, &ParamSet::new(1.0, 0.0), 0.0).is_err());
    }
}
