//! Physical inputs `(m, ω, ℏ, θ)` and every scalar derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

/// Mass, angular frequency, action scale and configuration
/// non-commutativity. `m` and `omega` default to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSet {
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default = "one")]
    pub omega: f64,
    pub hbar: f64,
    pub theta: f64,
}

impl ParamSet {
    /// Unit mass and frequency.
    pub const fn new(hbar: f64, theta: f64) -> Self {
        ParamSet {
            m: 1.0,
            omega: 1.0,
            hbar,
            theta,
        }
    }

    pub const fn full(m: f64, omega: f64, hbar: f64, theta: f64) -> Self {
        ParamSet { m, omega, hbar, theta }
    }

    pub fn with_hbar(self, hbar: f64) -> Self {
        ParamSet { hbar, ..self }
    }

    pub fn with_theta(self, theta: f64) -> Self {
        ParamSet { theta, ..self }
    }

    /// `mω`, the combination that appears almost everywhere.
    #[inline]
    pub fn m_omega(&self) -> f64 {
        self.m * self.omega
    }

    /// Checks the domain: `m, ω, ℏ > 0`, `θ ≥ 0`, everything finite.
    pub fn validate(&self) -> Result<()> {
        positive("m", self.m)?;
        positive("omega", self.omega)?;
        positive("hbar", self.hbar)?;
        if !(self.theta >= 0.0) || !self.theta.is_finite() {
            return Err(Error::Domain {
                name: "theta",
                value: self.theta,
                reason: "must be finite and non-negative",
            });
        }
        Ok(())
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

/// All closed-form scalars of the model at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub params: ParamSet,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub k_plus: f64,
    pub k_minus: f64,
    pub mu: f64,
    pub beta: f64,
    pub n_norm: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
}

impl DerivedParams {
    /// `λ₊ + λ₋ = mω√(4ℏ² + m²ω²θ²)`.
    pub fn lambda_sum(&self) -> f64 {
        self.lambda_plus + self.lambda_minus
    }
}

/// Evaluates every derived scalar from its closed form.
///
/// `λ₋` is computed as `m²ω²ℏ²/λ₊` and `β` as `−ln(1 + θλ₊/ℏ²)` so that
/// neither suffers cancellation when `θ ≫ ℏ`. `θ = 0` is accepted and gives
/// the commutative values exactly.
pub fn derive(p: &ParamSet) -> Result<DerivedParams> {
    p.validate()?;
    let ParamSet { m, omega, hbar, theta } = *p;
    let mw = m * omega;
    let root = mw * libm::hypot(2.0 * hbar, mw * theta);
    let lambda_plus = 0.5 * (root + mw * mw * theta);
    let lambda_minus = mw * (mw * hbar) * (hbar / lambda_plus);
    // θλ₊/ℏ² and θλ₋/ℏ² = θm²ω²/λ₊
    let tp = theta * lambda_plus / (hbar * hbar);
    let tm = theta * mw * mw / lambda_plus;
    let k_plus = lambda_plus * (4.0 + 2.0 * tp);
    let k_minus = lambda_minus * (4.0 - 2.0 * tm);
    let mu = lambda_plus / mw;
    let beta = -libm::log1p(tp);
    let n_norm = hbar * hbar / (lambda_minus * (2.0 - tm));
    let g = mw * theta / libm::sqrt(4.0 * hbar * hbar + 2.0 * mw * mw * theta * theta);
    let gamma_plus = 0.5 * (1.0 + g);
    let gamma_minus = 0.5 * (1.0 - g);
    let omega_plus = lambda_plus / (m * mu);
    let omega_minus = lambda_minus / (m * mu);

    let overflow = |quantity: &'static str| {
        let (name, value) = if theta > hbar { ("theta", theta) } else { ("hbar", hbar) };
        Error::Overflow { quantity, name, value }
    };
    for (q, v) in [
        ("lambda_plus", lambda_plus),
        ("lambda_minus", lambda_minus),
        ("k_plus", k_plus),
        ("k_minus", k_minus),
        ("n_norm", n_norm),
    ] {
        if !v.is_finite() || v <= 0.0 {
            return Err(overflow(q));
        }
    }
    if !beta.is_finite() {
        return Err(overflow("beta"));
    }
    Ok(DerivedParams {
        params: *p,
        lambda_plus,
        lambda_minus,
        k_plus,
        k_minus,
        mu,
        beta,
        n_norm,
        gamma_plus,
        gamma_minus,
        omega_plus,
        omega_minus,
    })
}

/// The two limits of `μ`: `(ℏ, mωθ)` for `θ → 0` and `ℏ → 0` respectively.
pub fn mu_limits(p: &ParamSet) -> Result<(f64, f64)> {
    p.validate()?;
    positive("theta", p.theta)?;
    Ok((p.hbar, p.m_omega() * p.theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    LambdaPlus,
    LambdaMinus,
    SumLambda,
    Mu,
    KPlus,
    KMinus,
    OmegaPlus,
    OmegaMinus,
    GammaPm,
}

impl Quantity {
    pub const ALL: [Quantity; 9] = [
        Quantity::LambdaPlus,
        Quantity::LambdaMinus,
        Quantity::SumLambda,
        Quantity::Mu,
        Quantity::KPlus,
        Quantity::KMinus,
        Quantity::OmegaPlus,
        Quantity::OmegaMinus,
        Quantity::GammaPm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::LambdaPlus => "lambda_plus",
            Quantity::LambdaMinus => "lambda_minus",
            Quantity::SumLambda => "sum_lambda",
            Quantity::Mu => "mu",
            Quantity::KPlus => "k_plus",
            Quantity::KMinus => "k_minus",
            Quantity::OmegaPlus => "omega_plus",
            Quantity::OmegaMinus => "omega_minus",
            Quantity::GammaPm => "gamma_pm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ThetaTo0,
    HbarTo0,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::ThetaTo0 => "theta_to_0",
            Direction::HbarTo0 => "hbar_to_0",
        }
    }
}

/// Exact value and leading-order asymptote of `q` in the given regime.
///
/// `GammaPm` refers to `γ₊`. For `ω₋` as `ℏ → 0` the asymptote is
/// `ωℏ²/(m²ω²θ²)`, which is what `λ₋/(mμ)` actually tends to.
pub fn asymptote_pair(p: &ParamSet, q: Quantity, dir: Direction) -> Result<(f64, f64)> {
    let d = derive(p)?;
    let ParamSet { m, omega, hbar, theta } = *p;
    let mw = m * omega;
    let exact = match q {
        Quantity::LambdaPlus => d.lambda_plus,
        Quantity::LambdaMinus => d.lambda_minus,
        Quantity::SumLambda => d.lambda_sum(),
        Quantity::Mu => d.mu,
        Quantity::KPlus => d.k_plus,
        Quantity::KMinus => d.k_minus,
        Quantity::OmegaPlus => d.omega_plus,
        Quantity::OmegaMinus => d.omega_minus,
        Quantity::GammaPm => d.gamma_plus,
    };
    let asym = match (dir, q) {
        (Direction::ThetaTo0, Quantity::LambdaPlus | Quantity::LambdaMinus) => mw * hbar,
        (Direction::ThetaTo0, Quantity::SumLambda) => 2.0 * mw * hbar,
        (Direction::ThetaTo0, Quantity::Mu) => hbar,
        (Direction::ThetaTo0, Quantity::KPlus | Quantity::KMinus) => 4.0 * mw * hbar,
        (Direction::ThetaTo0, Quantity::OmegaPlus | Quantity::OmegaMinus) => omega,
        (Direction::ThetaTo0, Quantity::GammaPm) => 0.5,
        (Direction::HbarTo0, Quantity::LambdaPlus | Quantity::SumLambda) => mw * mw * theta,
        (Direction::HbarTo0, Quantity::LambdaMinus) => hbar * hbar / theta,
        (Direction::HbarTo0, Quantity::Mu) => mw * theta,
        (Direction::HbarTo0, Quantity::KPlus) => {
            2.0 * mw * mw * mw * mw * theta * theta * theta / (hbar * hbar)
        }
        (Direction::HbarTo0, Quantity::KMinus) => 2.0 * hbar * hbar / theta,
        (Direction::HbarTo0, Quantity::OmegaPlus) => omega,
        (Direction::HbarTo0, Quantity::OmegaMinus) => {
            omega * hbar * hbar / (mw * mw * theta * theta)
        }
        (Direction::HbarTo0, Quantity::GammaPm) => 0.5 * (1.0 + core::f64::consts::FRAC_1_SQRT_2),
    };
    Ok((exact, asym))
}

/// `exact / asymptote`; tends to 1 as the shrinking parameter goes to 0.
pub fn asymptote_ratio(p: &ParamSet, q: Quantity, dir: Direction) -> Result<f64> {
    let (exact, asym) = asymptote_pair(p, q, dir)?;
    if asym == 0.0 || !asym.is_finite() {
        return Err(Error::ZeroAsymptote { quantity: q.name() });
    }
    Ok(exact / asym)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn commutative_unit_point() {
        let d = derive(&ParamSet::new(1.0, 0.0)).unwrap();
        assert_eq!(d.lambda_plus, 1.0);
        assert_eq!(d.lambda_minus, 1.0);
        assert_eq!(d.mu, 1.0);
        assert_eq!(d.k_plus, 4.0);
        assert_eq!(d.k_minus, 4.0);
        assert_eq!(d.omega_plus, 1.0);
        assert_eq!(d.omega_minus, 1.0);
        assert_eq!(d.gamma_plus, 0.5);
        assert_eq!(d.beta, 0.0);
    }

    #[test]
    fn theta_two_values() {
        let d = derive(&ParamSet::new(1.0, 2.0)).unwrap();
        let s2 = core::f64::consts::SQRT_2;
        assert_relative_eq!(d.lambda_plus, s2 + 1.0, max_relative = 1e-15);
        assert_relative_eq!(d.lambda_minus, s2 - 1.0, max_relative = 1e-14);
        assert_relative_eq!(d.lambda_plus * d.lambda_minus, 1.0, max_relative = 1e-15);
        assert_relative_eq!(d.beta, (3.0 - 2.0 * s2).ln(), max_relative = 1e-14);
        assert_relative_eq!(d.beta, -(3.0 + 2.0 * s2).ln(), max_relative = 1e-15);
        assert_relative_eq!(d.mu, s2 + 1.0, max_relative = 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            derive(&ParamSet::new(0.0, 1.0)),
            Err(Error::Domain { name: "hbar", .. })
        ));
        assert!(matches!(
            derive(&ParamSet::new(1.0, -1e-9)),
            Err(Error::Domain { name: "theta", .. })
        ));
        assert!(matches!(
            derive(&ParamSet::full(-1.0, 1.0, 1.0, 1.0)),
            Err(Error::Domain { name: "m", .. })
        ));
    }

    #[test]
    fn overflow_names_parameter() {
        let err = derive(&ParamSet::new(1e-200, 1e200)).unwrap_err();
        assert!(matches!(err, Error::Overflow { name: "theta", .. }), "{err:?}");
    }

    #[test]
    fn mu_limit_values() {
        assert_eq!(mu_limits(&ParamSet::new(0.3, 0.7)).unwrap(), (0.3, 0.7));
        assert_eq!(mu_limits(&ParamSet::full(2.0, 3.0, 1.0, 1.0)).unwrap(), (1.0, 6.0));
    }

    #[test]
    fn mu_converges_monotonically_to_hbar() {
        let mut last = f64::INFINITY;
        for k in 1..=8 {
            let d = derive(&ParamSet::new(1.0, 10f64.powi(-k))).unwrap();
            let e = (d.mu - 1.0).abs();
            assert!(e < last);
            last = e;
        }
        assert!(last < 1e-8);
    }

    #[test]
    fn listed_asymptote_ratios() {
        let p = ParamSet::new(1e-4, 1.0);
        let r = asymptote_ratio(&p, Quantity::LambdaMinus, Direction::HbarTo0).unwrap();
        assert!((r - 1.0).abs() < 1e-6);
        let r = asymptote_ratio(&p, Quantity::KPlus, Direction::HbarTo0).unwrap();
        assert!((r - 1.0).abs() < 1e-6);
        // μ = ℏ + mωθ/2 + O(θ²), so the ratio sits θ/2 above 1
        let r = asymptote_ratio(&ParamSet::new(1.0, 1e-6), Quantity::Mu, Direction::ThetaTo0).unwrap();
        assert!((r - 1.0 - 5e-7).abs() < 1e-12);
    }

    #[test]
    fn omega_minus_asymptote_keeps_frequency_dimension() {
        let p = ParamSet::full(1.0, 3.0, 1e-5, 1.0);
        let r = asymptote_ratio(&p, Quantity::OmegaMinus, Direction::HbarTo0).unwrap();
        assert!((r - 1.0).abs() < 1e-8);
    }

    #[test]
    fn zero_asymptote_is_an_error() {
        let p = ParamSet::new(1.0, 0.0);
        assert_eq!(
            asymptote_ratio(&p, Quantity::Mu, Direction::HbarTo0),
            Err(Error::ZeroAsymptote { quantity: "mu" })
        );
    }

    #[test]
    fn serde_defaults_unit_mass_and_frequency() {
        use serde::de::value::{Error as DeError, MapDeserializer};
        let entries = [("hbar", 0.5f64), ("theta", 0.25f64)];
        let de = MapDeserializer::<_, DeError>::new(entries.into_iter());
        assert_eq!(ParamSet::deserialize(de).unwrap(), ParamSet::new(0.5, 0.25));
    }

    fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
        (lo.ln()..hi.ln()).prop_map(f64::exp)
    }

    proptest! {
        #[test]
        fn algebraic_identities(
            m in log_uniform(0.1, 10.0),
            w in log_uniform(0.1, 10.0),
            hbar in log_uniform(1e-4, 10.0),
            theta in log_uniform(1e-4, 10.0),
        ) {
            let p = ParamSet::full(m, w, hbar, theta);
            let d = derive(&p).unwrap();
            let mw = m * w;
            let rel = |a: f64, b: f64| ((a - b) / b).abs();
            prop_assert!(rel(d.lambda_plus * d.lambda_minus, mw * mw * hbar * hbar) < 1e-12);
            // the difference cancels when θ ≪ ℏ, so measure it against the sum
            prop_assert!(((d.lambda_plus - d.lambda_minus) - mw * mw * theta).abs() < 1e-12 * d.lambda_sum());
            prop_assert!(rel(d.lambda_sum(), mw * (4.0 * hbar * hbar + mw * mw * theta * theta).sqrt()) < 1e-12);
            let prod = (1.0 - theta * d.lambda_minus / (hbar * hbar)) * (1.0 + theta * d.lambda_plus / (hbar * hbar));
            prop_assert!((prod - 1.0).abs() < 1e-12 * (1.0 + theta * d.lambda_plus / (hbar * hbar)));
            prop_assert!((d.gamma_plus + d.gamma_minus - 1.0).abs() < 1e-15);
            prop_assert!(d.gamma_plus > 0.0 && d.gamma_plus < 1.0);
            prop_assert!(d.gamma_minus > 0.0 && d.gamma_minus < 1.0);
            prop_assert!(d.n_norm > 0.0 && d.k_plus > 0.0 && d.k_minus > 0.0);
            prop_assert!(rel(d.omega_plus * d.mu * m, d.lambda_plus) < 1e-15);
        }

        #[test]
        fn beta_forms_agree(hbar in log_uniform(1e-3, 10.0), theta in log_uniform(1e-3, 10.0)) {
            let d = derive(&ParamSet::new(hbar, theta)).unwrap();
            let x = theta * d.lambda_minus / (hbar * hbar);
            let other = (1.0 - x).ln();
            // ln(1 − x) loses about ε/(1 − x) absolute accuracy
            prop_assert!((d.beta - other).abs() < 1e-14 * (1.0 + 1.0 / (1.0 - x)) * d.beta.abs().max(1.0));
        }
    }
}
