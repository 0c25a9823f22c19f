//! Named Wigner families evaluated on a plane.

use anyhow::{ensure, Result};
use clap::ValueEnum;

use ncphase_core::dynamics::evolution;
use ncphase_core::wigner::{
    localization_widths, wigner_1dof, wigner_4d, wigner_4d_theta0, wigner_evolved_marginal,
    wigner_evolved_marginal_hbar0, wigner_final_1d, wigner_marginal_hbar0, wigner_marginal_y,
    WignerGaussian,
};
use ncphase_core::{build, derive, ParamSet, PhasePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// One oscillator, plane `(q, p)`, centred at `(x₁₀, y₁₀)`.
    OneDof,
    /// Slice of the 4D function through the centre in the `(x₁, y₁)` plane.
    FourD,
    /// The `θ = 0` product form on the same slice.
    FourDTheta0,
    /// Exact `y`-marginal.
    Marginal,
    /// `ℏ → 0` marginal `R^θ`.
    MarginalHbar0,
    /// Exact `y`-marginal after evolution over `t`.
    EvolvedMarginal,
    /// `R^θ` after evolution over `t`.
    EvolvedMarginalHbar0,
    /// `R_{y₂₀}(y₂)`; the second axis is ignored.
    Final1d,
}

impl Family {
    pub fn axes(self) -> (&'static str, &'static str) {
        match self {
            Family::OneDof => ("q", "p"),
            Family::FourD | Family::FourDTheta0 => ("x1", "y1"),
            Family::Final1d => ("y2", "unused"),
            _ => ("y1", "y2"),
        }
    }
}

/// A family bound to parameters, a centre `r₀` and a time.
pub struct Bound {
    pub family: Family,
    /// Point of the plane where the family peaks.
    pub center: [f64; 2],
    /// Largest per-axis standard deviation in the plane.
    pub width: f64,
    eval: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl Bound {
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        (self.eval)(a, b)
    }
}

fn gaussian2(g: WignerGaussian) -> (Box<dyn Fn(f64, f64) -> f64 + Send + Sync>, [f64; 2], f64) {
    let c = [g.center[0], g.center[1]];
    let w = localization_widths(&g).into_iter().fold(0.0, f64::max);
    (Box::new(move |a, b| g.density(&[a, b])), c, w)
}

pub fn bind(family: Family, p: &ParamSet, r0: &PhasePoint, t: f64) -> Result<Bound> {
    p.validate()?;
    let (eval, center, width): (Box<dyn Fn(f64, f64) -> f64 + Send + Sync>, [f64; 2], f64) = match family {
        Family::OneDof => {
            let (h, q0, p0) = (p.hbar, r0.x1, r0.y1);
            (Box::new(move |q, pp| wigner_1dof(h, q0, p0, q, pp)), [q0, p0], (h / 2.0).sqrt())
        }
        Family::FourD => {
            let d = derive(p)?;
            let g = wigner_4d(&build(&d)?, r0)?;
            let w = localization_widths(&g);
            let r = *r0;
            (
                Box::new(move |x1, y1| g.density(&[x1, r.x2, y1, r.y2])),
                [r0.x1, r0.y1],
                w[0].max(w[2]),
            )
        }
        Family::FourDTheta0 => {
            let (pp, r) = (*p, *r0);
            let mw = p.m_omega();
            (
                Box::new(move |x1, y1| wigner_4d_theta0(&pp, &r, &PhasePoint::new(x1, r.x2, y1, r.y2))),
                [r0.x1, r0.y1],
                (p.hbar / (2.0 * mw)).sqrt().max((p.hbar * mw / 2.0).sqrt()),
            )
        }
        Family::Marginal => {
            let d = derive(p)?;
            gaussian2(wigner_marginal_y(&d, &build(&d)?, [r0.y1, r0.y2])?)
        }
        Family::MarginalHbar0 => gaussian2(wigner_marginal_hbar0(p, [r0.y1, r0.y2])?),
        Family::EvolvedMarginal => {
            let d = derive(p)?;
            gaussian2(wigner_evolved_marginal(&d, &build(&d)?, &evolution(&d, t), r0)?)
        }
        Family::EvolvedMarginalHbar0 => gaussian2(wigner_evolved_marginal_hbar0(p, r0, t)?),
        Family::Final1d => {
            ensure!(p.theta > 0.0, "final-1d needs theta > 0");
            let (pp, y20) = (*p, r0.y2);
            let w = p.m_omega() * (p.theta / 2.0).sqrt();
            (Box::new(move |y2, _| wigner_final_1d(&pp, y20, y2)), [y20, 0.0], w)
        }
    };
    Ok(Bound {
        family,
        center,
        width,
        eval,
    })
}
