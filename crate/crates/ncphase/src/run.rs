//! Executes the experiments listed in a [`RunConfig`].

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};

use ncphase_core::probes::probe_cloud;
use ncphase_core::{PhasePoint, QuadratureRule};

use crate::config::{ExperimentKind, ExperimentSpec, RunConfig};
use crate::families::{bind, Family};
use crate::limits::{self, Bench, LimitReport, SweepParameter, SweepSchedule, DEFAULT_TIMES};
use crate::report::{linspace, write_reports, Grid};
use crate::svg;

/// Monte Carlo settings for the oracle experiment.
pub const ORACLE_MC_SAMPLES: u64 = 1_000_000;
pub const ORACLE_MC_SEED: u64 = 42;
pub const ORACLE_MC_STRIDE: usize = 10;
/// Tensor order of the oracle experiment.
pub const ORACLE_ORDER: usize = 32;

/// What one experiment produced.
#[derive(Debug)]
pub struct Outcome {
    pub dir: PathBuf,
    pub reports: Vec<LimitReport>,
}

impl Outcome {
    pub fn passes(&self) -> bool {
        self.reports.iter().all(LimitReport::passes)
    }
}

fn bench(cfg: &RunConfig) -> Result<Bench> {
    Bench::new(cfg.params.m, cfg.params.omega, probe_cloud(&cfg.probes), cfg.quadrature)
}

/// Runs one experiment and writes its directory under `cfg.outputs`.
pub fn run_experiment(cfg: &RunConfig, spec: &ExperimentSpec) -> Result<Outcome> {
    let dir = cfg.outputs.join(spec.dir_name());
    let sched = cfg.schedules_for(spec);
    let (m, omega) = (cfg.params.m, cfg.params.omega);
    let func = || {
        let label = spec.function.as_deref().context("experiment needs a function")?;
        cfg.function(label).with_context(|| format!("no test function '{label}'"))
    };
    let times = spec.t_values.clone().unwrap_or_else(|| DEFAULT_TIMES.to_vec());
    let mut grid = None;
    let reports = match spec.kind {
        ExperimentKind::Appendix => limits::appendix_report(m, omega, &sched.theta.with_fixed(1.0), &sched.hbar)?,
        ExperimentKind::ChainA => vec![limits::chain_theta_then_hbar(func()?, &sched.theta, &sched.hbar, &bench(cfg)?)?],
        ExperimentKind::ChainB => vec![limits::chain_hbar_then_theta(func()?, &sched.hbar_first, &sched.theta, &bench(cfg)?)?],
        ExperimentKind::Noncommutation => {
            let (_, _, r) = limits::noncommutation(func()?, &sched.theta, &sched.hbar, &sched.hbar_first, &bench(cfg)?)?;
            vec![r]
        }
        ExperimentKind::DynamicsA => {
            let (f, b) = (func()?, bench(cfg)?);
            let (stages, errors) = limits::dynamics_chain_a(f, &sched.theta, &sched.hbar, &times, &b)?;
            vec![limits::dynamics_a_report(f, stages, errors, &b)]
        }
        ExperimentKind::DynamicsB => {
            vec![limits::dynamics_chain_b(func()?, &sched.theta, &sched.hbar_first, &times, &bench(cfg)?)?]
        }
        ExperimentKind::Localization => vec![limits::localization_report(m, omega, &sched.theta, &sched.hbar)?],
        ExperimentKind::Isometry => {
            // Runs along ℏ = θ from 1 down to 1e-3 unless the experiment sets its own.
            let own = spec.schedules.as_ref().is_some_and(|l| l.iter().any(|s| s.parameter == SweepParameter::Hbar));
            let s = if own { sched.hbar.clone() } else { SweepSchedule::geometric(SweepParameter::Hbar, 0, -3, 0.0) };
            vec![limits::isometry_report(m, omega, &s)?]
        }
        ExperimentKind::Unitality => {
            let s = SweepSchedule::geometric(SweepParameter::Hbar, 1, -3, 0.0);
            vec![limits::unitality_report(m, omega, &s, &bench(cfg)?)?]
        }
        ExperimentKind::Oracle => {
            let order = match cfg.quadrature {
                QuadratureRule::GaussHermiteTensor { order_per_axis } => order_per_axis.max(ORACLE_ORDER),
                QuadratureRule::MonteCarlo { .. } => ORACLE_ORDER,
            };
            let mc = match cfg.quadrature {
                QuadratureRule::MonteCarlo { .. } => cfg.quadrature,
                _ => QuadratureRule::monte_carlo(ORACLE_MC_SAMPLES, ORACLE_MC_SEED),
            };
            let probes = probe_cloud(&cfg.probes);
            vec![limits::oracle_report(func()?, &cfg.params, &probes, order, mc, ORACLE_MC_STRIDE)?]
        }
        ExperimentKind::Diagonal => {
            vec![limits::diagonal_report(func()?, &sched.hbar, spec.ratio.unwrap_or(1.0), &bench(cfg)?)?]
        }
        ExperimentKind::WignerMarginal => {
            let n = spec.grid_points.unwrap_or(81);
            let b = bind(Family::Marginal, &cfg.params, &PhasePoint::ORIGIN, 0.0)?;
            let half = 4.0 * b.width;
            let (xl, yl) = Family::Marginal.axes();
            grid = Some(Grid::tabulate(
                xl,
                yl,
                linspace(b.center[0] - half, b.center[0] + half, n),
                linspace(b.center[1] - half, b.center[1] + half, n),
                |x, y| b.eval(x, y),
            ));
            vec![limits::wigner_mass_report(&cfg.params, 32)?]
        }
    };
    write_reports(&dir, cfg, spec, &reports)?;
    if let Some(g) = grid {
        fs::write(dir.join("grid.csv"), g.to_csv()?)?;
        let title = format!("y-marginal, hbar = {}, theta = {}", cfg.params.hbar, cfg.params.theta);
        fs::write(dir.join("heatmap.svg"), svg::render(&g, &title))?;
    }
    Ok(Outcome { dir, reports })
}

/// Runs every experiment in order; `Ok(true)` iff all of them pass.
pub fn run(cfg: &RunConfig) -> Result<bool> {
    fs::create_dir_all(&cfg.outputs).with_context(|| format!("creating {}", cfg.outputs.display()))?;
    let mut ok = true;
    for spec in &cfg.experiments {
        let out = run_experiment(cfg, spec).with_context(|| format!("experiment '{}'", spec.dir_name()))?;
        for r in &out.reports {
            eprintln!(
                "{:<16} {:<16} {:?}{}",
                spec.dir_name(),
                r.experiment,
                r.verdict,
                if r.exploratory { " (exploratory)" } else { "" }
            );
        }
        ok &= out.passes();
    }
    Ok(ok)
}
