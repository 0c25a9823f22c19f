//! Parameter sweeps that drive `ℏ` and `θ` to zero and judge the result.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use anyhow::{ensure, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ncphase_core::dynamics::{evolution, evolution_hbar0, evolution_theta0};
use ncphase_core::params::{asymptote_ratio, Direction, Quantity};
use ncphase_core::phasemap::{
    f_fun, f_hbar0, g_fun, g_fun_printed, g_hbar0, h_matrix_printed, orthogonality_defect,
};
use ncphase_core::smoothing::{hbar0_dynamic_reduction, hbar0_static_reduction};
use ncphase_core::wigner::{
    localization_widths, wigner_1dof_gaussian, wigner_4d, wigner_marginal_hbar0,
};
use ncphase_core::{
    build, derive, FunctionKind, ParamSet, PhasePoint, QuadratureRule, Smoother, TestFunction,
};

/// Tolerance for sweeps through the smoothing map.
pub const COMPOSED_TOL: f64 = 1e-2;
/// Tolerance for closed-form families.
pub const CLOSED_FORM_TOL: f64 = 1e-5;
/// Errors at or below this level count as non-increasing.
pub const NOISE_FLOOR: f64 = 1e-12;
/// Errors below this fraction of the tolerance are at the quadrature floor
/// and also count as non-increasing.
pub const FLOOR_FRACTION: f64 = 1e-4;
/// Allowed distance of a fitted localisation slope from 1/2.
pub const SLOPE_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Hbar,
    Theta,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Hbar => "hbar",
            SweepParameter::Theta => "theta",
        }
    }
}

/// Values taken by one parameter while the other is held at `fixed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSchedule {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub fixed: f64,
}

impl SweepSchedule {
    /// `10^first, 10^(first−1), …, 10^last`.
    pub fn geometric(parameter: SweepParameter, first: i32, last: i32, fixed: f64) -> Self {
        SweepSchedule {
            parameter,
            values: (last..=first).rev().map(|k| 10f64.powi(k)).collect(),
            fixed,
        }
    }

    pub fn default_theta() -> Self {
        Self::geometric(SweepParameter::Theta, -1, -6, 0.1)
    }

    pub fn default_hbar() -> Self {
        Self::geometric(SweepParameter::Hbar, -1, -6, 1.0)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.values.is_empty() {
            return Err("values: must not be empty".into());
        }
        if let Some(v) = self.values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(format!("values: {v} is not a finite positive number"));
        }
        if self.values.windows(2).any(|w| !(w[1] < w[0])) {
            return Err("values: must be strictly decreasing".into());
        }
        if !(self.fixed >= 0.0 && self.fixed.is_finite()) {
            return Err(format!("fixed: {} is not a finite non-negative number", self.fixed));
        }
        Ok(())
    }

    fn params(&self, m: f64, omega: f64, value: f64) -> ParamSet {
        match self.parameter {
            SweepParameter::Hbar => ParamSet::full(m, omega, value, self.fixed),
            SweepParameter::Theta => ParamSet::full(m, omega, self.fixed, value),
        }
    }

    pub fn with_fixed(&self, fixed: f64) -> Self {
        SweepSchedule { fixed, ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    Diverged,
    Inconclusive,
}

/// One leg of a report: a schedule and the error measured at each step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub target_description: String,
    pub schedule: SweepSchedule,
    pub errors: Vec<f64>,
    /// Auxiliary per-step quantities.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub series: BTreeMap<String, Vec<f64>>,
    pub fitted_rate: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl Stage {
    fn judged(name: &str, target: &str, schedule: SweepSchedule, errors: Vec<f64>, tol: f64) -> Self {
        Stage {
            name: name.into(),
            target_description: target.into(),
            fitted_rate: fitted_rate(&schedule.values, &errors),
            verdict: judge(&errors, tol),
            schedule,
            errors,
            series: BTreeMap::new(),
            tolerance: tol,
        }
    }

    fn series(mut self, key: &str, v: Vec<f64>) -> Self {
        self.series.insert(key.into(), v);
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitReport {
    pub experiment: String,
    pub target_description: String,
    pub schedules: Vec<SweepSchedule>,
    pub probe_points: Vec<PhasePoint>,
    /// One entry per schedule step, stages concatenated.
    pub errors_per_step: Vec<f64>,
    pub fitted_rate: Option<f64>,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub exploratory: bool,
    pub stages: Vec<Stage>,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
}

impl LimitReport {
    fn from_stages(experiment: &str, target: &str, probes: Vec<PhasePoint>, stages: Vec<Stage>) -> Self {
        let schedules = stages.iter().map(|s| s.schedule.clone()).collect();
        let errors_per_step: Vec<f64> = stages.iter().flat_map(|s| s.errors.iter().copied()).collect();
        let verdict = combine(stages.iter().map(|s| s.verdict));
        let tolerance = stages.iter().map(|s| s.tolerance).fold(0.0, f64::max);
        let fitted_rate = stages.last().and_then(|s| s.fitted_rate);
        LimitReport {
            experiment: experiment.into(),
            target_description: target.into(),
            schedules,
            probe_points: probes,
            errors_per_step,
            fitted_rate,
            verdict,
            tolerance,
            exploratory: false,
            stages,
            metrics: BTreeMap::new(),
        }
    }

    /// Whether this report lets a run exit successfully.
    pub fn passes(&self) -> bool {
        self.exploratory || self.verdict == Verdict::Converged
    }

    pub fn total_steps(&self) -> usize {
        self.schedules.iter().map(|s| s.values.len()).sum()
    }
}

fn combine(vs: impl Iterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Converged;
    for v in vs {
        match v {
            Verdict::Diverged => return Verdict::Diverged,
            Verdict::Inconclusive => out = Verdict::Inconclusive,
            Verdict::Converged => {}
        }
    }
    out
}

/// Converged: final error below `tol` and each of the last three errors no
/// larger than its predecessor, unless it is below [`NOISE_FLOOR`] or
/// `FLOOR_FRACTION·tol`. Diverged: any non-finite error, or a final error
/// above both `tol` and the first error.
pub fn judge(errors: &[f64], tol: f64) -> Verdict {
    let Some(&last) = errors.last() else {
        return Verdict::Inconclusive;
    };
    if errors.iter().any(|e| !e.is_finite()) {
        return Verdict::Diverged;
    }
    let tail = &errors[errors.len().saturating_sub(3)..];
    let floor = NOISE_FLOOR.max(FLOOR_FRACTION * tol);
    let monotone = tail.windows(2).all(|w| w[1] <= w[0] || w[1] <= floor);
    if last < tol && monotone {
        Verdict::Converged
    } else if last >= tol && last > errors[0] {
        Verdict::Diverged
    } else {
        Verdict::Inconclusive
    }
}

/// Least-squares slope of `log error` against `log parameter`, over the
/// steps whose error is above the noise floor.
pub fn fitted_rate(params: &[f64], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = params
        .iter()
        .zip(errors)
        .filter(|(p, e)| **p > 0.0 && e.is_finite() && **e > NOISE_FLOOR)
        .map(|(p, e)| (p.ln(), e.ln()))
        .collect();
    log_slope(&pts)
}

fn log_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope of `log y` against `log x` over all points.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.ln())).collect();
    log_slope(&pts)
}

fn sup<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    sup(a.iter().zip(b).map(|(x, y)| (x - y).abs()))
}

/// Shared settings for the sweeps: mass, frequency, probe cloud, rule.
#[derive(Debug, Clone)]
pub struct Bench {
    pub m: f64,
    pub omega: f64,
    pub probes: Vec<PhasePoint>,
    pub smoother: Smoother,
    pub tolerance: f64,
}

impl Bench {
    pub fn new(m: f64, omega: f64, probes: Vec<PhasePoint>, rule: QuadratureRule) -> Result<Self> {
        ensure!(!probes.is_empty(), "the probe cloud is empty");
        Ok(Bench {
            m,
            omega,
            probes,
            smoother: Smoother::new(rule)?,
            tolerance: COMPOSED_TOL,
        })
    }

    fn points(&self) -> Vec<[f64; 4]> {
        self.probes.iter().map(|p| p.to_array()).collect()
    }

    /// `F_{ℏ,θ}` composed with `A^{ℏ,θ}_{−t}` on `pts`; `t = 0` is the static map.
    fn smoothed(&self, f: &TestFunction, p: ParamSet, t: f64, pts: &[[f64; 4]]) -> Result<Vec<f64>> {
        let d = derive(&p)?;
        let pm = build(&d)?;
        let sf = if t == 0.0 {
            self.smoother.smooth(f, &d, &pm)?
        } else {
            self.smoother.smooth_evolved(f, &d, &pm, &evolution(&d, -t).a_t)?
        };
        Ok(pts.par_iter().map(|r| sf.eval(r)).collect())
    }

    /// Split the probe cloud into `y`-points and `x`-points and form their
    /// product grid, `y` major.
    fn xy_grid(&self) -> (Vec<[f64; 2]>, Vec<[f64; 4]>) {
        let n = (self.probes.len() / 2).clamp(1, 10);
        let ys: Vec<[f64; 2]> = self.probes.iter().take(n).map(|p| [p.y1, p.y2]).collect();
        let xs: Vec<[f64; 2]> = self.probes.iter().cycle().skip(n).take(n).map(|p| [p.x1, p.x2]).collect();
        let grid = ys
            .iter()
            .flat_map(|y| xs.iter().map(move |x| [x[0], x[1], y[0], y[1]]))
            .collect();
        (ys, grid)
    }
}

/// Point where a test function is most informative: the bump centre, or the
/// origin.
pub fn focus_point(f: &TestFunction) -> PhasePoint {
    match &f.kind {
        FunctionKind::GaussianBump { center, .. } => PhasePoint::from_array(*center),
        _ => PhasePoint::ORIGIN,
    }
}

fn sci(x: f64) -> String {
    format!("{x:e}")
}

/// `θ → 0` at fixed `ℏ₀`, then `ℏ → 0` at `θ = 0`, optionally composed with
/// the evolution over `t`. Stage 1 errors are distances to `F_{ℏ₀,0}`;
/// `errors_per_step` always measures the distance to the classical target.
fn chain_a(
    f: &TestFunction,
    theta_s: &SweepSchedule,
    hbar_s: &SweepSchedule,
    bench: &Bench,
    t: f64,
) -> Result<(Vec<Stage>, Vec<f64>)> {
    ensure!(theta_s.parameter == SweepParameter::Theta, "chain A needs a theta schedule first");
    ensure!(hbar_s.parameter == SweepParameter::Hbar, "chain A needs an hbar schedule second");
    let pts = bench.points();
    let pull = evolution_theta0(bench.omega, -t).a_t;
    let target: Vec<f64> = pts.iter().map(|r| f.eval(&pull.apply(r))).collect();
    let h0 = theta_s.fixed;
    let inner = bench.smoothed(f, ParamSet::full(bench.m, bench.omega, h0, 0.0), t, &pts)?;

    let (mut e_inner, mut e1) = (Vec::new(), Vec::new());
    for &th in &theta_s.values {
        let v = bench.smoothed(f, ParamSet::full(bench.m, bench.omega, h0, th), t, &pts)?;
        e_inner.push(sup_diff(&v, &inner));
        e1.push(sup_diff(&v, &target));
    }
    let hbar_at_0 = hbar_s.with_fixed(0.0);
    let mut e2 = Vec::new();
    for &h in &hbar_at_0.values {
        let v = bench.smoothed(f, ParamSet::full(bench.m, bench.omega, h, 0.0), t, &pts)?;
        e2.push(sup_diff(&v, &target));
    }
    let tag = if t == 0.0 { String::new() } else { format!(" (t = {})", sci(t)) };
    let s1 = Stage::judged(
        &format!("theta_to_0{tag}"),
        &format!("F smoothed at hbar = {}, theta = 0", sci(h0)),
        theta_s.clone(),
        e_inner,
        bench.tolerance,
    )
    .series("distance_to_target", e1.clone());
    let s2 = Stage::judged(
        &format!("hbar_to_0{tag}"),
        "classical target F(A_{-t} r)",
        hbar_at_0,
        e2.clone(),
        bench.tolerance,
    );
    e1.extend(e2);
    Ok((vec![s1, s2], e1))
}

fn chain_a_report(name: &str, f: &TestFunction, stages: Vec<Stage>, errors: Vec<f64>, bench: &Bench) -> LimitReport {
    let mut r = LimitReport::from_stages(name, "", bench.probes.clone(), stages);
    r.target_description = format!("the test function '{}' itself (classical limit)", f.label);
    let overall = judge(&errors, bench.tolerance);
    r.verdict = combine([r.verdict, overall].into_iter());
    r.fitted_rate = fitted_rate(&r.schedules.last().map(|s| s.values.clone()).unwrap_or_default(), r.stages.last().map(|s| &s.errors[..]).unwrap_or(&[]));
    r.errors_per_step = errors;
    r
}

pub fn chain_theta_then_hbar(
    f: &TestFunction,
    theta_s: &SweepSchedule,
    hbar_s: &SweepSchedule,
    bench: &Bench,
) -> Result<LimitReport> {
    let (stages, errors) = chain_a(f, theta_s, hbar_s, bench, 0.0)?;
    Ok(chain_a_report("chain_a", f, stages, errors, bench))
}

/// `ℏ → 0` at fixed `θ`, then `θ → 0` on the reduced form.
pub fn chain_hbar_then_theta(
    f: &TestFunction,
    hbar_s: &SweepSchedule,
    theta_s: &SweepSchedule,
    bench: &Bench,
) -> Result<LimitReport> {
    ensure!(hbar_s.parameter == SweepParameter::Hbar, "chain B needs an hbar schedule first");
    ensure!(theta_s.parameter == SweepParameter::Theta, "chain B needs a theta schedule second");
    f.require_asymptote_y()?;
    let (ys, grid) = bench.xy_grid();
    let nx = grid.len() / ys.len();
    let th = hbar_s.fixed;
    let red = hbar0_static_reduction(f, &ParamSet::full(bench.m, bench.omega, 1.0, th))?;
    let red_y: Vec<f64> = ys.iter().map(|y| red.eval(y[0], y[1])).collect();

    let (mut var, mut dist, mut e1) = (Vec::new(), Vec::new(), Vec::new());
    for &h in &hbar_s.values {
        let v = bench.smoothed(f, hbar_s.params(bench.m, bench.omega, h), 0.0, &grid)?;
        let mut vmax = 0.0f64;
        let mut dmax = 0.0f64;
        for (i, row) in v.chunks(nx).enumerate() {
            let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
            vmax = sup([vmax, hi - lo]);
            dmax = sup([dmax, sup(row.iter().map(|x| (x - red_y[i]).abs()))]);
        }
        var.push(vmax);
        dist.push(dmax);
        e1.push(sup([vmax, dmax]));
    }
    let s1 = Stage::judged(
        "hbar_to_0",
        &format!("x-independent reduced form at theta = {}", sci(th)),
        hbar_s.clone(),
        e1,
        bench.tolerance,
    )
    .series("x_variation", var)
    .series("distance_to_reduction", dist);

    let asym: Vec<f64> = ys.iter().map(|y| f.asymptote_y(y[0], y[1]).unwrap_or(f64::NAN)).collect();
    let mut e2 = Vec::new();
    for &t in &theta_s.values {
        let r = hbar0_static_reduction(f, &ParamSet::full(bench.m, bench.omega, 1.0, t))?;
        let v: Vec<f64> = ys.iter().map(|y| r.eval(y[0], y[1])).collect();
        e2.push(sup_diff(&v, &asym));
    }
    let s2 = Stage::judged("theta_to_0", "declared asymptote F_inf(y1, y2)", theta_s.with_fixed(0.0), e2, bench.tolerance);
    let probes = grid.iter().map(|p| PhasePoint::from_array(*p)).collect();
    let mut r = LimitReport::from_stages("chain_b", "", probes, vec![s1, s2]);
    r.target_description = format!("F_inf(y1, y2) of '{}'", f.label);
    Ok(r)
}

/// Distances between the two iterated limits of `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    /// `|F(c) − F_∞(c_y)|` at the focus point.
    pub at_center: f64,
    /// Supremum of the same over the probes and the focus point.
    pub sup: f64,
}

/// Gap between the limit objects: `F` (chain A) and `F_∞(y₁,y₂)` (chain B).
pub fn commutation_gap(f: &TestFunction, probes: &[PhasePoint]) -> Result<Gap> {
    f.require_asymptote_y()?;
    let one = |p: &PhasePoint| (f.eval_point(p) - f.asymptote_y(p.y1, p.y2).unwrap_or(f64::NAN)).abs();
    let c = focus_point(f);
    let at_center = one(&c);
    Ok(Gap {
        at_center,
        sup: sup(probes.iter().map(one).chain([at_center])),
    })
}

/// Both chains on the same `F`, plus the gap between their limits.
pub fn noncommutation(
    f: &TestFunction,
    theta_s: &SweepSchedule,
    hbar_a: &SweepSchedule,
    hbar_b: &SweepSchedule,
    bench: &Bench,
) -> Result<(LimitReport, LimitReport, LimitReport)> {
    let a = chain_theta_then_hbar(f, theta_s, hbar_a, bench)?;
    let b = chain_hbar_then_theta(f, hbar_b, theta_s, bench)?;
    let gap = commutation_gap(f, &bench.probes)?;

    // Values actually reached by the last step of each chain.
    let c = focus_point(f);
    let h_last = *hbar_a.values.last().context("empty hbar schedule")?;
    let a_last = bench.smoothed(f, ParamSet::full(bench.m, bench.omega, h_last, 0.0), 0.0, &[c.to_array()])?[0];
    let t_last = *theta_s.values.last().context("empty theta schedule")?;
    let b_last = hbar0_static_reduction(f, &ParamSet::full(bench.m, bench.omega, 1.0, t_last))?.eval(c.y1, c.y2);

    let mut stages = Vec::new();
    for (prefix, rep) in [("chain_a", &a), ("chain_b", &b)] {
        for s in &rep.stages {
            let mut s = s.clone();
            s.name = format!("{prefix}/{}", s.name);
            stages.push(s);
        }
    }
    let mut r = LimitReport::from_stages("noncommutation", "", bench.probes.clone(), stages);
    r.verdict = combine([a.verdict, b.verdict].into_iter());
    r.target_description = format!("gap between F and F_inf for '{}'", f.label);
    r.metrics.insert("gap_at_center".into(), gap.at_center);
    r.metrics.insert("gap_sup".into(), gap.sup);
    r.metrics.insert("gap_numerical_at_center".into(), (a_last - b_last).abs());
    r.metrics.insert("chain_a_limit_at_center".into(), a_last);
    r.metrics.insert("chain_b_limit_at_center".into(), b_last);
    Ok((a, b, r))
}

/// Default evolution times.
pub const DEFAULT_TIMES: [f64; 2] = [FRAC_PI_2 / 2.0, FRAC_PI_2];

/// Chain A composed with the evolution at each `t`: stages and the
/// per-step distance to the classical pullback.
pub fn dynamics_chain_a(
    f: &TestFunction,
    theta_s: &SweepSchedule,
    hbar_s: &SweepSchedule,
    t_values: &[f64],
    bench: &Bench,
) -> Result<(Vec<Stage>, Vec<f64>)> {
    ensure!(!t_values.is_empty(), "no evolution times given");
    let mut stages = Vec::new();
    let mut errors = Vec::new();
    for &t in t_values {
        let (s, e) = chain_a(f, theta_s, hbar_s, bench, t)?;
        // Each time has its own tail.
        let mut last = s.last().cloned().expect("chain A has two stages");
        last.verdict = combine([last.verdict, judge(&e, bench.tolerance)].into_iter());
        stages.extend(s.into_iter().take(1).chain([last]));
        errors.extend(e);
    }
    Ok((stages, errors))
}

pub fn dynamics_a_report(f: &TestFunction, stages: Vec<Stage>, errors: Vec<f64>, bench: &Bench) -> LimitReport {
    let mut a = LimitReport::from_stages("dynamics_a", "", bench.probes.clone(), stages);
    a.errors_per_step = errors;
    a.target_description = format!("classical pullback F(A_{{-t}} r) of '{}'", f.label);
    a
}

/// `ℏ → 0` first for the evolved map: brute-force distance to the reduced
/// form, spread of the reduced form across times, then `θ → 0`.
pub fn dynamics_chain_b(
    f: &TestFunction,
    theta_s: &SweepSchedule,
    hbar_s: &SweepSchedule,
    t_values: &[f64],
    bench: &Bench,
) -> Result<LimitReport> {
    ensure!(!t_values.is_empty(), "no evolution times given");
    ensure!(hbar_s.parameter == SweepParameter::Hbar, "chain B needs an hbar schedule first");
    f.require_asymptote_y2()?;
    let th = hbar_s.fixed;
    let p_red = ParamSet::full(bench.m, bench.omega, 1.0, th);
    let pts = bench.points();
    let mut stages = Vec::new();
    // Brute force only where the rotated first plane sends both x1 and y1 to
    // infinity, i.e. away from multiples of a quarter period.
    for &t in t_values.iter().filter(|t| (2.0 * bench.omega * **t).sin().abs() >= 0.2) {
        let red = hbar0_dynamic_reduction(f, &p_red, t)?;
        let want: Vec<f64> = pts.iter().map(|r| red.eval(r[3])).collect();
        let mut e = Vec::new();
        for &h in &hbar_s.values {
            let v = bench.smoothed(f, hbar_s.params(bench.m, bench.omega, h), t, &pts)?;
            e.push(sup_diff(&v, &want));
        }
        stages.push(Stage::judged(
            &format!("hbar_to_0 (t = {})", sci(t)),
            &format!("reduced form in y2 at theta = {}", sci(th)),
            hbar_s.clone(),
            e,
            bench.tolerance,
        ));
    }
    let outputs: Vec<Vec<f64>> = t_values
        .iter()
        .map(|&t| hbar0_dynamic_reduction(f, &p_red, t).map(|r| pts.iter().map(|p| r.eval(p[3])).collect()))
        .collect::<std::result::Result<_, _>>()?;
    let spread = sup(outputs.iter().map(|o| sup_diff(o, &outputs[0])));
    let bitwise = outputs
        .iter()
        .all(|o| o.iter().zip(&outputs[0]).all(|(x, y)| x.to_bits() == y.to_bits()));

    let asym: Vec<f64> = pts.iter().map(|p| f.asymptote_y2(p[3]).unwrap_or(f64::NAN)).collect();
    let mut e2 = Vec::new();
    for &t in &theta_s.values {
        let r = hbar0_dynamic_reduction(f, &ParamSet::full(bench.m, bench.omega, 1.0, t), t_values[0])?;
        let v: Vec<f64> = pts.iter().map(|p| r.eval(p[3])).collect();
        e2.push(sup_diff(&v, &asym));
    }
    stages.push(Stage::judged("theta_to_0", "declared asymptote F_inf(y2)", theta_s.with_fixed(0.0), e2, bench.tolerance));
    let mut b = LimitReport::from_stages("dynamics_b", "", bench.probes.clone(), stages);
    b.target_description = format!("time-independent F_inf(y2) of '{}'", f.label);
    b.metrics.insert("t_spread".into(), spread);
    b.metrics.insert("t_spread_bitwise_zero".into(), if bitwise { 1.0 } else { 0.0 });
    if !bitwise {
        b.verdict = Verdict::Diverged;
    }
    Ok(b)
}

/// Both dynamics chains.
pub fn dynamics_chain_reports(
    f: &TestFunction,
    theta_s: &SweepSchedule,
    hbar_a: &SweepSchedule,
    hbar_b: &SweepSchedule,
    t_values: &[f64],
    bench: &Bench,
) -> Result<(LimitReport, LimitReport)> {
    let (s, e) = dynamics_chain_a(f, theta_s, hbar_a, t_values, bench)?;
    let a = dynamics_a_report(f, s, e, bench);
    Ok((a, dynamics_chain_b(f, theta_s, hbar_b, t_values, bench)?))
}

/// Sample arguments for the function-valued asymptotes.
const FG_POINTS: [(f64, f64); 3] = [(1.0, 0.0), (0.0, 1.0), (0.6, -0.8)];

fn rel(exact: f64, asym: f64) -> f64 {
    ((exact - asym) / asym).abs()
}

type Probe = dyn Fn(&ParamSet) -> Result<f64>;

fn closed_form_stage(name: &str, target: &str, schedule: &SweepSchedule, m: f64, omega: f64, err: &Probe) -> Result<Stage> {
    let errors = schedule
        .values
        .iter()
        .map(|&v| err(&schedule.params(m, omega, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Stage::judged(name, target, schedule.clone(), errors, CLOSED_FORM_TOL))
}

fn ratio_err(qs: &'static [Quantity], dir: Direction) -> Box<Probe> {
    Box::new(move |p| {
        let mut e = 0.0f64;
        for &q in qs {
            e = e.max((asymptote_ratio(p, q, dir)? - 1.0).abs());
        }
        Ok(e)
    })
}

/// Evaluation time for the matrix asymptotes.
const MATRIX_T: f64 = 1.0;

/// One report per appendix asymptote. `theta_s` runs at `ℏ = theta_s.fixed`,
/// `hbar_s` at `θ = hbar_s.fixed`.
pub fn appendix_report(m: f64, omega: f64, theta_s: &SweepSchedule, hbar_s: &SweepSchedule) -> Result<Vec<LimitReport>> {
    use Direction::{HbarTo0, ThetaTo0};
    use Quantity::*;
    let th = |name: &str, target: &str, e: Box<Probe>| closed_form_stage(name, target, theta_s, m, omega, &*e);
    let hb = |name: &str, target: &str, e: Box<Probe>| closed_form_stage(name, target, hbar_s, m, omega, &*e);

    let f_theta: Box<Probe> = Box::new(|p| {
        let d = derive(p)?;
        let d0 = derive(&p.with_theta(0.0))?;
        Ok(sup(FG_POINTS.iter().map(|&(a, b)| rel(f_fun(&d, a, b), f_fun(&d0, a, b)))))
    });
    let f_hbar: Box<Probe> = Box::new(|p| {
        let d = derive(p)?;
        Ok(sup(FG_POINTS.iter().map(|&(a, b)| rel(f_fun(&d, a, b), f_hbar0(p, a, b)))))
    });
    let g_theta: Box<Probe> = Box::new(|p| {
        let d = derive(p)?;
        let d0 = derive(&p.with_theta(0.0))?;
        Ok(sup(FG_POINTS.iter().map(|&(a, b)| rel(g_fun(&d, a, b), g_fun(&d0, a, b)))))
    });
    let g_hbar: Box<Probe> = Box::new(|p| {
        let d = derive(p)?;
        Ok(sup(FG_POINTS.iter().map(|&(a, b)| rel(g_fun(&d, a, b), g_hbar0(p, a, b)))))
    });
    let a_theta: Box<Probe> = Box::new(|p| {
        let d = derive(p)?;
        Ok(evolution(&d, MATRIX_T).a_t.max_abs_diff(&evolution_theta0(p.omega, MATRIX_T).a_t))
    });
    let a_hbar: Box<Probe> = Box::new(|p| {
        let d = derive(p)?;
        Ok(evolution(&d, MATRIX_T).a_t.max_abs_diff(&evolution_hbar0(p.omega, MATRIX_T).a_t))
    });

    let specs: Vec<(&str, &str, Vec<Stage>)> = vec![
        ("A1", "lambda_pm / (m omega hbar) -> 1", vec![th("theta_to_0", "m omega hbar", ratio_err(&[LambdaPlus, LambdaMinus], ThetaTo0))?]),
        ("A2", "(lambda_+ + lambda_-) / (2 m omega hbar) -> 1", vec![th("theta_to_0", "2 m omega hbar", ratio_err(&[SumLambda], ThetaTo0))?]),
        ("A3", "mu / hbar -> 1", vec![th("theta_to_0", "hbar", ratio_err(&[Mu], ThetaTo0))?]),
        ("A4", "K_pm / (4 m omega hbar) -> 1", vec![th("theta_to_0", "4 m omega hbar", ratio_err(&[KPlus, KMinus], ThetaTo0))?]),
        ("A5", "lambda_+ / (m^2 omega^2 theta) -> 1", vec![hb("hbar_to_0", "m^2 omega^2 theta", ratio_err(&[LambdaPlus], HbarTo0))?]),
        ("A6", "lambda_- / (hbar^2 / theta) -> 1", vec![hb("hbar_to_0", "hbar^2 / theta", ratio_err(&[LambdaMinus], HbarTo0))?]),
        ("A7", "(lambda_+ + lambda_-) / (m^2 omega^2 theta) -> 1", vec![hb("hbar_to_0", "m^2 omega^2 theta", ratio_err(&[SumLambda], HbarTo0))?]),
        ("A8", "mu / (m omega theta) -> 1", vec![hb("hbar_to_0", "m omega theta", ratio_err(&[Mu], HbarTo0))?]),
        ("A9", "K_+ / (2 m^4 omega^4 theta^3 / hbar^2) -> 1", vec![hb("hbar_to_0", "2 m^4 omega^4 theta^3 / hbar^2", ratio_err(&[KPlus], HbarTo0))?]),
        ("A10", "K_- / (2 hbar^2 / theta) -> 1", vec![hb("hbar_to_0", "2 hbar^2 / theta", ratio_err(&[KMinus], HbarTo0))?]),
        ("A13", "gamma_pm -> 1/2 (theta -> 0) and (1 +- 1/sqrt 2)/2 (hbar -> 0)", vec![
            th("theta_to_0", "1/2", ratio_err(&[GammaPm], ThetaTo0))?,
            hb("hbar_to_0", "(1 + 1/sqrt 2)/2", ratio_err(&[GammaPm], HbarTo0))?,
        ]),
        ("A14", "f_{hbar,theta} -> f_{hbar,0} and f_{0,theta}", vec![
            th("theta_to_0", "sqrt(hbar / m omega)(x + y)", f_theta)?,
            hb("hbar_to_0", "(m omega / 2)(theta^{3/2} / hbar)(x / sqrt g+ + y / sqrt g-)", f_hbar)?,
        ]),
        ("A15", "g_{hbar,theta} -> g_{hbar,0} and g_{0,theta}", vec![
            th("theta_to_0", "sqrt(m omega hbar)(x - y)", g_theta)?,
            hb("hbar_to_0", "m omega sqrt(theta / 2)(x / sqrt g+ - y / sqrt g-)", g_hbar)?,
        ]),
        ("A20", "omega_pm / omega -> 1", vec![th("theta_to_0", "omega", ratio_err(&[OmegaPlus, OmegaMinus], ThetaTo0))?]),
        ("A21", "A_t -> rotation at omega in both planes", vec![th("theta_to_0", "A_t^{hbar,0}", a_theta)?]),
        ("A22", "omega_+ / omega -> 1", vec![hb("hbar_to_0", "omega", ratio_err(&[OmegaPlus], HbarTo0))?]),
        ("A23", "omega_- / (omega hbar^2 / (m^2 omega^2 theta^2)) -> 1", vec![hb("hbar_to_0", "omega hbar^2 / (m^2 omega^2 theta^2)", ratio_err(&[OmegaMinus], HbarTo0))?]),
        ("A24", "A_t -> rotation in the first plane, second plane frozen", vec![hb("hbar_to_0", "A_t^{0,theta}", a_hbar)?]),
    ];
    Ok(specs
        .into_iter()
        .map(|(label, target, stages)| {
            let mut r = LimitReport::from_stages(label, target, Vec::new(), stages);
            r.tolerance = CLOSED_FORM_TOL;
            r
        })
        .collect())
}

/// Log-log slopes of Wigner widths: the 1-dof family against `ℏ`, the `ℏ → 0`
/// marginal against `θ`, and the `x`-width of the 4D function against `ℏ` at
/// `θ = hbar_s.fixed`.
pub fn localization_report(m: f64, omega: f64, theta_s: &SweepSchedule, hbar_s: &SweepSchedule) -> Result<LimitReport> {
    let w1: Vec<f64> = hbar_s
        .values
        .iter()
        .map(|&h| Ok(localization_widths(&wigner_1dof_gaussian(h, 0.0, 0.0)?)[0]))
        .collect::<Result<_>>()?;
    let w2: Vec<f64> = theta_s
        .values
        .iter()
        .map(|&t| Ok(localization_widths(&wigner_marginal_hbar0(&ParamSet::full(m, omega, 1.0, t), [0.0, 0.0])?)[0]))
        .collect::<Result<_>>()?;
    let w3: Vec<f64> = hbar_s
        .values
        .iter()
        .map(|&h| {
            let d = derive(&hbar_s.params(m, omega, h))?;
            let pm = build(&d)?;
            Ok(localization_widths(&wigner_4d(&pm, &PhasePoint::ORIGIN)?)[0])
        })
        .collect::<Result<_>>()?;
    let s1 = loglog_slope(&hbar_s.values, &w1).unwrap_or(f64::NAN);
    let s2 = loglog_slope(&theta_s.values, &w2).unwrap_or(f64::NAN);
    let s3 = loglog_slope(&hbar_s.values, &w3).unwrap_or(f64::NAN);
    let slope_stage = |name: &str, target: &str, sch: SweepSchedule, w: Vec<f64>, slope: f64| {
        let ok = (slope - 0.5).abs() <= SLOPE_TOL && w.windows(2).all(|p| p[1] < p[0]);
        Stage {
            name: name.into(),
            target_description: target.into(),
            schedule: sch,
            errors: w,
            series: BTreeMap::new(),
            fitted_rate: Some(slope),
            tolerance: SLOPE_TOL,
            verdict: if ok { Verdict::Converged } else { Verdict::Diverged },
        }
    };
    let x_stage = Stage {
        name: "wigner_4d_x_width".into(),
        target_description: "x-width at fixed theta; grows as hbar -> 0".into(),
        schedule: hbar_s.clone(),
        errors: w3,
        series: BTreeMap::new(),
        fitted_rate: Some(s3),
        tolerance: 0.0,
        verdict: if s3 < 0.0 { Verdict::Converged } else { Verdict::Diverged },
    };
    let stages = vec![
        slope_stage("wigner_1dof", "width sqrt(hbar / 2) -> 0", hbar_s.with_fixed(0.0), w1, s1),
        slope_stage("marginal_hbar0", "width m omega sqrt(theta / 2) -> 0", theta_s.with_fixed(0.0), w2, s2),
        x_stage,
    ];
    let mut r = LimitReport::from_stages("localization", "Dirac localisation of the Wigner functions", Vec::new(), stages);
    r.tolerance = SLOPE_TOL;
    r.metrics.insert("slope_1dof_vs_hbar".into(), s1);
    r.metrics.insert("slope_marginal_vs_theta".into(), s2);
    r.metrics.insert("slope_4d_x_width_vs_hbar".into(), s3);
    r.metrics.insert("x_width_diverges".into(), if s3 < 0.0 { 1.0 } else { 0.0 });
    Ok(r)
}

/// Sequential sweeps replaced by the linked path `θ = c·ℏ`. No claim attached.
pub fn diagonal_report(f: &TestFunction, hbar_s: &SweepSchedule, ratio: f64, bench: &Bench) -> Result<LimitReport> {
    ensure!(ratio > 0.0 && ratio.is_finite(), "the diagonal ratio must be positive");
    let pts = bench.points();
    let target: Vec<f64> = pts.iter().map(|r| f.eval(r)).collect();
    let mut e = Vec::new();
    for &h in &hbar_s.values {
        let v = bench.smoothed(f, ParamSet::full(bench.m, bench.omega, h, ratio * h), 0.0, &pts)?;
        e.push(sup_diff(&v, &target));
    }
    // `fixed` carries the ratio c.
    let s = Stage::judged("linked", &format!("F along theta = {ratio} hbar"), hbar_s.with_fixed(ratio), e, bench.tolerance);
    let mut r = LimitReport::from_stages("diagonal", "", bench.probes.clone(), vec![s]);
    r.target_description = format!("'{}' along the linked path theta = {ratio} hbar", f.label);
    r.exploratory = true;
    r.metrics.insert("ratio".into(), ratio);
    Ok(r)
}

/// Orthogonality defect of `Ĵh` for the `g` in use and for the printed `g`,
/// along the diagonal `ℏ = θ` of `schedule`.
pub fn isometry_report(m: f64, omega: f64, schedule: &SweepSchedule) -> Result<LimitReport> {
    let tol = 1e-8;
    let mut used = Vec::new();
    let mut printed = Vec::new();
    let mut printed_g_ratio = Vec::new();
    for &v in &schedule.values {
        let p = ParamSet::full(m, omega, v, v);
        let d = derive(&p)?;
        let pm = build(&d)?;
        used.push(pm.isometry_defect());
        printed.push(orthogonality_defect(&pm.j.matmul(&h_matrix_printed(&d))));
        printed_g_ratio.push(g_fun_printed(&d, 1.0, 0.0) / g_fun(&d, 1.0, 0.0));
    }
    let stage = Stage::judged("diagonal", "orthogonal J h", schedule.with_fixed(0.0), used, tol)
        .series("printed_g_defect", printed.clone())
        .series("printed_over_used_g", printed_g_ratio);
    // Converged means "below tolerance everywhere", not a shrinking error.
    let all_ok = stage.errors.iter().all(|e| *e < tol);
    let mut r = LimitReport::from_stages("isometry", "J h orthogonal", Vec::new(), vec![stage]);
    r.verdict = if all_ok { Verdict::Converged } else { Verdict::Diverged };
    r.tolerance = tol;
    r.metrics.insert("max_defect".into(), sup(r.errors_per_step.iter().copied()));
    r.metrics.insert("max_defect_printed_g".into(), sup(printed));
    Ok(r)
}

/// `F_{ℏ,θ}(1) = 1` across a square grid of `(ℏ, θ)` built from `schedule`.
pub fn unitality_report(m: f64, omega: f64, schedule: &SweepSchedule, bench: &Bench) -> Result<LimitReport> {
    let one = TestFunction::constant(1.0);
    let pts = bench.points();
    let mut errs = Vec::new();
    for &h in &schedule.values {
        let mut e = 0.0f64;
        for &t in &schedule.values {
            let v = bench.smoothed(&one, ParamSet::full(m, omega, h, t), 0.0, &pts)?;
            e = sup([e, sup(v.iter().map(|x| (x - 1.0).abs()))]);
        }
        errs.push(e);
    }
    let tol = 1e-12;
    let ok = errs.iter().all(|e| *e <= tol);
    let s = Stage::judged("grid", "constant 1", schedule.clone(), errs, tol);
    let mut r = LimitReport::from_stages("unitality", "F = 1 maps to 1", bench.probes.clone(), vec![s]);
    r.verdict = if ok { Verdict::Converged } else { Verdict::Diverged };
    Ok(r)
}

/// Tensor rule against the closed-form oracle on every probe, and both
/// Monte Carlo forms against the oracle on every `mc_stride`-th probe.
pub fn oracle_report(
    f: &TestFunction,
    p: &ParamSet,
    probes: &[PhasePoint],
    order: usize,
    mc: QuadratureRule,
    mc_stride: usize,
) -> Result<LimitReport> {
    let d = derive(p)?;
    let pm = build(&d)?;
    let tensor = Smoother::new(QuadratureRule::tensor(order))?.smooth(f, &d, &pm)?;
    let pts: Vec<[f64; 4]> = probes.iter().map(|q| q.to_array()).collect();
    let exact: Vec<f64> = pts
        .iter()
        .map(|r| tensor.closed_form(r).context("this test function has no closed form"))
        .collect::<Result<_>>()?;
    let quad: Vec<f64> = pts.par_iter().map(|r| tensor.eval(r)).collect();
    let err = sup_diff(&quad, &exact);

    let mcs = Smoother::new(mc)?;
    let shift = mcs.smooth(f, &d, &pm)?;
    let kernel = mcs.smooth_kernel_form(f, &d, &pm)?;
    let z = |est: ncphase_core::Estimate, want: f64| {
        let dev = (est.value - want).abs();
        if est.std_error > 0.0 {
            dev / est.std_error
        } else if dev == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let picks: Vec<usize> = (0..pts.len()).step_by(mc_stride.max(1)).collect();
    let zs: Vec<(f64, f64)> = picks
        .par_iter()
        .map(|&i| (z(shift.eval_with_error(&pts[i]), exact[i]), z(kernel.eval_with_error(&pts[i]), exact[i])))
        .collect();
    let z_shift = sup(zs.iter().map(|z| z.0));
    let z_kernel = sup(zs.iter().map(|z| z.1));

    let tol = 1e-8;
    let schedule = SweepSchedule {
        parameter: SweepParameter::Hbar,
        values: vec![p.hbar],
        fixed: p.theta,
    };
    let stage = Stage::judged("tensor_vs_closed_form", "closed-form Gaussian expectation", schedule, vec![err], tol);
    let mut r = LimitReport::from_stages("oracle", "", probes.to_vec(), vec![stage]);
    r.target_description = format!("closed form of '{}' at hbar = {}, theta = {}", f.label, p.hbar, p.theta);
    let ok = err < tol && z_shift <= 3.0 && z_kernel <= 3.0;
    r.verdict = if ok { Verdict::Converged } else { Verdict::Diverged };
    r.metrics.insert("tensor_order".into(), order as f64);
    r.metrics.insert("tensor_sup_error".into(), err);
    r.metrics.insert("mc_probes".into(), picks.len() as f64);
    r.metrics.insert("mc_max_z_shift_form".into(), z_shift);
    r.metrics.insert("mc_max_z_kernel_form".into(), z_kernel);
    Ok(r)
}

/// Normalisation of the 4D Wigner function and of its exact and `ℏ → 0`
/// marginals at `p`, by Gauss–Hermite quadrature in the eigenbasis.
pub fn wigner_mass_report(p: &ParamSet, order: usize) -> Result<LimitReport> {
    let d = derive(p)?;
    let pm = build(&d)?;
    let w4 = wigner_4d(&pm, &PhasePoint::ORIGIN)?;
    let wm = ncphase_core::wigner::wigner_marginal_y(&d, &pm, [0.0, 0.0])?;
    let mut errors = vec![(w4.total_mass(order) - 1.0).abs(), (wm.total_mass(order) - 1.0).abs()];
    let mut names = vec!["wigner_4d", "marginal"];
    if p.theta > 0.0 {
        let wr = wigner_marginal_hbar0(p, [0.0, 0.0])?;
        errors.push((wr.total_mass(order) - 1.0).abs());
        names.push("marginal_hbar0");
    }
    let tol = 1e-6;
    let ok = errors.iter().all(|e| *e < tol);
    let stages: Vec<Stage> = names
        .iter()
        .zip(&errors)
        .map(|(n, e)| {
            let sch = SweepSchedule {
                parameter: SweepParameter::Hbar,
                values: vec![p.hbar],
                fixed: p.theta,
            };
            Stage::judged(n, "unit total mass", sch, vec![*e], tol)
        })
        .collect();
    let mut r = LimitReport::from_stages("wigner_marginal", "unit total mass", Vec::new(), stages);
    r.verdict = if ok { Verdict::Converged } else { Verdict::Diverged };
    r.metrics.insert(
        "marginal_precision_over_hbar0_precision".into(),
        ncphase_core::wigner::marginal_precision(&d, &pm) * p.m_omega() * p.m_omega() * p.theta / 2.0,
    );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_schedule() {
        let s = SweepSchedule::geometric(SweepParameter::Theta, -1, -6, 0.1);
        assert_eq!(s.values.len(), 6);
        assert_eq!(s.values[0], 0.1);
        assert_eq!(s.values[5], 1e-6);
        assert!(s.validate().is_ok());
        let bad = SweepSchedule { values: vec![1e-2, 1e-1], ..s.clone() };
        assert!(bad.validate().unwrap_err().contains("decreasing"));
        let bad = SweepSchedule { values: vec![1e-1, -1.0], ..s };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn judge_rules() {
        assert_eq!(judge(&[1e-1, 1e-2, 1e-3, 1e-4], 1e-2), Verdict::Converged);
        assert_eq!(judge(&[1e-1, 1e-3, 1e-4, 2e-4], 1e-2), Verdict::Inconclusive);
        assert_eq!(judge(&[1e-1, 1e-14, 1e-13, 1e-15], 1e-2), Verdict::Converged);
        assert_eq!(judge(&[1e-1, 1e-3, 6.58e-8, 6.59e-8], 1e-2), Verdict::Converged);
        assert_eq!(judge(&[1e-1, 1e-3, 2e-6, 3e-6], 1e-2), Verdict::Inconclusive);
        assert_eq!(judge(&[1e-3, 1e-2, 1e-1], 1e-2), Verdict::Diverged);
        assert_eq!(judge(&[1e-3, f64::NAN], 1e-2), Verdict::Diverged);
        assert_eq!(judge(&[], 1e-2), Verdict::Inconclusive);
    }

    #[test]
    fn rate_of_power_law() {
        let x = [1e-1, 1e-2, 1e-3, 1e-4];
        let e: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v * v).collect();
        assert!((fitted_rate(&x, &e).unwrap() - 2.0).abs() < 1e-12);
        assert!(fitted_rate(&x, &[0.0; 4]).is_none());
    }

    #[test]
    fn sup_propagates_nan() {
        assert!(sup([1.0, f64::NAN, 2.0]).is_nan());
        assert_eq!(sup([1.0, 3.0, 2.0]), 3.0);
    }

    #[test]
    fn appendix_converges() {
        let reps = appendix_report(1.0, 1.0, &SweepSchedule::geometric(SweepParameter::Theta, -1, -6, 1.0), &SweepSchedule::default_hbar()).unwrap();
        assert_eq!(reps.len(), 18);
        for r in &reps {
            assert_eq!(r.verdict, Verdict::Converged, "{} {:?}", r.experiment, r.errors_per_step);
            assert_eq!(r.errors_per_step.len(), r.total_steps());
        }
    }

    #[test]
    fn localization_slopes() {
        let r = localization_report(1.0, 1.0, &SweepSchedule::default_theta(), &SweepSchedule::default_hbar()).unwrap();
        assert!((r.metrics["slope_1dof_vs_hbar"] - 0.5).abs() < 1e-12);
        assert!((r.metrics["slope_marginal_vs_theta"] - 0.5).abs() < 1e-12);
        assert!(r.metrics["slope_4d_x_width_vs_hbar"] < 0.0);
        assert_eq!(r.verdict, Verdict::Converged);
    }

    #[test]
    fn gap_vanishes_on_constants() {
        let probes = ncphase_core::probes::probe_cloud(&Default::default());
        let g = commutation_gap(&TestFunction::constant(1.0), &probes).unwrap();
        assert_eq!(g.sup, 0.0);
        let bump = TestFunction::gaussian_bump(PhasePoint::ORIGIN, [1.0; 4]).unwrap();
        assert_eq!(commutation_gap(&bump, &probes).unwrap().at_center, 1.0);
    }

    #[test]
    fn isometry_used_vs_printed() {
        let r = isometry_report(1.0, 1.0, &SweepSchedule::geometric(SweepParameter::Hbar, 0, -3, 0.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Converged);
        assert!(r.metrics["max_defect_printed_g"] > 0.1);
    }
}
