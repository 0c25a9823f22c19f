use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ncphase::config::{default_functions, ExperimentKind, ExperimentSpec, RunConfig};
use ncphase::families::{bind, Family};
use ncphase::limits::{self, LimitReport};
use ncphase::report::{linspace, sci, Grid};
use ncphase::{run, svg};
use ncphase_core::dynamics::{evolution, evolution_hbar0, evolution_theta0};
use ncphase_core::params::{asymptote_pair, Direction, Quantity};
use ncphase_core::probes::{probe_cloud, ProbeSpec};
use ncphase_core::{build, derive, ParamSet, PhasePoint, QuadratureRule, Smoother, TestFunction};

#[derive(Parser)]
#[command(name = "ncphase", version, about = "Classical limits of a non-commutative oscillator in phase space")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
}

impl ParamArgs {
    fn params(self) -> ParamSet {
        ParamSet::full(self.m, self.omega, self.hbar, self.theta)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Exact,
    Theta0,
    Hbar0,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    #[value(name = "theta-to-0")]
    ThetaTo0,
    #[value(name = "hbar-to-0")]
    HbarTo0,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every experiment of a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the derived parameters as JSON.
    Derive(ParamArgs),
    /// Evaluate a smoothed test function on probe points (CSV to stdout).
    Smooth {
        #[command(flatten)]
        params: ParamArgs,
        /// Built-in label (bump, sigmoid, saturating, constant) or a JSON object.
        #[arg(long, default_value = "bump")]
        function: String,
        /// CSV file with columns x1,x2,y1,y2; defaults to a Halton cloud.
        #[arg(long)]
        probes: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 24)]
        order: usize,
        /// Use Monte Carlo with this many samples instead of the tensor rule.
        #[arg(long)]
        mc_samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluate through the overlap kernel (Monte Carlo only).
        #[arg(long)]
        kernel: bool,
        /// Compose with the evolution `A_{-t}`.
        #[arg(long, default_value_t = 0.0)]
        t: f64,
    },
    /// Evaluate a Wigner family at a point or on a grid.
    Wigner {
        #[arg(long, value_enum)]
        family: Family,
        #[command(flatten)]
        params: ParamArgs,
        /// Centre r0 as x1,x2,y1,y2.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.0, 0.0, 0.0])]
        center: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        /// Single point a,b in the family's plane; prints one value.
        #[arg(long, value_delimiter = ',')]
        at: Option<Vec<f64>>,
        /// Grid points per axis.
        #[arg(long, default_value_t = 81)]
        points: usize,
        /// Grid half-width; defaults to four standard deviations.
        #[arg(long)]
        half_width: Option<f64>,
        /// Write grid.csv here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the evolution matrix A_t.
    Dynamics {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, value_enum, default_value = "exact")]
        regime: RegimeArg,
    },
    /// Run one limit experiment with default settings and print its reports.
    Sweep {
        #[arg(long, value_enum)]
        experiment: SweepKind,
        #[arg(long)]
        function: Option<String>,
        #[arg(long, default_value_t = 24)]
        order: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, value_delimiter = ',')]
        t_values: Option<Vec<f64>>,
        /// Also write report.json and errors.csv under this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ratio of a derived quantity to its asymptote, or the appendix table.
    Asymptotics {
        #[arg(long, value_enum)]
        quantity: Option<QuantityArg>,
        #[arg(long, value_enum, default_value = "hbar-to-0")]
        direction: DirectionArg,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Render a grid.csv to SVG.
    Heatmap {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "")]
        title: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    ChainA,
    ChainB,
    Noncommutation,
    DynamicsA,
    DynamicsB,
    Localization,
    Diagonal,
}

impl SweepKind {
    fn kind(self) -> ExperimentKind {
        match self {
            SweepKind::ChainA => ExperimentKind::ChainA,
            SweepKind::ChainB => ExperimentKind::ChainB,
            SweepKind::Noncommutation => ExperimentKind::Noncommutation,
            SweepKind::DynamicsA => ExperimentKind::DynamicsA,
            SweepKind::DynamicsB => ExperimentKind::DynamicsB,
            SweepKind::Localization => ExperimentKind::Localization,
            SweepKind::Diagonal => ExperimentKind::Diagonal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
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

impl QuantityArg {
    fn quantity(self) -> Quantity {
        match self {
            QuantityArg::LambdaPlus => Quantity::LambdaPlus,
            QuantityArg::LambdaMinus => Quantity::LambdaMinus,
            QuantityArg::SumLambda => Quantity::SumLambda,
            QuantityArg::Mu => Quantity::Mu,
            QuantityArg::KPlus => Quantity::KPlus,
            QuantityArg::KMinus => Quantity::KMinus,
            QuantityArg::OmegaPlus => Quantity::OmegaPlus,
            QuantityArg::OmegaMinus => Quantity::OmegaMinus,
            QuantityArg::GammaPm => Quantity::GammaPm,
        }
    }
}

/// Failure classes mapped to exit codes.
enum Failure {
    /// Bad input: exit 2.
    Usage(anyhow::Error),
    /// Runtime error: exit 1.
    Runtime(anyhow::Error),
    /// A verdict other than converged: exit 1.
    Verdict,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Runtime(e.into())
    }
}

fn usage<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(Failure::Usage)
}

fn parse_function(spec: &str) -> Result<TestFunction> {
    if spec.trim_start().starts_with('{') {
        let f: TestFunction = serde_json::from_str(spec).context("function JSON")?;
        f.validate()?;
        return Ok(f);
    }
    default_functions()
        .into_iter()
        .find(|f| f.label == spec)
        .with_context(|| format!("unknown function '{spec}' (expected bump, sigmoid, saturating, constant or a JSON object)"))
}

fn read_probes(path: &PathBuf) -> Result<Vec<PhasePoint>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (n, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 4 {
            bail!("probe row {} has {} columns, expected 4", n + 2, rec.len());
        }
        let mut c = [0.0; 4];
        for (k, v) in c.iter_mut().enumerate() {
            *v = rec[k].trim().parse().with_context(|| format!("probe row {}: bad number", n + 2))?;
        }
        out.push(PhasePoint::from_array(c));
    }
    Ok(out)
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn dispatch(cmd: Cmd) -> std::result::Result<(), Failure> {
    match cmd {
        Cmd::Run { config } => {
            let cfg = RunConfig::load(&config).map_err(|e| Failure::Usage(e.into()))?;
            if !run::run(&cfg)? {
                return Err(Failure::Verdict);
            }
        }
        Cmd::Derive(p) => {
            let d = usage(derive(&p.params()).map_err(Into::into))?;
            print_json(&d)?;
        }
        Cmd::Smooth {
            params,
            function,
            probes,
            count,
            order,
            mc_samples,
            seed,
            kernel,
            t,
        } => {
            let f = usage(parse_function(&function))?;
            let rule = match (mc_samples, seed) {
                (Some(n), Some(s)) => QuadratureRule::monte_carlo(n, s),
                (Some(_), None) => return Err(Failure::Usage(anyhow::anyhow!("--mc-samples needs --seed"))),
                (None, _) => QuadratureRule::tensor(order),
            };
            let d = usage(derive(&params.params()).map_err(Into::into))?;
            let pm = build(&d)?;
            let sm = usage(Smoother::new(rule).map_err(Into::into))?;
            let sf = if kernel {
                usage(sm.smooth_kernel_form(&f, &d, &pm).map_err(Into::into))?
            } else if t != 0.0 {
                sm.smooth_evolved(&f, &d, &pm, &evolution(&d, -t).a_t)?
            } else {
                sm.smooth(&f, &d, &pm)?
            };
            let pts = match probes {
                Some(path) => usage(read_probes(&path))?,
                None => probe_cloud(&ProbeSpec { count, ..ProbeSpec::default() }),
            };
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(["x1", "x2", "y1", "y2", "value", "std_error"])?;
            for p in &pts {
                let e = sf.eval_with_error(&p.to_array());
                w.write_record([sci(p.x1), sci(p.x2), sci(p.y1), sci(p.y2), sci(e.value), sci(e.std_error)])?;
            }
            w.flush()?;
        }
        Cmd::Wigner {
            family,
            params,
            center,
            t,
            at,
            points,
            half_width,
            out,
        } => {
            if center.len() != 4 {
                return Err(Failure::Usage(anyhow::anyhow!("--center needs four comma-separated numbers")));
            }
            if at.as_ref().is_some_and(|a| a.len() != 2) {
                return Err(Failure::Usage(anyhow::anyhow!("--at needs two comma-separated numbers")));
            }
            let r0 = PhasePoint::new(center[0], center[1], center[2], center[3]);
            let b = usage(bind(family, &params.params(), &r0, t))?;
            if let Some(ab) = at {
                println!("{}", sci(b.eval(ab[0], ab[1])));
                return Ok(());
            }
            if points < 2 {
                return Err(Failure::Usage(anyhow::anyhow!("--points must be at least 2")));
            }
            let h = half_width.unwrap_or(4.0 * b.width);
            let (xl, yl) = family.axes();
            let ys = if family == Family::Final1d { vec![0.0] } else { linspace(b.center[1] - h, b.center[1] + h, points) };
            let g = Grid::tabulate(xl, yl, linspace(b.center[0] - h, b.center[0] + h, points), ys, |x, y| b.eval(x, y));
            let text = g.to_csv()?;
            match out {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
        }
        Cmd::Dynamics { params, t, regime } => {
            let p = params.params();
            let ev = match regime {
                RegimeArg::Exact => evolution(&usage(derive(&p).map_err(Into::into))?, t),
                RegimeArg::Theta0 => evolution_theta0(p.omega, t),
                RegimeArg::Hbar0 => evolution_hbar0(p.omega, t),
            };
            // Print signed zeros as plain zeros.
            let mut ev = ev;
            ev.a_t.0.iter_mut().flatten().for_each(|x| *x += 0.0);
            print_json(&ev)?;
        }
        Cmd::Sweep {
            experiment,
            function,
            order,
            count,
            t_values,
            out,
        } => {
            let mut spec = ExperimentSpec::bare(experiment.kind());
            let mut functions = default_functions();
            if let Some(text) = function {
                let f = usage(parse_function(&text))?;
                spec.function = Some(f.label.clone());
                functions.retain(|g| g.label != f.label);
                functions.insert(0, f);
            }
            spec.t_values = t_values;
            let cfg = json!({
                "quadrature": QuadratureRule::tensor(order),
                "probes": ProbeSpec { count, ..ProbeSpec::default() },
                "test_functions": functions,
                "outputs": out.clone().unwrap_or_else(|| PathBuf::from(".")),
                "experiments": [spec],
            });
            let cfg = RunConfig::from_json(&cfg.to_string()).map_err(|e| Failure::Usage(e.into()))?;
            let reports = match out {
                Some(_) => run::run_experiment(&cfg, &cfg.experiments[0])?.reports,
                None => {
                    let tmp = std::env::temp_dir().join(format!("ncphase-sweep-{}", std::process::id()));
                    let cfg = RunConfig { outputs: tmp.clone(), ..cfg };
                    let r = run::run_experiment(&cfg, &cfg.experiments[0]);
                    let _ = fs::remove_dir_all(&tmp);
                    r?.reports
                }
            };
            print_json(&reports)?;
            if !reports.iter().all(LimitReport::passes) {
                return Err(Failure::Verdict);
            }
        }
        Cmd::Asymptotics {
            quantity,
            direction,
            params,
        } => {
            if let Some(q) = quantity {
                let dir = match direction {
                    DirectionArg::ThetaTo0 => Direction::ThetaTo0,
                    DirectionArg::HbarTo0 => Direction::HbarTo0,
                };
                let q = q.quantity();
                let (exact, asym) = usage(asymptote_pair(&params.params(), q, dir).map_err(Into::into))?;
                print_json(&json!({
                    "quantity": q.name(),
                    "direction": dir.name(),
                    "exact": exact,
                    "asymptote": asym,
                    "ratio": exact / asym,
                }))?;
            } else {
                let theta = limits::SweepSchedule::default_theta().with_fixed(1.0);
                let reports = limits::appendix_report(params.m, params.omega, &theta, &limits::SweepSchedule::default_hbar())?;
                let mut out = std::io::stdout().lock();
                writeln!(out, "{:<5} {:<12} {:>24} {:>10}", "label", "verdict", "final_error", "rate")?;
                for r in &reports {
                    let last = r.errors_per_step.last().copied().unwrap_or(f64::NAN);
                    let rate = r.fitted_rate.map_or("-".to_string(), |x| format!("{x:.3}"));
                    writeln!(out, "{:<5} {:<12} {:>24} {:>10}", r.experiment, format!("{:?}", r.verdict).to_lowercase(), sci(last), rate)?;
                }
                if !reports.iter().all(LimitReport::passes) {
                    return Err(Failure::Verdict);
                }
            }
        }
        Cmd::Heatmap { input, output, title } => {
            let text = usage(fs::read_to_string(&input).with_context(|| format!("reading {}", input.display())))?;
            let g = usage(Grid::from_csv(&text))?;
            fs::write(&output, svg::render(&g, &title)).with_context(|| format!("writing {}", output.display()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("NCPHASE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => {
            eprintln!("ncphase: at least one report did not converge");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            // A closed stdout (e.g. `| head`) is not an error.
            let broken_pipe = e.chain().any(|c| {
                c.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
            });
            if broken_pipe {
                return ExitCode::SUCCESS;
            }
            eprintln!("ncphase: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("ncphase: {e:#}");
            ExitCode::from(2)
        }
    }
}
