//! JSON run configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use ncphase_core::probes::ProbeSpec;
use ncphase_core::quadrature::DEFAULT_BUDGET_CAP;
use ncphase_core::{ParamSet, PhasePoint, QuadratureRule, TestFunction};

use crate::limits::{SweepParameter, SweepSchedule};

/// A configuration problem, reported with the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error in `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Appendix,
    ChainA,
    ChainB,
    Noncommutation,
    DynamicsA,
    DynamicsB,
    Localization,
    Isometry,
    Unitality,
    Oracle,
    Diagonal,
    WignerMarginal,
}

impl ExperimentKind {
    pub fn id(self) -> &'static str {
        match self {
            ExperimentKind::Appendix => "appendix",
            ExperimentKind::ChainA => "chain_a",
            ExperimentKind::ChainB => "chain_b",
            ExperimentKind::Noncommutation => "noncommutation",
            ExperimentKind::DynamicsA => "dynamics_a",
            ExperimentKind::DynamicsB => "dynamics_b",
            ExperimentKind::Localization => "localization",
            ExperimentKind::Isometry => "isometry",
            ExperimentKind::Unitality => "unitality",
            ExperimentKind::Oracle => "oracle",
            ExperimentKind::Diagonal => "diagonal",
            ExperimentKind::WignerMarginal => "wigner_marginal",
        }
    }

    fn needs_function(self) -> bool {
        matches!(
            self,
            ExperimentKind::ChainA
                | ExperimentKind::ChainB
                | ExperimentKind::Noncommutation
                | ExperimentKind::DynamicsA
                | ExperimentKind::DynamicsB
                | ExperimentKind::Oracle
                | ExperimentKind::Diagonal
        )
    }
}

/// One entry of `experiments`: either a bare identifier or an object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Output subdirectory; defaults to the identifier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Label of an entry in `test_functions`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    /// Overrides the top-level schedules for this experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedules: Option<Vec<SweepSchedule>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_values: Option<Vec<f64>>,
    /// `c` in the linked path `θ = c·ℏ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    /// Grid points per axis for `wigner_marginal`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
}

impl ExperimentSpec {
    pub fn bare(kind: ExperimentKind) -> Self {
        ExperimentSpec {
            kind,
            name: None,
            function: None,
            schedules: None,
            t_values: None,
            ratio: None,
            grid_points: None,
        }
    }

    pub fn dir_name(&self) -> &str {
        self.name.as_deref().unwrap_or(self.kind.id())
    }
}

#[derive(Deserialize)]
#[serde(remote = "ExperimentSpec", deny_unknown_fields)]
struct ExperimentSpecDef {
    kind: ExperimentKind,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    function: Option<String>,
    #[serde(default)]
    schedules: Option<Vec<SweepSchedule>>,
    #[serde(default)]
    t_values: Option<Vec<f64>>,
    #[serde(default)]
    ratio: Option<f64>,
    #[serde(default)]
    grid_points: Option<usize>,
}

fn experiments_de<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ExperimentSpec>, D::Error> {
    struct Entry(ExperimentSpec);

    impl<'de> Deserialize<'de> for Entry {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            struct V;
            impl<'de> Visitor<'de> for V {
                type Value = ExperimentSpec;
                fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                    f.write_str("an experiment identifier or an experiment object")
                }
                fn visit_str<E: de::Error>(self, s: &str) -> Result<ExperimentSpec, E> {
                    let kind = ExperimentKind::deserialize(de::value::StrDeserializer::<E>::new(s))?;
                    Ok(ExperimentSpec::bare(kind))
                }
                fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<ExperimentSpec, A::Error> {
                    ExperimentSpecDef::deserialize(de::value::MapAccessDeserializer::new(map))
                }
            }
            d.deserialize_any(V).map(Entry)
        }
    }

    Ok(Vec::<Entry>::deserialize(d)?.into_iter().map(|e| e.0).collect())
}

fn default_params() -> ParamSet {
    ParamSet::new(1.0, 0.1)
}

/// The whole run. Omitted sections take their defaults and are written
/// back, filled in, to every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_params")]
    pub params: ParamSet,
    #[serde(default)]
    pub schedules: Vec<SweepSchedule>,
    #[serde(default)]
    pub quadrature: QuadratureRule,
    #[serde(default)]
    pub test_functions: Vec<TestFunction>,
    #[serde(default)]
    pub probes: ProbeSpec,
    pub outputs: PathBuf,
    #[serde(deserialize_with = "experiments_de")]
    pub experiments: Vec<ExperimentSpec>,
}

/// The built-in test functions available when `test_functions` is empty.
pub fn default_functions() -> Vec<TestFunction> {
    vec![
        TestFunction::gaussian_bump(PhasePoint::new(0.5, -0.5, 0.25, 0.0), [1.0, 1.5, 0.8, 1.2])
            .expect("valid widths")
            .with_label("bump"),
        TestFunction::sigmoid_times_gaussian(1.0, [0.0, 0.0], [1.0, 1.0])
            .expect("valid scales")
            .with_label("sigmoid"),
        TestFunction::saturating_profile(1.0, 0.0, 1.0)
            .expect("valid scales")
            .with_label("saturating"),
        TestFunction::constant(1.0).with_label("constant"),
    ]
}

/// `ℏ`-schedule used by the `ℏ → 0`-first chains when none is configured.
pub fn default_hbar_first() -> SweepSchedule {
    SweepSchedule::geometric(SweepParameter::Hbar, -1, -4, 1.0)
}

/// Schedules an experiment runs with.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub theta: SweepSchedule,
    pub hbar: SweepSchedule,
    /// `ℏ`-schedule for the `ℏ → 0`-first chains.
    pub hbar_first: SweepSchedule,
}

fn pick(list: &[SweepSchedule], p: SweepParameter) -> Option<SweepSchedule> {
    list.iter().find(|s| s.parameter == p).cloned()
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = field_of(&e);
            ConfigError::new(field, e.into_inner())
        })?;
        cfg.resolved()
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fill defaults, then validate.
    fn resolved(mut self) -> Result<Self, ConfigError> {
        if self.test_functions.is_empty() {
            self.test_functions = default_functions();
        }
        if pick(&self.schedules, SweepParameter::Theta).is_none() {
            self.schedules.push(SweepSchedule::default_theta());
        }
        if pick(&self.schedules, SweepParameter::Hbar).is_none() {
            self.schedules.push(SweepSchedule::default_hbar());
        }
        let first = self.test_functions[0].label.clone();
        for e in &mut self.experiments {
            if e.function.is_none() && e.kind.needs_function() {
                let preferred = match e.kind {
                    ExperimentKind::DynamicsB => "saturating",
                    _ => "bump",
                };
                let known = self.test_functions.iter().any(|f| f.label == preferred);
                e.function = Some(if known { preferred.to_string() } else { first.clone() });
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params.validate().map_err(|e| ConfigError::new("params", e))?;
        for (i, s) in self.schedules.iter().enumerate() {
            s.validate().map_err(|m| ConfigError::new(format!("schedules[{i}]"), m))?;
        }
        self.quadrature
            .validate(DEFAULT_BUDGET_CAP)
            .map_err(|e| ConfigError::new("quadrature", e))?;
        if self.probes.count == 0 {
            return Err(ConfigError::new("probes.count", "must be positive"));
        }
        if !(self.probes.half_width > 0.0 && self.probes.half_width.is_finite()) {
            return Err(ConfigError::new("probes.half_width", "must be finite and positive"));
        }
        for (i, f) in self.test_functions.iter().enumerate() {
            f.validate().map_err(|e| ConfigError::new(format!("test_functions[{i}]"), e))?;
            if self.test_functions[..i].iter().any(|g| g.label == f.label) {
                return Err(ConfigError::new(format!("test_functions[{i}].label"), format!("duplicate label '{}'", f.label)));
            }
        }
        if self.experiments.is_empty() {
            return Err(ConfigError::new("experiments", "must list at least one experiment"));
        }
        for (i, e) in self.experiments.iter().enumerate() {
            let at = |f: &str| format!("experiments[{i}].{f}");
            if let Some(label) = &e.function {
                if self.function(label).is_none() {
                    return Err(ConfigError::new(at("function"), format!("no test function labelled '{label}'")));
                }
            }
            if let Some(list) = &e.schedules {
                for (k, s) in list.iter().enumerate() {
                    s.validate().map_err(|m| ConfigError::new(at(&format!("schedules[{k}]")), m))?;
                }
            }
            if let Some(ts) = &e.t_values {
                if ts.is_empty() || ts.iter().any(|t| !t.is_finite()) {
                    return Err(ConfigError::new(at("t_values"), "must be a non-empty list of finite times"));
                }
            }
            if let Some(c) = e.ratio {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(ConfigError::new(at("ratio"), "must be finite and positive"));
                }
            }
            if let Some(n) = e.grid_points {
                if !(2..=1000).contains(&n) {
                    return Err(ConfigError::new(at("grid_points"), "must be between 2 and 1000"));
                }
            }
            let name = e.dir_name();
            if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
                return Err(ConfigError::new(at("name"), "must be a plain directory name"));
            }
            if self.experiments[..i].iter().any(|o| o.dir_name() == name) {
                return Err(ConfigError::new(at("name"), format!("duplicate output directory '{name}'")));
            }
        }
        Ok(())
    }

    pub fn function(&self, label: &str) -> Option<&TestFunction> {
        self.test_functions.iter().find(|f| f.label == label)
    }

    /// Schedules for `e`: its own first, then the top-level ones.
    pub fn schedules_for(&self, e: &ExperimentSpec) -> Resolved {
        let own = e.schedules.as_deref().unwrap_or(&[]);
        let get = |p| pick(own, p).or_else(|| pick(&self.schedules, p));
        let theta = get(SweepParameter::Theta).unwrap_or_else(SweepSchedule::default_theta);
        let hbar = get(SweepParameter::Hbar).unwrap_or_else(SweepSchedule::default_hbar);
        let hbar_first = if pick(own, SweepParameter::Hbar).is_some() {
            hbar.clone()
        } else {
            default_hbar_first()
        };
        Resolved { theta, hbar, hbar_first }
    }
}

/// Path of the offending field, extended by the unknown or missing key
/// when serde names one.
fn field_of(e: &serde_path_to_error::Error<serde_json::Error>) -> String {
    let inner = e.inner();
    if inner.is_syntax() || inner.is_eof() {
        return format!("<json line {} column {}>", inner.line(), inner.column());
    }
    let path = e.path().to_string();
    let msg = inner.to_string();
    for key in ["unknown field `", "missing field `"] {
        if let Some(name) = msg.split(key).nth(1).and_then(|r| r.split('`').next()) {
            return if path == "." {
                name.to_string()
            } else if path.rsplit('.').next() == Some(name) {
                path
            } else {
                format!("{path}.{name}")
            };
        }
    }
    path
}
