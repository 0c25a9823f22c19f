//! Report files: `report.json`, `errors.csv`, `grid.csv`.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::config::{ExperimentSpec, RunConfig};
use crate::limits::LimitReport;

/// Lossless decimal form of a double (17 significant digits).
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct ReportFile<'a> {
    config: &'a RunConfig,
    experiment: &'a ExperimentSpec,
    reports: &'a [LimitReport],
}

pub fn report_json(cfg: &RunConfig, spec: &ExperimentSpec, reports: &[LimitReport]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&ReportFile {
        config: cfg,
        experiment: spec,
        reports,
    })?;
    s.push('\n');
    Ok(s)
}

/// One row per schedule step of every stage.
pub fn errors_csv(reports: &[LimitReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["experiment", "stage", "step", "parameter", "value", "fixed", "error"])?;
    for r in reports {
        for s in &r.stages {
            for (k, (v, e)) in s.schedule.values.iter().zip(&s.errors).enumerate() {
                w.write_record([
                    r.experiment.as_str(),
                    s.name.as_str(),
                    &k.to_string(),
                    s.schedule.parameter.name(),
                    &sci(*v),
                    &sci(s.schedule.fixed),
                    &sci(*e),
                ])?;
            }
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn write_reports(dir: &Path, cfg: &RunConfig, spec: &ExperimentSpec, reports: &[LimitReport]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("report.json"), report_json(cfg, spec, reports)?)?;
    fs::write(dir.join("errors.csv"), errors_csv(reports)?)?;
    Ok(())
}

/// Values on a rectangular grid, `x` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x_label: String,
    pub y_label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
}

/// `n` evenly spaced points from `lo` to `hi`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl Grid {
    pub fn tabulate(
        x_label: &str,
        y_label: &str,
        xs: Vec<f64>,
        ys: Vec<f64>,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let values = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).map(|(x, y)| f(x, y)).collect();
        Grid {
            x_label: x_label.into(),
            y_label: y_label.into(),
            xs,
            ys,
            values,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.xs.len() + i]
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([self.x_label.as_str(), self.y_label.as_str(), "value"])?;
        for (j, y) in self.ys.iter().enumerate() {
            for (i, x) in self.xs.iter().enumerate() {
                w.write_record([sci(*x), sci(*y), sci(self.at(i, j))])?;
            }
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// Reads the output of [`Grid::to_csv`] back.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let h = r.headers()?.clone();
        if h.len() != 3 {
            bail!("grid csv needs three columns, found {}", h.len());
        }
        let (mut xs, mut ys, mut values) = (Vec::<f64>::new(), Vec::<f64>::new(), Vec::new());
        for (n, rec) in r.records().enumerate() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64> {
                rec[k].trim().parse().with_context(|| format!("row {}: bad number '{}'", n + 2, &rec[k]))
            };
            let (x, y, v) = (num(0)?, num(1)?, num(2)?);
            if ys.last() != Some(&y) {
                ys.push(y);
            }
            if ys.len() == 1 {
                xs.push(x);
            }
            values.push(v);
        }
        if xs.is_empty() || values.len() != xs.len() * ys.len() {
            bail!("grid csv is not a full rectangular grid");
        }
        Ok(Grid {
            x_label: h[0].to_string(),
            y_label: h[1].to_string(),
            xs,
            ys,
            values,
        })
    }
}
