//! Collected results of a run and their serialization.

use std::path::{Path, PathBuf};

use qwlab::io::Stored;
use qwlab::verify::{Criterion, EstimateReport};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Shortest round-trip decimal; scientific outside `[1e-4, 1e15)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(cols: &[&str]) -> Self {
        Self {
            header: cols.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub rule: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitEntry {
    pub label: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub ci95: f64,
    pub points: usize,
    pub prediction: Option<f64>,
}

#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    /// Further tables, written as `<stem>.<name>.csv`.
    pub extra: Vec<(String, Table)>,
    pub checks: Vec<Check>,
    pub fits: Vec<FitEntry>,
    pub details: Map<String, Value>,
    /// Fields written as `<stem>.<name>.bin`.
    pub fields: Vec<(String, Stored)>,
}

impl Outcome {
    pub fn new(table: Table) -> Self {
        Self {
            table,
            extra: Vec::new(),
            checks: Vec::new(),
            fits: Vec::new(),
            details: Map::new(),
            fields: Vec::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, value: Option<f64>, rule: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            value,
            rule: rule.into(),
        });
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) -> Result<(), CliError> {
        self.details.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    /// Records the pass rule and fit of an estimate report under `name`.
    pub fn estimate(&mut self, name: &str, r: &EstimateReport) {
        let slope = r.fit.as_ref().map(|f| f.slope);
        let (value, rule) = match r.criterion {
            Criterion::Bounded { max_spread } => (r.spread, format!("max/min <= {max_spread}")),
            Criterion::Growth { min_slope, min_r2 } => (slope, format!("slope >= {min_slope}, r2 >= {min_r2}")),
            Criterion::SlopeAtMost { max_slope } => (slope, format!("slope <= {max_slope}")),
            Criterion::SlopeNear { target, tol } => (slope, format!("|slope - {target}| <= {tol}")),
        };
        self.check(name, r.passed, value, rule);
        if let Some(f) = &r.fit {
            self.fits.push(FitEntry {
                label: name.to_string(),
                slope: f.slope,
                intercept: f.intercept,
                r2: f.r2,
                ci95: f.ci95,
                points: f.points,
                prediction: r.prediction,
            });
        }
    }

    /// Every enabled check passed; a run that asserts nothing passes.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Serialize)]
struct Summary<'a, C: Serialize> {
    command: &'a str,
    suite: Option<&'a str>,
    complete: bool,
    passed: bool,
    error: Option<String>,
    seed: u64,
    workers: usize,
    config: &'a C,
    checks: &'a [Check],
    fits: &'a [FitEntry],
    details: &'a Map<String, Value>,
    outputs: Vec<String>,
}

pub struct RunMeta<'a> {
    pub command: &'a str,
    pub suite: Option<&'a str>,
    pub seed: u64,
    pub workers: usize,
    pub dir: &'a Path,
    pub stem: &'a str,
}

#[derive(Serialize)]
struct Timing {
    seconds: f64,
    threads: usize,
}

/// Writes tables, fields and the JSON summary; returns the written paths.
pub fn write_all<C: Serialize>(
    meta: &RunMeta,
    config: &C,
    out: &Outcome,
    error: Option<String>,
    seconds: f64,
    threads: usize,
) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    let mut names = Vec::new();
    let mut path_of = |suffix: &str| {
        let name = format!("{}.{suffix}", meta.stem);
        names.push(name.clone());
        meta.dir.join(name)
    };
    let main = path_of("csv");
    out.table.write(&main)?;
    written.push(main);
    for (name, t) in &out.extra {
        let p = path_of(&format!("{name}.csv"));
        t.write(&p)?;
        written.push(p);
    }
    for (name, f) in &out.fields {
        let p = path_of(&format!("{name}.bin"));
        match f {
            Stored::Spatial(f) => qwlab::io::write_field(&p, f)?,
            Stored::Spacetime(f) => qwlab::io::write_spacetime(&p, f)?,
        }
        written.push(p);
    }
    let summary_path = path_of("json");
    let complete = error.is_none();
    let summary = Summary {
        command: meta.command,
        suite: meta.suite,
        complete,
        passed: complete && out.passed(),
        error,
        seed: meta.seed,
        workers: meta.workers,
        config,
        checks: &out.checks,
        fits: &out.fits,
        details: &out.details,
        outputs: names,
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(&summary_path, text)?;
    written.push(summary_path);
    // runtimes live in a sidecar so the summary stays byte-identical across reruns
    let timing = meta.dir.join(format!("{}.timing.json", meta.stem));
    std::fs::write(
        &timing,
        serde_json::to_string_pretty(&Timing { seconds, threads })? + "\n",
    )?;
    written.push(timing);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, 1.0, -2.5, 1e-300, 3.0e20, 0.1 + 0.2, 12345.678] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(2.0), "2");
        assert_eq!(num(1e-7), "1e-7");
        assert_eq!(opt(None), "");
    }

    #[test]
    fn any_failed_check_fails_the_run() {
        let mut o = Outcome::new(Table::new(&["a"]));
        assert!(o.passed());
        o.check("x", true, None, "");
        assert!(o.passed());
        o.check("y", false, Some(1.0), "");
        assert!(!o.passed());
    }
}
