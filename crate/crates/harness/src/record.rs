//! Per-replication rows, aggregates, checks and their serialized forms.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;

/// One replication at one scan point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub point: usize,
    pub replication: u64,
    pub seed: u64,
    pub excess_degree: usize,
    pub m: usize,
    pub beta: f64,
    pub gamma: f64,
    pub g: f64,
    /// `⟨C⟩`, constants included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expectation: Option<f64>,
    /// The row's primary metric: gain over the random-assignment value.
    pub advantage: f64,
    /// `advantage / m · √D`.
    pub scaled: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_sample: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brute_force: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub greedy_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl Row {
    pub fn set_advantage(&mut self, advantage: f64) {
        self.advantage = advantage;
        self.scaled = scale(advantage, self.m, self.excess_degree);
    }
}

/// Per-constraint advantage in units of `1/√D`.
pub fn scale(advantage: f64, m: usize, d: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    advantage / m as f64 * (d as f64).sqrt()
}

/// Sample statistics of one column.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance; zero for a single value.
    pub variance: f64,
    pub standard_error: f64,
}

impl Aggregate {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        let count = values.len();
        if count == 0 {
            return Self::default();
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let variance = if count > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        Self {
            count,
            mean,
            variance,
            standard_error: (variance / count as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub point: usize,
    pub excess_degree: usize,
    pub g: f64,
    pub beta: f64,
    pub gamma: f64,
    pub advantage: Aggregate,
    pub scaled: Aggregate,
}

/// Groups rows by point, in point order.
pub fn summarize_points(rows: &[Row]) -> Vec<PointSummary> {
    let mut groups: BTreeMap<usize, Vec<&Row>> = BTreeMap::new();
    for row in rows {
        groups.entry(row.point).or_default().push(row);
    }
    groups
        .into_iter()
        .map(|(point, rows)| PointSummary {
            point,
            excess_degree: rows[0].excess_degree,
            g: rows[0].g,
            beta: rows[0].beta,
            gamma: rows[0].gamma,
            advantage: Aggregate::of(rows.iter().map(|r| r.advantage)),
            scaled: Aggregate::of(rows.iter().map(|r| r.scaled)),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn within(
        name: impl Into<String>,
        value: f64,
        lower: Option<f64>,
        upper: Option<f64>,
    ) -> Self {
        let passed =
            !value.is_nan() && lower.is_none_or(|l| value >= l) && upper.is_none_or(|u| value <= u);
        Self {
            name: name.into(),
            value,
            lower,
            upper,
            passed,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, upper: f64) -> Self {
        Self::within(name, value, None, Some(upper))
    }

    pub fn at_least(name: impl Into<String>, value: f64, lower: f64) -> Self {
        Self::within(name, value, Some(lower), None)
    }

    /// Boolean condition recorded as 1 or 0.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    /// Over every row's advantage.
    pub aggregate: Aggregate,
    pub points: Vec<PointSummary>,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub rows: Vec<Row>,
}

impl ResultRecord {
    pub fn new(experiment: ExperimentKind, config: &ExperimentConfig, rows: Vec<Row>) -> Self {
        Self {
            experiment,
            config: config.clone(),
            aggregate: Aggregate::of(rows.iter().map(|r| r.advantage)),
            points: summarize_points(&rows),
            metrics: BTreeMap::new(),
            checks: Vec::new(),
            rows,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn rows_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&serde_json::to_string(row)?);
            out.push('\n');
        }
        Ok(out)
    }

    /// Writes the summary to `path`, rows to `<path>.rows.jsonl`, and with
    /// `csv` also `<path>.rows.csv`. Returns the files written.
    pub fn write(&self, path: &Path, csv: bool) -> Result<Vec<PathBuf>> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let mut written = vec![path.to_path_buf()];
        fs::write(path, self.summary_json()? + "\n")?;
        let rows_path = path.with_extension("rows.jsonl");
        fs::write(&rows_path, self.rows_jsonl()?)?;
        written.push(rows_path);
        if csv {
            let csv_path = path.with_extension("rows.csv");
            self.write_csv(BufWriter::new(File::create(&csv_path)?))?;
            written.push(csv_path);
        }
        Ok(written)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for row in &self.rows {
            writer.serialize(CsvRow::from(row))?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Fixed-column view of [`Row`]; absent values are empty cells.
#[derive(Serialize)]
struct CsvRow {
    point: usize,
    replication: u64,
    seed: u64,
    excess_degree: usize,
    m: usize,
    beta: f64,
    gamma: f64,
    g: f64,
    expectation: Option<f64>,
    advantage: f64,
    scaled: f64,
    analytic: Option<f64>,
    discrepancy: Option<f64>,
    best_sample: Option<f64>,
    brute_force: Option<f64>,
    greedy_value: Option<f64>,
    wall_time_ms: Option<f64>,
}

impl From<&Row> for CsvRow {
    fn from(r: &Row) -> Self {
        Self {
            point: r.point,
            replication: r.replication,
            seed: r.seed,
            excess_degree: r.excess_degree,
            m: r.m,
            beta: r.beta,
            gamma: r.gamma,
            g: r.g,
            expectation: r.expectation,
            advantage: r.advantage,
            scaled: r.scaled,
            analytic: r.analytic,
            discrepancy: r.discrepancy,
            best_sample: r.best_sample,
            brute_force: r.brute_force,
            greedy_value: r.greedy_value,
            wall_time_ms: r.wall_time_ms,
        }
    }
}
