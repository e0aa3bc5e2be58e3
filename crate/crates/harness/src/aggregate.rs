//! Multi-seed aggregation of per-run metric CSVs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use arl::eval::{CONTINUING_REWARD, DEPLOYED_RETURN, DEPLOYED_SUCCESS};
use arl::CompensatedSum;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::run::{RunOutput, METRICS_FILE};

/// One line of a run's metric file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub run_id: String,
    pub seed: u64,
    pub algorithm: String,
    pub env: String,
    pub metric: String,
    pub t: u64,
    pub value: f64,
}

/// Mean and standard error across seeds at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algorithm: String,
    pub env: String,
    pub metric: String,
    pub t: u64,
    pub mean: f64,
    /// Sample standard deviation (n - 1) over `sqrt(n_seeds)`; 0 for one seed.
    pub stderr: f64,
    pub n_seeds: usize,
}

/// Last grid point of a metric, in the shape of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalRow {
    /// `final_policy` for deployed metrics, `lifetime` for the continuing one.
    pub kind: String,
    pub algorithm: String,
    pub env: String,
    pub metric: String,
    pub t: u64,
    pub mean: f64,
    pub stderr: f64,
    pub n_seeds: usize,
}

impl FinalRow {
    fn new(kind: &str, a: &AggregateRow) -> Self {
        Self {
            kind: kind.to_string(),
            algorithm: a.algorithm.clone(),
            env: a.env.clone(),
            metric: a.metric.clone(),
            t: a.t,
            mean: a.mean,
            stderr: a.stderr,
            n_seeds: a.n_seeds,
        }
    }
}

pub fn rows_of(out: &RunOutput) -> Vec<MetricRow> {
    let label = out.label();
    out.series
        .iter()
        .flat_map(|s| {
            let label = &label;
            s.points.iter().map(move |&(t, value)| MetricRow {
                run_id: label.run_id.clone(),
                seed: label.seed,
                algorithm: label.algorithm.clone(),
                env: label.env.clone(),
                metric: s.metric.clone(),
                t,
                value,
            })
        })
        .collect()
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricRow>> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<MetricRow>, _>>()
        .map_err(csv_err)
}

/// Every `metrics.csv` below `root`, sorted by path.
pub fn find_metric_files(root: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| HarnessError::io(&dir, e))? {
            let path = entry.map_err(|e| HarnessError::io(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n == METRICS_FILE) {
                found.push(path);
            }
        }
    }
    found.sort();
    Ok(found)
}

pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values
        .iter()
        .copied()
        .collect::<CompensatedSum<f64>>()
        .value()
        / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values
        .iter()
        .map(|v| (v - mean).powi(2))
        .collect::<CompensatedSum<f64>>()
        .value();
    (mean, (ss / (n - 1.0)).sqrt() / n.sqrt())
}

/// Groups rows by `(algorithm, env, metric)` and averages each grid point
/// across runs. Every run in a group must share the same grid.
pub fn aggregate_seeds(rows: &[MetricRow]) -> Result<Vec<AggregateRow>> {
    type Key = (String, String, String);
    let mut groups: BTreeMap<Key, BTreeMap<String, Vec<(u64, f64)>>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.algorithm.clone(), r.env.clone(), r.metric.clone()))
            .or_default()
            .entry(r.run_id.clone())
            .or_default()
            .push((r.t, r.value));
    }
    let mut out = Vec::new();
    for ((algorithm, env, metric), runs) in groups {
        let mut runs: Vec<(String, Vec<(u64, f64)>)> = runs.into_iter().collect();
        for (_, pts) in &mut runs {
            pts.sort_by_key(|p| p.0);
        }
        let grid: Vec<u64> = runs[0].1.iter().map(|p| p.0).collect();
        let offending: Vec<&str> = runs
            .iter()
            .filter(|(_, pts)| !pts.iter().map(|p| p.0).eq(grid.iter().copied()))
            .map(|(id, _)| id.as_str())
            .collect();
        if !offending.is_empty() {
            return Err(HarnessError::Aggregate(format!(
                "{algorithm}/{env}/{metric}: metric grid of {} differs from {}",
                offending.join(", "),
                runs[0].0
            )));
        }
        for (i, &t) in grid.iter().enumerate() {
            let values: Vec<f64> = runs.iter().map(|(_, pts)| pts[i].1).collect();
            let (mean, stderr) = mean_stderr(&values);
            out.push(AggregateRow {
                algorithm: algorithm.clone(),
                env: env.clone(),
                metric: metric.clone(),
                t,
                mean,
                stderr,
                n_seeds: values.len(),
            });
        }
    }
    Ok(out)
}

/// Final-policy rows (`J_D(pi_H_max)`) and lifetime rows (`r(H_max)`).
pub fn final_rows(aggregates: &[AggregateRow]) -> Vec<FinalRow> {
    let mut last: BTreeMap<(&str, &str, &str), &AggregateRow> = BTreeMap::new();
    for a in aggregates {
        let e = last.entry((&a.algorithm, &a.env, &a.metric)).or_insert(a);
        if a.t > e.t {
            *e = a;
        }
    }
    last.into_values()
        .filter_map(|a| {
            let kind = match a.metric.as_str() {
                DEPLOYED_RETURN | DEPLOYED_SUCCESS => "final_policy",
                CONTINUING_REWARD => "lifetime",
                _ => return None,
            };
            Some(FinalRow::new(kind, a))
        })
        .collect()
}

pub fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    reader
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(csv_err)
}

pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const FINAL_FILE: &str = "final.csv";

/// Aggregates every run below `root` and writes `aggregate.csv` and
/// `final.csv` into it.
pub fn aggregate_dir(root: &Path) -> Result<Vec<AggregateRow>> {
    let files = find_metric_files(root)?;
    if files.is_empty() {
        return Err(HarnessError::Aggregate(format!(
            "no {METRICS_FILE} below {}",
            root.display()
        )));
    }
    let mut rows = Vec::new();
    for f in &files {
        rows.extend(read_metrics(f)?);
    }
    let aggregates = aggregate_seeds(&rows)?;
    write_csv(&aggregates, &root.join(AGGREGATE_FILE))?;
    write_csv(&final_rows(&aggregates), &root.join(FINAL_FILE))?;
    Ok(aggregates)
}
