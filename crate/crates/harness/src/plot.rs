//! Plot-ready data files. Rendering happens elsewhere.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use arl::eval::{BinSpec, VisitationHistogram, CONTINUING_REWARD, DEPLOYED_RETURN};
use serde::{Deserialize, Serialize};

use crate::aggregate::{read_csv, write_csv, AggregateRow};
use crate::error::{HarnessError, Result};
use crate::run::{RunSummary, SUMMARY_FILE, VISITATION_FILE, VISITATION_SIDECAR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    DeployedCurve,
    ContinuingCurve,
    VisitationHeatmap,
}

impl PlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlotKind::DeployedCurve => "deployed_curve",
            PlotKind::ContinuingCurve => "continuing_curve",
            PlotKind::VisitationHeatmap => "visitation_heatmap",
        }
    }

    fn metric(self) -> Option<&'static str> {
        match self {
            PlotKind::DeployedCurve => Some(DEPLOYED_RETURN),
            PlotKind::ContinuingCurve => Some(CONTINUING_REWARD),
            PlotKind::VisitationHeatmap => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: u64,
    pub mean: f64,
    pub stderr: f64,
    pub algorithm: String,
}

fn selected(algorithm: &str, filter: &[String]) -> bool {
    filter.is_empty() || filter.iter().any(|a| a == algorithm)
}

/// Curve points of `kind` per environment, optionally restricted to some
/// algorithms (an empty filter keeps all of them).
pub fn curves(
    aggregates: &[AggregateRow],
    kind: PlotKind,
    filter: &[String],
) -> BTreeMap<String, Vec<CurvePoint>> {
    let mut out: BTreeMap<String, Vec<CurvePoint>> = BTreeMap::new();
    let Some(metric) = kind.metric() else {
        return out;
    };
    for a in aggregates
        .iter()
        .filter(|a| a.metric == metric && selected(&a.algorithm, filter))
    {
        out.entry(a.env.clone()).or_default().push(CurvePoint {
            t: a.t,
            mean: a.mean,
            stderr: a.stderr,
            algorithm: a.algorithm.clone(),
        });
    }
    out
}

/// Writes one `<env>_<kind>.csv` per environment into `out_dir`.
pub fn emit_plot_data(
    aggregates: &[AggregateRow],
    kind: PlotKind,
    filter: &[String],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut written = Vec::new();
    for (env, points) in curves(aggregates, kind, filter) {
        let path = out_dir.join(format!("{env}_{}.csv", kind.as_str()));
        write_csv(&points, &path)?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_curve(path: &Path) -> Result<Vec<CurvePoint>> {
    read_csv(path)
}

#[derive(Deserialize)]
struct BinRow {
    bin_x: usize,
    bin_y: usize,
    count: u64,
}

/// Sums the visitation histograms of every run below `runs` per
/// `(env, algorithm)` and writes them in the histogram format.
pub fn emit_heatmaps(runs: &Path, filter: &[String], out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut sums: BTreeMap<(String, String), VisitationHistogram> = BTreeMap::new();
    for metrics in crate::aggregate::find_metric_files(runs)? {
        let dir = metrics.parent().expect("file has a parent");
        let (summary_path, sidecar_path) = (dir.join(SUMMARY_FILE), dir.join(VISITATION_SIDECAR));
        if !sidecar_path.exists() {
            continue;
        }
        let read = |p: &Path| fs::read_to_string(p).map_err(|e| HarnessError::io(p, e));
        let summary: RunSummary = serde_json::from_str(&read(&summary_path)?)
            .map_err(|e| HarnessError::json(summary_path.display().to_string(), e))?;
        if !selected(&summary.algorithm, filter) {
            continue;
        }
        let sidecar: serde_json::Value = serde_json::from_str(&read(&sidecar_path)?)
            .map_err(|e| HarnessError::json(sidecar_path.display().to_string(), e))?;
        let bins: BinSpec = serde_json::from_value(sidecar["bin_spec"].clone())
            .map_err(|e| HarnessError::json(sidecar_path.display().to_string(), e))?;
        let h = match sums.entry((summary.env.clone(), summary.algorithm.clone())) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(VisitationHistogram::new(bins)?)
            }
        };
        if h.bins != bins {
            return Err(HarnessError::Aggregate(format!(
                "{}: bin spec differs between runs",
                dir.display()
            )));
        }
        for r in read_csv::<BinRow>(&dir.join(VISITATION_FILE))? {
            h.counts[r.bin_y * bins.nx + r.bin_x] += r.count;
            h.total += r.count;
        }
        h.clamped += sidecar["clamped"].as_u64().unwrap_or(0);
        h.skipped += sidecar["skipped"].as_u64().unwrap_or(0);
    }
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut written = Vec::new();
    for ((env, algorithm), h) in sums {
        let stem = format!(
            "{env}_{}_{}",
            algorithm.replace(['/', ' '], "_"),
            PlotKind::VisitationHeatmap.as_str()
        );
        let csv = out_dir.join(format!("{stem}.csv"));
        let mut buf = Vec::new();
        h.write_csv(&mut buf)
            .map_err(|e| HarnessError::io(&csv, e))?;
        fs::write(&csv, buf).map_err(|e| HarnessError::io(&csv, e))?;
        let side = out_dir.join(format!("{stem}.json"));
        let text = serde_json::to_string_pretty(&h.sidecar()).expect("serialisable");
        fs::write(&side, text).map_err(|e| HarnessError::io(&side, e))?;
        written.push(csv);
    }
    Ok(written)
}
