//! Reset-frequency sweep: one naive run per (period, boundary, seed).

use std::path::Path;

use rayon::prelude::*;

use crate::aggregate::{
    aggregate_seeds, final_rows, rows_of, write_csv, AggregateRow, AGGREGATE_FILE, FINAL_FILE,
};
use crate::config::{AgentKind, ExperimentConfig, WrapperConfig};
use crate::error::{HarnessError, Result};
use crate::plot::{emit_plot_data, PlotKind};
use crate::run::{execute, persist, RunOutput};

fn boundary_tag(b: Option<u64>) -> String {
    b.map_or_else(|| "none".to_string(), |b| b.to_string())
}

/// Label of one sweep condition, used as the algorithm column.
pub fn condition_label(period: u64, boundary: Option<u64>) -> String {
    format!("naive/period={period}/B={}", boundary_tag(boundary))
}

/// Expands the sweep into configs, ordered by period, boundary, seed.
pub fn sweep_configs(
    base: &ExperimentConfig,
    periods: &[u64],
    seeds: &[u64],
    boundaries: &[Option<u64>],
) -> Result<Vec<ExperimentConfig>> {
    if periods.is_empty() || seeds.is_empty() || boundaries.is_empty() {
        return Err(HarnessError::config(
            "sweep needs at least one period, one seed and one boundary setting",
        ));
    }
    if base.agent.name != AgentKind::Naive {
        return Err(HarnessError::config(format!(
            "reset-frequency sweep runs the naive agent, config names {}",
            base.agent.name.as_str()
        )));
    }
    let mut out = Vec::new();
    for &period in periods {
        if period == 0 {
            return Err(HarnessError::config("sweep periods must be positive"));
        }
        for &b in boundaries {
            for &seed in seeds {
                let mut cfg = base.clone();
                cfg.wrapper = Some(WrapperConfig::Periodic {
                    period: Some(period),
                });
                cfg.agent.q.boundary_b = b;
                cfg.seed = seed;
                cfg.label = Some(condition_label(period, b));
                out.push(cfg.normalize()?);
            }
        }
    }
    Ok(out)
}

pub struct SweepResult {
    pub outputs: Vec<RunOutput>,
    pub aggregates: Vec<AggregateRow>,
}

/// Runs every condition in parallel. With `out_root`, each run is persisted
/// under it together with `aggregate.csv`, `final.csv` and the curve data.
pub fn sweep_reset_frequency(
    base: &ExperimentConfig,
    periods: &[u64],
    seeds: &[u64],
    boundaries: &[Option<u64>],
    out_root: Option<&Path>,
) -> Result<SweepResult> {
    let configs = sweep_configs(base, periods, seeds, boundaries)?;
    let outputs = configs
        .par_iter()
        .map(execute)
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<_> = outputs.iter().flat_map(rows_of).collect();
    let aggregates = aggregate_seeds(&rows)?;
    if let Some(root) = out_root {
        for out in &outputs {
            persist(out, &root.join(&out.run_id)).map_err(|e| e.in_run(&out.run_id))?;
        }
        write_csv(&aggregates, &root.join(AGGREGATE_FILE))?;
        write_csv(&final_rows(&aggregates), &root.join(FINAL_FILE))?;
        emit_plot_data(&aggregates, PlotKind::DeployedCurve, &[], root)?;
    }
    Ok(SweepResult {
        outputs,
        aggregates,
    })
}
