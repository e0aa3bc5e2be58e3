//! Deployed and continuing policy evaluation, state-visitation analysis and
//! uniform-start robustness.

mod continuing;
mod deployed;
mod visitation;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use continuing::{continuing_series, ContinuingTracker};
pub use deployed::{
    deployed_regret, deployed_return, evaluate, robustness_eval, EvalOutcome, EvalSchedule,
    RobustnessReport, StartDistribution,
};
pub use visitation::{histogram_diff, visitation, BinSpec, VisitationHistogram};

pub const DEPLOYED_RETURN: &str = "deployed_return";
pub const DEPLOYED_SUCCESS: &str = "deployed_success";
pub const CONTINUING_REWARD: &str = "continuing_avg_reward";

/// `(t, value)` points of one metric, `t` strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub metric: String,
    pub points: Vec<(u64, f64)>,
}

impl MetricSeries {
    pub fn new(metric: impl Into<String>) -> Self {
        Self {
            metric: metric.into(),
            points: Vec::new(),
        }
    }

    pub fn push(&mut self, t: u64, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Mismatch(format!(
                "{}: non-finite value at t={t}",
                self.metric
            )));
        }
        if self.points.last().is_some_and(|(last, _)| *last >= t) {
            return Err(Error::Mismatch(format!(
                "{}: t={t} does not increase",
                self.metric
            )));
        }
        self.points.push((t, value));
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn last(&self) -> Option<f64> {
        self.points.last().map(|p| p.1)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    pub fn steps(&self) -> impl Iterator<Item = u64> + '_ {
        self.points.iter().map(|p| p.0)
    }
}

/// Identifies the run a metric row belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLabel {
    pub run_id: String,
    pub seed: u64,
    pub algorithm: String,
    pub env: String,
}

pub const METRIC_HEADER: &str = "run_id,seed,algorithm,env,metric,t,value";

/// Writes metric rows `(run_id, seed, algorithm, env, metric, t, value)`.
pub fn write_metrics_csv<W: Write>(
    out: &mut W,
    label: &RunLabel,
    series: &[&MetricSeries],
) -> std::io::Result<()> {
    writeln!(out, "{METRIC_HEADER}")?;
    for s in series {
        for (t, v) in &s.points {
            writeln!(
                out,
                "{},{},{},{},{},{t},{v}",
                label.run_id, label.seed, label.algorithm, label.env, s.metric
            )?;
        }
    }
    Ok(())
}
