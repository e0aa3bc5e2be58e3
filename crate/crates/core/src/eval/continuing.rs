use super::{MetricSeries, CONTINUING_REWARD};
use crate::error::{Error, Result};
use crate::mdp::TransitionRecord;
use crate::scalar::CompensatedSum;

/// Running average reward `r(h) = (1/h) sum_{t<h} r_t` at every multiple of
/// `stride`, plus a final point at the end of the history.
pub fn continuing_series(history: &[TransitionRecord], stride: u64) -> Result<MetricSeries> {
    let mut tracker = ContinuingTracker::new(stride)?;
    for r in history {
        tracker.push(r.reward)?;
    }
    Ok(tracker.finish())
}

/// Incremental form of [`continuing_series`].
#[derive(Debug, Clone)]
pub struct ContinuingTracker {
    stride: u64,
    sum: CompensatedSum<f64>,
    steps: u64,
    series: MetricSeries,
}

impl ContinuingTracker {
    pub fn new(stride: u64) -> Result<Self> {
        if stride == 0 {
            return Err(Error::config("continuing-series stride must be positive"));
        }
        Ok(Self {
            stride,
            sum: CompensatedSum::new(),
            steps: 0,
            series: MetricSeries::new(CONTINUING_REWARD),
        })
    }

    pub fn push(&mut self, reward: f64) -> Result<()> {
        self.sum.add(reward);
        self.steps += 1;
        if self.steps.is_multiple_of(self.stride) {
            self.series.push(self.steps, self.average())?;
        }
        Ok(())
    }

    pub fn average(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.sum.value() / self.steps as f64
        }
    }

    pub fn finish(mut self) -> MetricSeries {
        if !self.steps.is_multiple_of(self.stride) {
            let avg = self.average();
            self.series.points.push((self.steps, avg));
        }
        self.series
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::Action;

    fn history(rewards: &[f64]) -> Vec<TransitionRecord> {
        rewards
            .iter()
            .enumerate()
            .map(|(t, &reward)| TransitionRecord {
                t: t as u64,
                state: 0,
                action: Action::Regular(0),
                next_state: 0,
                reward,
                intervention: false,
                phase: None,
            })
            .collect()
    }

    #[test]
    fn small_example() {
        let s = continuing_series(&history(&[0.0, 0.0, 1.0, 1.0]), 1).unwrap();
        assert_eq!(s.points, vec![(1, 0.0), (2, 0.0), (3, 1.0 / 3.0), (4, 0.5)]);
    }

    #[test]
    fn constant_reward_is_flat() {
        let s = continuing_series(&history(&[0.3; 10]), 3).unwrap();
        assert_eq!(s.steps().collect::<Vec<_>>(), vec![3, 6, 9, 10]);
        assert!(s.values().all(|v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn zero_stride_rejected() {
        assert!(continuing_series(&history(&[1.0]), 0).is_err());
    }

    #[test]
    fn empty_history_gives_empty_series() {
        assert!(continuing_series(&[], 5).unwrap().is_empty());
    }
}
