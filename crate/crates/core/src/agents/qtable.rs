use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::scalar::Scalar;

/// Step size schedule for the TD update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearningRate {
    Constant {
        alpha: f64,
    },
    /// `alpha = 1 / n(s, a)^omega` with `n` the visit count of the pair.
    VisitDecay {
        omega: f64,
    },
}

impl Default for LearningRate {
    fn default() -> Self {
        LearningRate::Constant { alpha: 0.5 }
    }
}

/// Exploration rate schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exploration {
    Constant {
        eps: f64,
    },
    /// `eps_t = max(floor, initial * sqrt(scale / (scale + t)))`.
    Decay {
        initial: f64,
        floor: f64,
        scale: f64,
    },
}

impl Default for Exploration {
    fn default() -> Self {
        Exploration::Decay {
            initial: 1.0,
            floor: 0.05,
            scale: 10_000.0,
        }
    }
}

impl Exploration {
    pub fn epsilon(&self, t: u64) -> f64 {
        match *self {
            Exploration::Constant { eps } => eps,
            Exploration::Decay {
                initial,
                floor,
                scale,
            } => (initial * (scale / (scale + t as f64)).sqrt()).max(floor),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |e: f64| (0.0..=1.0).contains(&e);
        match *self {
            Exploration::Constant { eps } if ok(eps) => Ok(()),
            Exploration::Decay {
                initial,
                floor,
                scale,
            } if ok(initial) && ok(floor) && scale > 0.0 => Ok(()),
            _ => Err(Error::config(format!(
                "invalid exploration schedule {self:?}"
            ))),
        }
    }
}

/// Hyperparameters shared by every tabular agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QParams {
    pub learning_rate: LearningRate,
    pub gamma: f64,
    /// Bootstrap cut period; `None` never cuts.
    pub boundary_b: Option<u64>,
    pub explore: Exploration,
    /// Initial value of every entry.
    pub init: f64,
}

impl Default for QParams {
    fn default() -> Self {
        Self {
            learning_rate: LearningRate::default(),
            gamma: 0.95,
            boundary_b: None,
            explore: Exploration::default(),
            init: 0.0,
        }
    }
}

impl QParams {
    pub fn validate(&self) -> Result<()> {
        match self.learning_rate {
            LearningRate::Constant { alpha } if alpha > 0.0 && alpha <= 1.0 => {}
            LearningRate::VisitDecay { omega } if omega > 0.5 && omega <= 1.0 => {}
            lr => return Err(Error::config(format!("invalid learning rate {lr:?}"))),
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::config(format!(
                "gamma {} outside [0, 1)",
                self.gamma
            )));
        }
        if self.boundary_b == Some(0) {
            return Err(Error::config("boundary_b must be at least 1"));
        }
        if !self.init.is_finite() {
            return Err(Error::config("init must be finite"));
        }
        self.explore.validate()
    }
}

/// Dense `states x actions` action-value table with the (optionally biased)
/// one-step Q-learning update.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable<F = f64> {
    values: Vec<F>,
    visits: Vec<u32>,
    states: usize,
    actions: usize,
    rate: LearningRate,
    gamma: F,
    boundary: Option<u64>,
}

impl<F: Scalar> QTable<F> {
    pub fn new(states: usize, actions: usize, params: &QParams) -> Result<Self> {
        params.validate()?;
        if states == 0 || actions == 0 {
            return Err(Error::config(
                "Q-table needs at least one state and one action",
            ));
        }
        let visits = match params.learning_rate {
            LearningRate::VisitDecay { .. } => vec![0; states * actions],
            LearningRate::Constant { .. } => Vec::new(),
        };
        Ok(Self {
            values: vec![F::of(params.init); states * actions],
            visits,
            states,
            actions,
            rate: params.learning_rate,
            gamma: F::of(params.gamma),
            boundary: params.boundary_b,
        })
    }

    pub fn states(&self) -> usize {
        self.states
    }
    pub fn actions(&self) -> usize {
        self.actions
    }
    pub fn gamma(&self) -> F {
        self.gamma
    }
    pub fn boundary(&self) -> Option<u64> {
        self.boundary
    }
    pub fn learning_rate(&self) -> LearningRate {
        self.rate
    }

    pub fn get(&self, s: usize, a: usize) -> F {
        self.values[s * self.actions + a]
    }

    pub fn set(&mut self, s: usize, a: usize, v: F) {
        self.values[s * self.actions + a] = v;
    }

    pub fn row(&self, s: usize) -> &[F] {
        &self.values[s * self.actions..(s + 1) * self.actions]
    }

    /// Greedy action among the first `limit` columns; ties go to the lowest index.
    pub fn greedy_within(&self, s: usize, limit: usize) -> usize {
        let row = &self.row(s)[..limit.min(self.actions)];
        let mut best = 0;
        for (a, v) in row.iter().enumerate().skip(1) {
            if *v > row[best] {
                best = a;
            }
        }
        best
    }

    pub fn greedy(&self, s: usize) -> usize {
        self.greedy_within(s, self.actions)
    }

    pub fn max_value(&self, s: usize) -> F {
        self.row(s).iter().copied().fold(F::neg_infinity(), F::max)
    }

    /// Whether the bootstrap term is kept for a transition taken at step `t`.
    pub fn bootstraps(&self, t: u64) -> bool {
        self.boundary.is_none_or(|b| !(t + 1).is_multiple_of(b))
    }

    /// One TD update for `(s, a, r, s')` taken at step `t`.
    pub fn update(&mut self, t: u64, s: usize, a: usize, reward: f64, next: usize) -> Result<()> {
        if !reward.is_finite() {
            return Err(Error::NonFiniteReward { t, reward });
        }
        if s >= self.states || next >= self.states || a >= self.actions {
            return Err(Error::Mismatch(format!(
                "step {t}: transition ({s}, {a}, {next}) outside a {}x{} table",
                self.states, self.actions
            )));
        }
        let r = F::of(reward);
        let target = if self.bootstraps(t) {
            r + self.gamma * self.max_value(next)
        } else {
            r
        };
        let i = s * self.actions + a;
        let alpha = match self.rate {
            LearningRate::Constant { alpha } => F::of(alpha),
            LearningRate::VisitDecay { omega } => {
                self.visits[i] = self.visits[i].saturating_add(1);
                F::of((self.visits[i] as f64).powf(-omega))
            }
        };
        self.values[i] = (F::one() - alpha) * self.values[i] + alpha * target;
        Ok(())
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Writes `state_index,action_index,value` rows.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "state_index,action_index,value")?;
        for s in 0..self.states {
            for a in 0..self.actions {
                writeln!(out, "{s},{a},{}", self.get(s, a).to_f64_lossy())?;
            }
        }
        Ok(())
    }
}

/// Epsilon-greedy draw over all columns of `q`.
pub fn epsilon_greedy<F: Scalar>(q: &QTable<F>, s: usize, eps: f64, rng: &mut Prng) -> usize {
    if eps > 0.0 && rng.gen::<f64>() < eps {
        rng.gen_range(0..q.actions())
    } else {
        q.greedy(s)
    }
}

/// Visit counts over next states.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VisitCounts {
    counts: Vec<u64>,
}

impl VisitCounts {
    pub fn new(states: usize) -> Self {
        Self {
            counts: vec![0; states],
        }
    }

    pub fn get(&self, s: usize) -> u64 {
        self.counts[s]
    }

    /// Count-based novelty `1 / sqrt(N(s) + 1)`.
    pub fn novelty(&self, s: usize) -> f64 {
        1.0 / ((self.counts[s] + 1) as f64).sqrt()
    }

    pub fn record(&mut self, s: usize) {
        self.counts[s] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }
}
