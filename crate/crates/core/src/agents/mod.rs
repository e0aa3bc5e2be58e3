//! Reset-free tabular learners.
//!
//! An agent maps the history so far to an exploratory action `a_t` and an
//! evaluation policy `pi_t`. Every agent here is Q-learning on some
//! (possibly time-varying) surrogate reward.

mod alternating;
mod curriculum;
mod naive;
mod qtable;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::envs::DemoSet;
use crate::error::{Error, Result};
use crate::mdp::{Environment, TransitionRecord};
use crate::rng::Prng;
use crate::scalar::Scalar;

pub use alternating::{make_fbrl, make_perturbation, Alternating, Surrogate, FORWARD, SECOND};
pub use curriculum::{make_curriculum_lite, CurriculumLite, CurriculumParams};
pub use naive::{make_naive, make_oracle, Naive, Oracle};
pub use qtable::{epsilon_greedy, Exploration, LearningRate, QParams, QTable, VisitCounts};

/// A deterministic state-to-action map over regular actions.
pub trait Policy {
    fn act(&self, state: usize) -> usize;
}

/// Greedy policy of a Q-table restricted to the regular actions.
pub struct Greedy<'a, F> {
    q: &'a QTable<F>,
    regular: usize,
}

impl<'a, F: Scalar> Greedy<'a, F> {
    pub fn new(q: &'a QTable<F>, regular: usize) -> Self {
        Self { q, regular }
    }
}

impl<F: Scalar> Policy for Greedy<'_, F> {
    fn act(&self, state: usize) -> usize {
        self.q.greedy_within(state, self.regular)
    }
}

/// Explicit action per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TablePolicy(pub Vec<usize>);

impl Policy for TablePolicy {
    fn act(&self, state: usize) -> usize {
        self.0[state]
    }
}

/// Policy backed by a closure.
pub struct FnPolicy<P>(pub P);

impl<P: Fn(usize) -> usize> Policy for FnPolicy<P> {
    fn act(&self, state: usize) -> usize {
        (self.0)(state)
    }
}

/// What an agent needs to know about the environment it is trained in.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvInfo {
    pub states: usize,
    pub regular_actions: usize,
    pub intervention_actions: usize,
    pub goal_count: usize,
    pub goal_weights: Vec<f64>,
    pub goal_positions: Option<Vec<[f64; 2]>>,
    /// Initial-support states as `(index, goal)`.
    pub initial: Vec<(usize, usize)>,
    pub spec_hash: String,
}

impl EnvInfo {
    pub fn of<E: Environment>(env: &E) -> Self {
        Self {
            states: env.state_count(),
            regular_actions: env.action_count(),
            intervention_actions: env.intervention_count(),
            goal_count: env.goal_count(),
            goal_weights: env.goal_weights(),
            goal_positions: env.goal_positions(),
            initial: env
                .initial_support()
                .iter()
                .map(|s| (env.index(s), env.goal_of(s)))
                .collect(),
            spec_hash: env.spec_hash(),
        }
    }

    pub fn columns(&self) -> usize {
        self.regular_actions + self.intervention_actions
    }
}

/// Contents of one Q-table, detached from its scalar type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSnapshot {
    pub name: String,
    pub states: usize,
    pub actions: usize,
    pub learning_rate: LearningRate,
    pub gamma: f64,
    pub boundary_b: Option<u64>,
    pub values: Vec<f64>,
}

impl TableSnapshot {
    pub fn of<F: Scalar>(name: &str, q: &QTable<F>) -> Self {
        Self {
            name: name.to_string(),
            states: q.states(),
            actions: q.actions(),
            learning_rate: q.learning_rate(),
            gamma: q.gamma().to_f64_lossy(),
            boundary_b: q.boundary(),
            values: q.values().iter().map(|v| v.to_f64_lossy()).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "state_index,action_index,value")?;
        for s in 0..self.states {
            for a in 0..self.actions {
                writeln!(out, "{s},{a},{}", self.values[s * self.actions + a])?;
            }
        }
        Ok(())
    }

    /// JSON header accompanying the CSV body.
    pub fn header(&self, env_hash: &str, step: u64) -> serde_json::Value {
        let alpha = match self.learning_rate {
            LearningRate::Constant { alpha } => serde_json::json!(alpha),
            LearningRate::VisitDecay { omega } => serde_json::json!({ "visit_decay_omega": omega }),
        };
        serde_json::json!({
            "table": self.name,
            "env_hash": env_hash,
            "alpha": alpha,
            "gamma": self.gamma,
            "boundary_b": self.boundary_b,
            "step": step,
            "states": self.states,
            "actions": self.actions,
        })
    }
}

/// A learning algorithm: consumes transitions, emits exploratory actions and
/// an evaluation policy.
pub trait Agent: Send {
    fn name(&self) -> &'static str;

    fn observe(&mut self, record: &TransitionRecord) -> Result<()>;

    /// Exploratory action (a column, regular actions first).
    fn select_action(&mut self, state: usize, t: u64, rng: &mut Prng) -> usize;

    /// Current evaluation policy. Never changes the agent.
    fn eval_policy(&self) -> Box<dyn Policy + '_>;

    /// Surrogate-reward phase active at step `t`.
    fn phase(&self, _t: u64) -> Option<u8> {
        None
    }

    /// Goal the agent wants to pursue from step `t` on, if it wants to change it.
    fn propose_goal(&mut self, _state: usize, _t: u64, _rng: &mut Prng) -> Option<usize> {
        None
    }

    /// Reset period this agent must be trained under, if any.
    fn required_period(&self) -> Option<u64> {
        None
    }

    fn snapshot(&self) -> Vec<TableSnapshot>;
}

/// Feeds demonstrations to `agent` before training. Each trajectory is
/// observed back to front so that a single pass propagates the final reward
/// along the whole demo.
pub fn ingest_demos(agent: &mut dyn Agent, demos: &DemoSet, info: &EnvInfo) -> Result<()> {
    if demos.is_empty() {
        return Ok(());
    }
    demos.check_env(&info.spec_hash)?;
    for traj in demos.records(info.regular_actions)? {
        for r in traj.iter().rev() {
            if r.state >= info.states || r.next_state >= info.states {
                return Err(Error::Mismatch(format!(
                    "demo state outside 0..{}",
                    info.states
                )));
            }
            agent.observe(r)?;
        }
    }
    Ok(())
}
