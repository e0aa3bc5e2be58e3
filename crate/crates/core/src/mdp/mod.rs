//! Environment abstraction, the non-episodic rollout kernel and the
//! autonomy wrappers (interventions and goal conditioning).

mod kernel;
mod wrappers;

use std::fmt::Debug;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Prng;

pub use kernel::{run_nonepisodic, write_transitions_csv, Observer, TransitionLog};
pub use wrappers::{
    wrap_budgeted_intervention, wrap_goal_conditioned, wrap_periodic_intervention,
    wrap_stochastic_intervention, AugmentedState, BudgetedIntervention, CostFn, GoalConditioned,
    GoalRewardFn, GoalSpec, GoalState, PeriodicIntervention, StochasticIntervention, TargetFn,
    TriggerFn,
};

/// An action in the (possibly augmented) action set.
///
/// `Intervention` actions only exist inside the budgeted wrapper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum Action {
    Regular(usize),
    Intervention(usize),
}

impl Action {
    /// Maps a flat column (regular actions first, then interventions) to an action.
    pub fn from_column(column: usize, regular: usize, interventions: usize) -> Option<Action> {
        if column < regular {
            Some(Action::Regular(column))
        } else if column < regular + interventions {
            Some(Action::Intervention(column - regular))
        } else {
            None
        }
    }

    pub fn column(self, regular: usize) -> usize {
        match self {
            Action::Regular(i) => i,
            Action::Intervention(j) => regular + j,
        }
    }

    pub fn is_intervention(self) -> bool {
        matches!(self, Action::Intervention(_))
    }
}

/// One interaction with the training environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub t: u64,
    pub state: usize,
    pub action: Action,
    pub next_state: usize,
    pub reward: f64,
    /// The next state came from a reset or intervention rather than the dynamics.
    pub intervention: bool,
    /// Surrogate-reward phase active when the action was chosen.
    pub phase: Option<u8>,
}

/// One possible successor of a state-action pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome<S> {
    pub prob: f64,
    pub next: S,
    pub reward: f64,
}

/// Result of a single environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition<S> {
    pub next: S,
    pub reward: f64,
    pub intervention: bool,
}

/// A Markov decision process `(S, A, p, r, rho, gamma)` that can be stepped.
///
/// States are enumerated: [`Environment::index`] maps every state into
/// `0..state_count()`, which is what tabular agents see. `step` must be a pure
/// function of its arguments and the PRNG stream.
pub trait Environment: Clone + Send + Sync {
    type State: Copy + Debug + PartialEq + Send + Sync;

    fn name(&self) -> String;
    fn state_count(&self) -> usize;
    /// Number of regular actions.
    fn action_count(&self) -> usize;
    /// Number of intervention actions (non-zero only in the budgeted wrapper).
    fn intervention_count(&self) -> usize {
        0
    }
    fn discount(&self) -> f64;
    /// Declared `[r_min, r_max]`.
    fn reward_bounds(&self) -> (f64, f64);
    fn eval_horizon(&self) -> usize;

    fn index(&self, state: &Self::State) -> usize;
    /// Inverse of [`Environment::index`], where the index identifies a state.
    fn state_at(&self, index: usize) -> Option<Self::State>;
    /// Low-dimensional projection used for visitation plots.
    fn coords(&self, _state: &Self::State) -> Option<[f64; 2]> {
        None
    }

    fn sample_initial(&self, rng: &mut Prng) -> Self::State;
    /// Support of the initial distribution (states from which a reset may start).
    fn initial_support(&self) -> Vec<Self::State>;
    /// Uniform draw over valid, non-absorbing states, when the environment offers one.
    fn sample_uniform(&self, _rng: &mut Prng) -> Option<Self::State> {
        None
    }

    /// Enumerated successor distribution. Wrappers whose dynamics depend on the
    /// step counter return `None`.
    fn outcomes(&self, state: &Self::State, action: Action) -> Option<Vec<Outcome<Self::State>>>;

    fn step(
        &self,
        state: &Self::State,
        action: Action,
        t: u64,
        rng: &mut Prng,
    ) -> Result<Transition<Self::State>> {
        self.check_action(action, t)?;
        let outcomes = self.outcomes(state, action).ok_or_else(|| {
            Error::Unsupported(format!("{} has no enumerated dynamics", self.name()))
        })?;
        let o = sample_outcome(&outcomes, rng);
        Ok(Transition {
            next: o.next,
            reward: o.reward,
            intervention: false,
        })
    }

    fn check_action(&self, action: Action, t: u64) -> Result<()> {
        match action {
            Action::Regular(i) if i < self.action_count() => Ok(()),
            Action::Regular(_) => Err(Error::InvalidAction {
                t,
                action,
                reason: format!("only {} regular actions", self.action_count()),
            }),
            Action::Intervention(j) if j < self.intervention_count() => Ok(()),
            Action::Intervention(_) => Err(Error::InvalidAction {
                t,
                action,
                reason: "intervention actions need the budgeted wrapper".into(),
            }),
        }
    }

    fn goal_count(&self) -> usize {
        1
    }
    fn goal_of(&self, _state: &Self::State) -> usize {
        0
    }
    fn with_goal(&self, state: Self::State, goal: usize) -> Result<Self::State> {
        if goal < self.goal_count() {
            Ok(state)
        } else {
            Err(Error::config(format!(
                "goal {goal} out of range for {}",
                self.name()
            )))
        }
    }
    /// Goal sampling weights (`p_g`), length `goal_count()`.
    fn goal_weights(&self) -> Vec<f64> {
        vec![1.0]
    }
    /// Positions of the goals, used for goal-to-goal distances.
    fn goal_positions(&self) -> Option<Vec<[f64; 2]>> {
        None
    }

    /// Stable identifier of the environment parameters.
    fn spec_hash(&self) -> String;
}

/// Draws one outcome. Deterministic transitions consume no randomness.
pub fn sample_outcome<S: Copy>(outcomes: &[Outcome<S>], rng: &mut Prng) -> Outcome<S> {
    assert!(!outcomes.is_empty(), "empty outcome list");
    if outcomes.len() == 1 {
        return outcomes[0];
    }
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for o in outcomes {
        acc += o.prob;
        if u < acc {
            return *o;
        }
    }
    *outcomes.last().unwrap()
}

/// Samples an index from non-negative weights.
pub fn sample_weighted(weights: &[f64], rng: &mut Prng) -> usize {
    if weights.len() == 1 {
        return 0;
    }
    let total: f64 = weights.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Hash of a serialisable parameter block, tagged with the environment name.
pub fn hash_spec<T: Serialize>(name: &str, spec: &T) -> String {
    use sha2::{Digest, Sha256};
    let body = serde_json::to_string(spec).expect("spec serialises");
    let mut h = Sha256::new();
    h.update(name.as_bytes());
    h.update(b"\0");
    h.update(body.as_bytes());
    hex::encode(&h.finalize()[..8])
}
