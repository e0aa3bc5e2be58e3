//! The two one-dimensional diagnostics: an endless running corridor and a
//! bounded chain with a goal at the far end.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{hash_spec, Action, Environment, Outcome};
use crate::rng::Prng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticVariant {
    /// Reward is the signed displacement; there is nothing to undo.
    InfiniteCorridor,
    /// Reward 1 at the last cell; practising requires walking back.
    #[default]
    GoalChain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnosticSpec {
    /// Implied by the environment name, so not part of the parameter block.
    #[serde(skip)]
    pub variant: DiagnosticVariant,
    /// Chain length; for the corridor, the period of the state index.
    pub chain_length: usize,
    pub advance_success_prob: f64,
    /// Goal chain: a move away from the goal cell succeeds with
    /// `advance_success_prob * goal_exit_prob`, so undoing the task is hard.
    pub goal_exit_prob: f64,
    pub discount: f64,
    pub eval_horizon: usize,
}

impl Default for DiagnosticSpec {
    fn default() -> Self {
        Self {
            variant: DiagnosticVariant::GoalChain,
            chain_length: 10,
            advance_success_prob: 0.9,
            goal_exit_prob: 0.02,
            discount: 0.95,
            eval_horizon: 100,
        }
    }
}

impl DiagnosticSpec {
    pub fn corridor() -> Self {
        Self {
            variant: DiagnosticVariant::InfiniteCorridor,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variant == DiagnosticVariant::GoalChain && self.chain_length < 2 {
            return Err(Error::config("goal chain needs chain_length >= 2"));
        }
        if self.chain_length == 0 {
            return Err(Error::config("chain_length must be positive"));
        }
        if !(self.advance_success_prob > 0.0 && self.advance_success_prob <= 1.0) {
            return Err(Error::config("advance_success_prob must lie in (0, 1]"));
        }
        if !(self.goal_exit_prob > 0.0 && self.goal_exit_prob <= 1.0) {
            return Err(Error::config("goal_exit_prob must lie in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::config("discount must lie in [0, 1)"));
        }
        if self.eval_horizon == 0 {
            return Err(Error::config("eval_horizon must be positive"));
        }
        Ok(())
    }
}

/// Actions: goal chain `[left, right]`, corridor `[stay, left, right]`.
/// Moves succeed with `advance_success_prob`, otherwise the position holds.
#[derive(Debug, Clone)]
pub struct Diagnostic {
    spec: DiagnosticSpec,
}

pub fn make_diagnostic(spec: DiagnosticSpec) -> Result<Diagnostic> {
    spec.validate()?;
    Ok(Diagnostic { spec })
}

impl Diagnostic {
    pub fn spec(&self) -> &DiagnosticSpec {
        &self.spec
    }

    pub fn variant(&self) -> DiagnosticVariant {
        self.spec.variant
    }

    fn delta(&self, action: usize) -> i64 {
        match (self.spec.variant, action) {
            (DiagnosticVariant::GoalChain, 0) => -1,
            (DiagnosticVariant::GoalChain, _) => 1,
            (DiagnosticVariant::InfiniteCorridor, 0) => 0,
            (DiagnosticVariant::InfiniteCorridor, 1) => -1,
            (DiagnosticVariant::InfiniteCorridor, _) => 1,
        }
    }

    fn clamp(&self, pos: i64) -> i64 {
        match self.spec.variant {
            DiagnosticVariant::GoalChain => pos.clamp(0, self.spec.chain_length as i64 - 1),
            DiagnosticVariant::InfiniteCorridor => pos,
        }
    }

    fn is_goal(&self, pos: i64) -> bool {
        pos == self.spec.chain_length as i64 - 1
    }

    fn reward(&self, pos: i64, next: i64) -> f64 {
        match self.spec.variant {
            DiagnosticVariant::GoalChain => {
                if self.is_goal(pos) {
                    1.0
                } else {
                    0.0
                }
            }
            DiagnosticVariant::InfiniteCorridor => (next - pos) as f64,
        }
    }
}

impl Environment for Diagnostic {
    type State = i64;

    fn name(&self) -> String {
        match self.spec.variant {
            DiagnosticVariant::GoalChain => "goal_chain".into(),
            DiagnosticVariant::InfiniteCorridor => "corridor".into(),
        }
    }
    fn state_count(&self) -> usize {
        self.spec.chain_length
    }
    fn action_count(&self) -> usize {
        match self.spec.variant {
            DiagnosticVariant::GoalChain => 2,
            DiagnosticVariant::InfiniteCorridor => 3,
        }
    }
    fn discount(&self) -> f64 {
        self.spec.discount
    }
    fn reward_bounds(&self) -> (f64, f64) {
        match self.spec.variant {
            DiagnosticVariant::GoalChain => (0.0, 1.0),
            DiagnosticVariant::InfiniteCorridor => (-1.0, 1.0),
        }
    }
    fn eval_horizon(&self) -> usize {
        self.spec.eval_horizon
    }
    fn index(&self, state: &i64) -> usize {
        state.rem_euclid(self.spec.chain_length as i64) as usize
    }
    fn state_at(&self, index: usize) -> Option<i64> {
        (index < self.spec.chain_length).then_some(index as i64)
    }
    fn coords(&self, state: &i64) -> Option<[f64; 2]> {
        Some([*state as f64, 0.0])
    }
    fn sample_initial(&self, _rng: &mut Prng) -> i64 {
        0
    }
    fn initial_support(&self) -> Vec<i64> {
        vec![0]
    }
    fn sample_uniform(&self, rng: &mut Prng) -> Option<i64> {
        Some(rng.gen_range(0..self.spec.chain_length as i64))
    }
    fn outcomes(&self, state: &i64, action: Action) -> Option<Vec<Outcome<i64>>> {
        let Action::Regular(a) = action else {
            return None;
        };
        let target = self.clamp(state + self.delta(a));
        let mut p = self.spec.advance_success_prob;
        if self.spec.variant == DiagnosticVariant::GoalChain
            && target < *state
            && self.is_goal(*state)
        {
            p *= self.spec.goal_exit_prob;
        }
        let moved = Outcome {
            prob: p,
            next: target,
            reward: self.reward(*state, target),
        };
        if target == *state || p >= 1.0 {
            return Some(vec![Outcome { prob: 1.0, ..moved }]);
        }
        let held = Outcome {
            prob: 1.0 - p,
            next: *state,
            reward: self.reward(*state, *state),
        };
        Some(vec![moved, held])
    }
    fn spec_hash(&self) -> String {
        hash_spec(&self.name(), &self.spec)
    }
}
