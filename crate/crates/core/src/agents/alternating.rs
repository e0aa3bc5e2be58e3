//! Two controllers that take turns every `K` steps: the task controller on
//! the environment reward and a second controller on a surrogate reward.
//! Both tables learn from every transition, each with its own reward.

use super::{
    epsilon_greedy, Agent, EnvInfo, Greedy, Policy, QParams, QTable, TableSnapshot, VisitCounts,
};
use crate::error::{Error, Result};
use crate::mdp::{sample_weighted, TransitionRecord};
use crate::rng::Prng;
use crate::scalar::Scalar;

pub const FORWARD: u8 = 0;
pub const SECOND: u8 = 1;

/// Reward optimised by the second controller.
#[derive(Debug, Clone, PartialEq)]
pub enum Surrogate {
    /// `1` when the next state is in the designated initial set (backward controller).
    InitialSet(Vec<bool>),
    /// `1 / sqrt(N(s') + 1)` (perturbation controller).
    Novelty(VisitCounts),
}

#[derive(Debug, Clone)]
pub struct Alternating<F = f64> {
    forward: QTable<F>,
    second: QTable<F>,
    surrogate: Surrogate,
    switch_k: u64,
    params: QParams,
    regular: usize,
    goal_weights: Vec<f64>,
}

fn check_k(k: u64) -> Result<()> {
    if k == 0 {
        return Err(Error::config("switch period K must be at least 1"));
    }
    Ok(())
}

/// Forward-backward agent. `initial_states = None` uses the environment's
/// initial support.
pub fn make_fbrl<F: Scalar>(
    info: &EnvInfo,
    params: QParams,
    switch_k: u64,
    initial_states: Option<&[usize]>,
) -> Result<Alternating<F>> {
    check_k(switch_k)?;
    let set: Vec<usize> = match initial_states {
        Some(s) => s.to_vec(),
        None => info.initial.iter().map(|(i, _)| *i).collect(),
    };
    if set.is_empty() {
        return Err(Error::config("FBRL needs a nonempty initial-state set"));
    }
    let mut member = vec![false; info.states];
    for s in set {
        *member
            .get_mut(s)
            .ok_or_else(|| Error::config(format!("initial state {s} out of range")))? = true;
    }
    build(info, params, switch_k, Surrogate::InitialSet(member))
}

pub fn make_perturbation<F: Scalar>(
    info: &EnvInfo,
    params: QParams,
    switch_k: u64,
) -> Result<Alternating<F>> {
    check_k(switch_k)?;
    build(
        info,
        params,
        switch_k,
        Surrogate::Novelty(VisitCounts::new(info.states)),
    )
}

fn build<F: Scalar>(
    info: &EnvInfo,
    params: QParams,
    switch_k: u64,
    surrogate: Surrogate,
) -> Result<Alternating<F>> {
    Ok(Alternating {
        forward: QTable::new(info.states, info.columns(), &params)?,
        second: QTable::new(info.states, info.columns(), &params)?,
        surrogate,
        switch_k,
        params,
        regular: info.regular_actions,
        goal_weights: info.goal_weights.clone(),
    })
}

impl<F: Scalar> Alternating<F> {
    pub fn forward(&self) -> &QTable<F> {
        &self.forward
    }

    pub fn second(&self) -> &QTable<F> {
        &self.second
    }

    pub fn switch_k(&self) -> u64 {
        self.switch_k
    }

    pub fn counts(&self) -> Option<&VisitCounts> {
        match &self.surrogate {
            Surrogate::Novelty(c) => Some(c),
            Surrogate::InitialSet(_) => None,
        }
    }

    pub fn phase_at(&self, t: u64) -> u8 {
        ((t / self.switch_k) % 2) as u8
    }

    /// Surrogate reward of a transition into `next` (novelty is read before
    /// the visit is counted).
    pub fn surrogate_reward(&self, next: usize) -> f64 {
        match &self.surrogate {
            Surrogate::InitialSet(member) => {
                if member[next] {
                    1.0
                } else {
                    0.0
                }
            }
            Surrogate::Novelty(c) => c.novelty(next),
        }
    }
}

impl<F: Scalar> Agent for Alternating<F> {
    fn name(&self) -> &'static str {
        match self.surrogate {
            Surrogate::InitialSet(_) => "fbrl",
            Surrogate::Novelty(_) => "perturbation",
        }
    }

    fn observe(&mut self, r: &TransitionRecord) -> Result<()> {
        let a = r.action.column(self.regular);
        self.forward
            .update(r.t, r.state, a, r.reward, r.next_state)?;
        let surrogate = self.surrogate_reward(r.next_state);
        self.second
            .update(r.t, r.state, a, surrogate, r.next_state)?;
        if let Surrogate::Novelty(c) = &mut self.surrogate {
            c.record(r.next_state);
        }
        Ok(())
    }

    fn select_action(&mut self, state: usize, t: u64, rng: &mut Prng) -> usize {
        let eps = self.params.explore.epsilon(t);
        let q = if self.phase_at(t) == FORWARD {
            &self.forward
        } else {
            &self.second
        };
        epsilon_greedy(q, state, eps, rng)
    }

    fn eval_policy(&self) -> Box<dyn Policy + '_> {
        Box::new(Greedy::new(&self.forward, self.regular))
    }

    fn phase(&self, t: u64) -> Option<u8> {
        Some(self.phase_at(t))
    }

    /// A fresh task goal at the start of every forward phase.
    fn propose_goal(&mut self, _state: usize, t: u64, rng: &mut Prng) -> Option<usize> {
        if self.goal_weights.len() > 1 && t.is_multiple_of(2 * self.switch_k) {
            Some(sample_weighted(&self.goal_weights, rng))
        } else {
            None
        }
    }

    fn snapshot(&self) -> Vec<TableSnapshot> {
        let second = match self.surrogate {
            Surrogate::InitialSet(_) => "backward",
            Surrogate::Novelty(_) => "perturbation",
        };
        vec![
            TableSnapshot::of("forward", &self.forward),
            TableSnapshot::of(second, &self.second),
        ]
    }
}
