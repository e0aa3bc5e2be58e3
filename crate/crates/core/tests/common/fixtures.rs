//! Hand-driven agents for kernel and wrapper tests.
#![allow(dead_code)]

use arl::agents::{Agent, FnPolicy, Policy, TableSnapshot};
use arl::mdp::TransitionRecord;
use arl::rng::Prng;
use arl::Result;
use rand::Rng;

/// Plays a fixed column sequence, then repeats `tail` forever.
pub struct Script {
    pub head: Vec<usize>,
    pub tail: Vec<usize>,
    pub seen: Vec<TransitionRecord>,
}

impl Script {
    pub fn new(head: Vec<usize>, tail: Vec<usize>) -> Self {
        Self {
            head,
            tail,
            seen: Vec::new(),
        }
    }

    pub fn constant(column: usize) -> Self {
        Self::new(Vec::new(), vec![column])
    }
}

impl Agent for Script {
    fn name(&self) -> &'static str {
        "script"
    }
    fn observe(&mut self, record: &TransitionRecord) -> Result<()> {
        self.seen.push(record.clone());
        Ok(())
    }
    fn select_action(&mut self, _state: usize, t: u64, _rng: &mut Prng) -> usize {
        let t = t as usize;
        match self.head.get(t) {
            Some(&a) => a,
            None => self.tail[(t - self.head.len()) % self.tail.len()],
        }
    }
    fn eval_policy(&self) -> Box<dyn Policy + '_> {
        Box::new(FnPolicy(|_| 0))
    }
    fn snapshot(&self) -> Vec<TableSnapshot> {
        Vec::new()
    }
}

/// Fixed epsilon-greedy behaviour around a deterministic policy.
pub struct EpsilonAgent {
    pub greedy: Vec<usize>,
    pub actions: usize,
    pub eps: f64,
}

impl EpsilonAgent {
    /// Action probabilities in state `s`.
    pub fn probs(&self, s: usize) -> Vec<f64> {
        let mut p = vec![self.eps / self.actions as f64; self.actions];
        p[self.greedy[s]] += 1.0 - self.eps;
        p
    }
}

impl Agent for EpsilonAgent {
    fn name(&self) -> &'static str {
        "epsilon"
    }
    fn observe(&mut self, _record: &TransitionRecord) -> Result<()> {
        Ok(())
    }
    fn select_action(&mut self, state: usize, _t: u64, rng: &mut Prng) -> usize {
        if rng.gen::<f64>() < self.eps {
            rng.gen_range(0..self.actions)
        } else {
            self.greedy[state]
        }
    }
    fn eval_policy(&self) -> Box<dyn Policy + '_> {
        Box::new(FnPolicy(|s| self.greedy[s]))
    }
    fn snapshot(&self) -> Vec<TableSnapshot> {
        Vec::new()
    }
}
