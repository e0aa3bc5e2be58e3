//! Reference solvers over enumerated environments: value iteration, policy
//! evaluation, finite-horizon backward induction, stationary distributions
//! and reachability. Test code only; the library never calls these.
#![allow(dead_code)]

use std::collections::VecDeque;

use arl::agents::Policy;
use arl::mdp::{Action, Environment};
use arl::{Error, Result};

/// Tabular model `(p, r)` with expected rewards. States for which the
/// environment has no `state_at` are marked invalid and never reached.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseModel {
    pub states: usize,
    pub actions: usize,
    /// `transitions[s * actions + a]` lists `(next, prob)`.
    pub transitions: Vec<Vec<(usize, f64)>>,
    pub rewards: Vec<f64>,
    pub valid: Vec<bool>,
}

impl DenseModel {
    /// Enumerates the regular-action dynamics of `env`.
    pub fn from_env<E: Environment>(env: &E) -> Result<Self> {
        let (n, m) = (env.state_count(), env.action_count());
        let mut transitions = vec![Vec::new(); n * m];
        let mut rewards = vec![0.0; n * m];
        let mut valid = vec![false; n];
        for i in 0..n {
            let Some(s) = env.state_at(i) else { continue };
            if env.index(&s) != i {
                return Err(Error::Mismatch(format!(
                    "state_at({i}) does not round-trip"
                )));
            }
            valid[i] = true;
            for a in 0..m {
                let outs = env.outcomes(&s, Action::Regular(a)).ok_or_else(|| {
                    Error::Unsupported(format!("{} has no enumerated dynamics", env.name()))
                })?;
                let row = &mut transitions[i * m + a];
                for o in outs {
                    rewards[i * m + a] += o.prob * o.reward;
                    let j = env.index(&o.next);
                    match row.iter_mut().find(|(k, _)| *k == j) {
                        Some(e) => e.1 += o.prob,
                        None => row.push((j, o.prob)),
                    }
                }
            }
        }
        Ok(Self {
            states: n,
            actions: m,
            transitions,
            rewards,
            valid,
        })
    }

    pub fn next(&self, s: usize, a: usize) -> &[(usize, f64)] {
        &self.transitions[s * self.actions + a]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[s * self.actions + a]
    }

    fn backup(&self, v: &[f64], s: usize, a: usize, gamma: f64) -> f64 {
        self.reward(s, a) + gamma * self.next(s, a).iter().map(|&(j, p)| p * v[j]).sum::<f64>()
    }

    fn greedy_of(&self, q: &[f64], s: usize) -> usize {
        let row = &q[s * self.actions..(s + 1) * self.actions];
        let mut best = 0;
        for a in 1..self.actions {
            if row[a] > row[best] {
                best = a;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub values: Vec<f64>,
    pub q: Vec<f64>,
    pub policy: Vec<usize>,
    pub iterations: usize,
}

/// Discounted value iteration until the sup-norm change is below `tol`.
pub fn value_iteration(model: &DenseModel, gamma: f64, tol: f64) -> Solution {
    let (n, m) = (model.states, model.actions);
    let mut v = vec![0.0; n];
    let mut q = vec![0.0; n * m];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut delta: f64 = 0.0;
        for s in (0..n).filter(|&s| model.valid[s]) {
            let mut best = f64::NEG_INFINITY;
            for a in 0..m {
                let x = model.backup(&v, s, a, gamma);
                q[s * m + a] = x;
                best = best.max(x);
            }
            delta = delta.max((best - v[s]).abs());
            v[s] = best;
        }
        if delta < tol || iterations > 1_000_000 {
            break;
        }
    }
    let policy = (0..n).map(|s| model.greedy_of(&q, s)).collect();
    Solution {
        values: v,
        q,
        policy,
        iterations,
    }
}

/// Discounted value of a deterministic policy, to tolerance `tol`.
pub fn policy_evaluation(
    model: &DenseModel,
    policy: &dyn Policy,
    gamma: f64,
    tol: f64,
) -> Vec<f64> {
    let n = model.states;
    let mut v = vec![0.0; n];
    for _ in 0..1_000_000 {
        let mut delta: f64 = 0.0;
        for s in (0..n).filter(|&s| model.valid[s]) {
            let x = model.backup(&v, s, policy.act(s), gamma);
            delta = delta.max((x - v[s]).abs());
            v[s] = x;
        }
        if delta < tol {
            break;
        }
    }
    v
}

/// Optimal undiscounted `horizon`-step values and the first-step policy.
pub fn finite_horizon_optimal(model: &DenseModel, horizon: usize) -> (Vec<f64>, Vec<usize>) {
    let (n, m) = (model.states, model.actions);
    let mut v = vec![0.0; n];
    let mut q = vec![0.0; n * m];
    for _ in 0..horizon {
        let mut next = vec![0.0; n];
        for s in (0..n).filter(|&s| model.valid[s]) {
            for a in 0..m {
                q[s * m + a] = model.backup(&v, s, a, 1.0);
            }
            next[s] = q[s * m + model.greedy_of(&q, s)];
        }
        v = next;
    }
    let policy = (0..n).map(|s| model.greedy_of(&q, s)).collect();
    (v, policy)
}

/// Undiscounted `horizon`-step value of a stationary deterministic policy.
pub fn finite_horizon_value(model: &DenseModel, policy: &dyn Policy, horizon: usize) -> Vec<f64> {
    let n = model.states;
    let mut v = vec![0.0; n];
    for _ in 0..horizon {
        let next: Vec<f64> = (0..n)
            .map(|s| {
                if model.valid[s] {
                    model.backup(&v, s, policy.act(s), 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        v = next;
    }
    v
}

/// Markov chain induced by a stochastic policy `pi(s) -> action probabilities`.
pub fn policy_chain(model: &DenseModel, pi: impl Fn(usize) -> Vec<f64>) -> Vec<Vec<(usize, f64)>> {
    (0..model.states)
        .map(|s| {
            let mut row: Vec<(usize, f64)> = Vec::new();
            if !model.valid[s] {
                return row;
            }
            for (a, pa) in pi(s).into_iter().enumerate() {
                if pa == 0.0 {
                    continue;
                }
                for &(j, p) in model.next(s, a) {
                    match row.iter_mut().find(|(k, _)| *k == j) {
                        Some(e) => e.1 += pa * p,
                        None => row.push((j, pa * p)),
                    }
                }
            }
            row
        })
        .collect()
}

/// Expected reward per state under a stochastic policy.
pub fn policy_rewards(model: &DenseModel, pi: impl Fn(usize) -> Vec<f64>) -> Vec<f64> {
    (0..model.states)
        .map(|s| {
            pi(s)
                .into_iter()
                .enumerate()
                .map(|(a, p)| p * model.reward(s, a))
                .sum()
        })
        .collect()
}

/// Stationary distribution of `chain` from `start`, by power iteration on the
/// lazy chain `(I + P) / 2` (same fixed point, no periodicity issues).
pub fn stationary_distribution(chain: &[Vec<(usize, f64)>], start: usize, tol: f64) -> Vec<f64> {
    let n = chain.len();
    let mut mu = vec![0.0; n];
    mu[start] = 1.0;
    for _ in 0..10_000_000 {
        let mut next: Vec<f64> = mu.iter().map(|m| 0.5 * m).collect();
        for (s, row) in chain.iter().enumerate() {
            for &(j, p) in row {
                next[j] += 0.5 * mu[s] * p;
            }
        }
        let delta = next
            .iter()
            .zip(&mu)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
        mu = next;
        if delta < tol {
            break;
        }
    }
    mu
}

/// States reachable from `from` under some sequence of regular actions.
pub fn reachable(model: &DenseModel, from: usize) -> Vec<bool> {
    let mut seen = vec![false; model.states];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(s) = queue.pop_front() {
        for a in 0..model.actions {
            for &(j, p) in model.next(s, a) {
                if p > 0.0 && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    seen
}

/// Length of a shortest action sequence from `from` to any state satisfying
/// `target` (deterministic reading: any positive-probability successor).
pub fn shortest_steps(
    model: &DenseModel,
    from: usize,
    target: impl Fn(usize) -> bool,
) -> Option<usize> {
    let mut dist = vec![usize::MAX; model.states];
    let mut queue = VecDeque::from([from]);
    dist[from] = 0;
    while let Some(s) = queue.pop_front() {
        if target(s) {
            return Some(dist[s]);
        }
        for a in 0..model.actions {
            for &(j, p) in model.next(s, a) {
                if p > 0.0 && dist[j] == usize::MAX {
                    dist[j] = dist[s] + 1;
                    queue.push_back(j);
                }
            }
        }
    }
    None
}
