use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MetricSeries;
use crate::agents::Policy;
use crate::error::{Error, Result};
use crate::mdp::{Action, Environment};
use crate::rng::{mix, prng, Prng};
use crate::scalar::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSchedule {
    pub eval_every: u64,
    pub n_rollouts: usize,
    pub eval_horizon: usize,
    pub discounted: bool,
    /// Discount used when `discounted` is set.
    pub gamma_eval: f64,
}

impl Default for EvalSchedule {
    fn default() -> Self {
        Self {
            eval_every: 10_000,
            n_rollouts: 10,
            eval_horizon: 200,
            discounted: false,
            gamma_eval: 0.99,
        }
    }
}

impl EvalSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.eval_every == 0 || self.n_rollouts == 0 {
            return Err(Error::config("eval_every and n_rollouts must be positive"));
        }
        if self.eval_horizon == 0 {
            return Err(Error::config("evaluation horizon H_E must be positive"));
        }
        if self.discounted && !(0.0..1.0).contains(&self.gamma_eval) {
            return Err(Error::config("gamma_eval must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartDistribution {
    /// The environment's own initial distribution.
    Default,
    /// Uniform over valid non-absorbing states.
    Uniform,
}

/// Mean return and success rate over one batch of rollouts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub mean_return: f64,
    /// Fraction of rollouts whose last reward was positive.
    pub success_rate: f64,
}

/// Rolls out `policy` `n_rollouts` times for `H_E` steps in `env`.
///
/// One seed is drawn from `rng`; rollout `i` then uses its own stream derived
/// from that seed, so the result does not depend on rollout order.
pub fn evaluate<E: Environment>(
    policy: &dyn Policy,
    env: &E,
    sched: &EvalSchedule,
    start: StartDistribution,
    rng: &mut Prng,
) -> Result<EvalOutcome> {
    sched.validate()?;
    let base: u64 = rng.gen();
    let mut returns = CompensatedSum::new();
    let mut successes = 0usize;
    for i in 0..sched.n_rollouts {
        let mut r = prng(mix(base ^ mix(i as u64)));
        let mut s = match start {
            StartDistribution::Default => env.sample_initial(&mut r),
            StartDistribution::Uniform => env.sample_uniform(&mut r).ok_or_else(|| {
                Error::Unsupported(format!(
                    "{} has no uniform initial-state variant",
                    env.name()
                ))
            })?,
        };
        let mut total = CompensatedSum::new();
        let mut weight = 1.0;
        let mut last = 0.0;
        for t in 0..sched.eval_horizon {
            let a = policy.act(env.index(&s));
            if a >= env.action_count() {
                return Err(Error::InvalidAction {
                    t: t as u64,
                    action: Action::Regular(a),
                    reason: "evaluation policy must return a regular action".into(),
                });
            }
            let tr = env.step(&s, Action::Regular(a), t as u64, &mut r)?;
            total.add(weight * tr.reward);
            if sched.discounted {
                weight *= sched.gamma_eval;
            }
            last = tr.reward;
            s = tr.next;
        }
        returns.add(total.value());
        successes += (last > 0.0) as usize;
    }
    let n = sched.n_rollouts as f64;
    Ok(EvalOutcome {
        mean_return: returns.value() / n,
        success_rate: successes as f64 / n,
    })
}

/// Estimate of `J_D(pi)` from fresh initial states.
pub fn deployed_return<E: Environment>(
    policy: &dyn Policy,
    eval_env: &E,
    sched: &EvalSchedule,
    rng: &mut Prng,
) -> Result<f64> {
    Ok(evaluate(policy, eval_env, sched, StartDistribution::Default, rng)?.mean_return)
}

/// `sum_t (j_star - J_t)`, or `-sum_t J_t` when `j_star` is unknown.
pub fn deployed_regret(series: &MetricSeries, j_star: Option<f64>) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in series.values() {
        acc.add(j_star.unwrap_or(0.0) - v);
    }
    acc.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub default_return: f64,
    pub uniform_return: f64,
    /// `(default - uniform) / |default|`; undefined when `default == 0`.
    pub depreciation: Option<f64>,
}

/// Evaluates one policy from the default and from a uniform start distribution.
pub fn robustness_eval<E: Environment>(
    policy: &dyn Policy,
    env: &E,
    sched: &EvalSchedule,
    rng: &mut Prng,
) -> Result<RobustnessReport> {
    let default_return = evaluate(policy, env, sched, StartDistribution::Default, rng)?.mean_return;
    let uniform_return = evaluate(policy, env, sched, StartDistribution::Uniform, rng)?.mean_return;
    let depreciation =
        (default_return != 0.0).then(|| (default_return - uniform_return) / default_return.abs());
    Ok(RobustnessReport {
        default_return,
        uniform_return,
        depreciation,
    })
}
