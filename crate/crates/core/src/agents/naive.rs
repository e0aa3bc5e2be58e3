use super::{epsilon_greedy, Agent, EnvInfo, Greedy, Policy, QParams, QTable, TableSnapshot};
use crate::error::{Error, Result};
use crate::mdp::TransitionRecord;
use crate::rng::Prng;
use crate::scalar::Scalar;

/// Q-learning on the environment reward alone.
#[derive(Debug, Clone)]
pub struct Naive<F = f64> {
    q: QTable<F>,
    params: QParams,
    regular: usize,
}

pub fn make_naive<F: Scalar>(info: &EnvInfo, params: QParams) -> Result<Naive<F>> {
    Ok(Naive {
        q: QTable::new(info.states, info.columns(), &params)?,
        params,
        regular: info.regular_actions,
    })
}

impl<F: Scalar> Naive<F> {
    pub fn q(&self) -> &QTable<F> {
        &self.q
    }

    pub fn q_mut(&mut self) -> &mut QTable<F> {
        &mut self.q
    }
}

impl<F: Scalar> Agent for Naive<F> {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn observe(&mut self, r: &TransitionRecord) -> Result<()> {
        self.q.update(
            r.t,
            r.state,
            r.action.column(self.regular),
            r.reward,
            r.next_state,
        )
    }

    fn select_action(&mut self, state: usize, t: u64, rng: &mut Prng) -> usize {
        epsilon_greedy(&self.q, state, self.params.explore.epsilon(t), rng)
    }

    fn eval_policy(&self) -> Box<dyn Policy + '_> {
        Box::new(Greedy::new(&self.q, self.regular))
    }

    fn snapshot(&self) -> Vec<TableSnapshot> {
        vec![TableSnapshot::of("q", &self.q)]
    }
}

/// Naive learner that must be trained with a reset every `H_E` steps.
#[derive(Debug, Clone)]
pub struct Oracle<F = f64> {
    inner: Naive<F>,
    period: Option<u64>,
}

/// `eval_horizon = None` is the never-reset sentinel, which makes the oracle a
/// plain naive learner. Without an explicit `boundary_b` the bootstrap is cut
/// at every reset, so episode ends are treated as terminal rather than as a
/// jump to a fresh start state.
pub fn make_oracle<F: Scalar>(
    info: &EnvInfo,
    mut params: QParams,
    eval_horizon: Option<u64>,
) -> Result<Oracle<F>> {
    if eval_horizon == Some(0) {
        return Err(Error::config("oracle eval horizon must be at least 1"));
    }
    if params.boundary_b.is_none() {
        params.boundary_b = eval_horizon;
    }
    Ok(Oracle {
        inner: make_naive(info, params)?,
        period: eval_horizon,
    })
}

impl<F: Scalar> Oracle<F> {
    pub fn q(&self) -> &QTable<F> {
        self.inner.q()
    }
}

impl<F: Scalar> Agent for Oracle<F> {
    fn name(&self) -> &'static str {
        "oracle"
    }
    fn observe(&mut self, r: &TransitionRecord) -> Result<()> {
        self.inner.observe(r)
    }
    fn select_action(&mut self, state: usize, t: u64, rng: &mut Prng) -> usize {
        self.inner.select_action(state, t, rng)
    }
    fn eval_policy(&self) -> Box<dyn Policy + '_> {
        self.inner.eval_policy()
    }
    fn required_period(&self) -> Option<u64> {
        self.period
    }
    fn snapshot(&self) -> Vec<TableSnapshot> {
        self.inner.snapshot()
    }
}
