use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::mdp::{hash_spec, sample_weighted, Action, Environment, Outcome, Transition};
use crate::rng::Prng;

pub type CostFn<S> = Arc<dyn Fn(&S, Action) -> f64 + Send + Sync>;
pub type TargetFn<S> = Arc<dyn Fn(&S, Action, &mut Prng) -> S + Send + Sync>;
pub type TriggerFn<S> = Arc<dyn Fn(&S) -> bool + Send + Sync>;
pub type GoalRewardFn<S> = Arc<dyn Fn(&S, Action, &S, usize) -> f64 + Send + Sync>;

macro_rules! forward_goals {
    () => {
        fn goal_count(&self) -> usize {
            self.inner.goal_count()
        }
        fn goal_weights(&self) -> Vec<f64> {
            self.inner.goal_weights()
        }
        fn goal_positions(&self) -> Option<Vec<[f64; 2]>> {
            self.inner.goal_positions()
        }
    };
}

// ---------------------------------------------------------------------------
// Stochastic intervention: p~ = (1 - eps) p + eps rho

/// Resets to a fresh draw from the initial distribution with probability
/// `epsilon` on every step. The reported reward is that of the attempted step.
#[derive(Clone)]
pub struct StochasticIntervention<E> {
    inner: E,
    epsilon: f64,
}

pub fn wrap_stochastic_intervention<E: Environment>(
    env: E,
    epsilon: f64,
) -> Result<StochasticIntervention<E>> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::config(format!("epsilon {epsilon} outside [0, 1]")));
    }
    Ok(StochasticIntervention {
        inner: env,
        epsilon,
    })
}

impl<E> StochasticIntervention<E> {
    pub fn inner(&self) -> &E {
        &self.inner
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl<E: Environment> Environment for StochasticIntervention<E> {
    type State = E::State;

    fn name(&self) -> String {
        format!("{}+stochastic({})", self.inner.name(), self.epsilon)
    }
    fn state_count(&self) -> usize {
        self.inner.state_count()
    }
    fn action_count(&self) -> usize {
        self.inner.action_count()
    }
    fn intervention_count(&self) -> usize {
        self.inner.intervention_count()
    }
    fn discount(&self) -> f64 {
        self.inner.discount()
    }
    fn reward_bounds(&self) -> (f64, f64) {
        self.inner.reward_bounds()
    }
    fn eval_horizon(&self) -> usize {
        self.inner.eval_horizon()
    }
    fn index(&self, state: &E::State) -> usize {
        self.inner.index(state)
    }
    fn state_at(&self, index: usize) -> Option<E::State> {
        self.inner.state_at(index)
    }
    fn coords(&self, state: &E::State) -> Option<[f64; 2]> {
        self.inner.coords(state)
    }
    fn sample_initial(&self, rng: &mut Prng) -> E::State {
        self.inner.sample_initial(rng)
    }
    fn initial_support(&self) -> Vec<E::State> {
        self.inner.initial_support()
    }
    fn sample_uniform(&self, rng: &mut Prng) -> Option<E::State> {
        self.inner.sample_uniform(rng)
    }
    fn outcomes(&self, _state: &E::State, _action: Action) -> Option<Vec<Outcome<E::State>>> {
        None
    }

    fn step(
        &self,
        state: &E::State,
        action: Action,
        t: u64,
        rng: &mut Prng,
    ) -> Result<Transition<E::State>> {
        // eps = 0 draws nothing, so the trajectory matches the bare environment.
        let reset = self.epsilon > 0.0 && (self.epsilon >= 1.0 || rng.gen::<f64>() < self.epsilon);
        let mut tr = self.inner.step(state, action, t, rng)?;
        if reset {
            tr.next = self.inner.sample_initial(rng);
            tr.intervention = true;
        }
        Ok(tr)
    }

    fn goal_of(&self, state: &E::State) -> usize {
        self.inner.goal_of(state)
    }
    fn with_goal(&self, state: E::State, goal: usize) -> Result<E::State> {
        self.inner.with_goal(state, goal)
    }
    forward_goals!();

    fn spec_hash(&self) -> String {
        self.inner.spec_hash()
    }
}

// ---------------------------------------------------------------------------
// Fixed-period intervention

/// Resets to a fresh draw from the initial distribution exactly when
/// `(t + 1) % period == 0`. `period == None` never resets.
#[derive(Clone)]
pub struct PeriodicIntervention<E> {
    inner: E,
    period: Option<u64>,
}

pub fn wrap_periodic_intervention<E: Environment>(
    env: E,
    period: u64,
) -> Result<PeriodicIntervention<E>> {
    if period == 0 {
        return Err(Error::config("reset period must be at least 1"));
    }
    Ok(PeriodicIntervention {
        inner: env,
        period: Some(period),
    })
}

impl<E> PeriodicIntervention<E> {
    /// The infinite-period sentinel: a wrapper that never intervenes.
    pub fn never(env: E) -> Self {
        Self {
            inner: env,
            period: None,
        }
    }
    pub fn inner(&self) -> &E {
        &self.inner
    }
    pub fn period(&self) -> Option<u64> {
        self.period
    }
}

impl<E: Environment> Environment for PeriodicIntervention<E> {
    type State = E::State;

    fn name(&self) -> String {
        match self.period {
            Some(p) => format!("{}+periodic({p})", self.inner.name()),
            None => format!("{}+periodic(inf)", self.inner.name()),
        }
    }
    fn state_count(&self) -> usize {
        self.inner.state_count()
    }
    fn action_count(&self) -> usize {
        self.inner.action_count()
    }
    fn intervention_count(&self) -> usize {
        self.inner.intervention_count()
    }
    fn discount(&self) -> f64 {
        self.inner.discount()
    }
    fn reward_bounds(&self) -> (f64, f64) {
        self.inner.reward_bounds()
    }
    fn eval_horizon(&self) -> usize {
        self.inner.eval_horizon()
    }
    fn index(&self, state: &E::State) -> usize {
        self.inner.index(state)
    }
    fn state_at(&self, index: usize) -> Option<E::State> {
        self.inner.state_at(index)
    }
    fn coords(&self, state: &E::State) -> Option<[f64; 2]> {
        self.inner.coords(state)
    }
    fn sample_initial(&self, rng: &mut Prng) -> E::State {
        self.inner.sample_initial(rng)
    }
    fn initial_support(&self) -> Vec<E::State> {
        self.inner.initial_support()
    }
    fn sample_uniform(&self, rng: &mut Prng) -> Option<E::State> {
        self.inner.sample_uniform(rng)
    }
    fn outcomes(&self, _state: &E::State, _action: Action) -> Option<Vec<Outcome<E::State>>> {
        None
    }

    fn step(
        &self,
        state: &E::State,
        action: Action,
        t: u64,
        rng: &mut Prng,
    ) -> Result<Transition<E::State>> {
        let mut tr = self.inner.step(state, action, t, rng)?;
        if self.period.is_some_and(|p| (t + 1).is_multiple_of(p)) {
            tr.next = self.inner.sample_initial(rng);
            tr.intervention = true;
        }
        Ok(tr)
    }

    fn goal_of(&self, state: &E::State) -> usize {
        self.inner.goal_of(state)
    }
    fn with_goal(&self, state: E::State, goal: usize) -> Result<E::State> {
        self.inner.with_goal(state, goal)
    }
    forward_goals!();

    fn spec_hash(&self) -> String {
        self.inner.spec_hash()
    }
}

// ---------------------------------------------------------------------------
// Budgeted intervention (augmented MDP with an absorbing s_0)

/// State of the budget-augmented MDP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedState<S> {
    pub base: S,
    /// Remaining intervention budget.
    pub budget: f64,
    /// At the absorbing state; training is over.
    pub absorbed: bool,
}

/// Adds intervention actions with a cost and a finite budget.
///
/// An intervention (requested through an `Intervention` action, or forced
/// when `trigger` fires on the successor of a regular step) moves the base
/// state to `target(s, a)` and deducts `cost(s, a)`, where `s, a` are the
/// state and action of the step. If the cost exceeds the remaining budget the
/// process moves to the absorbing state and stays there with reward 0.
#[derive(Clone)]
pub struct BudgetedIntervention<E: Environment> {
    inner: E,
    h_max: f64,
    cost: CostFn<E::State>,
    target: TargetFn<E::State>,
    trigger: Option<TriggerFn<E::State>>,
    requests: usize,
}

impl<E: Environment> fmt::Debug for BudgetedIntervention<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BudgetedIntervention")
            .field("inner", &self.inner.name())
            .field("h_max", &self.h_max)
            .field("forced", &self.trigger.is_some())
            .field("requests", &self.requests)
            .finish()
    }
}

/// Builds the budgeted wrapper. `targets = None` resets to a fresh draw from
/// the initial distribution. One intervention action is exposed.
pub fn wrap_budgeted_intervention<E: Environment + 'static>(
    env: E,
    h_max: f64,
    cost: CostFn<E::State>,
    targets: Option<TargetFn<E::State>>,
    forced_trigger: Option<TriggerFn<E::State>>,
) -> Result<BudgetedIntervention<E>> {
    if !(h_max > 0.0 && h_max.is_finite()) {
        return Err(Error::config(format!(
            "intervention budget {h_max} must be positive"
        )));
    }
    let target = targets.unwrap_or_else(|| {
        let rho = env.clone();
        Arc::new(move |_: &E::State, _: Action, rng: &mut Prng| rho.sample_initial(rng))
    });
    Ok(BudgetedIntervention {
        inner: env,
        h_max,
        cost,
        target,
        trigger: forced_trigger,
        requests: 1,
    })
}

impl<E: Environment> BudgetedIntervention<E> {
    /// Sets how many intervention actions the agent may request (0 leaves
    /// only environment-forced interventions).
    pub fn with_request_actions(mut self, n: usize) -> Self {
        self.requests = n;
        self
    }

    pub fn inner(&self) -> &E {
        &self.inner
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    fn absorbed_state(&self, base: E::State) -> AugmentedState<E::State> {
        AugmentedState {
            base,
            budget: 0.0,
            absorbed: true,
        }
    }

    fn intervene(
        &self,
        state: &AugmentedState<E::State>,
        action: Action,
        rng: &mut Prng,
    ) -> AugmentedState<E::State> {
        let c = (self.cost)(&state.base, action);
        debug_assert!(c >= 0.0, "negative intervention cost");
        if c > state.budget {
            return self.absorbed_state(state.base);
        }
        let base = (self.target)(&state.base, action, rng);
        AugmentedState {
            base,
            budget: state.budget - c,
            absorbed: false,
        }
    }
}

impl<E: Environment> Environment for BudgetedIntervention<E> {
    type State = AugmentedState<E::State>;

    fn name(&self) -> String {
        format!("{}+budgeted({})", self.inner.name(), self.h_max)
    }
    /// Base states plus the absorbing state (last index).
    fn state_count(&self) -> usize {
        self.inner.state_count() + 1
    }
    fn action_count(&self) -> usize {
        self.inner.action_count()
    }
    fn intervention_count(&self) -> usize {
        self.requests
    }
    fn discount(&self) -> f64 {
        self.inner.discount()
    }
    fn reward_bounds(&self) -> (f64, f64) {
        let (lo, hi) = self.inner.reward_bounds();
        (lo.min(0.0), hi.max(0.0))
    }
    fn eval_horizon(&self) -> usize {
        self.inner.eval_horizon()
    }
    fn index(&self, state: &Self::State) -> usize {
        if state.absorbed {
            self.inner.state_count()
        } else {
            self.inner.index(&state.base)
        }
    }
    fn state_at(&self, index: usize) -> Option<Self::State> {
        let n = self.inner.state_count();
        if index < n {
            let base = self.inner.state_at(index)?;
            Some(AugmentedState {
                base,
                budget: self.h_max,
                absorbed: false,
            })
        } else if index == n {
            let base = *self.inner.initial_support().first()?;
            Some(self.absorbed_state(base))
        } else {
            None
        }
    }
    fn coords(&self, state: &Self::State) -> Option<[f64; 2]> {
        self.inner.coords(&state.base)
    }
    fn sample_initial(&self, rng: &mut Prng) -> Self::State {
        AugmentedState {
            base: self.inner.sample_initial(rng),
            budget: self.h_max,
            absorbed: false,
        }
    }
    fn initial_support(&self) -> Vec<Self::State> {
        self.inner
            .initial_support()
            .into_iter()
            .map(|base| AugmentedState {
                base,
                budget: self.h_max,
                absorbed: false,
            })
            .collect()
    }
    fn sample_uniform(&self, rng: &mut Prng) -> Option<Self::State> {
        let base = self.inner.sample_uniform(rng)?;
        Some(AugmentedState {
            base,
            budget: self.h_max,
            absorbed: false,
        })
    }
    fn outcomes(&self, _state: &Self::State, _action: Action) -> Option<Vec<Outcome<Self::State>>> {
        None
    }

    fn step(
        &self,
        state: &Self::State,
        action: Action,
        t: u64,
        rng: &mut Prng,
    ) -> Result<Transition<Self::State>> {
        self.check_action(action, t)?;
        if state.absorbed {
            return Ok(Transition {
                next: *state,
                reward: 0.0,
                intervention: false,
            });
        }
        match action {
            Action::Intervention(_) => Ok(Transition {
                next: self.intervene(state, action, rng),
                reward: 0.0,
                intervention: true,
            }),
            Action::Regular(_) => {
                let tr = self.inner.step(&state.base, action, t, rng)?;
                let forced = self.trigger.as_ref().is_some_and(|fire| fire(&tr.next));
                if forced {
                    Ok(Transition {
                        next: self.intervene(state, action, rng),
                        reward: tr.reward,
                        intervention: true,
                    })
                } else {
                    Ok(Transition {
                        next: AugmentedState {
                            base: tr.next,
                            ..*state
                        },
                        reward: tr.reward,
                        intervention: tr.intervention,
                    })
                }
            }
        }
    }

    fn goal_of(&self, state: &Self::State) -> usize {
        self.inner.goal_of(&state.base)
    }
    fn with_goal(&self, state: Self::State, goal: usize) -> Result<Self::State> {
        Ok(AugmentedState {
            base: self.inner.with_goal(state.base, goal)?,
            ..state
        })
    }
    forward_goals!();

    fn spec_hash(&self) -> String {
        self.inner.spec_hash()
    }
}

// ---------------------------------------------------------------------------
// Goal conditioning

/// Goal space `G`, task distribution `p_g` and goal reward `r(s, a, g)`.
#[derive(Clone)]
pub struct GoalSpec<S> {
    pub goal_count: usize,
    /// Unnormalised `p_g`; empty means uniform.
    pub weights: Vec<f64>,
    pub reward: GoalRewardFn<S>,
    pub reward_bounds: (f64, f64),
    /// Positions of the goals in the environment's coordinate frame.
    pub positions: Option<Vec<[f64; 2]>>,
}

impl<S> GoalSpec<S> {
    pub fn uniform(goal_count: usize, reward: GoalRewardFn<S>, reward_bounds: (f64, f64)) -> Self {
        Self {
            goal_count,
            weights: Vec::new(),
            reward,
            reward_bounds,
            positions: None,
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        if self.weights.is_empty() {
            vec![1.0; self.goal_count]
        } else {
            self.weights.clone()
        }
    }

    pub fn sample_goal(&self, rng: &mut Prng) -> usize {
        sample_weighted(&self.weights(), rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalState<S> {
    pub base: S,
    pub goal: usize,
}

/// Environment whose state carries the current goal and whose reward is the
/// goal reward. The goal is changed only through [`Environment::with_goal`] or
/// by a fresh initial draw.
#[derive(Clone)]
pub struct GoalConditioned<E: Environment> {
    inner: E,
    goals: GoalSpec<E::State>,
}

pub fn wrap_goal_conditioned<E: Environment>(
    env: E,
    goals: GoalSpec<E::State>,
) -> Result<GoalConditioned<E>> {
    if goals.goal_count == 0 {
        return Err(Error::config("goal space is empty"));
    }
    if !goals.weights.is_empty()
        && (goals.weights.len() != goals.goal_count
            || goals.weights.iter().any(|w| w.is_nan() || *w < 0.0)
            || goals.weights.iter().sum::<f64>() <= 0.0)
    {
        return Err(Error::config(
            "goal weights must be non-negative, one per goal",
        ));
    }
    if goals
        .positions
        .as_ref()
        .is_some_and(|p| p.len() != goals.goal_count)
    {
        return Err(Error::config("one position per goal required"));
    }
    Ok(GoalConditioned { inner: env, goals })
}

impl<E: Environment> GoalConditioned<E> {
    pub fn inner(&self) -> &E {
        &self.inner
    }
    pub fn goals(&self) -> &GoalSpec<E::State> {
        &self.goals
    }
    /// Number of base states per goal slice of the index space.
    pub fn base_count(&self) -> usize {
        self.inner.state_count()
    }
}

impl<E: Environment> Environment for GoalConditioned<E> {
    type State = GoalState<E::State>;

    fn name(&self) -> String {
        self.inner.name()
    }
    fn state_count(&self) -> usize {
        self.inner.state_count() * self.goals.goal_count
    }
    fn action_count(&self) -> usize {
        self.inner.action_count()
    }
    fn intervention_count(&self) -> usize {
        self.inner.intervention_count()
    }
    fn discount(&self) -> f64 {
        self.inner.discount()
    }
    fn reward_bounds(&self) -> (f64, f64) {
        self.goals.reward_bounds
    }
    fn eval_horizon(&self) -> usize {
        self.inner.eval_horizon()
    }
    fn index(&self, state: &Self::State) -> usize {
        state.goal * self.inner.state_count() + self.inner.index(&state.base)
    }
    fn state_at(&self, index: usize) -> Option<Self::State> {
        let n = self.inner.state_count();
        let goal = index / n;
        if goal >= self.goals.goal_count {
            return None;
        }
        Some(GoalState {
            base: self.inner.state_at(index % n)?,
            goal,
        })
    }
    fn coords(&self, state: &Self::State) -> Option<[f64; 2]> {
        self.inner.coords(&state.base)
    }
    fn sample_initial(&self, rng: &mut Prng) -> Self::State {
        let base = self.inner.sample_initial(rng);
        GoalState {
            base,
            goal: self.goals.sample_goal(rng),
        }
    }
    fn initial_support(&self) -> Vec<Self::State> {
        let bases = self.inner.initial_support();
        (0..self.goals.goal_count)
            .flat_map(|goal| bases.iter().map(move |&base| GoalState { base, goal }))
            .collect()
    }
    fn sample_uniform(&self, rng: &mut Prng) -> Option<Self::State> {
        let base = self.inner.sample_uniform(rng)?;
        Some(GoalState {
            base,
            goal: self.goals.sample_goal(rng),
        })
    }
    fn outcomes(&self, state: &Self::State, action: Action) -> Option<Vec<Outcome<Self::State>>> {
        let goal = state.goal;
        let base = self.inner.outcomes(&state.base, action)?;
        Some(
            base.into_iter()
                .map(|o| Outcome {
                    prob: o.prob,
                    next: GoalState { base: o.next, goal },
                    reward: (self.goals.reward)(&state.base, action, &o.next, goal),
                })
                .collect(),
        )
    }

    fn step(
        &self,
        state: &Self::State,
        action: Action,
        t: u64,
        rng: &mut Prng,
    ) -> Result<Transition<Self::State>> {
        let tr = self.inner.step(&state.base, action, t, rng)?;
        let reward = (self.goals.reward)(&state.base, action, &tr.next, state.goal);
        Ok(Transition {
            next: GoalState {
                base: tr.next,
                goal: state.goal,
            },
            reward,
            intervention: tr.intervention,
        })
    }

    fn goal_count(&self) -> usize {
        self.goals.goal_count
    }
    fn goal_of(&self, state: &Self::State) -> usize {
        state.goal
    }
    fn with_goal(&self, state: Self::State, goal: usize) -> Result<Self::State> {
        if goal >= self.goals.goal_count {
            return Err(Error::config(format!(
                "goal {goal} out of range ({} goals)",
                self.goals.goal_count
            )));
        }
        Ok(GoalState { goal, ..state })
    }
    fn goal_weights(&self) -> Vec<f64> {
        self.goals.weights()
    }
    fn goal_positions(&self) -> Option<Vec<[f64; 2]>> {
        self.goals.positions.clone()
    }

    fn spec_hash(&self) -> String {
        hash_spec(
            "goal_conditioned",
            &(
                self.inner.spec_hash(),
                self.goals.goal_count,
                self.goals.weights(),
            ),
        )
    }
}
