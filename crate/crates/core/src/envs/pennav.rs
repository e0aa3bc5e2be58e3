//! Discretised pen navigation with a dense distance reward.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::{cell_at, cell_index, shift, Cell, Move};
use crate::error::{Error, Result};
use crate::mdp::{
    hash_spec, wrap_goal_conditioned, Action, Environment, GoalConditioned, GoalSpec, Outcome,
};
use crate::rng::Prng;

pub const STAY: usize = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenNavSpec {
    pub pen_side: f64,
    /// Cells per side.
    pub cell_resolution: usize,
    pub goal_set: Vec<[f64; 2]>,
    /// Start point; `None` is the centre of the pen.
    pub start: Option<[f64; 2]>,
    pub distance_coeff: f64,
    pub action_cost_coeff: f64,
    pub discount: f64,
    pub eval_horizon: usize,
}

impl Default for PenNavSpec {
    fn default() -> Self {
        Self {
            pen_side: 3.5,
            cell_resolution: 7,
            goal_set: vec![[0.75, 0.75], [2.75, 0.75], [0.75, 2.75], [2.75, 2.75]],
            start: None,
            distance_coeff: 2.0,
            action_cost_coeff: 0.02,
            discount: 0.95,
            eval_horizon: 1000,
        }
    }
}

impl PenNavSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.pen_side > 0.0 && self.pen_side.is_finite()) {
            return Err(Error::config("pen_side must be positive"));
        }
        if self.cell_resolution == 0 {
            return Err(Error::config("cell_resolution must be positive"));
        }
        if self.goal_set.is_empty() {
            return Err(Error::config("pen needs at least one goal"));
        }
        let inside = |p: &[f64; 2]| p.iter().all(|v| (0.0..=self.pen_side).contains(v));
        if let Some(g) = self.goal_set.iter().find(|g| !inside(g)) {
            return Err(Error::config(format!("goal {g:?} outside the pen")));
        }
        if self.start.as_ref().is_some_and(|s| !inside(s)) {
            return Err(Error::config("start outside the pen"));
        }
        if !self.distance_coeff.is_finite() || !self.action_cost_coeff.is_finite() {
            return Err(Error::config("reward coefficients must be finite"));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::config("discount must lie in [0, 1)"));
        }
        if self.eval_horizon == 0 {
            return Err(Error::config("eval_horizon must be positive"));
        }
        Ok(())
    }

    pub fn cell_size(&self) -> f64 {
        self.pen_side / self.cell_resolution as f64
    }

    pub fn cell_of(&self, p: [f64; 2]) -> Cell {
        let n = self.cell_resolution;
        let f = |v: f64| ((v / self.cell_size()).floor().max(0.0) as usize).min(n - 1);
        [f(p[0]), f(p[1])]
    }

    pub fn centre(&self, c: Cell) -> [f64; 2] {
        let h = self.cell_size();
        [(c[0] as f64 + 0.5) * h, (c[1] as f64 + 0.5) * h]
    }
}

/// Goal-free pen dynamics; state is the cell index.
#[derive(Debug, Clone)]
pub struct PenGrid {
    spec: PenNavSpec,
}

impl PenGrid {
    pub fn new(spec: PenNavSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &PenNavSpec {
        &self.spec
    }

    pub fn start_cell(&self) -> Cell {
        let p = self.spec.start.unwrap_or([self.spec.pen_side / 2.0; 2]);
        self.spec.cell_of(p)
    }

    pub fn position(&self, state: usize) -> [f64; 2] {
        self.spec.centre(cell_at(state, self.spec.cell_resolution))
    }

    pub fn distance(&self, state: usize, goal: usize) -> f64 {
        let p = self.position(state);
        let g = self.spec.goal_set[goal];
        ((p[0] - g[0]).powi(2) + (p[1] - g[1]).powi(2)).sqrt()
    }

    pub fn next_state(&self, state: usize, action: usize) -> usize {
        if action == STAY {
            return state;
        }
        let n = self.spec.cell_resolution;
        let c = cell_at(state, n);
        shift(c, Move::ALL[action - 1], n).map_or(state, |c| cell_index(c, n))
    }

    /// Dense reward on the post-move position, minus a per-move effort cost.
    pub fn goal_spec(&self) -> GoalSpec<usize> {
        let me = self.clone();
        let reward = Arc::new(move |_s: &usize, a: Action, next: &usize, g: usize| {
            let moved = matches!(a, Action::Regular(i) if i != STAY);
            -me.spec.distance_coeff * me.distance(*next, g)
                - if moved {
                    me.spec.action_cost_coeff
                } else {
                    0.0
                }
        });
        let far = self.spec.pen_side * std::f64::consts::SQRT_2;
        let lo = -self.spec.distance_coeff.abs() * far - self.spec.action_cost_coeff.abs();
        let hi = self.spec.distance_coeff.abs() * far + self.spec.action_cost_coeff.abs();
        let bounds = if self.spec.distance_coeff >= 0.0 && self.spec.action_cost_coeff >= 0.0 {
            (lo, 0.0)
        } else {
            (lo, hi)
        };
        GoalSpec {
            goal_count: self.spec.goal_set.len(),
            weights: Vec::new(),
            reward,
            reward_bounds: bounds,
            positions: Some(self.spec.goal_set.clone()),
        }
    }
}

impl Environment for PenGrid {
    type State = usize;

    fn name(&self) -> String {
        "pennav".into()
    }
    fn state_count(&self) -> usize {
        self.spec.cell_resolution * self.spec.cell_resolution
    }
    fn action_count(&self) -> usize {
        5
    }
    fn discount(&self) -> f64 {
        self.spec.discount
    }
    fn reward_bounds(&self) -> (f64, f64) {
        (0.0, 0.0)
    }
    fn eval_horizon(&self) -> usize {
        self.spec.eval_horizon
    }
    fn index(&self, state: &usize) -> usize {
        *state
    }
    fn state_at(&self, index: usize) -> Option<usize> {
        (index < self.state_count()).then_some(index)
    }
    fn coords(&self, state: &usize) -> Option<[f64; 2]> {
        Some(self.position(*state))
    }
    fn sample_initial(&self, _rng: &mut Prng) -> usize {
        cell_index(self.start_cell(), self.spec.cell_resolution)
    }
    fn initial_support(&self) -> Vec<usize> {
        vec![cell_index(self.start_cell(), self.spec.cell_resolution)]
    }
    fn sample_uniform(&self, rng: &mut Prng) -> Option<usize> {
        Some(rng.gen_range(0..self.state_count()))
    }
    fn outcomes(&self, state: &usize, action: Action) -> Option<Vec<Outcome<usize>>> {
        let Action::Regular(a) = action else {
            return None;
        };
        Some(vec![Outcome {
            prob: 1.0,
            next: self.next_state(*state, a),
            reward: 0.0,
        }])
    }
    fn spec_hash(&self) -> String {
        hash_spec("pennav", &self.spec)
    }
}

pub type PenNav = GoalConditioned<PenGrid>;

pub fn make_pennav(spec: PenNavSpec) -> Result<PenNav> {
    let base = PenGrid::new(spec)?;
    let goals = base.goal_spec();
    wrap_goal_conditioned(base, goals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::GoalState;
    use crate::rng::prng;

    #[test]
    fn move_reward_uses_post_move_distance() {
        let env = make_pennav(PenNavSpec::default()).unwrap();
        let base = env.inner();
        // Cell (3,1) is exactly 1.0 from goal 0 at (0.75, 0.75).
        let s = cell_index([3, 1], 7);
        assert!((base.distance(s, 0) - 1.0).abs() < 1e-12);
        let west = 3;
        let tr = env
            .step(
                &GoalState { base: s, goal: 0 },
                Action::Regular(west),
                0,
                &mut prng(0),
            )
            .unwrap();
        let d_after = base.distance(tr.next.base, 0);
        assert!((d_after - 0.5).abs() < 1e-12);
        assert!((tr.reward - (-2.0 * d_after - 0.02)).abs() < 1e-12);
    }

    #[test]
    fn staying_costs_no_effort() {
        let env = make_pennav(PenNavSpec::default()).unwrap();
        let s = GoalState {
            base: cell_index([1, 1], 7),
            goal: 0,
        };
        let tr = env
            .step(&s, Action::Regular(STAY), 0, &mut prng(0))
            .unwrap();
        assert_eq!(tr.reward, 0.0);
    }

    #[test]
    fn goals_outside_rejected() {
        let spec = PenNavSpec {
            goal_set: vec![[4.0, 1.0]],
            ..Default::default()
        };
        assert!(make_pennav(spec).is_err());
    }
}
