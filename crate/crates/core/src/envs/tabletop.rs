//! Grid analogue of tabletop organization: a point gripper carries one
//! object to one of four goal cells.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::{cell_at, cell_index, euclid, on_grid, shift, Cell, Move};
use crate::error::{Error, Result};
use crate::mdp::{
    hash_spec, wrap_goal_conditioned, Action, Environment, GoalConditioned, GoalSpec, Outcome,
};
use crate::rng::Prng;

pub const TOGGLE: usize = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TabletopGridSpec {
    pub grid_side: usize,
    pub goal_cells: Vec<Cell>,
    pub object_start: Cell,
    pub gripper_start: Cell,
    /// Euclidean radius, in cells, within which the object counts as placed.
    pub success_radius: usize,
    pub discount: f64,
    pub eval_horizon: usize,
}

impl Default for TabletopGridSpec {
    fn default() -> Self {
        Self {
            grid_side: 11,
            goal_cells: vec![[3, 3], [7, 3], [3, 7], [7, 7]],
            object_start: [5, 5],
            gripper_start: [5, 3],
            success_radius: 0,
            discount: 0.95,
            eval_horizon: 200,
        }
    }
}

impl TabletopGridSpec {
    /// A smaller board with the same layout proportions: goals at
    /// `mid ± side/4`, which reproduces the default layout for side 11.
    pub fn compact(side: usize) -> Self {
        let mid = side / 2;
        let lo = mid - side / 4;
        let hi = mid + side / 4;
        Self {
            grid_side: side,
            goal_cells: vec![[lo, lo], [hi, lo], [lo, hi], [hi, hi]],
            object_start: [mid, mid],
            gripper_start: [mid, mid.saturating_sub(1)],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let side = self.grid_side;
        if side < 2 {
            return Err(Error::config("tabletop grid_side must be at least 2"));
        }
        if self.goal_cells.len() != 4 {
            return Err(Error::config("tabletop needs exactly 4 goal cells"));
        }
        for (i, g) in self.goal_cells.iter().enumerate() {
            if !on_grid(*g, side) {
                return Err(Error::config(format!("goal cell {g:?} off the grid")));
            }
            if self.goal_cells[..i].contains(g) {
                return Err(Error::config(format!("duplicate goal cell {g:?}")));
            }
        }
        if !on_grid(self.object_start, side) || !on_grid(self.gripper_start, side) {
            return Err(Error::config("tabletop start cells must be on the grid"));
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

/// Decoded tabletop state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TabletopState {
    pub gripper: Cell,
    pub holding: bool,
    pub object: Cell,
}

/// Goal-free tabletop dynamics. The task reward lives in the goal spec.
#[derive(Debug, Clone)]
pub struct TabletopGrid {
    spec: TabletopGridSpec,
}

impl TabletopGrid {
    pub fn new(spec: TabletopGridSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &TabletopGridSpec {
        &self.spec
    }

    fn cells(&self) -> usize {
        self.spec.grid_side * self.spec.grid_side
    }

    pub fn encode(&self, s: TabletopState) -> usize {
        let side = self.spec.grid_side;
        (cell_index(s.gripper, side) * 2 + s.holding as usize) * self.cells()
            + cell_index(s.object, side)
    }

    pub fn decode(&self, index: usize) -> TabletopState {
        let side = self.spec.grid_side;
        let n = self.cells();
        let object = cell_at(index % n, side);
        let rest = index / n;
        TabletopState {
            gripper: cell_at(rest / 2, side),
            holding: rest % 2 == 1,
            object,
        }
    }

    /// Holding implies the gripper sits on the object.
    pub fn is_valid(&self, s: TabletopState) -> bool {
        !s.holding || s.gripper == s.object
    }

    pub fn start_state(&self) -> TabletopState {
        TabletopState {
            gripper: self.spec.gripper_start,
            holding: false,
            object: self.spec.object_start,
        }
    }

    pub fn success(&self, s: TabletopState, goal: usize) -> bool {
        euclid(s.object, self.spec.goal_cells[goal]) <= self.spec.success_radius as f64
    }

    /// Sparse goal reward, evaluated on the state the action is taken in.
    pub fn goal_spec(&self) -> GoalSpec<usize> {
        let me = self.clone();
        let reward = Arc::new(move |s: &usize, _a: Action, _next: &usize, g: usize| {
            if me.success(me.decode(*s), g) {
                1.0
            } else {
                0.0
            }
        });
        let positions = self
            .spec
            .goal_cells
            .iter()
            .map(|c| [c[0] as f64, c[1] as f64])
            .collect();
        GoalSpec {
            goal_count: 4,
            weights: Vec::new(),
            reward,
            reward_bounds: (0.0, 1.0),
            positions: Some(positions),
        }
    }

    pub fn next_state(&self, s: TabletopState, action: usize) -> TabletopState {
        let side = self.spec.grid_side;
        if action == TOGGLE {
            return if s.holding {
                TabletopState {
                    holding: false,
                    ..s
                }
            } else if s.gripper == s.object {
                TabletopState { holding: true, ..s }
            } else {
                s
            };
        }
        let m = Move::ALL[action - 1];
        match shift(s.gripper, m, side) {
            Some(g) if s.holding => TabletopState {
                gripper: g,
                holding: true,
                object: g,
            },
            Some(g) => TabletopState { gripper: g, ..s },
            None => s,
        }
    }
}

impl Environment for TabletopGrid {
    type State = usize;

    fn name(&self) -> String {
        "tabletop".into()
    }
    fn state_count(&self) -> usize {
        self.cells() * 2 * self.cells()
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
        (index < self.state_count() && self.is_valid(self.decode(index))).then_some(index)
    }
    fn coords(&self, state: &usize) -> Option<[f64; 2]> {
        let g = self.decode(*state).gripper;
        Some([g[0] as f64, g[1] as f64])
    }
    fn sample_initial(&self, _rng: &mut Prng) -> usize {
        self.encode(self.start_state())
    }
    fn initial_support(&self) -> Vec<usize> {
        vec![self.encode(self.start_state())]
    }
    fn sample_uniform(&self, rng: &mut Prng) -> Option<usize> {
        // Valid states: every (gripper, object) pair unheld, plus held on the object.
        let n = self.cells();
        let side = self.spec.grid_side;
        let k = rng.gen_range(0..n * n + n);
        let s = if k < n * n {
            TabletopState {
                gripper: cell_at(k / n, side),
                holding: false,
                object: cell_at(k % n, side),
            }
        } else {
            let c = cell_at(k - n * n, side);
            TabletopState {
                gripper: c,
                holding: true,
                object: c,
            }
        };
        Some(self.encode(s))
    }
    fn outcomes(&self, state: &usize, action: Action) -> Option<Vec<Outcome<usize>>> {
        let Action::Regular(a) = action else {
            return None;
        };
        let next = self.encode(self.next_state(self.decode(*state), a));
        Some(vec![Outcome {
            prob: 1.0,
            next,
            reward: 0.0,
        }])
    }
    fn spec_hash(&self) -> String {
        hash_spec("tabletop", &self.spec)
    }
}

/// Goal-conditioned tabletop environment.
pub type Tabletop = GoalConditioned<TabletopGrid>;

pub fn make_tabletop(spec: TabletopGridSpec) -> Result<Tabletop> {
    let base = TabletopGrid::new(spec)?;
    let goals = base.goal_spec();
    wrap_goal_conditioned(base, goals)
}
