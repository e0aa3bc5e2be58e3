//! Peg transport on a table with a trench. A peg dropped into a drop cell
//! can never be recovered by the agent itself.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::{cell_at, cell_index, on_grid, shift, Cell, Move};
use crate::error::{Error, Result};
use crate::mdp::{hash_spec, Action, Environment, Outcome, TargetFn, TriggerFn};
use crate::rng::Prng;

pub const TOGGLE: usize = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PegGridSpec {
    pub grid_side: usize,
    pub hole_cell: Cell,
    pub start_cell: Cell,
    /// `None` selects the default layout: a trench down the middle column
    /// with a single bridge cell.
    pub drop_cells: Option<Vec<Cell>>,
    pub discount: f64,
    pub eval_horizon: usize,
}

impl Default for PegGridSpec {
    fn default() -> Self {
        Self {
            grid_side: 9,
            hole_cell: [6, 4],
            start_cell: [2, 4],
            drop_cells: None,
            discount: 0.95,
            eval_horizon: 200,
        }
    }
}

impl PegGridSpec {
    pub fn resolved_drops(&self) -> BTreeSet<Cell> {
        match &self.drop_cells {
            Some(cells) => cells.iter().copied().collect(),
            None => {
                let mid = self.grid_side / 2;
                (0..self.grid_side)
                    .filter(|&y| y != mid)
                    .map(|y| [mid, y])
                    .collect()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let side = self.grid_side;
        if side < 2 {
            return Err(Error::config("peg grid_side must be at least 2"));
        }
        if !on_grid(self.hole_cell, side) || !on_grid(self.start_cell, side) {
            return Err(Error::config("peg hole and start must be on the grid"));
        }
        let drops = self.resolved_drops();
        if let Some(c) = drops.iter().find(|c| !on_grid(**c, side)) {
            return Err(Error::config(format!("drop cell {c:?} off the grid")));
        }
        if drops.contains(&self.hole_cell) {
            return Err(Error::config("hole cell may not be a drop cell"));
        }
        if drops.contains(&self.start_cell) {
            return Err(Error::config("start cell may not be a drop cell"));
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PegState {
    pub peg: Cell,
    pub held: bool,
}

/// Index layout: `cell * 2 + held`.
#[derive(Debug, Clone)]
pub struct PegGrid {
    spec: PegGridSpec,
    drops: Vec<bool>,
}

pub fn make_peg(spec: PegGridSpec) -> Result<PegGrid> {
    spec.validate()?;
    let side = spec.grid_side;
    let mut drops = vec![false; side * side];
    for c in spec.resolved_drops() {
        drops[cell_index(c, side)] = true;
    }
    Ok(PegGrid { spec, drops })
}

impl PegGrid {
    pub fn spec(&self) -> &PegGridSpec {
        &self.spec
    }

    pub fn encode(&self, s: PegState) -> usize {
        cell_index(s.peg, self.spec.grid_side) * 2 + s.held as usize
    }

    pub fn decode(&self, index: usize) -> PegState {
        PegState {
            peg: cell_at(index / 2, self.spec.grid_side),
            held: index % 2 == 1,
        }
    }

    pub fn is_drop(&self, c: Cell) -> bool {
        self.drops[cell_index(c, self.spec.grid_side)]
    }

    pub fn start_state(&self) -> PegState {
        PegState {
            peg: self.spec.start_cell,
            held: false,
        }
    }

    pub fn next_state(&self, s: PegState, action: usize) -> PegState {
        if self.is_drop(s.peg) {
            return s;
        }
        if action == TOGGLE {
            return PegState { held: !s.held, ..s };
        }
        if !s.held {
            return s;
        }
        match shift(s.peg, Move::ALL[action - 1], self.spec.grid_side) {
            Some(c) if self.is_drop(c) => PegState {
                peg: c,
                held: false,
            },
            Some(c) => PegState { peg: c, held: true },
            None => s,
        }
    }

    /// Fires when the peg lies in a drop cell.
    pub fn drop_trigger(&self) -> TriggerFn<usize> {
        let me = self.clone();
        Arc::new(move |s: &usize| me.is_drop(me.decode(*s).peg))
    }

    /// Puts the peg back, released, where it was before the step.
    pub fn release_target(&self) -> TargetFn<usize> {
        let me = self.clone();
        Arc::new(move |s: &usize, _a: Action, _rng: &mut Prng| {
            let PegState { peg, .. } = me.decode(*s);
            me.encode(PegState { peg, held: false })
        })
    }
}

impl Environment for PegGrid {
    type State = usize;

    fn name(&self) -> String {
        "peg".into()
    }
    fn state_count(&self) -> usize {
        self.spec.grid_side * self.spec.grid_side * 2
    }
    fn action_count(&self) -> usize {
        5
    }
    fn discount(&self) -> f64 {
        self.spec.discount
    }
    fn reward_bounds(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn eval_horizon(&self) -> usize {
        self.spec.eval_horizon
    }
    fn index(&self, state: &usize) -> usize {
        *state
    }
    fn state_at(&self, index: usize) -> Option<usize> {
        if index >= self.state_count() {
            return None;
        }
        let s = self.decode(index);
        // A peg in a drop cell is never held.
        (!(s.held && self.is_drop(s.peg))).then_some(index)
    }
    fn coords(&self, state: &usize) -> Option<[f64; 2]> {
        let c = self.decode(*state).peg;
        Some([c[0] as f64, c[1] as f64])
    }
    fn sample_initial(&self, _rng: &mut Prng) -> usize {
        self.encode(self.start_state())
    }
    fn initial_support(&self) -> Vec<usize> {
        vec![self.encode(self.start_state())]
    }
    /// Uniform over pegs outside the drop region.
    fn sample_uniform(&self, rng: &mut Prng) -> Option<usize> {
        let valid: Vec<usize> = (0..self.state_count())
            .filter(|&i| !self.is_drop(self.decode(i).peg))
            .collect();
        Some(valid[rng.gen_range(0..valid.len())])
    }
    fn outcomes(&self, state: &usize, action: Action) -> Option<Vec<Outcome<usize>>> {
        let Action::Regular(a) = action else {
            return None;
        };
        let s = self.decode(*state);
        let reward = if s.peg == self.spec.hole_cell {
            1.0
        } else {
            0.0
        };
        Some(vec![Outcome {
            prob: 1.0,
            next: self.encode(self.next_state(s, a)),
            reward,
        }])
    }
    fn spec_hash(&self) -> String {
        hash_spec("peg", &self.spec)
    }
}
