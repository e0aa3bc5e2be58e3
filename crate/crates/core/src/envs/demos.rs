//! Scripted forward (task) and backward (undo) demonstrations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::{bfs_path, cell_index, l_path, Move};
use super::{door, peg, pennav, tabletop};
use super::{make_diagnostic, make_door, make_peg, make_pennav, make_tabletop, EnvSpec};
use crate::error::{Error, Result};
use crate::mdp::{Action, Environment, GoalState, TransitionRecord};
use crate::rng::Prng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoHeader {
    pub env: String,
    pub spec_hash: String,
    pub n_forward: usize,
    pub n_backward: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemoRecord {
    pub t: u64,
    pub state_index: usize,
    pub action_index: usize,
    pub next_state_index: usize,
    pub reward: f64,
}

/// Forward trajectories first, then backward ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoSet {
    pub header: DemoHeader,
    pub trajectories: Vec<Vec<DemoRecord>>,
}

impl DemoSet {
    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Demo transitions as training records (regular actions only).
    pub fn records(&self, regular_actions: usize) -> Result<Vec<Vec<TransitionRecord>>> {
        self.trajectories
            .iter()
            .map(|traj| {
                traj.iter()
                    .map(|r| {
                        let action = Action::from_column(r.action_index, regular_actions, 0)
                            .ok_or_else(|| {
                                Error::Mismatch(format!(
                                    "demo action {} out of range",
                                    r.action_index
                                ))
                            })?;
                        Ok(TransitionRecord {
                            t: r.t,
                            state: r.state_index,
                            action,
                            next_state: r.next_state_index,
                            reward: r.reward,
                            intervention: false,
                            phase: None,
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Fails unless the demos were generated for an environment with this hash.
    pub fn check_env(&self, spec_hash: &str) -> Result<()> {
        if self.header.spec_hash != spec_hash {
            return Err(Error::Mismatch(format!(
                "demos were recorded on {} ({}), training environment hash is {spec_hash}",
                self.header.env, self.header.spec_hash
            )));
        }
        Ok(())
    }
}

fn move_action(m: Move) -> usize {
    Move::ALL.iter().position(|&x| x == m).unwrap() + 1
}

fn moves(path: Vec<Move>) -> impl Iterator<Item = usize> {
    path.into_iter().map(move_action)
}

/// Steps `actions` through `env` from `start`, recording every transition.
fn record<E: Environment>(
    env: &E,
    start: E::State,
    actions: &[usize],
    rng: &mut Prng,
) -> Result<Vec<DemoRecord>> {
    let mut s = start;
    let mut out = Vec::with_capacity(actions.len());
    for (t, &a) in actions.iter().enumerate() {
        let tr = env.step(&s, Action::Regular(a), t as u64, rng)?;
        out.push(DemoRecord {
            t: t as u64,
            state_index: env.index(&s),
            action_index: a,
            next_state_index: env.index(&tr.next),
            reward: tr.reward,
        });
        s = tr.next;
    }
    Ok(out)
}

/// Re-executes a demo's actions from its recorded start state and checks that
/// states and rewards match exactly.
pub fn replay_demo<E: Environment>(env: &E, demo: &[DemoRecord], rng: &mut Prng) -> Result<()> {
    let Some(first) = demo.first() else {
        return Ok(());
    };
    let mut s = env.state_at(first.state_index).ok_or_else(|| {
        Error::Mismatch(format!("demo start {} is not a state", first.state_index))
    })?;
    for r in demo {
        if env.index(&s) != r.state_index {
            return Err(Error::Mismatch(format!("demo diverged before t={}", r.t)));
        }
        let tr = env.step(&s, Action::Regular(r.action_index), r.t, rng)?;
        if env.index(&tr.next) != r.next_state_index || tr.reward != r.reward {
            return Err(Error::Mismatch(format!("demo diverged at t={}", r.t)));
        }
        s = tr.next;
    }
    Ok(())
}

pub fn scripted_demos_by_name(
    env_name: &str,
    n_forward: usize,
    n_backward: usize,
    rng: &mut Prng,
) -> Result<DemoSet> {
    scripted_demos(&EnvSpec::default_for(env_name)?, n_forward, n_backward, rng)
}

/// Generates `n_forward` task demos and `n_backward` undo demos. Goal
/// conditioned environments cycle through their goals.
pub fn scripted_demos(
    spec: &EnvSpec,
    n_forward: usize,
    n_backward: usize,
    rng: &mut Prng,
) -> Result<DemoSet> {
    let spec = spec.clone().normalized()?;
    let (spec_hash, trajectories) = match &spec {
        EnvSpec::Tabletop(s) => {
            let env = make_tabletop(s.clone())?;
            (
                env.spec_hash(),
                tabletop_demos(&env, n_forward, n_backward, rng)?,
            )
        }
        EnvSpec::Door(s) => {
            let env = make_door(s.clone())?;
            (
                env.spec_hash(),
                door_demos(&env, n_forward, n_backward, rng)?,
            )
        }
        EnvSpec::Peg(s) => {
            let env = make_peg(s.clone())?;
            (
                env.spec_hash(),
                peg_demos(&env, n_forward, n_backward, rng)?,
            )
        }
        EnvSpec::Pennav(s) => {
            let env = make_pennav(s.clone())?;
            (
                env.spec_hash(),
                pennav_demos(&env, n_forward, n_backward, rng)?,
            )
        }
        EnvSpec::Corridor(s) | EnvSpec::GoalChain(s) => {
            let env = make_diagnostic(s.clone())?;
            if n_forward + n_backward == 0 {
                (env.spec_hash(), Vec::new())
            } else {
                return Err(Error::Unsupported(format!(
                    "no scripted demos for {}",
                    env.name()
                )));
            }
        }
    };
    Ok(DemoSet {
        header: DemoHeader {
            env: spec.name().to_string(),
            spec_hash,
            n_forward,
            n_backward,
        },
        trajectories,
    })
}

fn tabletop_demos(
    env: &tabletop::Tabletop,
    n_fwd: usize,
    n_bwd: usize,
    rng: &mut Prng,
) -> Result<Vec<Vec<DemoRecord>>> {
    let base = env.inner();
    let spec = base.spec().clone();
    let start = base.start_state();
    let mut out = Vec::with_capacity(n_fwd + n_bwd);
    for i in 0..n_fwd {
        let goal = i % spec.goal_cells.len();
        let mut actions: Vec<usize> =
            moves(l_path(start.gripper, start.object, rng.gen())).collect();
        actions.push(tabletop::TOGGLE);
        actions.extend(moves(l_path(
            start.object,
            spec.goal_cells[goal],
            rng.gen(),
        )));
        actions.push(tabletop::TOGGLE);
        out.push(record(
            env,
            GoalState {
                base: base.encode(start),
                goal,
            },
            &actions,
            rng,
        )?);
    }
    for i in 0..n_bwd {
        let goal = i % spec.goal_cells.len();
        let at = spec.goal_cells[goal];
        let placed = tabletop::TabletopState {
            gripper: at,
            holding: false,
            object: at,
        };
        let mut actions = vec![tabletop::TOGGLE];
        actions.extend(moves(l_path(at, start.object, rng.gen())));
        actions.push(tabletop::TOGGLE);
        actions.extend(moves(l_path(start.object, start.gripper, rng.gen())));
        out.push(record(
            env,
            GoalState {
                base: base.encode(placed),
                goal,
            },
            &actions,
            rng,
        )?);
    }
    Ok(out)
}

fn door_demos(
    env: &door::DoorChain,
    n_fwd: usize,
    n_bwd: usize,
    rng: &mut Prng,
) -> Result<Vec<Vec<DemoRecord>>> {
    let open = env.spec().open_index();
    let closed = env.spec().closed_index;
    let towards = |from: usize, to: usize| {
        let a = if to < from {
            door::PUSH_CLOSED
        } else {
            door::PULL_OPEN
        };
        vec![a; from.abs_diff(to)]
    };
    let mut forward = towards(open, closed);
    forward.push(door::NOOP);
    let backward = towards(closed, open);
    let mut out = Vec::with_capacity(n_fwd + n_bwd);
    for _ in 0..n_fwd {
        out.push(record(env, open, &forward, rng)?);
    }
    for _ in 0..n_bwd {
        out.push(record(env, closed, &backward, rng)?);
    }
    Ok(out)
}

fn peg_demos(
    env: &peg::PegGrid,
    n_fwd: usize,
    n_bwd: usize,
    rng: &mut Prng,
) -> Result<Vec<Vec<DemoRecord>>> {
    let spec = env.spec().clone();
    let side = spec.grid_side;
    let safe = |c| !env.is_drop(c);
    let there = bfs_path(spec.start_cell, spec.hole_cell, side, safe)
        .ok_or_else(|| Error::Unsupported("peg hole unreachable from the start".into()))?;
    let back = bfs_path(spec.hole_cell, spec.start_cell, side, safe)
        .ok_or_else(|| Error::Unsupported("peg start unreachable from the hole".into()))?;
    let wrap = |path: &[Move]| {
        let mut a = vec![peg::TOGGLE];
        a.extend(path.iter().map(|&m| move_action(m)));
        a.push(peg::TOGGLE);
        a
    };
    let (forward, backward) = (wrap(&there), wrap(&back));
    let at_hole = env.encode(peg::PegState {
        peg: spec.hole_cell,
        held: false,
    });
    let mut out = Vec::with_capacity(n_fwd + n_bwd);
    for _ in 0..n_fwd {
        out.push(record(env, env.encode(env.start_state()), &forward, rng)?);
    }
    for _ in 0..n_bwd {
        out.push(record(env, at_hole, &backward, rng)?);
    }
    Ok(out)
}

fn pennav_demos(
    env: &pennav::PenNav,
    n_fwd: usize,
    n_bwd: usize,
    rng: &mut Prng,
) -> Result<Vec<Vec<DemoRecord>>> {
    let base = env.inner();
    let spec = base.spec().clone();
    let n = spec.cell_resolution;
    let start = base.start_cell();
    let goals = spec.goal_set.len();
    let mut out = Vec::with_capacity(n_fwd + n_bwd);
    for i in 0..n_fwd {
        let goal = i % goals;
        let mut actions: Vec<usize> =
            moves(l_path(start, spec.cell_of(spec.goal_set[goal]), rng.gen())).collect();
        actions.push(pennav::STAY);
        out.push(record(
            env,
            GoalState {
                base: cell_index(start, n),
                goal,
            },
            &actions,
            rng,
        )?);
    }
    for i in 0..n_bwd {
        let goal = i % goals;
        let at = spec.cell_of(spec.goal_set[goal]);
        let mut actions: Vec<usize> = moves(l_path(at, start, rng.gen())).collect();
        actions.push(pennav::STAY);
        out.push(record(
            env,
            GoalState {
                base: cell_index(at, n),
                goal,
            },
            &actions,
            rng,
        )?);
    }
    Ok(out)
}
