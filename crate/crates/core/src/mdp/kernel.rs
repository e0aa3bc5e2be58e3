use std::io::Write;

use crate::agents::Agent;
use crate::error::{Error, Result};
use crate::mdp::{Action, Environment, TransitionRecord};
use crate::rng::Streams;

/// Callback invoked once per training step, after the agent has observed it.
pub trait Observer {
    fn on_step(&mut self, record: &TransitionRecord, agent: &dyn Agent) -> Result<()>;
}

/// Runs `agent` in `env` for `h_max` steps without episodic resets.
///
/// The initial distribution is sampled exactly once, before the first step.
/// Any later reset comes from the environment itself (i.e. a wrapper).
pub fn run_nonepisodic<E: Environment>(
    env: &E,
    agent: &mut dyn Agent,
    h_max: u64,
    streams: &mut Streams,
    observers: &mut [&mut dyn Observer],
) -> Result<Vec<TransitionRecord>> {
    let regular = env.action_count();
    let interventions = env.intervention_count();
    let mut history = Vec::with_capacity(h_max.min(1 << 24) as usize);
    let mut state = env.sample_initial(&mut streams.env);

    for t in 0..h_max {
        if let Some(goal) = agent.propose_goal(env.index(&state), t, &mut streams.agent) {
            state = env.with_goal(state, goal)?;
        }
        let s = env.index(&state);
        let column = agent.select_action(s, t, &mut streams.agent);
        let action = Action::from_column(column, regular, interventions).ok_or_else(|| {
            Error::InvalidAction {
                t,
                action: Action::Regular(column),
                reason: format!(
                    "agent returned column {column}, environment has {regular}+{interventions}"
                ),
            }
        })?;
        let tr = env.step(&state, action, t, &mut streams.env)?;
        if !tr.reward.is_finite() {
            return Err(Error::NonFiniteReward {
                t,
                reward: tr.reward,
            });
        }
        let record = TransitionRecord {
            t,
            state: s,
            action,
            next_state: env.index(&tr.next),
            reward: tr.reward,
            intervention: tr.intervention,
            phase: agent.phase(t),
        };
        agent.observe(&record)?;
        for obs in observers.iter_mut() {
            obs.on_step(&record, &*agent)?;
        }
        history.push(record);
        state = tr.next;
    }
    Ok(history)
}

const TRANSITION_HEADER: &str =
    "t,state_index,action_index,next_state_index,reward,intervention,phase";

fn transition_row(r: &TransitionRecord, regular: usize) -> String {
    let phase = r.phase.map(|p| p.to_string()).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{}",
        r.t,
        r.state,
        r.action.column(regular),
        r.next_state,
        r.reward,
        r.intervention,
        phase
    )
}

/// Writes a full history as CSV. Intervention actions are written as
/// columns past the regular actions.
pub fn write_transitions_csv<W: Write>(
    out: &mut W,
    history: &[TransitionRecord],
    regular_actions: usize,
) -> std::io::Result<()> {
    writeln!(out, "{TRANSITION_HEADER}")?;
    for r in history {
        writeln!(out, "{}", transition_row(r, regular_actions))?;
    }
    Ok(())
}

/// Observer that streams every record as a CSV row.
pub struct TransitionLog<W: Write> {
    out: W,
    regular_actions: usize,
    wrote_header: bool,
}

impl<W: Write> TransitionLog<W> {
    pub fn new(out: W, regular_actions: usize) -> Self {
        Self {
            out,
            regular_actions,
            wrote_header: false,
        }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> Observer for TransitionLog<W> {
    fn on_step(&mut self, record: &TransitionRecord, _agent: &dyn Agent) -> Result<()> {
        if !self.wrote_header {
            writeln!(self.out, "{TRANSITION_HEADER}")?;
            self.wrote_header = true;
        }
        writeln!(self.out, "{}", transition_row(record, self.regular_actions))?;
        Ok(())
    }
}
