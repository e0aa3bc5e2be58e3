//! Desk-scale environment suite.

mod demos;
pub mod diagnostic;
pub mod door;
pub mod grid;
pub mod peg;
pub mod pennav;
pub mod tabletop;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use demos::{
    replay_demo, scripted_demos, scripted_demos_by_name, DemoHeader, DemoRecord, DemoSet,
};
pub use diagnostic::{make_diagnostic, Diagnostic, DiagnosticSpec, DiagnosticVariant};
pub use door::{make_door, DoorChain, DoorChainSpec};
pub use peg::{make_peg, PegGrid, PegGridSpec, PegState};
pub use pennav::{make_pennav, PenGrid, PenNav, PenNavSpec};
pub use tabletop::{make_tabletop, Tabletop, TabletopGrid, TabletopGridSpec, TabletopState};

/// Environment selection plus its parameter block, tagged by `name`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum EnvSpec {
    Tabletop(TabletopGridSpec),
    Door(DoorChainSpec),
    Peg(PegGridSpec),
    Pennav(PenNavSpec),
    Corridor(DiagnosticSpec),
    GoalChain(DiagnosticSpec),
}

pub const ENV_NAMES: [&str; 6] = [
    "tabletop",
    "door",
    "peg",
    "pennav",
    "corridor",
    "goal_chain",
];

impl EnvSpec {
    pub fn default_for(name: &str) -> Result<EnvSpec> {
        Ok(match name {
            "tabletop" => EnvSpec::Tabletop(Default::default()),
            "door" => EnvSpec::Door(Default::default()),
            "peg" => EnvSpec::Peg(Default::default()),
            "pennav" => EnvSpec::Pennav(Default::default()),
            "corridor" => EnvSpec::Corridor(DiagnosticSpec::corridor()),
            "goal_chain" => EnvSpec::GoalChain(Default::default()),
            other => {
                return Err(Error::config(format!(
                    "unknown environment '{other}' (expected one of {})",
                    ENV_NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnvSpec::Tabletop(_) => "tabletop",
            EnvSpec::Door(_) => "door",
            EnvSpec::Peg(_) => "peg",
            EnvSpec::Pennav(_) => "pennav",
            EnvSpec::Corridor(_) => "corridor",
            EnvSpec::GoalChain(_) => "goal_chain",
        }
    }

    pub fn eval_horizon(&self) -> usize {
        match self {
            EnvSpec::Tabletop(s) => s.eval_horizon,
            EnvSpec::Door(s) => s.eval_horizon,
            EnvSpec::Peg(s) => s.eval_horizon,
            EnvSpec::Pennav(s) => s.eval_horizon,
            EnvSpec::Corridor(s) | EnvSpec::GoalChain(s) => s.eval_horizon,
        }
    }

    pub fn is_goal_conditioned(&self) -> bool {
        matches!(self, EnvSpec::Tabletop(_) | EnvSpec::Pennav(_))
    }

    /// Default training horizon for this environment.
    pub fn default_train_horizon(&self) -> u64 {
        match self {
            EnvSpec::Tabletop(_) | EnvSpec::Door(_) => 200_000,
            EnvSpec::Peg(_) | EnvSpec::Pennav(_) => 100_000,
            EnvSpec::Corridor(_) | EnvSpec::GoalChain(_) => 100_000,
        }
    }

    /// Applies the variant implied by the name and validates the parameters.
    pub fn normalized(mut self) -> Result<EnvSpec> {
        match &mut self {
            EnvSpec::Tabletop(s) => s.validate()?,
            EnvSpec::Door(s) => s.validate()?,
            EnvSpec::Peg(s) => s.validate()?,
            EnvSpec::Pennav(s) => s.validate()?,
            EnvSpec::Corridor(s) => {
                s.variant = DiagnosticVariant::InfiniteCorridor;
                s.validate()?
            }
            EnvSpec::GoalChain(s) => {
                s.variant = DiagnosticVariant::GoalChain;
                s.validate()?
            }
        }
        Ok(self)
    }
}
