//! Autonomous (reset-free) reinforcement learning at desk scale.
//!
//! * [`mdp`]: environment trait, the non-episodic rollout kernel and the
//!   intervention / goal wrappers.
//! * [`envs`]: grid analogues of manipulation and locomotion tasks plus two
//!   one-dimensional diagnostics.
//! * [`agents`]: tabular Q-learning agents (naive, forward-backward,
//!   perturbation, oracle, curriculum).
//! * [`eval`]: deployed and continuing policy evaluation.

pub mod agents;
pub mod envs;
pub mod error;
pub mod eval;
pub mod mdp;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{CompensatedSum, Scalar};

pub type QTable64 = agents::QTable<f64>;
pub type QTable32 = agents::QTable<f32>;
pub type Naive64 = agents::Naive<f64>;
pub type Naive32 = agents::Naive<f32>;
pub type Alternating64 = agents::Alternating<f64>;
pub type Alternating32 = agents::Alternating<f32>;
pub type Curriculum64 = agents::CurriculumLite<f64>;
pub type Curriculum32 = agents::CurriculumLite<f32>;
pub type Sum64 = CompensatedSum<f64>;
