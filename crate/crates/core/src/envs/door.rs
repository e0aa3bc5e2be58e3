//! Door on a chain of angle levels. The task is to close it; the
//! deployment start leaves it wide open.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{hash_spec, Action, Environment, Outcome};
use crate::rng::Prng;

pub const NOOP: usize = 0;
pub const PUSH_CLOSED: usize = 1;
pub const PULL_OPEN: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DoorChainSpec {
    pub angle_levels: usize,
    pub closed_index: usize,
    /// Start angle; `None` means fully open (`angle_levels - 1`).
    pub eval_open_index: Option<usize>,
    pub discount: f64,
    pub eval_horizon: usize,
}

impl Default for DoorChainSpec {
    fn default() -> Self {
        Self {
            angle_levels: 9,
            closed_index: 0,
            eval_open_index: None,
            discount: 0.95,
            eval_horizon: 300,
        }
    }
}

impl DoorChainSpec {
    pub fn open_index(&self) -> usize {
        self.eval_open_index
            .unwrap_or(self.angle_levels.saturating_sub(1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.angle_levels < 2 {
            return Err(Error::config("door needs at least 2 angle levels"));
        }
        if self.closed_index >= self.angle_levels || self.open_index() >= self.angle_levels {
            return Err(Error::config("door indices must be below angle_levels"));
        }
        if self.closed_index == self.open_index() {
            return Err(Error::config(
                "door start must differ from the closed angle",
            ));
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

#[derive(Debug, Clone)]
pub struct DoorChain {
    spec: DoorChainSpec,
}

pub fn make_door(spec: DoorChainSpec) -> Result<DoorChain> {
    spec.validate()?;
    Ok(DoorChain { spec })
}

impl DoorChain {
    pub fn spec(&self) -> &DoorChainSpec {
        &self.spec
    }

    pub fn next_angle(&self, angle: usize, action: usize) -> usize {
        match action {
            PUSH_CLOSED => angle.saturating_sub(1),
            PULL_OPEN => (angle + 1).min(self.spec.angle_levels - 1),
            _ => angle,
        }
    }

    pub fn is_closed(&self, angle: usize) -> bool {
        angle == self.spec.closed_index
    }
}

impl Environment for DoorChain {
    type State = usize;

    fn name(&self) -> String {
        "door".into()
    }
    fn state_count(&self) -> usize {
        self.spec.angle_levels
    }
    fn action_count(&self) -> usize {
        3
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
        (index < self.spec.angle_levels).then_some(index)
    }
    fn coords(&self, state: &usize) -> Option<[f64; 2]> {
        Some([*state as f64, 0.0])
    }
    fn sample_initial(&self, _rng: &mut Prng) -> usize {
        self.spec.open_index()
    }
    fn initial_support(&self) -> Vec<usize> {
        vec![self.spec.open_index()]
    }
    fn sample_uniform(&self, rng: &mut Prng) -> Option<usize> {
        Some(rng.gen_range(0..self.spec.angle_levels))
    }
    fn outcomes(&self, state: &usize, action: Action) -> Option<Vec<Outcome<usize>>> {
        let Action::Regular(a) = action else {
            return None;
        };
        let reward = if self.is_closed(*state) { 1.0 } else { 0.0 };
        Some(vec![Outcome {
            prob: 1.0,
            next: self.next_angle(*state, a),
            reward,
        }])
    }
    fn spec_hash(&self) -> String {
        hash_spec("door", &self.spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::prng;

    #[test]
    fn closed_noop_pays_every_step() {
        let env = make_door(DoorChainSpec::default()).unwrap();
        let mut rng = prng(1);
        let mut s = 0;
        for t in 0..5 {
            let tr = env.step(&s, Action::Regular(NOOP), t, &mut rng).unwrap();
            assert_eq!(tr.reward, 1.0);
            s = tr.next;
        }
        assert_eq!(s, 0);
    }

    #[test]
    fn starts_fully_open() {
        let env = make_door(DoorChainSpec::default()).unwrap();
        assert_eq!(env.sample_initial(&mut prng(0)), 8);
    }

    #[test]
    fn one_level_rejected() {
        assert!(make_door(DoorChainSpec {
            angle_levels: 1,
            ..Default::default()
        })
        .is_err());
    }
}
