//! Value-and-proximity goal curriculum on a goal-conditioned Q-table.

use serde::{Deserialize, Serialize};

use super::{epsilon_greedy, Agent, EnvInfo, Greedy, Policy, QParams, QTable, TableSnapshot};
use crate::error::{Error, Result};
use crate::mdp::{sample_weighted, TransitionRecord};
use crate::rng::Prng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurriculumParams {
    /// Steps between practice-goal choices.
    pub update_period: u64,
    /// A goal counts as mastered once its value at the start state reaches this.
    pub mastery_threshold: f64,
}

impl Default for CurriculumParams {
    fn default() -> Self {
        Self {
            update_period: 1000,
            mastery_threshold: 1.0,
        }
    }
}

/// Every `update_period` steps a task goal `g ~ p_g` is drawn. The agent then
/// practises the not-yet-mastered goal closest to `g` (which is `g` itself
/// unless `g` is mastered), breaking distance ties by higher value. When every
/// goal is mastered it practises `g`.
#[derive(Debug, Clone)]
pub struct CurriculumLite<F = f64> {
    q: QTable<F>,
    params: QParams,
    curriculum: CurriculumParams,
    regular: usize,
    goal_weights: Vec<f64>,
    positions: Option<Vec<[f64; 2]>>,
    initial: Vec<(usize, usize)>,
    practice: Option<usize>,
}

pub fn make_curriculum_lite<F: Scalar>(
    info: &EnvInfo,
    params: QParams,
    curriculum: CurriculumParams,
) -> Result<CurriculumLite<F>> {
    if info.goal_weights.is_empty() {
        return Err(Error::config(
            "curriculum agent needs a goal-conditioned environment",
        ));
    }
    if curriculum.update_period == 0 {
        return Err(Error::config("curriculum update period must be at least 1"));
    }
    if !curriculum.mastery_threshold.is_finite() {
        return Err(Error::config("mastery threshold must be finite"));
    }
    Ok(CurriculumLite {
        q: QTable::new(info.states, info.columns(), &params)?,
        params,
        curriculum,
        regular: info.regular_actions,
        goal_weights: info.goal_weights.clone(),
        positions: info.goal_positions.clone(),
        initial: info.initial.clone(),
        practice: None,
    })
}

impl<F: Scalar> CurriculumLite<F> {
    pub fn q(&self) -> &QTable<F> {
        &self.q
    }

    pub fn q_mut(&mut self) -> &mut QTable<F> {
        &mut self.q
    }

    pub fn practice_goal(&self) -> Option<usize> {
        self.practice
    }

    /// Value of goal `h` from the start: best greedy value over its initial states.
    pub fn goal_value(&self, h: usize) -> f64 {
        self.initial
            .iter()
            .filter(|(_, g)| *g == h)
            .map(|(s, _)| {
                let a = self.q.greedy_within(*s, self.regular);
                self.q.get(*s, a).to_f64_lossy()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_mastered(&self, h: usize) -> bool {
        self.goal_value(h) >= self.curriculum.mastery_threshold
    }

    fn distance(&self, a: usize, b: usize) -> f64 {
        match &self.positions {
            Some(p) => ((p[a][0] - p[b][0]).powi(2) + (p[a][1] - p[b][1]).powi(2)).sqrt(),
            None => (a != b) as u8 as f64,
        }
    }

    /// Practice goal for task goal `task`.
    pub fn choose(&self, task: usize) -> usize {
        let open: Vec<usize> = (0..self.goal_weights.len())
            .filter(|&h| !self.is_mastered(h))
            .collect();
        let mut best: Option<(usize, f64, f64)> = None;
        for h in open {
            let (d, v) = (self.distance(h, task), self.goal_value(h));
            let better = match best {
                None => true,
                Some((_, bd, bv)) => d < bd || (d == bd && v > bv),
            };
            if better {
                best = Some((h, d, v));
            }
        }
        best.map_or(task, |(h, _, _)| h)
    }
}

impl<F: Scalar> Agent for CurriculumLite<F> {
    fn name(&self) -> &'static str {
        "curriculum"
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

    fn propose_goal(&mut self, _state: usize, t: u64, rng: &mut Prng) -> Option<usize> {
        if self.goal_weights.len() < 2 || !t.is_multiple_of(self.curriculum.update_period) {
            return None;
        }
        let task = sample_weighted(&self.goal_weights, rng);
        let goal = self.choose(task);
        self.practice = Some(goal);
        Some(goal)
    }

    fn snapshot(&self) -> Vec<TableSnapshot> {
        vec![TableSnapshot::of("q", &self.q)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn info() -> EnvInfo {
        // Four goals on a line, one start state per goal slice.
        EnvInfo {
            states: 8,
            regular_actions: 2,
            intervention_actions: 0,
            goal_count: 4,
            goal_weights: vec![1.0; 4],
            goal_positions: Some(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]),
            initial: vec![(0, 0), (2, 1), (4, 2), (6, 3)],
            spec_hash: String::new(),
        }
    }

    #[test]
    fn all_mastered_collapses_to_task_goal() {
        let mut c: CurriculumLite =
            make_curriculum_lite(&info(), QParams::default(), Default::default()).unwrap();
        for s in [0, 2, 4, 6] {
            c.q_mut().set(s, 0, 5.0);
        }
        for g in 0..4 {
            assert_eq!(c.choose(g), g);
        }
    }

    #[test]
    fn mastered_task_defers_to_nearest_open_goal() {
        let mut c: CurriculumLite =
            make_curriculum_lite(&info(), QParams::default(), Default::default()).unwrap();
        c.q_mut().set(0, 1, 5.0);
        c.q_mut().set(2, 1, 5.0);
        assert_eq!(c.choose(1), 2);
        assert_eq!(c.choose(3), 3);
    }

    #[test]
    fn single_goal_never_switches() {
        let mut i = info();
        i.goal_count = 1;
        i.goal_weights = vec![1.0];
        i.goal_positions = None;
        let mut c: CurriculumLite =
            make_curriculum_lite(&i, QParams::default(), Default::default()).unwrap();
        assert_eq!(c.propose_goal(0, 0, &mut crate::rng::prng(0)), None);
    }
}
