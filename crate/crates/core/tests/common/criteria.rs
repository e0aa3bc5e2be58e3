//! Exact checks shared by the core integration tests and the acceptance
//! report. Each returns a one-line summary on success.
#![allow(dead_code)]

use std::time::Instant;

use std::sync::Arc;

use arl::agents::{make_naive, Agent, EnvInfo, Exploration, LearningRate, QParams};
use arl::envs::peg::TOGGLE;
use arl::envs::{
    make_diagnostic, make_door, make_peg, make_pennav, DiagnosticSpec, DoorChainSpec, PegGridSpec,
    PegState, PenNavSpec,
};
use arl::eval::continuing_series;
use arl::mdp::{
    run_nonepisodic, wrap_budgeted_intervention, wrap_periodic_intervention,
    wrap_stochastic_intervention, Environment,
};
use arl::rng::Streams;

use super::fixtures::{EpsilonAgent, Script};
use super::oracle::*;

pub type Check = std::result::Result<String, String>;

/// Trains tabular Q-learning under periodic resets and compares the greedy
/// policy's value with value iteration at every initial state.
pub fn q_learning_gap<E: Environment + 'static>(
    env: &E,
    period: u64,
    steps: u64,
    params: QParams,
    seed: u64,
) -> f64 {
    let gamma = env.discount();
    let model = DenseModel::from_env(env).unwrap();
    let vi = value_iteration(&model, gamma, 1e-9 * (1.0 - gamma));
    let wrapped = wrap_periodic_intervention(env.clone(), period).unwrap();
    let params = QParams {
        gamma,
        boundary_b: Some(period),
        ..params
    };
    let mut agent = make_naive::<f64>(&EnvInfo::of(&wrapped), params).unwrap();
    run_nonepisodic(
        &wrapped,
        &mut agent,
        steps,
        &mut Streams::from_seed(seed),
        &mut [],
    )
    .unwrap();
    let greedy = agent.eval_policy();
    let v = policy_evaluation(&model, &*greedy, gamma, 1e-12);
    env.initial_support()
        .iter()
        .map(|s| env.index(s))
        .map(|i| (vi.values[i] - v[i]).abs())
        .fold(0.0, f64::max)
}

fn learner(alpha: LearningRate, scale: f64) -> QParams {
    QParams {
        learning_rate: alpha,
        explore: Exploration::Decay {
            initial: 1.0,
            floor: 0.05,
            scale,
        },
        ..Default::default()
    }
}

/// Every enumerated environment with at most 200 states.
pub fn oracle_equivalence() -> Vec<(String, Check)> {
    let decay = LearningRate::VisitDecay { omega: 0.8 };
    let mut out = Vec::new();
    let mut run = |name: &str, f: &dyn Fn() -> f64| {
        let start = Instant::now();
        let gap = f();
        let secs = start.elapsed().as_secs_f64();
        let line = format!("{name}: |V* - V_greedy| = {gap:.2e} in {secs:.1}s");
        out.push((
            name.to_string(),
            if gap < 1e-3 && secs < 30.0 {
                Ok(line)
            } else {
                Err(line)
            },
        ));
    };
    run("goal_chain", &|| {
        let env = make_diagnostic(DiagnosticSpec::default()).unwrap();
        q_learning_gap(&env, 100, 1_000_000, learner(decay, 10_000.0), 1)
    });
    run("corridor", &|| {
        let env = make_diagnostic(DiagnosticSpec::corridor()).unwrap();
        q_learning_gap(&env, 100, 1_000_000, learner(decay, 10_000.0), 2)
    });
    run("door", &|| {
        let env = make_door(DoorChainSpec::default()).unwrap();
        q_learning_gap(&env, 300, 300_000, learner(decay, 10_000.0), 3)
    });
    run("peg", &|| {
        let env = make_peg(PegGridSpec::default()).unwrap();
        q_learning_gap(&env, 1000, 2_000_000, learner(decay, 100_000.0), 4)
    });
    run("pennav", &|| {
        let env = make_pennav(PenNavSpec::default()).unwrap();
        q_learning_gap(&env, 1000, 2_000_000, learner(decay, 100_000.0), 5)
    });
    out
}

/// Long-run average reward of a fixed epsilon-greedy policy against the
/// stationary distribution of the chain it induces.
pub fn continuing_oracle() -> Check {
    let start = Instant::now();
    let env = make_diagnostic(DiagnosticSpec {
        chain_length: 6,
        ..Default::default()
    })
    .unwrap();
    let model = DenseModel::from_env(&env).unwrap();
    let mut agent = EpsilonAgent {
        greedy: vec![1; 6],
        actions: 2,
        eps: 0.3,
    };
    let mu = stationary_distribution(&policy_chain(&model, |s| agent.probs(s)), 0, 1e-15);
    let rewards = policy_rewards(&model, |s| agent.probs(s));
    let expected: f64 = mu.iter().zip(&rewards).map(|(m, r)| m * r).sum();
    let history = run_nonepisodic(
        &env,
        &mut agent,
        1_000_000,
        &mut Streams::from_seed(7),
        &mut [],
    )
    .unwrap();
    let got = continuing_series(&history, 10_000).unwrap().last().unwrap();
    let secs = start.elapsed().as_secs_f64();
    let line = format!("r(1e6) = {got:.5}, stationary = {expected:.5}, {secs:.1}s");
    if (got - expected).abs() < 1e-2 && secs < 10.0 {
        Ok(line)
    } else {
        Err(line)
    }
}

/// Reset counts of the stochastic and periodic intervention wrappers.
pub fn wrapper_statistics() -> Vec<(String, Check)> {
    const N: u64 = 1_000_000;
    let env = make_diagnostic(DiagnosticSpec::default()).unwrap();
    let mut out = Vec::new();
    for (i, eps) in [1e-2, 1e-3, 1e-4].into_iter().enumerate() {
        let wrapped = wrap_stochastic_intervention(env.clone(), eps).unwrap();
        let mut agent = EpsilonAgent {
            greedy: vec![1; 10],
            actions: 2,
            eps: 1.0,
        };
        let history = run_nonepisodic(
            &wrapped,
            &mut agent,
            N,
            &mut Streams::from_seed(11 + i as u64),
            &mut [],
        )
        .unwrap();
        let count = history.iter().filter(|r| r.intervention).count() as f64;
        let mean = N as f64 * eps;
        let sigma = (mean * (1.0 - eps)).sqrt();
        let line = format!(
            "stochastic eps={eps:e}: {count} resets, expected {mean} +- {:.1}",
            3.0 * sigma
        );
        out.push((
            format!("stochastic {eps:e}"),
            if (count - mean).abs() <= 3.0 * sigma {
                Ok(line)
            } else {
                Err(line)
            },
        ));
    }
    for period in [7u64, 100, 10_000, 300_000] {
        let wrapped = wrap_periodic_intervention(env.clone(), period).unwrap();
        let mut agent = EpsilonAgent {
            greedy: vec![1; 10],
            actions: 2,
            eps: 1.0,
        };
        let history = run_nonepisodic(
            &wrapped,
            &mut agent,
            N,
            &mut Streams::from_seed(period),
            &mut [],
        )
        .unwrap();
        let resets: Vec<u64> = history
            .iter()
            .filter(|r| r.intervention)
            .map(|r| r.t)
            .collect();
        let expected: Vec<u64> = (1..=N / period).map(|k| k * period - 1).collect();
        let line = format!(
            "periodic p={period}: {} resets, expected {}",
            resets.len(),
            N / period
        );
        out.push((
            format!("periodic {period}"),
            if resets == expected {
                Ok(line)
            } else {
                Err(line)
            },
        ));
    }
    out
}

/// Expected absorption step of a scripted run: the first intervention whose
/// cost pushes the cumulative total past `h_max`.
fn expected_absorption(columns: &[usize], regular: usize, cost: f64, h_max: f64) -> Option<usize> {
    let mut spent = 0.0;
    for (t, &c) in columns.iter().enumerate() {
        if c >= regular {
            spent += cost;
            if spent > h_max {
                return Some(t);
            }
        }
    }
    None
}

/// Absorption timing and post-absorption rewards of the budgeted wrapper,
/// for requested interventions on the door and forced ones on the peg.
pub fn budget_mechanics() -> Vec<(String, Check)> {
    let mut out = Vec::new();
    let door = make_door(DoorChainSpec::default()).unwrap();
    let absorbing = door.state_count();
    // Push the door shut, then request a reset, forever. A closed door pays,
    // so any reward after absorption would show up.
    let pattern: Vec<usize> = [vec![1; 8], vec![0; 3], vec![3]].concat();
    for (h_max, cost) in [
        (5.0, 2.0),
        (4.0, 2.0),
        (1.0, 2.0),
        (10.0, 3.0),
        (2.5, 0.5),
        (7.0, 1.0),
    ] {
        let wrapped = wrap_budgeted_intervention(
            door.clone(),
            h_max,
            Arc::new(move |_: &usize, _| cost),
            None,
            None,
        )
        .unwrap();
        let mut agent = Script::new(Vec::new(), pattern.clone());
        let n = 200;
        let history =
            run_nonepisodic(&wrapped, &mut agent, n, &mut Streams::from_seed(1), &mut []).unwrap();
        let columns: Vec<usize> = (0..n as usize)
            .map(|t| pattern[t % pattern.len()])
            .collect();
        let stop = expected_absorption(&columns, 3, cost, h_max).unwrap();
        let first = history.iter().position(|r| r.next_state == absorbing);
        let after = &history[stop + 1..];
        let ok = first == Some(stop)
            && after
                .iter()
                .all(|r| r.state == absorbing && r.next_state == absorbing && r.reward == 0.0)
            && after.iter().all(|r| !r.intervention)
            && history[..stop].iter().any(|r| r.reward > 0.0);
        let line =
            format!("door h_max={h_max} cost={cost}: absorbed at t={first:?}, expected t={stop}");
        out.push((
            format!("door {h_max}/{cost}"),
            if ok { Ok(line) } else { Err(line) },
        ));
    }

    let peg = make_peg(PegGridSpec::default()).unwrap();
    let absorbing = peg.state_count();
    let parked = peg.encode(PegState {
        peg: [3, 5],
        held: false,
    });
    let wrapped = wrap_budgeted_intervention(
        peg.clone(),
        3.0,
        Arc::new(|_: &usize, _| 1.0),
        Some(peg.release_target()),
        Some(peg.drop_trigger()),
    )
    .unwrap()
    .with_request_actions(0);
    // Walk north of the bridge and into the trench, then keep re-dropping.
    let mut agent = Script::new(vec![TOGGLE, 4, 1, 4], vec![TOGGLE, 4]);
    let history = run_nonepisodic(
        &wrapped,
        &mut agent,
        40,
        &mut Streams::from_seed(2),
        &mut [],
    )
    .unwrap();
    let drops: Vec<u64> = history
        .iter()
        .filter(|r| r.intervention)
        .map(|r| r.t)
        .collect();
    let ok = drops == [3, 5, 7, 9]
        && drops[..3]
            .iter()
            .all(|&t| history[t as usize].next_state == parked)
        && history[9].next_state == absorbing
        && history[10..]
            .iter()
            .all(|r| r.next_state == absorbing && r.reward == 0.0 && !r.intervention);
    let line = format!("peg forced drops at {drops:?}, absorbed after the 4th with h_max=3");
    out.push(("peg forced".into(), if ok { Ok(line) } else { Err(line) }));
    out
}
