mod common;

use arl::agents::{FnPolicy, TablePolicy};
use arl::envs::{make_diagnostic, make_door, DiagnosticSpec, DoorChainSpec};
use arl::eval::{
    continuing_series, deployed_regret, evaluate, histogram_diff, robustness_eval, visitation,
    BinSpec, ContinuingTracker, EvalSchedule, MetricSeries, StartDistribution,
};
use arl::mdp::{Action, TransitionRecord};
use arl::rng::prng;
use common::oracle::*;
use proptest::prelude::*;
use rand::Rng;

fn sched(h: usize, n: usize) -> EvalSchedule {
    EvalSchedule {
        eval_horizon: h,
        n_rollouts: n,
        ..Default::default()
    }
}

/// Push until closed, then hold.
fn close_door() -> FnPolicy<impl Fn(usize) -> usize> {
    FnPolicy(|s: usize| if s > 0 { 1 } else { 0 })
}

#[test]
fn evaluation_draws_one_seed() {
    let env = make_door(DoorChainSpec::default()).unwrap();
    let mut rng = prng(5);
    evaluate(
        &close_door(),
        &env,
        &sched(300, 10),
        StartDistribution::Default,
        &mut rng,
    )
    .unwrap();
    let mut reference = prng(5);
    let _: u64 = reference.gen();
    assert_eq!(rng.gen::<u64>(), reference.gen::<u64>());
}

#[test]
fn deterministic_rollouts_match_backward_induction() {
    let env = make_door(DoorChainSpec::default()).unwrap();
    let model = DenseModel::from_env(&env).unwrap();
    let (v_star, _) = finite_horizon_optimal(&model, 300);
    let v = finite_horizon_value(&model, &close_door(), 300);
    assert_eq!(v[8], v_star[8]);
    let out = evaluate(
        &close_door(),
        &env,
        &sched(300, 10),
        StartDistribution::Default,
        &mut prng(0),
    )
    .unwrap();
    assert_eq!(out.mean_return, v[8]);
    assert_eq!(out.mean_return, 292.0);
    assert_eq!(out.success_rate, 1.0);
}

#[test]
fn stochastic_rollouts_match_backward_induction() {
    let env = make_diagnostic(DiagnosticSpec::default()).unwrap();
    let model = DenseModel::from_env(&env).unwrap();
    let (v_star, policy) = finite_horizon_optimal(&model, 100);
    let policy = TablePolicy(policy);
    let n = 4000;
    let out = evaluate(
        &policy,
        &env,
        &sched(100, n),
        StartDistribution::Default,
        &mut prng(1),
    )
    .unwrap();
    // Returns lie in [0, 100], so the standard deviation is at most 50.
    let tol = 4.0 * 50.0 / (n as f64).sqrt();
    assert!(
        (out.mean_return - v_star[0]).abs() < tol,
        "{} vs {}",
        out.mean_return,
        v_star[0]
    );
}

#[test]
fn discounted_returns_weight_each_step() {
    let spec = DoorChainSpec {
        eval_open_index: Some(1),
        ..Default::default()
    };
    let env = make_door(spec).unwrap();
    let s = EvalSchedule {
        discounted: true,
        gamma_eval: 0.5,
        ..sched(10, 3)
    };
    let out = evaluate(
        &close_door(),
        &env,
        &s,
        StartDistribution::Default,
        &mut prng(0),
    )
    .unwrap();
    let expected: f64 = (1..10).map(|t| 0.5f64.powi(t)).sum();
    assert!((out.mean_return - expected).abs() < 1e-12);
}

#[test]
fn success_reads_the_last_reward() {
    let env = make_door(DoorChainSpec::default()).unwrap();
    // Never touching the open door earns nothing.
    let out = evaluate(
        &FnPolicy(|_| 0),
        &env,
        &sched(20, 5),
        StartDistribution::Default,
        &mut prng(0),
    )
    .unwrap();
    assert_eq!((out.mean_return, out.success_rate), (0.0, 0.0));
    let out = evaluate(
        &close_door(),
        &env,
        &sched(9, 5),
        StartDistribution::Default,
        &mut prng(0),
    )
    .unwrap();
    assert_eq!((out.mean_return, out.success_rate), (1.0, 1.0));
    let out = evaluate(
        &close_door(),
        &env,
        &sched(8, 5),
        StartDistribution::Default,
        &mut prng(0),
    )
    .unwrap();
    assert_eq!(out.success_rate, 0.0);
}

#[test]
fn policies_must_return_regular_actions() {
    let env = make_door(DoorChainSpec::default()).unwrap();
    let bad = FnPolicy(|_| 3);
    assert!(evaluate(
        &bad,
        &env,
        &sched(5, 1),
        StartDistribution::Default,
        &mut prng(0)
    )
    .is_err());
    assert!(evaluate(
        &close_door(),
        &env,
        &sched(0, 1),
        StartDistribution::Default,
        &mut prng(0)
    )
    .is_err());
}

#[test]
fn uniform_starts_average_over_states() {
    let env = make_door(DoorChainSpec::default()).unwrap();
    let model = DenseModel::from_env(&env).unwrap();
    let v = finite_horizon_value(&model, &close_door(), 300);
    let uniform_mean = v.iter().sum::<f64>() / v.len() as f64;
    let n = 4000;
    let report = robustness_eval(&close_door(), &env, &sched(300, n), &mut prng(2)).unwrap();
    assert_eq!(report.default_return, v[8]);
    // Returns from a uniform start are 292..=300.
    let tol = 4.0 * 4.0 / (n as f64).sqrt();
    assert!((report.uniform_return - uniform_mean).abs() < tol);
    let d = report.depreciation.unwrap();
    assert!(
        (d - (report.default_return - report.uniform_return) / report.default_return).abs() < 1e-15
    );
    assert!(d < 0.0);
}

#[test]
fn regret_sums_the_shortfall() {
    let mut s = MetricSeries::new("deployed_return");
    for (t, v) in [(10, 1.0), (20, 2.0), (30, 3.0)] {
        s.push(t, v).unwrap();
    }
    assert_eq!(deployed_regret(&s, Some(5.0)), 9.0);
    assert_eq!(deployed_regret(&s, None), -6.0);
    assert!(s.push(30, 1.0).is_err());
}

fn series(values: &[f64]) -> MetricSeries {
    let mut s = MetricSeries::new("deployed_return");
    for (i, v) in values.iter().enumerate() {
        s.push((i as u64 + 1) * 10_000, *v).unwrap();
    }
    s
}

proptest! {
    #![proptest_config(common::fixed_cases(128))]

    #[test]
    fn regret_ranking_ignores_j_star(
        runs in prop::collection::vec(prop::collection::vec(0.0f64..100.0, 20), 2..6),
        j_star in 0.0f64..500.0,
    ) {
        let all: Vec<MetricSeries> = runs.iter().map(|r| series(r)).collect();
        let rank = |j: Option<f64>| {
            let regrets: Vec<f64> = all.iter().map(|s| deployed_regret(s, j)).collect();
            let mut order: Vec<usize> = (0..all.len()).collect();
            order.sort_by(|&a, &b| regrets[a].total_cmp(&regrets[b]).then(a.cmp(&b)));
            order
        };
        prop_assert_eq!(rank(None), rank(Some(j_star)));
    }

    #[test]
    fn tracker_matches_batch_series(
        rewards in prop::collection::vec(-1.0f64..1.0, 0..500),
        stride in 1u64..50,
    ) {
        let history: Vec<TransitionRecord> = rewards
            .iter()
            .enumerate()
            .map(|(t, &reward)| TransitionRecord {
                t: t as u64,
                state: 0,
                action: Action::Regular(0),
                next_state: 0,
                reward,
                intervention: false,
                phase: None,
            })
            .collect();
        let batch = continuing_series(&history, stride).unwrap();
        let mut tracker = ContinuingTracker::new(stride).unwrap();
        for r in &rewards {
            tracker.push(*r).unwrap();
        }
        prop_assert_eq!(&tracker.finish(), &batch);
        if let Some(last) = batch.last() {
            let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
            prop_assert!((last - mean).abs() < 1e-12);
        }
    }
}

#[test]
fn zero_stride_rejected() {
    assert!(ContinuingTracker::new(0).is_err());
}

fn visits(cells: &[[f64; 2]]) -> Vec<TransitionRecord> {
    cells
        .iter()
        .enumerate()
        .map(|(i, _)| TransitionRecord {
            t: i as u64,
            state: 0,
            action: Action::Regular(0),
            next_state: i,
            reward: 0.0,
            intervention: false,
            phase: None,
        })
        .collect()
}

#[test]
fn visitation_bins_one_per_cell() {
    let cells = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [2.0, 2.0], [7.0, 1.0]];
    let project = |i: usize| cells.get(i).copied();
    let h = visitation(&visits(&cells), project, BinSpec::cells(3)).unwrap();
    assert_eq!(h.count(0, 0), 1);
    assert_eq!(h.count(2, 0), 1);
    assert_eq!(h.count(2, 2), 2);
    // Out of range points land in the nearest edge bin.
    assert_eq!(h.count(2, 1), 1);
    assert_eq!((h.total, h.clamped, h.skipped), (5, 1, 0));
    assert!((h.normalized().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn histogram_difference_is_normalised_and_thresholded() {
    let a_cells = [[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]];
    let b_cells = [[1.0, 1.0]];
    let a = visitation(
        &visits(&a_cells),
        |i| a_cells.get(i).copied(),
        BinSpec::cells(2),
    )
    .unwrap();
    let b = visitation(
        &visits(&b_cells),
        |i| b_cells.get(i).copied(),
        BinSpec::cells(2),
    )
    .unwrap();
    assert_eq!(
        histogram_diff(&a, &b, 0.0).unwrap(),
        vec![0.5, 0.0, 0.0, -0.5]
    );
    assert_eq!(histogram_diff(&a, &b, 0.6).unwrap(), vec![0.0; 4]);
    assert!(histogram_diff(&a, &a, 0.0)
        .unwrap()
        .iter()
        .all(|&d| d == 0.0));
    let c = visitation(&[], |_| None, BinSpec::cells(3)).unwrap();
    assert!(histogram_diff(&a, &c, 0.0).is_err());
}
