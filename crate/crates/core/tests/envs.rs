mod common;

use std::collections::VecDeque;

use arl::envs::door::{NOOP, PULL_OPEN, PUSH_CLOSED};
use arl::envs::{
    make_diagnostic, make_door, make_peg, make_pennav, make_tabletop, replay_demo, scripted_demos,
    DemoSet, DiagnosticSpec, DoorChainSpec, EnvSpec, PegGridSpec, PegState, PenGrid, PenNavSpec,
    TabletopGrid, TabletopGridSpec,
};
use arl::mdp::{Action, Environment};
use arl::rng::prng;
use common::oracle::*;

/// Every valid state reaches every other valid state.
fn strongly_connected(model: &DenseModel) -> bool {
    let Some(root) = (0..model.states).find(|&s| model.valid[s]) else {
        return false;
    };
    let forward = reachable(model, root);
    let mut reverse_edges = vec![Vec::new(); model.states];
    for s in (0..model.states).filter(|&s| model.valid[s]) {
        for a in 0..model.actions {
            for &(j, p) in model.next(s, a) {
                if p > 0.0 {
                    reverse_edges[j].push(s);
                }
            }
        }
    }
    let mut backward = vec![false; model.states];
    backward[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(s) = queue.pop_front() {
        for &p in &reverse_edges[s] {
            if !backward[p] {
                backward[p] = true;
                queue.push_back(p);
            }
        }
    }
    (0..model.states).all(|s| !model.valid[s] || (forward[s] && backward[s]))
}

/// Probabilities sum to one, successors are valid and rewards respect the
/// declared bounds.
fn well_formed<E: Environment>(env: &E) {
    let (lo, hi) = env.reward_bounds();
    for i in 0..env.state_count() {
        let Some(s) = env.state_at(i) else { continue };
        assert_eq!(env.index(&s), i, "{}: index round trip", env.name());
        for a in 0..env.action_count() {
            let outs = env.outcomes(&s, Action::Regular(a)).unwrap();
            let total: f64 = outs.iter().map(|o| o.prob).sum();
            assert!(
                (total - 1.0).abs() < 1e-12,
                "{}: probabilities at {i}/{a}",
                env.name()
            );
            for o in outs {
                assert!(env.state_at(env.index(&o.next)).is_some());
                assert!(
                    o.reward >= lo && o.reward <= hi,
                    "{}: reward {}",
                    env.name(),
                    o.reward
                );
            }
        }
    }
}

#[test]
fn enumerated_dynamics_are_well_formed() {
    well_formed(&make_door(DoorChainSpec::default()).unwrap());
    well_formed(&make_diagnostic(DiagnosticSpec::default()).unwrap());
    well_formed(&make_diagnostic(DiagnosticSpec::corridor()).unwrap());
    well_formed(&make_peg(PegGridSpec::default()).unwrap());
    well_formed(&make_pennav(PenNavSpec::default()).unwrap());
    well_formed(&make_tabletop(TabletopGridSpec::compact(7)).unwrap());
}

#[test]
fn reversible_environments_are_ergodic() {
    let models = [
        DenseModel::from_env(&make_door(DoorChainSpec::default()).unwrap()),
        DenseModel::from_env(&make_diagnostic(DiagnosticSpec::default()).unwrap()),
        DenseModel::from_env(&make_diagnostic(DiagnosticSpec::corridor()).unwrap()),
        DenseModel::from_env(&PenGrid::new(PenNavSpec::default()).unwrap()),
        DenseModel::from_env(&TabletopGrid::new(TabletopGridSpec::default()).unwrap()),
        DenseModel::from_env(&TabletopGrid::new(TabletopGridSpec::compact(7)).unwrap()),
    ];
    for model in models {
        assert!(strongly_connected(&model.unwrap()));
    }
}

#[test]
fn dropped_peg_cannot_be_recovered() {
    let env = make_peg(PegGridSpec::default()).unwrap();
    let model = DenseModel::from_env(&env).unwrap();
    assert!(!strongly_connected(&model));
    let start = env.encode(env.start_state());
    let from_start = reachable(&model, start);
    let hole = env.encode(PegState {
        peg: [6, 4],
        held: false,
    });
    assert!(from_start[hole]);
    let mut drops = 0;
    for i in (0..model.states).filter(|&i| model.valid[i]) {
        if env.is_drop(env.decode(i).peg) {
            drops += 1;
            assert!(from_start[i]);
            let from_drop = reachable(&model, i);
            assert_eq!(from_drop.iter().filter(|&&r| r).count(), 1);
        }
    }
    assert_eq!(drops, 8);
    // The bridge is the only way across.
    let steps = shortest_steps(&model, start, |i| env.decode(i).peg == [6, 4]).unwrap();
    assert_eq!(steps, 5);
}

#[test]
fn uniform_starts_avoid_drops() {
    let env = make_peg(PegGridSpec::default()).unwrap();
    let mut rng = prng(0);
    for _ in 0..2000 {
        let s = env.sample_uniform(&mut rng).unwrap();
        assert!(!env.is_drop(env.decode(s).peg));
    }
}

#[test]
fn door_pays_only_while_closed() {
    let env = make_door(DoorChainSpec::default()).unwrap();
    let mut rng = prng(0);
    let closed = env.step(&0, Action::Regular(NOOP), 0, &mut rng).unwrap();
    assert_eq!((closed.next, closed.reward), (0, 1.0));
    let open = env.step(&8, Action::Regular(NOOP), 0, &mut rng).unwrap();
    assert_eq!((open.next, open.reward), (8, 0.0));
    assert_eq!(
        env.step(&8, Action::Regular(PUSH_CLOSED), 0, &mut rng)
            .unwrap()
            .next,
        7
    );
    assert_eq!(
        env.step(&0, Action::Regular(PULL_OPEN), 0, &mut rng)
            .unwrap()
            .next,
        1
    );
    assert_eq!(
        env.step(&8, Action::Regular(PULL_OPEN), 0, &mut rng)
            .unwrap()
            .next,
        8
    );
}

#[test]
fn tabletop_demos_cover_every_goal_and_replay() {
    let spec = EnvSpec::Tabletop(TabletopGridSpec::default());
    let demos = scripted_demos(&spec, 12, 12, &mut prng(1)).unwrap();
    assert_eq!(demos.trajectories.len(), 24);
    let env = make_tabletop(TabletopGridSpec::default()).unwrap();
    demos.check_env(&env.spec_hash()).unwrap();
    let mut per_goal = [0; 4];
    for (i, traj) in demos.trajectories.iter().enumerate() {
        replay_demo(&env, traj, &mut prng(2)).unwrap();
        let first = env.state_at(traj[0].state_index).unwrap();
        if i < 12 {
            per_goal[first.goal] += 1;
            assert_eq!(traj.last().unwrap().reward, 1.0);
        } else {
            let last = env.state_at(traj.last().unwrap().next_state_index).unwrap();
            assert_eq!(last.base, env.inner().encode(env.inner().start_state()));
        }
    }
    assert_eq!(per_goal, [3, 3, 3, 3]);
}

fn replay_all<E: Environment>(env: &E, demos: &DemoSet) {
    for traj in &demos.trajectories {
        replay_demo(env, traj, &mut prng(0)).unwrap();
    }
}

#[test]
fn other_demos_replay() {
    for name in ["door", "peg", "pennav"] {
        let spec = EnvSpec::default_for(name).unwrap();
        let demos = scripted_demos(&spec, 3, 2, &mut prng(1)).unwrap();
        assert_eq!(demos.trajectories.len(), 5);
        match spec {
            EnvSpec::Door(s) => replay_all(&make_door(s).unwrap(), &demos),
            EnvSpec::Peg(s) => replay_all(&make_peg(s).unwrap(), &demos),
            EnvSpec::Pennav(s) => replay_all(&make_pennav(s).unwrap(), &demos),
            _ => unreachable!(),
        }
    }
}

#[test]
fn tampered_demo_fails_replay() {
    let spec = EnvSpec::default_for("door").unwrap();
    let mut demos = scripted_demos(&spec, 1, 0, &mut prng(1)).unwrap();
    demos.trajectories[0][2].reward = 5.0;
    let env = make_door(DoorChainSpec::default()).unwrap();
    assert!(replay_demo(&env, &demos.trajectories[0], &mut prng(0)).is_err());
    let other = make_door(DoorChainSpec {
        angle_levels: 5,
        ..Default::default()
    })
    .unwrap();
    assert!(demos.check_env(&other.spec_hash()).is_err());
}

#[test]
fn spec_hash_tracks_parameters() {
    let a = make_door(DoorChainSpec::default()).unwrap().spec_hash();
    let b = make_door(DoorChainSpec::default()).unwrap().spec_hash();
    let c = make_door(DoorChainSpec {
        discount: 0.9,
        ..Default::default()
    })
    .unwrap()
    .spec_hash();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
