use std::sync::Arc;

use nmrl::agents::{train, Learner, QLearning, QLearningConfig, QrMax, QrMaxConfig, RMax, RunRngs};
use nmrl::automaton::RewardMachine;
use nmrl::office::{builtin_map, GridMap, OfficeEnv};

/// map0_desk with a one-state machine paying 1 on every coffee visit.
fn single_state_env() -> OfficeEnv {
    let rm: RewardMachine =
        "states: q0\ninitial: q0\naccepting:\nalphabet: coffee\ntrans: q0 coffee q0 1\n".parse().unwrap();
    OfficeEnv::new(Arc::new(builtin_map("map0_desk").unwrap()), Arc::new(rm)).with_step_limit(60)
}

fn actions(agent: &mut dyn Learner, env: &mut OfficeEnv, seed: u64, steps: u64) -> Vec<(usize, usize)> {
    let mut rngs = RunRngs::new(seed);
    train(agent, env, &mut rngs, steps, true).iter().map(|r| (r.s, r.a)).collect()
}

#[test]
fn single_state_machine_reduces_rmax_to_qrmax() {
    let env = single_state_env();
    assert_eq!(env.n_q(), 1);
    let cfg = QrMaxConfig::new(0.9, 1.0);
    let mut qrmax = QrMax::new(&env, cfg);
    let mut rmax = RMax::new(&env, cfg);
    let a = actions(&mut qrmax, &mut env.clone(), 5, 20_000);
    let b = actions(&mut rmax, &mut env.clone(), 5, 20_000);
    assert_eq!(a, b);
    for (x, y) in qrmax.q_table().values().iter().zip(rmax.values()) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn single_state_machine_reduces_counterfactual_to_plain() {
    let env = single_state_env();
    let cfg = QrMaxConfig::new(0.9, 1.0);
    let mut plain = QrMax::new(&env, cfg);
    let mut cf = QrMax::with_machine(&env, cfg);
    assert_eq!(actions(&mut plain, &mut env.clone(), 9, 20_000), actions(&mut cf, &mut env.clone(), 9, 20_000));
    assert_eq!(plain.q_table(), cf.q_table());
    assert_eq!(plain.vi_calls(), cf.vi_calls());
}

#[test]
fn counterfactual_updates_speed_up_q_learning_on_a_corridor() {
    // Coffee then office; counterfactual updates teach the office leg before the coffee is fetched.
    let map: GridMap = "h: 1\nstart: 0 2\nC...O\n".parse().unwrap();
    let rm: RewardMachine = "states: s c acc\ninitial: s\naccepting: acc\nalphabet: coffee office\n\
        trans: s coffee c 0\ntrans: c office acc 1\n"
        .parse()
        .unwrap();
    let env = OfficeEnv::new(Arc::new(map), Arc::new(rm)).with_step_limit(30);
    let steps = 3_000;
    let mut wins = 0;
    for seed in 0..10 {
        let mut ql = QLearning::new(&env, QLearningConfig::default());
        let mut qrm = QLearning::with_machine(&env, QLearningConfig::default());
        let a = train(&mut ql, &mut env.clone(), &mut RunRngs::new(seed), steps, false);
        let b = train(&mut qrm, &mut env.clone(), &mut RunRngs::new(seed), steps, false);
        assert!(a.is_empty() && b.is_empty());
        if qrm.episodes() > ql.episodes() {
            wins += 1;
        }
    }
    assert!(wins >= 8, "QRM finished more episodes in only {wins}/10 seeds");
}
