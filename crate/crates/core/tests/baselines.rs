use std::sync::Arc;

use nmrl::agents::{train, Learner, RunRngs};
use nmrl::automaton::RewardMachine;
use nmrl::baselines::{bonus, memory_footprint, AgentKind, BonusInput, BonusKind, EpisodicConfig, PosteriorState, ProductStats, Psrl, Sizes, Ucbvi};
use nmrl::harness::{self, RunConfig};
use nmrl::office::{GridMap, OfficeEnv, N_ACTIONS};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Two cells with slip; entering the office cell pays 1 and ends the episode.
fn two_cell_env() -> OfficeEnv {
    let map: GridMap = "h: 0.8\nstart: 0 0\n.O\n".parse().unwrap();
    let rm: RewardMachine =
        "states: q0 acc\ninitial: q0\naccepting: acc\nalphabet: office\ntrans: q0 office acc 1\n".parse().unwrap();
    OfficeEnv::new(Arc::new(map), Arc::new(rm))
}

/// Backward induction written out directly from the visit counts.
fn naive_ucbvi(env: &OfficeEnv, stats: &ProductStats, kind: BonusKind, h_total: usize, episodes: u64) -> Vec<Vec<f64>> {
    let kernel = env.true_kernel();
    let n_x = env.n_states() * env.n_q();
    let log = (3.0 * n_x as f64 * N_ACTIONS as f64 * episodes as f64 / 0.1).ln();
    let rmax = env.machine().max_reward();
    let mut q = vec![vec![0.0; n_x * N_ACTIONS]; h_total];
    let mut v = vec![0.0; n_x];
    for h in (0..h_total).rev() {
        let hi = (h_total - h) as f64 * rmax;
        let mut v_new = vec![0.0; n_x];
        for x in 0..n_x {
            if stats.is_terminal(x) {
                continue;
            }
            for a in 0..N_ACTIONS {
                let n = stats.visits(x, a);
                let value = if n == 0 {
                    hi
                } else {
                    let (mut r, mut r2, mut pv, mut pv2) = (0.0, 0.0, 0.0, 0.0);
                    for y in 0..n_x {
                        let p = stats.count(x, a, y) as f64 / n as f64;
                        let reward = kernel.row(x, a).unwrap().iter().find(|e| e.0 == y).map_or(0.0, |e| e.2);
                        r += p * reward;
                        r2 += p * reward * reward;
                        pv += p * v[y];
                        pv2 += p * v[y] * v[y];
                    }
                    let b = bonus(
                        kind,
                        1.0,
                        BonusInput { n, log, span: h_total as f64 * rmax, var_next: pv2 - pv * pv, var_reward: r2 - r * r },
                    );
                    (r + pv + b).clamp(0.0, hi)
                };
                q[h][x * N_ACTIONS + a] = value;
                v_new[x] = f64::max(v_new[x], value);
            }
        }
        v = v_new;
    }
    q
}

#[test]
fn ucbvi_matches_naive_backward_induction() {
    for kind in [BonusKind::Hoeffding, BonusKind::Bernstein, BonusKind::SimplifiedBernstein] {
        let mut env = two_cell_env();
        let cfg = EpisodicConfig::default().with_horizon(5);
        let mut agent = Ucbvi::new(&env, kind, cfg).unwrap();
        train(&mut agent, &mut env, &mut RunRngs::new(1), 400, false);
        agent.replan();
        let reference = naive_ucbvi(&env, agent.stats(), kind, 5, agent.episodes());
        for (got, want) in agent.q_values().iter().zip(&reference) {
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() < 1e-9, "{kind:?}: {g} vs {w}");
            }
        }
    }
}

fn stats_with_counts() -> ProductStats {
    let mut stats = ProductStats::new(3, 1);
    for (y, c) in [(0, 4), (1, 1), (2, 0)] {
        for _ in 0..c {
            stats.record(0, 2, y, 0.5);
        }
    }
    stats
}

#[test]
fn posterior_concentrations_are_prior_plus_counts() {
    let stats = stats_with_counts();
    let post = PosteriorState::new(&stats);
    assert_eq!(post.concentration(0, 2, 0), 5.0);
    assert_eq!(post.concentration(0, 2, 1), 2.0);
    assert_eq!(post.concentration(0, 2, 2), 1.0);
    assert_eq!(post.concentration(1, 0, 1), 1.0);
}

#[test]
fn dirichlet_draws_match_their_moments() {
    let stats = stats_with_counts();
    let post = PosteriorState::new(&stats);
    let alpha = [5.0, 2.0, 1.0];
    let a0: f64 = alpha.iter().sum();
    let n = 40_000;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sum = [0.0; 3];
    let mut sq = [0.0; 3];
    let mut row = [0.0; 3];
    for _ in 0..n {
        post.sample_row(0, 2, &mut rng, &mut row);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for k in 0..3 {
            sum[k] += row[k];
            sq[k] += row[k] * row[k];
        }
    }
    for k in 0..3 {
        let mean = alpha[k] / a0;
        let var = alpha[k] * (a0 - alpha[k]) / (a0 * a0 * (a0 + 1.0));
        let m = sum[k] / n as f64;
        assert!((m - mean).abs() < 4.0 * (var / n as f64).sqrt(), "component {k}: mean {m} vs {mean}");
        let v = sq[k] / n as f64 - m * m;
        assert!((v - var).abs() < 0.05 * var, "component {k}: variance {v} vs {var}");
    }
}

#[test]
fn reference_memory_footprints() {
    let z = Sizes { states: 225, actions: 4, q: 8, horizon: 250 };
    assert_eq!(memory_footprint(AgentKind::QrMax, z).total(), 204_300);
    assert_eq!(memory_footprint(AgentKind::QrMaxRm, z).total(), 204_300);
    assert_eq!(memory_footprint(AgentKind::Psrl, z).total(), 50_625_000);
    assert_eq!(memory_footprint(AgentKind::Opsrl, z).total(), 50_625_000);
}

#[test]
fn posterior_storage_cap_is_enforced() {
    let env = two_cell_env();
    let cfg = EpisodicConfig { byte_cap: 10, ..EpisodicConfig::default() };
    assert!(Psrl::new(&env, cfg).is_err());
    assert!(Ucbvi::new(&env, BonusKind::Hoeffding, EpisodicConfig::default().with_horizon(0)).is_err());
}

#[test]
fn posterior_sampling_is_slower_than_qrmax_on_the_desk_map() {
    let base = RunConfig { eval_episodes: 2000, ..RunConfig::default() };
    let oracle = harness::oracle_for(&base).unwrap();
    let qrmax = harness::run_with_oracle(&base, &oracle).unwrap();
    let steps = qrmax.outcome.steps_to_convergence.expect("QR-MAX converges on the desk map");
    let psrl = RunConfig { agent: "psrl".into(), budget: steps, ..base };
    let res = harness::run_with_oracle(&psrl, &oracle).unwrap();
    assert_eq!(res.outcome.steps_to_convergence, None, "PSRL converged within QR-MAX's {steps} steps");
}
