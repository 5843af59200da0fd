#![allow(dead_code)]

use nmrl::mdp::{
    estimates_from_counts, flat_value_iteration, product_kernel, value_iteration, FactorizedCounts, FactorizedModel,
    QTable, ViStop,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A fully known factorized model with random sparse rows and joint rewards in [-0.5, 1].
pub fn random_model(seed: u64) -> FactorizedModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ns, nq, na) = (rng.random_range(1..=8), rng.random_range(1..=4), rng.random_range(1..=3));
    let mut counts = FactorizedCounts::new(ns, na, nq);
    for s in 0..ns {
        for a in 0..na {
            for _ in 0..rng.random_range(1..=20) {
                let r = if rng.random_bool(0.3) { rng.random_range(-0.5..0.5) } else { 0.0 };
                counts.record_env(s, a, rng.random_range(0..ns), r);
            }
        }
        for q in 0..nq {
            // Mostly deterministic machines, with some stochastic rows.
            let visits = if rng.random_bool(0.7) { 1 } else { rng.random_range(2..=6) };
            let fixed = rng.random_range(0..nq);
            for _ in 0..visits {
                let q2 = if visits == 1 { fixed } else { rng.random_range(0..nq) };
                let r = if rng.random_bool(0.5) { rng.random_range(0.0..0.5) } else { 0.0 };
                counts.record_aut(q, s, q2, r);
            }
        }
    }
    estimates_from_counts(&counts, 1, 1)
}

/// Largest per-entry gap between factorized and flat value iteration.
pub fn factorized_vs_flat(seed: u64) -> f64 {
    let model = random_model(seed);
    let (ns, nq, na) = (model.n_states(), model.n_q(), model.n_actions());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let terminal: Vec<bool> = (0..ns * nq).map(|_| rng.random_bool(0.1)).collect();
    let stop = ViStop::Iterations(400);
    let mut qt = QTable::optimistic(ns, nq, na, 0.9, 1.0);
    value_iteration(&mut qt, &model, stop, &terminal);
    let flat = product_kernel(&model).expect("fully known");
    let mut q = qt_init(ns, nq, na);
    flat_value_iteration(&mut q, &flat, 0.9, &terminal, stop);
    qt.values().iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn qt_init(ns: usize, nq: usize, na: usize) -> Vec<f64> {
    QTable::optimistic(ns, nq, na, 0.9, 1.0).values().to_vec()
}

/// Pooled chi-square statistic of `n` random-policy transitions against
/// `true_kernel`, over every `(x, a)` pair whose expected counts all reach 5.
/// Returns `(statistic, degrees of freedom, p-value, transitions pooled)`.
pub fn kernel_chi_square(map: &str, task: &str, n: usize, seed: u64) -> (f64, f64, f64, u64) {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::collections::HashMap;

    let mut env = nmrl::office::builtin_env(map, task).unwrap();
    let kernel = env.true_kernel();
    let (nq, na) = (env.n_q(), env.n_actions());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: HashMap<(usize, usize), HashMap<usize, u64>> = HashMap::new();
    let (mut s, mut q) = env.reset();
    for _ in 0..n {
        let a = rng.random_range(0..na);
        let st = env.step(a, &mut rng).unwrap();
        *counts.entry((s * nq + q, a)).or_default().entry(st.next_state * nq + st.next_q).or_default() += 1;
        (s, q) = if st.done { env.reset() } else { (st.next_state, st.next_q) };
    }
    let (mut stat, mut df, mut pooled) = (0.0, 0.0, 0);
    for ((x, a), seen) in &counts {
        let total: u64 = seen.values().sum();
        let row = kernel.row(*x, *a).unwrap();
        let mut expected: HashMap<usize, f64> = HashMap::new();
        for &(y, p, _) in row {
            *expected.entry(y).or_default() += p;
        }
        assert!(seen.keys().all(|y| expected.contains_key(y)), "transition outside the kernel support");
        if expected.len() < 2 || expected.values().any(|p| p * (total as f64) < 5.0) {
            continue;
        }
        for (y, p) in &expected {
            let e = p * total as f64;
            let o = *seen.get(y).unwrap_or(&0) as f64;
            stat += (o - e) * (o - e) / e;
        }
        df += (expected.len() - 1) as f64;
        pooled += total;
    }
    let p = 1.0 - ChiSquared::new(df).unwrap().cdf(stat);
    (stat, df, p, pooled)
}

/// Checks the optimism and trigger invariants on one QR-MAX run, returning a
/// description of the first violation.
pub fn check_invariants(map: &str, task: &str, counterfactual: bool, seed: u64, steps: u64) -> Result<(), String> {
    use nmrl::agents::{Learner, QrMax, QrMaxConfig, RunRngs};

    let mut env = nmrl::office::builtin_env(map, task).unwrap();
    let cfg = QrMaxConfig::for_machine(0.9, env.machine());
    let mut agent = if counterfactual { QrMax::with_machine(&env, cfg) } else { QrMax::new(&env, cfg) };
    let (ns, nq, na) = (env.n_states(), env.n_q(), env.n_actions());
    let mut rngs = RunRngs::new(seed);
    let mut frozen = agent.model().clone();
    let optimistic = agent.q_table().optimistic_value();
    for _ in 0..steps {
        let rec = agent.train_step(&mut env, &mut rngs);
        if !rec.model_updated {
            continue;
        }
        let model = agent.model();
        for s in 0..ns {
            for a in 0..na {
                if let Some(old) = frozen.env(s, a) {
                    if model.env(s, a) != Some(old) {
                        return Err(format!("env estimate ({s}, {a}) changed at step {}", rec.step));
                    }
                }
            }
            for q in 0..nq {
                if let Some(old) = frozen.aut(q, s) {
                    if model.aut(q, s) != Some(old) {
                        return Err(format!("automaton estimate ({q}, {s}) changed at step {}", rec.step));
                    }
                }
            }
        }
        frozen = model.clone();
        // The model only grows, so an entry ineligible now has never been eligible.
        for s in 0..ns {
            for q in 0..nq {
                if agent.core().is_terminal(s, q) {
                    continue;
                }
                for a in 0..na {
                    let v = agent.q_table().get(s, q, a);
                    if !model.eligible(s, q, a) && v != optimistic {
                        return Err(format!("ineligible ({s}, {q}, {a}) holds {v} at step {}", rec.step));
                    }
                }
            }
        }
    }
    let cap = (ns * na + ns * nq) as u64;
    if agent.vi_calls() > cap {
        return Err(format!("{} value-iteration calls exceed {cap}", agent.vi_calls()));
    }
    Ok(())
}

/// Ten desk-scale `(map, task, counterfactual, seed)` configurations drawn from a fixed seed.
pub fn invariant_runs() -> Vec<(&'static str, &'static str, bool, u64)> {
    const ENVS: [(&str, &str); 6] =
        [("map0_desk", "0"), ("map0_desk", "1"), ("map1", "1"), ("map1", "3"), ("map1", "4"), ("map1", "5")];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..10)
        .map(|_| {
            let (m, t) = ENVS[rng.random_range(0..ENVS.len())];
            (m, t, rng.random_bool(0.5), rng.random_range(0..1_000_000))
        })
        .collect()
}

pub const PAC_GRID: &str = include_str!("../data/pac_grid.csv");
pub const WELCH_PAIRS: &str = include_str!("../data/welch_pairs.csv");

/// Compares every column of the frozen PAC grid; returns the row count.
pub fn check_pac_grid() -> Result<usize, String> {
    use nmrl::pac::{self, PacParams};
    use std::collections::HashMap;

    let mut r = csv::Reader::from_reader(PAC_GRID.as_bytes());
    let headers = r.headers().unwrap().clone();
    let mut n = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let row: HashMap<&str, &str> = headers.iter().zip(rec.iter()).collect();
        let f = |k: &str| row[k].parse::<f64>().unwrap();
        let u = |k: &str| row[k].parse::<u64>().unwrap();
        let p = PacParams::new(f("epsilon"), f("delta"), f("gamma"), f("r_max")).sizes(u("states"), u("actions"), u("q"));
        let err = |what: &str| format!("{what} differs at {row:?}");
        let t = pac::thresholds(&p).map_err(|e| e.to_string())?;
        if t.m_e != u("m_e") || t.m_q != 1 || t.t != u("t") {
            return Err(err("thresholds"));
        }
        if pac::thresholds(&p.stochastic_rm()).unwrap().m_q != u("m_q_stochastic") {
            return Err(err("stochastic m_Q"));
        }
        if pac::sample_bound(&p, t.m_e, t.m_q).unwrap().to_string() != row["n_bound"] {
            return Err(err("sample bound"));
        }
        if pac::flat_sample_bound(&p, t.m_e).unwrap().to_string() != row["n_flat"] {
            return Err(err("flat sample bound"));
        }
        let b = p.buckets(u("buckets"));
        let bt = pac::bucket_thresholds(&b).unwrap();
        if (bt.t_et, bt.t_er, bt.t_qt, bt.t_qr) != (u("bucket_t_e"), u("bucket_t_e"), 1, 1) {
            return Err(err("bucket thresholds"));
        }
        let bs = pac::bucket_thresholds(&b.stochastic_rm()).unwrap();
        if bs.t_qt != u("bucket_t_q_stochastic") || bs.t_qr != bs.t_qt {
            return Err(err("stochastic bucket thresholds"));
        }
        if pac::bucket_common_threshold(&b).unwrap() != u("common") {
            return Err(err("common bucket threshold"));
        }
        n += 1;
    }
    Ok(n)
}

/// Sample pairs and reference p-values from the frozen Welch fixture.
pub fn welch_pairs() -> Vec<(Vec<f64>, Vec<f64>, f64)> {
    let parse = |cell: &str| cell.split(';').map(|v| v.parse().unwrap()).collect::<Vec<f64>>();
    let mut r = csv::Reader::from_reader(WELCH_PAIRS.as_bytes());
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (parse(&rec[0]), parse(&rec[1]), rec[2].parse().unwrap())
        })
        .collect()
}

/// Bucket-QR-MAX hashing fine enough that every map1 cell centre lands in
/// its own bucket, with zero jitter.
pub fn exact_cell_config(r_max: f64) -> nmrl::bucket::BucketConfig {
    let mut cfg = nmrl::bucket::BucketConfig::new(0.9, r_max);
    cfg.jitter = 0.0;
    cfg.functions = 16;
    cfg.bits = 32;
    cfg.vi = ViStop::Iterations(300);
    cfg
}

/// Runs discrete QR-MAX and exact-cell Bucket-QR-MAX side by side on map1
/// task 5 and reports the first disagreement.
pub fn bucket_trace_matches(steps: u64) -> Result<(), String> {
    use nmrl::agents::{train, Learner, QrMax, QrMaxConfig, RunRngs};
    use nmrl::bucket::{BucketQrMax, OfficeEncoder};
    use nmrl::harness::{evaluate, EvalSettings};
    use std::collections::{HashMap, HashSet};

    let env = nmrl::office::builtin_env("map1", "5").unwrap();
    let bcfg = exact_cell_config(env.machine().max_reward());
    let hasher = bcfg.hasher().unwrap();
    let enc = OfficeEncoder::new(env.map());
    let keys: HashSet<_> = (0..env.n_states())
        .map(|s| {
            let (r, c) = env.map().cell_of(s);
            hasher.hash(&enc.encode([c as f64 + 0.5, r as f64 + 0.5])).unwrap()
        })
        .collect();
    if keys.len() != env.n_states() {
        return Err(format!("{} keys for {} cells", keys.len(), env.n_states()));
    }
    let cfg = QrMaxConfig::for_machine(0.9, env.machine()).with_vi(ViStop::Iterations(300));
    let mut discrete = QrMax::new(&env, cfg);
    let mut bucket = BucketQrMax::new(&env, bcfg).unwrap();
    let a = train(&mut discrete, &mut env.clone(), &mut RunRngs::new(3), steps, true);
    let b = train(&mut bucket, &mut env.clone(), &mut RunRngs::new(3), steps, true);
    let mut cell_of_bucket = HashMap::new();
    for (x, y) in a.iter().zip(&b) {
        let s = *cell_of_bucket.entry(y.s).or_insert(x.s);
        if (s, x.q, x.a, x.r_a, x.done, x.model_updated) != (x.s, y.q, y.a, y.r_a, y.done, y.model_updated) {
            return Err(format!("traces diverge at step {}", x.step));
        }
    }
    if bucket.core().vi_calls() != discrete.vi_calls() {
        return Err("value-iteration call counts differ".into());
    }
    let eval = EvalSettings { episodes: 500, horizon: 150, seed: 4 };
    if evaluate(&discrete.policy(), &env, &eval).returns != evaluate(&bucket.policy(), &env, &eval).returns {
        return Err("greedy policies evaluate differently".into());
    }
    Ok(())
}

/// The continuous Office asset: map1 task 5 observed through jittered cell
/// centres, with hashing fine enough to keep cells apart.
pub fn canonical_continuous_config() -> nmrl::harness::RunConfig {
    nmrl::harness::RunConfig {
        map: "map1".into(),
        task: "5".into(),
        agent: "bucket-qrmax".into(),
        jitter: 0.005,
        hash_functions: 16,
        hash_bits: 32,
        vi_iterations: Some(300),
        ..nmrl::harness::RunConfig::default()
    }
}
