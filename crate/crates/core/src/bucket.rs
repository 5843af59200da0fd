//! Locality-sensitive discretisation of continuous observations and the
//! bucket variant of the factorized learner.
//!
//! Observations are hashed with `L` independent SimHash functions of `d_h`
//! sign bits each; every distinct `L`-tuple seen so far is a bucket, numbered
//! in order of discovery. The learner is the discrete one with cells replaced
//! by buckets and a known-gate that needs transition and reward counters on
//! both sides to reach their thresholds.

use std::collections::HashMap;
use std::io;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::agents::{Learner, Policy, QrCore, RunRngs, StepRecord};
use crate::baselines::AgentKind;
use crate::mdp::{ActionId, AutomatonStateId, CountRow, Estimate, FactorizedCounts, ViStop};
use crate::office::{GridMap, OfficeEnv, N_ACTIONS};
use crate::pac::BucketThresholds;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HashError {
    #[error("expected a {expected}-dimensional vector, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("bits per function must lie in 1..=64; got {0}")]
    Bits(usize),
    #[error("at least one hash function is required")]
    Functions,
}

/// `L` SimHash functions over `R^d`, each packing `d_h` sign bits of
/// standard-Gaussian projections into one integer.
#[derive(Debug, Clone, PartialEq)]
pub struct SimHasher {
    dim: usize,
    l: usize,
    d_h: usize,
    seed: u64,
    /// Row-major `(L * d_h) x dim`.
    proj: Vec<f64>,
}

pub type BucketKey = Box<[u64]>;

impl SimHasher {
    pub fn new(dim: usize, l: usize, d_h: usize, seed: u64) -> Result<Self, HashError> {
        if l == 0 {
            return Err(HashError::Functions);
        }
        if d_h == 0 || d_h > 64 {
            return Err(HashError::Bits(d_h));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let proj = (0..l * d_h * dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        Ok(SimHasher { dim, l, d_h, seed, proj })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn functions(&self) -> usize {
        self.l
    }

    pub fn bits(&self) -> usize {
        self.d_h
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Bit `j` of function `i` is set when the projection on row `i * d_h + j`
    /// is non-negative.
    pub fn hash(&self, v: &[f64]) -> Result<BucketKey, HashError> {
        if v.len() != self.dim {
            return Err(HashError::Dimension {
                expected: self.dim,
                got: v.len(),
            });
        }
        let mut key = vec![0u64; self.l];
        for (i, k) in key.iter_mut().enumerate() {
            for j in 0..self.d_h {
                let row = &self.proj[(i * self.d_h + j) * self.dim..][..self.dim];
                let dot: f64 = row.iter().zip(v).map(|(w, x)| w * x).sum();
                if dot >= 0.0 {
                    *k |= 1 << j;
                }
            }
        }
        Ok(key.into_boxed_slice())
    }
}

/// Maps a continuous Office observation to homogeneous coordinates centred on
/// the map, so that sign projections cut the floor by random lines rather than
/// by rays through a corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfficeEncoder {
    cx: f64,
    cy: f64,
    scale: f64,
}

impl OfficeEncoder {
    pub const DIM: usize = 3;

    pub fn new(map: &GridMap) -> Self {
        let (w, h) = (map.width as f64, map.height as f64);
        OfficeEncoder {
            cx: w / 2.0,
            cy: h / 2.0,
            scale: w.max(h) / 2.0,
        }
    }

    pub fn encode(&self, obs: [f64; 2]) -> [f64; 3] {
        [(obs[0] - self.cx) / self.scale, (obs[1] - self.cy) / self.scale, 1.0]
    }
}

/// Insertion-ordered injective map from keys to dense indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BucketRegistry {
    index: HashMap<BucketKey, usize>,
    keys: Vec<BucketKey>,
    visits: Vec<u64>,
}

impl BucketRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Index of `key`, registering it if new; the flag reports registration.
    pub fn bucketize(&mut self, key: BucketKey) -> (usize, bool) {
        if let Some(&i) = self.index.get(&key) {
            self.visits[i] += 1;
            return (i, false);
        }
        let i = self.keys.len();
        self.index.insert(key.clone(), i);
        self.keys.push(key);
        self.visits.push(1);
        (i, true)
    }

    pub fn get(&self, key: &[u64]) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn key(&self, i: usize) -> &[u64] {
        &self.keys[i]
    }

    pub fn visits(&self, i: usize) -> u64 {
        self.visits[i]
    }

    /// Writes `index,key,visits` rows; key components are `;`-separated.
    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "key", "visits"])?;
        for (i, k) in self.keys.iter().enumerate() {
            let key: Vec<String> = k.iter().map(u64::to_string).collect();
            out.write_record([i.to_string(), key.join(";"), self.visits[i].to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Transition and reward counters for `(b, a)` and `(q, b')`. Transition
/// counts and their successor tallies live in `tau`; reward counts and sums
/// are kept apart.
#[derive(Debug, Clone)]
pub struct BucketCounters {
    pub tau: FactorizedCounts,
    n_er: Vec<u64>,
    r_e: Vec<f64>,
    n_qr: Vec<u64>,
    r_q: Vec<f64>,
}

impl BucketCounters {
    fn new(n_q: usize) -> Self {
        BucketCounters {
            tau: FactorizedCounts::new(0, N_ACTIONS, n_q),
            n_er: Vec::new(),
            r_e: Vec::new(),
            n_qr: Vec::new(),
            r_q: Vec::new(),
        }
    }

    fn grow(&mut self, n_buckets: usize) {
        let n_q = self.tau.n_q();
        self.tau.grow_states(n_buckets);
        self.n_er.resize(n_buckets * N_ACTIONS, 0);
        self.r_e.resize(n_buckets * N_ACTIONS, 0.0);
        self.n_qr.resize(n_buckets * n_q, 0);
        self.r_q.resize(n_buckets * n_q, 0.0);
    }

    pub fn n_et(&self, b: usize, a: ActionId) -> u64 {
        self.tau.n_env(b, a)
    }

    pub fn n_er(&self, b: usize, a: ActionId) -> u64 {
        self.n_er[b * N_ACTIONS + a]
    }

    pub fn n_qt(&self, q: AutomatonStateId, b: usize) -> u64 {
        self.tau.n_aut(q, b)
    }

    pub fn n_qr(&self, q: AutomatonStateId, b: usize) -> u64 {
        self.n_qr[b * self.tau.n_q() + q]
    }

    pub fn reward_env(&self, b: usize, a: ActionId) -> f64 {
        self.r_e[b * N_ACTIONS + a]
    }

    pub fn reward_aut(&self, q: AutomatonStateId, b: usize) -> f64 {
        self.r_q[b * self.tau.n_q() + q]
    }

    pub fn env_known(&self, b: usize, a: ActionId, t: &BucketThresholds) -> bool {
        self.n_et(b, a) >= t.t_et && self.n_er(b, a) >= t.t_er
    }

    pub fn aut_known(&self, q: AutomatonStateId, b: usize, t: &BucketThresholds) -> bool {
        self.n_qt(q, b) >= t.t_qt && self.n_qr(q, b) >= t.t_qr
    }
}

fn estimate(row: &CountRow, r_sum: f64, n_r: u64) -> Estimate {
    let mut est = Estimate::from_row(row);
    est.reward = r_sum / n_r as f64;
    est
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BucketConfig {
    pub gamma: f64,
    pub r_max: f64,
    pub thresholds: BucketThresholds,
    pub vi: ViStop,
    /// Half-width of the uniform observation jitter, in cell units.
    pub jitter: f64,
    pub functions: usize,
    pub bits: usize,
    pub hash_seed: u64,
}

impl BucketConfig {
    /// `L = 4`, `d_h = 8`, jitter 0.005, thresholds 30 on the environment side
    /// and 1 on the automaton side, value iteration to `1e-6`.
    pub fn new(gamma: f64, r_max: f64) -> Self {
        BucketConfig {
            gamma,
            r_max,
            thresholds: BucketThresholds {
                t_et: 30,
                t_er: 30,
                t_qt: 1,
                t_qr: 1,
            },
            vi: ViStop::Tolerance {
                epsilon: 1e-6,
                max_iter: 100_000,
            },
            jitter: 0.005,
            functions: 4,
            bits: 8,
            hash_seed: 0,
        }
    }

    pub fn hasher(&self) -> Result<SimHasher, HashError> {
        SimHasher::new(OfficeEncoder::DIM, self.functions, self.bits, self.hash_seed)
    }
}

/// Frozen greedy behaviour over the buckets discovered during training.
/// Observations in unknown buckets take action 0, as an all-optimistic row would.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketPolicy {
    hasher: Arc<SimHasher>,
    encoder: OfficeEncoder,
    index: Arc<HashMap<BucketKey, usize>>,
    n_q: usize,
    actions: Vec<ActionId>,
    jitter: f64,
}

impl BucketPolicy {
    pub fn act<R: rand::Rng + ?Sized>(&self, env: &OfficeEnv, obs_rng: &mut R) -> ActionId {
        let (_, q) = env.state();
        let obs = self.encoder.encode(env.continuous_observe(self.jitter, obs_rng));
        let key = self.hasher.hash(&obs).expect("encoder matches hasher");
        match self.index.get(&key) {
            Some(&b) => self.actions[b * self.n_q + q],
            None => 0,
        }
    }

    pub fn n_buckets(&self) -> usize {
        self.actions.len() / self.n_q
    }
}

#[derive(Debug, Clone)]
pub struct BucketQrMax {
    cfg: BucketConfig,
    hasher: Arc<SimHasher>,
    encoder: OfficeEncoder,
    registry: BucketRegistry,
    counters: BucketCounters,
    core: QrCore,
    current: Option<(usize, AutomatonStateId)>,
    steps: u64,
    episodes: u64,
}

impl BucketQrMax {
    pub fn new(env: &OfficeEnv, cfg: BucketConfig) -> Result<Self, HashError> {
        let hasher = cfg.hasher()?;
        Ok(Self::with_hasher(env, cfg, Arc::new(hasher)))
    }

    pub fn with_hasher(env: &OfficeEnv, cfg: BucketConfig, hasher: Arc<SimHasher>) -> Self {
        let n_q = env.n_q();
        BucketQrMax {
            cfg,
            hasher,
            encoder: OfficeEncoder::new(env.map()),
            registry: BucketRegistry::new(),
            counters: BucketCounters::new(n_q),
            core: QrCore::new(0, n_q, N_ACTIONS, cfg.gamma, cfg.r_max, cfg.vi),
            current: None,
            steps: 0,
            episodes: 0,
        }
    }

    pub fn config(&self) -> &BucketConfig {
        &self.cfg
    }

    pub fn registry(&self) -> &BucketRegistry {
        &self.registry
    }

    pub fn counters(&self) -> &BucketCounters {
        &self.counters
    }

    pub fn core(&self) -> &QrCore {
        &self.core
    }

    pub fn hasher(&self) -> &Arc<SimHasher> {
        &self.hasher
    }

    fn observe(&mut self, env: &OfficeEnv, rngs: &mut RunRngs) -> usize {
        let obs = self.encoder.encode(env.continuous_observe(self.cfg.jitter, &mut rngs.obs));
        let key = self.hasher.hash(&obs).expect("encoder matches hasher");
        let (b, fresh) = self.registry.bucketize(key);
        if fresh {
            self.core.grow_states(self.registry.len());
            self.counters.grow(self.registry.len());
        }
        b
    }

    fn record_env(&mut self, b: usize, a: ActionId, b2: usize, r: f64) -> bool {
        let t = self.cfg.thresholds;
        if self.counters.env_known(b, a, &t) {
            return false;
        }
        if self.counters.n_et(b, a) < t.t_et {
            self.counters.tau.record_env(b, a, b2, r);
        }
        let i = b * N_ACTIONS + a;
        if self.counters.n_er[i] < t.t_er {
            self.counters.n_er[i] += 1;
            self.counters.r_e[i] += r;
        }
        if self.counters.env_known(b, a, &t) {
            let est = estimate(self.counters.tau.env_row(b, a), self.counters.r_e[i], self.counters.n_er[i]);
            self.core.model.set_env(b, a, est);
            return true;
        }
        false
    }

    fn record_aut(&mut self, q: AutomatonStateId, b2: usize, q2: AutomatonStateId, r: f64) -> bool {
        let t = self.cfg.thresholds;
        if self.counters.aut_known(q, b2, &t) {
            return false;
        }
        if self.counters.n_qt(q, b2) < t.t_qt {
            self.counters.tau.record_aut(q, b2, q2, r);
        }
        let i = b2 * self.counters.tau.n_q() + q;
        if self.counters.n_qr[i] < t.t_qr {
            self.counters.n_qr[i] += 1;
            self.counters.r_q[i] += r;
        }
        if self.counters.aut_known(q, b2, &t) {
            let est = estimate(self.counters.tau.aut_row(q, b2), self.counters.r_q[i], self.counters.n_qr[i]);
            self.core.model.set_aut(q, b2, est);
            return true;
        }
        false
    }
}

impl Learner for BucketQrMax {
    fn kind(&self) -> AgentKind {
        AgentKind::BucketQrMax
    }

    fn train_step(&mut self, env: &mut OfficeEnv, rngs: &mut RunRngs) -> StepRecord {
        let (b, q) = match self.current {
            Some(x) => x,
            None => {
                self.episodes += 1;
                let (_, q0) = env.reset();
                (self.observe(env, rngs), q0)
            }
        };
        let a = self.core.act(b, q);
        let st = env.step(a, &mut rngs.env).expect("episode is live");
        let b2 = self.observe(env, rngs);
        let mut do_vi = self.record_env(b, a, b2, st.r_e);
        do_vi |= self.record_aut(q, b2, st.next_q, st.r_a);
        if st.terminal() {
            self.core.mark_terminal(b2, st.next_q);
        }
        if do_vi {
            self.core.plan();
        }
        self.steps += 1;
        self.current = if st.done { None } else { Some((b2, st.next_q)) };
        StepRecord {
            step: self.steps,
            s: b,
            q,
            a,
            next_s: b2,
            next_q: st.next_q,
            r_e: st.r_e,
            r_a: st.r_a,
            done: st.done,
            truncated: st.truncated,
            model_updated: do_vi,
        }
    }

    fn policy(&self) -> Policy {
        Policy::Bucketed(BucketPolicy {
            hasher: self.hasher.clone(),
            encoder: self.encoder,
            index: Arc::new(self.registry.index.clone()),
            n_q: self.core.qt.n_q(),
            actions: crate::mdp::greedy_policy(&self.core.qt),
            jitter: self.cfg.jitter,
        })
    }

    fn steps(&self) -> u64 {
        self.steps
    }

    fn episodes(&self) -> u64 {
        self.episodes
    }
}
